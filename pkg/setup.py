"""Build script for the compiled chain kernel.

The extension is optional at runtime: if it is absent the package falls
back to the pure-NumPy implementation in ``sepfam._core_py``.
"""

from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffast-math is deliberately avoided: the kernel relies on IEEE inf/nan
# semantics to reject out-of-domain proposals.
extensions = [
    Extension(
        "sepfam._core",
        sources=["src/sepfam/_core.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
)
