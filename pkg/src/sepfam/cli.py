"""Command line interface.

``sepfam analyze``  : which family fits a positive-valued dataset?
``sepfam simulate`` : run a Monte Carlo scenario from a JSON config.

Exit codes: 0 success, 2 input problems (unreadable/invalid data or
config), 3 numerical/degenerate-data failures, 4 convergence failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from ._backend import backend_name
from .coxtest import cox_both
from .errors import (
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    InputError,
    NoRootError,
    SepfamError,
)
from .families import CommonParams, FamilyId, from_common
from .fbst import FbstConfig, evidence_table
from .mixture import MixtureSpec, MixtureState
from .survival import empirical_survival, export_curves_csv, model_survival

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_CONVERGENCE = 4

SEED_ENV_VAR = "SEPFAM_SEED"

_MODEL_SETS = {
    "lgw": (FamilyId.LOGNORMAL, FamilyId.GAMMA, FamilyId.WEIBULL),
    "ln-w": (FamilyId.LOGNORMAL, FamilyId.WEIBULL),
    "ln-g": (FamilyId.LOGNORMAL, FamilyId.GAMMA),
    "g-w": (FamilyId.GAMMA, FamilyId.WEIBULL),
}


def read_dataset(path) -> np.ndarray:
    """One positive value per line; '#' comments; optional single header line."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InputError(f"cannot read dataset: {exc}") from exc
    values = []
    seen_header = False
    for idx, line in enumerate(lines):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        text = text.rstrip(",")
        try:
            values.append(float(text))
        except ValueError:
            if not values and not seen_header:
                seen_header = True  # single-column CSV header
                continue
            raise InputError(f"line {idx + 1} is not a number: {text!r}") from None
    if not values:
        raise InputError("dataset contains no values")
    arr = np.asarray(values, dtype=float)
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise InputError("dataset values must be strictly positive and finite")
    return arr


def _quantile_summary(draws: np.ndarray) -> dict:
    return {
        "mean": float(np.mean(draws)),
        "sd": float(np.std(draws)),
        "q2.5": float(np.percentile(draws, 2.5)),
        "median": float(np.percentile(draws, 50.0)),
        "q97.5": float(np.percentile(draws, 97.5)),
    }


def recommend(components, evidence_results) -> str:
    """Conjunction rule over the evidence table; 'inconclusive' when no winner.

    A family wins when its exclusion hypothesis has strictly the lowest
    evidence and its saturation hypothesis strictly the highest.
    """
    e_zero = {}
    e_one = {}
    for res in evidence_results:
        for fam in components:
            if res.hypothesis == f"p[{fam.value}]=0":
                e_zero[fam.value] = res.e_value
            elif res.hypothesis == f"p[{fam.value}]=1":
                e_one[fam.value] = res.e_value
    for fam in components:
        others = [f.value for f in components if f is not fam]
        if all(e_zero[fam.value] < e_zero[o] for o in others) and all(
            e_one[fam.value] > e_one[o] for o in others
        ):
            return fam.value
    return "inconclusive"


def analyze(
    data_path,
    models: str = "lgw",
    fbst: FbstConfig | None = None,
    out_path=None,
    curves_path=None,
) -> dict:
    """Run the full analysis and return the report dictionary."""
    if models not in _MODEL_SETS:
        raise InputError(f"unknown model set {models!r}; choose from {sorted(_MODEL_SETS)}")
    data = read_dataset(data_path)
    if float(np.var(data)) == 0.0:
        raise DegenerateDataError("dataset has zero variance")
    config = fbst or FbstConfig()
    components = _MODEL_SETS[models]
    spec = MixtureSpec(components=components)

    results, chain = evidence_table(spec, data, config)
    weights = chain.weights
    posterior_summary = {
        "mu": _quantile_summary(chain.mu),
        "sigma2": _quantile_summary(chain.sigma2),
    }
    for k, fam in enumerate(components):
        posterior_summary[f"p_{fam.value}"] = _quantile_summary(weights[:, k])

    report = {
        "dataset": {
            "path": str(data_path),
            "n": int(data.size),
            "mean": float(np.mean(data)),
            "variance": float(np.var(data)),
        },
        "model": {
            "components": [fam.value for fam in components],
            "fbst": dataclasses.asdict(config),
        },
        "evidence": [res.to_dict() for res in results],
        "cox": [],
        "posterior_summary": posterior_summary,
        "recommendation": recommend(components, results),
        "backend": backend_name(),
        "package_version": __version__,
    }
    if models == "ln-w":
        report["cox"] = [res.to_dict() for res in cox_both(data)]

    if curves_path is not None:
        _export_curves(curves_path, data, spec, chain)
    if out_path is not None:
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


def _export_curves(path, data, spec, chain) -> None:
    lo = 0.5 * float(np.min(data))
    hi = 1.25 * float(np.max(data))
    grid = np.linspace(lo, hi, 200)
    mean_state = MixtureState(
        CommonParams(float(chain.mu.mean()), float(chain.sigma2.mean())),
        chain.weights.mean(axis=0),
    )
    curves = [empirical_survival(data, grid)]
    curves.append(model_survival((spec, mean_state), grid, label="mixture"))
    for fam in spec.components:
        params = from_common(fam, mean_state.cp)
        curves.append(model_survival((fam, params), grid))
    export_curves_csv(path, curves)


def _print_report(report: dict) -> None:
    ds = report["dataset"]
    print(f"dataset: {ds['path']}  n={ds['n']}  mean={ds['mean']:.6g}  variance={ds['variance']:.6g}")
    print(f"model components: {', '.join(report['model']['components'])}")
    print()
    print(f"{'hypothesis':<16}{'e-value':>10}{'ev-against':>12}{'p-value':>10}"
          f"{'threshold':>11}{'verdict':>9}")
    for row in report["evidence"]:
        print(
            f"{row['hypothesis']:<16}{row['e_value']:>10.4f}{row['ev_against']:>12.4f}"
            f"{row['p_value']:>10.4f}{row['threshold_c']:>11.4f}{row['verdict']:>9}"
        )
    if report["cox"]:
        print()
        print(f"{'cox direction':<18}{'deviate':>10}{'p-value':>10}")
        for row in report["cox"]:
            print(f"{row['direction']:<18}{row['deviate']:>10.4f}{row['p_value']:>10.4f}")
    print()
    print(f"{'parameter':<14}{'mean':>12}{'sd':>12}{'2.5%':>12}{'median':>12}{'97.5%':>12}")
    for name, s in report["posterior_summary"].items():
        print(
            f"{name:<14}{s['mean']:>12.4f}{s['sd']:>12.4f}{s['q2.5']:>12.4f}"
            f"{s['median']:>12.4f}{s['q97.5']:>12.4f}"
        )
    print()
    print(f"recommended family: {report['recommendation']}")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR, "0")
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sepfam", description=__doc__)
    parser.add_argument("--version", action="version", version=f"sepfam {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="evidence table and recommendation for a dataset")
    pa.add_argument("--data", required=True, help="path to the dataset file")
    pa.add_argument("--models", default="lgw", choices=sorted(_MODEL_SETS),
                    help="candidate set (default lgw)")
    pa.add_argument("--seed", type=int, default=None,
                    help=f"RNG seed (default: ${SEED_ENV_VAR} or 0)")
    pa.add_argument("--chain", type=int, default=None, help="chain length override")
    pa.add_argument("--burn", type=int, default=None, help="burn-in override")
    pa.add_argument("--alpha", type=float, default=0.05, help="significance level")
    pa.add_argument("--out", default=None, help="write the JSON report here")
    pa.add_argument("--curves", default=None, help="write survival curves CSV here")

    ps = sub.add_parser("simulate", help="run a Monte Carlo scenario")
    ps.add_argument("--config", required=True, help="JSON scenario file")
    ps.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "analyze":
            seed = args.seed if args.seed is not None else _default_seed()
            overrides = {"seed": seed, "significance": args.alpha}
            if args.chain is not None:
                overrides["chain_length"] = args.chain
            if args.burn is not None:
                overrides["burn_in"] = args.burn
            config = dataclasses.replace(FbstConfig(), **overrides)
            report = analyze(
                args.data,
                models=args.models,
                fbst=config,
                out_path=args.out,
                curves_path=args.curves,
            )
            _print_report(report)
        else:
            from .experiments import load_scenario, run_scenario

            scenario = load_scenario(args.config)
            result = run_scenario(scenario, out_dir=args.out)
            print(result.to_csv(), end="")
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DegenerateDataError, NoRootError, DomainError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except SepfamError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
