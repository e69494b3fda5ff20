"""Monte Carlo harness for the two simulation protocols.

Pairwise protocol: generate data from one of lognormal/Weibull, test
both "this family generated the data" hypotheses with the evidence
procedure on the 2-component mixture and with both directions of the
classical test, and tabulate acceptance/rejection rates per sample size.

Three-family protocol: generate data from a family matched to a common
(mean, variance), fit the 3-component mixture, compute all six weight
hypotheses, and score the conjunction decision rule; report mean
posterior estimates and the fraction of correct decisions.

Every replicate derives its RNG streams from (seed, sample size,
replicate index), so results are independent of execution order and of
the worker count, and per-replicate records are persisted as JSON lines
from which the rate tables can be rebuilt exactly.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__ as _pkg_version
from ._backend import backend_name
from .coxtest import cox_both
from .errors import InputError, SepfamError
from .families import CommonParams, FamilyId, from_common, make_params, sample
from .fbst import FbstConfig, evidence_table, weight_is_one, weight_is_zero
from .mixture import MixtureSpec

logger = logging.getLogger(__name__)

_STREAM_DATA = 10
_STREAM_FBST = 11


class SimulationMode(enum.Enum):
    PAIRWISE_LN_W = "pairwise-ln-w"
    LGW3 = "lgw3"


_DEFAULT_NATIVE = {
    FamilyId.LOGNORMAL: {"alpha1": 0.0, "alpha2": 1.0},
    FamilyId.WEIBULL: {"beta1": 1.0, "beta2": 1.0},
}


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulation scenario.

    For LGW3 the generator params derive from ``common_params`` via the
    mean/variance inversion; for the pairwise mode native
    ``generator_params`` are used directly (defaults: LN(0,1), W(1,1)).
    """

    mode: SimulationMode
    generator: FamilyId
    sample_sizes: tuple[int, ...]
    replicates: int
    seed: int = 0
    generator_params: dict = field(default_factory=dict)
    common_params: tuple[float, float] = (20.0, 50.0)
    fbst: FbstConfig = field(default_factory=FbstConfig)
    workers: int = 1

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise InputError("replicates must be >= 1")
        if not self.sample_sizes or any(n < 5 for n in self.sample_sizes):
            raise InputError("sample sizes must all be >= 5")
        if self.seed < 0:
            raise InputError("seed must be nonnegative")
        if self.workers < 1:
            raise InputError("workers must be >= 1")
        if self.mode is SimulationMode.PAIRWISE_LN_W and self.generator not in (
            FamilyId.LOGNORMAL,
            FamilyId.WEIBULL,
        ):
            raise InputError("pairwise mode generates from lognormal or weibull only")

    def native_params(self):
        if self.mode is SimulationMode.LGW3:
            cp = CommonParams(*self.common_params)
            return from_common(self.generator, cp)
        fields = self.generator_params or _DEFAULT_NATIVE[self.generator]
        return make_params(self.generator, **fields)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "generator": self.generator.value,
            "sample_sizes": list(self.sample_sizes),
            "replicates": self.replicates,
            "seed": self.seed,
            "generator_params": dataclasses.asdict(self.native_params()),
            "common_params": list(self.common_params),
            "fbst": dataclasses.asdict(self.fbst),
            "workers": self.workers,
        }


def load_scenario(path) -> ScenarioConfig:
    """Parse a JSON scenario file; see README for the schema."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"scenario file is not valid JSON: {exc}") from exc
    return scenario_from_dict(raw)


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise InputError("scenario must be a JSON object")
    known = {
        "mode", "generator", "sample_sizes", "replicates", "seed",
        "generator_params", "common_params", "fbst", "workers",
    }
    unknown = set(raw) - known
    if unknown:
        raise InputError(f"unknown scenario keys: {sorted(unknown)}")
    try:
        mode = SimulationMode(raw.get("mode", "pairwise-ln-w"))
        generator = FamilyId(raw.get("generator", "weibull"))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    fbst_raw = raw.get("fbst", {})
    if not isinstance(fbst_raw, dict):
        raise InputError("fbst must be an object of FbstConfig overrides")
    try:
        fbst = FbstConfig(**fbst_raw)
    except TypeError as exc:
        raise InputError(f"bad fbst overrides: {exc}") from exc
    try:
        return ScenarioConfig(
            mode=mode,
            generator=generator,
            sample_sizes=tuple(int(n) for n in raw.get("sample_sizes", [])),
            replicates=int(raw.get("replicates", 1)),
            seed=int(raw.get("seed", 0)),
            generator_params=dict(raw.get("generator_params", {})),
            common_params=tuple(raw.get("common_params", (20.0, 50.0))),
            fbst=fbst,
            workers=int(raw.get("workers", 1)),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad scenario: {exc}") from exc


def _replicate_data(config: ScenarioConfig, n: int, rep: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence((config.seed, _STREAM_DATA, n, rep)))
    return sample(config.generator, config.native_params(), rng, size=n)


def _replicate_fbst_config(config: ScenarioConfig, n: int, rep: int) -> FbstConfig:
    child = int(np.random.SeedSequence((config.seed, _STREAM_FBST, n, rep)).generate_state(1)[0])
    return dataclasses.replace(config.fbst, seed=child)


# --- pairwise protocol --------------------------------------------------


def _pairwise_replicate(config: ScenarioConfig, n: int, rep: int) -> dict:
    record = {"n": n, "replicate": rep, "generator": config.generator.value, "error": None}
    try:
        data = _replicate_data(config, n, rep)
        spec = MixtureSpec(components=(FamilyId.LOGNORMAL, FamilyId.WEIBULL))
        fbst_cfg = _replicate_fbst_config(config, n, rep)
        results, _ = evidence_table(
            spec, data, fbst_cfg, hypotheses=[weight_is_one(0), weight_is_one(1)]
        )
        cox_ln, cox_wb = cox_both(data)
        record["fbst"] = {
            "lognormal": {
                "ev_against": results[0].ev_against,
                "reject": results[0].verdict.value == "reject",
            },
            "weibull": {
                "ev_against": results[1].ev_against,
                "reject": results[1].verdict.value == "reject",
            },
        }
        record["cox"] = {
            "lognormal": {
                "deviate": cox_ln.deviate,
                "reject": cox_ln.p_value < config.fbst.significance,
            },
            "weibull": {
                "deviate": cox_wb.deviate,
                "reject": cox_wb.p_value < config.fbst.significance,
            },
        }
    except SepfamError as exc:
        record["error"] = f"{type(exc).__name__}: {exc}"
    return record


@dataclass(frozen=True)
class RateCell:
    method: str
    hypothesis: str
    n: int
    replicates: int
    failures: int
    rejection_rate: float
    acceptance_rate: float
    standard_error: float


@dataclass(frozen=True)
class RateTable:
    generator: str
    cells: tuple[RateCell, ...]

    def cell(self, method: str, hypothesis: str, n: int) -> RateCell:
        for c in self.cells:
            if (c.method, c.hypothesis, c.n) == (method, hypothesis, n):
                return c
        raise KeyError((method, hypothesis, n))

    def to_dict(self) -> dict:
        return {
            "generator": self.generator,
            "cells": [dataclasses.asdict(c) for c in self.cells],
        }

    def to_csv(self) -> str:
        lines = ["method,hypothesis,n,replicates,failures,rejection_rate,acceptance_rate,standard_error"]
        for c in self.cells:
            lines.append(
                f"{c.method},{c.hypothesis},{c.n},{c.replicates},{c.failures},"
                f"{c.rejection_rate!r},{c.acceptance_rate!r},{c.standard_error!r}"
            )
        return "\n".join(lines) + "\n"


def pairwise_rates_from_records(generator: str, records: list[dict]) -> RateTable:
    """Rebuild the rate table from per-replicate records (exact)."""
    sizes = sorted({r["n"] for r in records})
    cells = []
    for n in sizes:
        rows = [r for r in records if r["n"] == n]
        ok = [r for r in rows if r["error"] is None]
        failures = len(rows) - len(ok)
        for method in ("fbst", "cox"):
            for hyp in ("lognormal", "weibull"):
                rejections = sum(1 for r in ok if r[method][hyp]["reject"])
                count = len(ok)
                rate = rejections / count if count else math.nan
                se = math.sqrt(rate * (1.0 - rate) / count) if count else math.nan
                cells.append(
                    RateCell(
                        method=method,
                        hypothesis=hyp,
                        n=n,
                        replicates=count,
                        failures=failures,
                        rejection_rate=rate,
                        acceptance_rate=1.0 - rate if count else math.nan,
                        standard_error=se,
                    )
                )
    return RateTable(generator=generator, cells=tuple(cells))


def _run_replicates(config: ScenarioConfig, worker) -> list[dict]:
    tasks = [(n, rep) for n in config.sample_sizes for rep in range(config.replicates)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(worker, [config] * len(tasks), *zip(*tasks)))
    else:
        records = []
        for i, (n, rep) in enumerate(tasks):
            records.append(worker(config, n, rep))
            if (i + 1) % 10 == 0 or i + 1 == len(tasks):
                logger.info("completed %d/%d replicates", i + 1, len(tasks))
    records.sort(key=lambda r: (r["n"], r["replicate"]))
    return records


def _write_outputs(out_dir, config, records, table_dict, table_csv, stem: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "records.jsonl"), "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    meta = {
        "scenario": config.to_dict(),
        "package_version": _pkg_version,
        "backend": backend_name(),
    }
    with open(os.path.join(out_dir, "metadata.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    with open(os.path.join(out_dir, f"{stem}.json"), "w", encoding="utf-8") as fh:
        json.dump(table_dict, fh, indent=2, sort_keys=True)
    with open(os.path.join(out_dir, f"{stem}.csv"), "w", encoding="utf-8") as fh:
        fh.write(table_csv)


def run_pairwise(config: ScenarioConfig, out_dir=None) -> RateTable:
    """Pairwise study; returns (and optionally persists) the rate table."""
    if config.mode is not SimulationMode.PAIRWISE_LN_W:
        raise InputError("run_pairwise requires mode pairwise-ln-w")
    records = _run_replicates(config, _pairwise_replicate)
    table = pairwise_rates_from_records(config.generator.value, records)
    if out_dir is not None:
        _write_outputs(out_dir, config, records, table.to_dict(), table.to_csv(), "rate_table")
    return table


# --- three-family protocol ------------------------------------------------


_LGW_COMPONENTS = (FamilyId.LOGNORMAL, FamilyId.GAMMA, FamilyId.WEIBULL)


def _lgw_replicate(config: ScenarioConfig, n: int, rep: int) -> dict:
    record = {"n": n, "replicate": rep, "generator": config.generator.value, "error": None}
    try:
        data = _replicate_data(config, n, rep)
        spec = MixtureSpec(components=_LGW_COMPONENTS)
        fbst_cfg = _replicate_fbst_config(config, n, rep)
        hyps = [weight_is_zero(k) for k in range(3)] + [weight_is_one(k) for k in range(3)]
        results, chain = evidence_table(spec, data, fbst_cfg, hypotheses=hyps)
        e_zero = {fam.value: results[k].e_value for k, fam in enumerate(_LGW_COMPONENTS)}
        e_one = {fam.value: results[3 + k].e_value for k, fam in enumerate(_LGW_COMPONENTS)}
        true = config.generator.value
        others = [f.value for f in _LGW_COMPONENTS if f.value != true]
        correct = all(e_zero[true] < e_zero[o] for o in others) and all(
            e_one[true] > e_one[o] for o in others
        )
        mean_weights = chain.weights.mean(axis=0)
        record["evidence"] = {"weight_is_zero": e_zero, "weight_is_one": e_one}
        record["correct"] = bool(correct)
        record["estimates"] = {
            "mu": float(chain.mu.mean()),
            "sigma2": float(chain.sigma2.mean()),
            "weights": [float(x) for x in mean_weights],
        }
    except SepfamError as exc:
        record["error"] = f"{type(exc).__name__}: {exc}"
    return record


@dataclass(frozen=True)
class LgwRow:
    n: int
    replicates: int
    failures: int
    mean_mu: float
    mean_sigma2: float
    mean_weights: tuple[float, float, float]
    pct_correct: float
    standard_error: float


@dataclass(frozen=True)
class LgwSummary:
    generator: str
    rows: tuple[LgwRow, ...]

    def row(self, n: int) -> LgwRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)

    def to_dict(self) -> dict:
        return {
            "generator": self.generator,
            "rows": [dataclasses.asdict(r) for r in self.rows],
        }

    def to_csv(self) -> str:
        lines = [
            "n,replicates,failures,mean_mu,mean_sigma2,"
            "mean_p_lognormal,mean_p_gamma,mean_p_weibull,pct_correct,standard_error"
        ]
        for r in self.rows:
            w = r.mean_weights
            lines.append(
                f"{r.n},{r.replicates},{r.failures},{r.mean_mu!r},{r.mean_sigma2!r},"
                f"{w[0]!r},{w[1]!r},{w[2]!r},{r.pct_correct!r},{r.standard_error!r}"
            )
        return "\n".join(lines) + "\n"


def lgw_summary_from_records(generator: str, records: list[dict]) -> LgwSummary:
    """Rebuild the summary from per-replicate records (exact)."""
    sizes = sorted({r["n"] for r in records})
    rows = []
    for n in sizes:
        group = [r for r in records if r["n"] == n]
        ok = [r for r in group if r["error"] is None]
        failures = len(group) - len(ok)
        count = len(ok)
        if count:
            rate = sum(1 for r in ok if r["correct"]) / count
            se = math.sqrt(rate * (1.0 - rate) / count)
            mean_mu = sum(r["estimates"]["mu"] for r in ok) / count
            mean_s2 = sum(r["estimates"]["sigma2"] for r in ok) / count
            mean_w = tuple(
                sum(r["estimates"]["weights"][k] for r in ok) / count for k in range(3)
            )
        else:
            rate = se = mean_mu = mean_s2 = math.nan
            mean_w = (math.nan, math.nan, math.nan)
        rows.append(
            LgwRow(
                n=n,
                replicates=count,
                failures=failures,
                mean_mu=mean_mu,
                mean_sigma2=mean_s2,
                mean_weights=mean_w,
                pct_correct=rate,
                standard_error=se,
            )
        )
    return LgwSummary(generator=generator, rows=tuple(rows))


def run_lgw(config: ScenarioConfig, out_dir=None) -> LgwSummary:
    """Three-family correct-decision study."""
    if config.mode is not SimulationMode.LGW3:
        raise InputError("run_lgw requires mode lgw3")
    records = _run_replicates(config, _lgw_replicate)
    summary = lgw_summary_from_records(config.generator.value, records)
    if out_dir is not None:
        _write_outputs(out_dir, config, records, summary.to_dict(), summary.to_csv(), "lgw_summary")
    return summary


def run_scenario(config: ScenarioConfig, out_dir=None):
    """Dispatch on the scenario mode."""
    if config.mode is SimulationMode.PAIRWISE_LN_W:
        return run_pairwise(config, out_dir=out_dir)
    return run_lgw(config, out_dir=out_dir)
