"""Command-line front end: ``approx``, ``sample`` and ``validate``.

Exit codes: 0 success / fit passed, 1 fit threshold exceeded, 2 usage or domain
error, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .approx import (CorrelatedSumSpec, approx_diff_chisq, approx_diff_gamma,
                     approx_sum_chisq_equal, approx_sum_chisq_n, approx_sum_chisq_pair,
                     approx_sum_gamma_n)
from .distributions import GammaParams, VGSeneta, seneta_to_gh
from .errors import ConvergenceError, DomainError
from .gof import GofReport, density_table, ecdf, moment_report
from .samplers import (METHODS, CorrelationMatrix, SampleBatch, bivariate_chisq_sample,
                       copula_gamma_sample, copula_gamma_sample_calibrated,
                       multivariate_chisq_sample)
from .streams import MAX_SEED, make_stream

KINDS = ("sum-equal", "sum-pair", "sum-n", "gamma-sum", "diff-chisq", "diff-gamma")
DEFAULT_N = 100_000
DEFAULT_KS_THRESHOLD = 0.02
SEED_ENV = "CORRGAMMA_SEED"
DENSITY_POINTS = 512

EXIT_OK, EXIT_FIT, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


@dataclass
class ExperimentConfig:
    """One approximation/simulation experiment."""

    kind: str
    m: float | None = None
    m1: float | None = None
    m2: float | None = None
    dfs: list[float] | None = None
    shapes: list[float] | None = None
    k: float | None = None
    theta: float | None = None
    rho: float | None = None
    rho_matrix: list[list[float]] | None = None
    method: str | None = None
    n: int = DEFAULT_N
    seed: int = 0
    out: str = "."
    ks_threshold: float = DEFAULT_KS_THRESHOLD

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {', '.join(KINDS)}, got {self.kind!r}")
        if self.method is not None and self.method not in METHODS:
            raise DomainError(f"method must be one of {', '.join(METHODS)}, got {self.method!r}")
        if int(self.n) != self.n or self.n < 100:
            raise DomainError(f"n must be an integer >= 100, got {self.n!r}")
        self.n = int(self.n)
        if int(self.seed) != self.seed or not 0 <= int(self.seed) <= MAX_SEED:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        self.seed = int(self.seed)
        if not self.ks_threshold > 0:
            raise DomainError(f"ks_threshold must be positive, got {self.ks_threshold!r}")
        for name in _REQUIRED[self.kind]:
            if getattr(self, name) is None:
                raise DomainError(f"kind {self.kind} requires --{name.replace('_', '-')}")
        if self.kind in ("sum-n", "gamma-sum"):
            if self.rho is None and self.rho_matrix is None:
                raise DomainError(f"kind {self.kind} requires --rho or --rho-matrix")
        elif self.rho is None:
            raise DomainError(f"kind {self.kind} requires --rho")

    @property
    def is_difference(self) -> bool:
        return self.kind.startswith("diff")

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: v for k, v in d.items() if v is not None}


_REQUIRED = {
    "sum-equal": ("m",),
    "sum-pair": ("m1", "m2"),
    "sum-n": ("dfs",),
    "gamma-sum": ("shapes", "theta"),
    "diff-chisq": ("m",),
    "diff-gamma": ("k", "theta"),
}


def _pearson_matrix(cfg: ExperimentConfig, size: int) -> np.ndarray:
    if cfg.rho_matrix is not None:
        a = np.array(cfg.rho_matrix, dtype=float)
        if a.shape != (size, size):
            raise DomainError(f"rho matrix must be {size}x{size}, got {a.shape}")
        return a
    a = np.full((size, size), float(cfg.rho))
    np.fill_diagonal(a, 1.0)
    return a


def build_approximant(cfg: ExperimentConfig):
    """Return ``(model, u_factor)`` for the configured kind."""
    if cfg.kind == "sum-equal":
        p = approx_sum_chisq_equal(cfg.m, cfg.rho)
        return p, p.scale
    if cfg.kind == "sum-pair":
        p = approx_sum_chisq_pair(cfg.m1, cfg.m2, cfg.rho)
        return p, p.scale
    if cfg.kind == "sum-n":
        spec = CorrelatedSumSpec(corr=_pearson_matrix(cfg, len(cfg.dfs)), dfs=tuple(cfg.dfs))
        p, summary = approx_sum_chisq_n(spec)
        return p, summary.u_factor
    if cfg.kind == "gamma-sum":
        spec = CorrelatedSumSpec(corr=_pearson_matrix(cfg, len(cfg.shapes)),
                                 shapes=tuple(cfg.shapes), common_scale=cfg.theta)
        p, summary = approx_sum_gamma_n(spec)
        return p, summary.u_factor
    if cfg.kind == "diff-chisq":
        return approx_diff_chisq(cfg.m, cfg.rho), None
    return approx_diff_gamma(cfg.k, cfg.theta, cfg.rho), None


def describe_model(model, u_factor) -> dict:
    """JSON-ready description in every supported parametrization."""
    if isinstance(model, GammaParams):
        doc = {"family": "gamma", "gamma": {"shape": model.shape, "scale": model.scale}}
    else:
        gh = seneta_to_gh(model)
        doc = {"family": "variance-gamma",
               "seneta": {"location": model.location, "spread": model.spread,
                          "skew": model.skew, "shape_inv": model.shape_inv},
               "gen_hyp": {"location": gh.location, "tail": gh.tail,
                           "asym": gh.asym, "index": gh.index}}
    doc.update(mean=model.mean(), variance=model.variance(), u_factor=u_factor)
    return doc


def model_from_description(doc: dict):
    """Inverse of :func:`describe_model`."""
    if doc["family"] == "gamma":
        return GammaParams(**doc["gamma"])
    return VGSeneta(**doc["seneta"])


def _marginals(cfg: ExperimentConfig) -> tuple[list[GammaParams], list[int] | None]:
    """Marginal laws and, when the squared-normal design applies, their integer dfs."""
    if cfg.kind in ("sum-equal", "diff-chisq"):
        dfs = [cfg.m, cfg.m]
    elif cfg.kind == "sum-pair":
        dfs = [cfg.m1, cfg.m2]
    elif cfg.kind == "sum-n":
        dfs = list(cfg.dfs)
    else:
        shapes = list(cfg.shapes) if cfg.kind == "gamma-sum" else [cfg.k, cfg.k]
        marg = [GammaParams(shape=s, scale=cfg.theta) for s in shapes]
        twice = [2.0 * s for s in shapes]
        integral = all(t == math.floor(t) and t >= 1 for t in twice)
        return marg, [int(t) for t in twice] if integral else None
    marg = [GammaParams.chi_squared(m) for m in dfs]
    integral = all(float(m) == math.floor(m) and m >= 1 for m in dfs)
    return marg, [int(m) for m in dfs] if integral else None


def resolve_method(cfg: ExperimentConfig) -> str:
    _, dfs = _marginals(cfg)
    if cfg.method is None:
        return "squared-normal" if dfs is not None else "copula-nominal"
    if cfg.method == "squared-normal" and dfs is None:
        raise DomainError("squared-normal sampling needs integer degrees of freedom "
                          "(or half-integer gamma shapes)")
    return cfg.method


def draw_samples(cfg: ExperimentConfig) -> SampleBatch:
    """Simulate the configured variables from the stream for ``cfg.seed``."""
    method = resolve_method(cfg)
    marginals, dfs = _marginals(cfg)
    size = len(marginals)
    pearson = _pearson_matrix(cfg, size)
    rng = make_stream(cfg.seed)
    if method == "squared-normal":
        if size == 2:
            batch = bivariate_chisq_sample(dfs[0], pearson[0, 1], cfg.n, rng, m2=dfs[1])
        else:
            batch = multivariate_chisq_sample(dfs, CorrelationMatrix(pearson), cfg.n, rng)
        scales = [p.scale / 2.0 for p in marginals]
        if any(s != 1.0 for s in scales):
            batch.columns = {k: v * s for (k, v), s in zip(batch.columns.items(), scales)}
    elif method == "copula-nominal":
        batch = copula_gamma_sample(marginals, CorrelationMatrix(pearson), cfg.n, rng)
    else:
        batch = copula_gamma_sample_calibrated(marginals, CorrelationMatrix(pearson), cfg.n, rng)
    batch.seed = cfg.seed
    return batch


def statistic(cfg: ExperimentConfig, batch: SampleBatch) -> np.ndarray:
    """``X1 - X2`` for difference kinds, the row sum otherwise."""
    cols = list(batch.columns.values())
    if cfg.is_difference:
        return cols[0] - cols[1]
    return np.sum(np.column_stack(cols), axis=1)


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def cmd_approx(cfg: ExperimentConfig) -> dict:
    model, u = build_approximant(cfg)
    return {"kind": cfg.kind, **describe_model(model, u)}


def cmd_sample(cfg: ExperimentConfig) -> dict:
    batch = draw_samples(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    batch.to_csv(out / "samples.csv")
    corr = batch.pearson()
    sidecar = {
        "seed": cfg.seed,
        "method": batch.method,
        "n": batch.n,
        "kind": cfg.kind,
        "columns": batch.names,
        "rho_normal": batch.metadata.get("normal_corr"),
        "sample_corr": [[_jsonable(float(v)) for v in row] for row in np.atleast_2d(corr)],
    }
    (out / "samples.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return sidecar


def run_validation(cfg: ExperimentConfig) -> tuple[GofReport, object, SampleBatch, np.ndarray]:
    """Sample, build the approximant and compare; no files written."""
    model, _ = build_approximant(cfg)
    batch = draw_samples(cfg)
    values = statistic(cfg, batch)
    return moment_report(values, model), model, batch, values


def cmd_validate(cfg: ExperimentConfig) -> tuple[dict, bool]:
    report, model, batch, values = run_validation(cfg)
    passed = report.ks_distance < cfg.ks_threshold
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    report.to_json(out / "gof_report.json")
    table = ecdf(values)
    table.to_csv(out / "ecdf.csv")
    lo, hi = float(table.sorted_values[0]), float(table.sorted_values[-1])
    if hi > lo:
        density_table(model, lo, hi, DENSITY_POINTS).to_csv(out / "density.csv")
    run = {"config": cfg.to_dict(), "method": batch.method,
           "model": describe_model(*build_approximant(cfg)),
           "report": report.to_dict(), "ks_threshold": cfg.ks_threshold, "passed": passed}
    (out / "run.json").write_text(json.dumps(run, indent=2) + "\n")
    return report.to_dict(), passed


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def read_rho_matrix(path) -> list[list[float]]:
    """Read a correlation matrix CSV whose first row is a header."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise DomainError(f"{path}: rho matrix CSV needs a header row and data rows")
    try:
        return [[float(v) for v in row] for row in rows[1:] if row]
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrgamma",
        description="Gamma / Variance-Gamma approximants for sums and differences "
                    "of correlated chi-squared and gamma variables.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("approx", "print approximant parameters as JSON"),
                       ("sample", "write simulated samples (CSV + JSON sidecar)"),
                       ("validate", "simulate and measure the approximant's fit")):
        p = sub.add_parser(name, help=text)
        p.add_argument("kind", nargs="?", choices=KINDS)
        p.add_argument("--config", help="JSON file with experiment settings; flags override it")
        p.add_argument("--m", type=float)
        p.add_argument("--m1", type=float)
        p.add_argument("--m2", type=float)
        p.add_argument("--dfs", type=_float_list)
        p.add_argument("--shapes", type=_float_list)
        p.add_argument("--k", type=float)
        p.add_argument("--theta", type=float)
        p.add_argument("--rho", type=float)
        p.add_argument("--rho-matrix", dest="rho_matrix", help="CSV path with a header row")
        p.add_argument("--method", choices=METHODS)
        p.add_argument("--n", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--ks-threshold", dest="ks_threshold", type=float)
    return parser


_FIELDS = ("kind", "m", "m1", "m2", "dfs", "shapes", "k", "theta", "rho", "rho_matrix",
           "method", "n", "seed", "out", "ks_threshold")


def config_from_args(args: argparse.Namespace, environ=os.environ) -> ExperimentConfig:
    settings: dict = {}
    if args.config:
        base = Path(args.config).parent
        settings = json.loads(Path(args.config).read_text())
        if not isinstance(settings, dict):
            raise DomainError(f"{args.config}: config must be a JSON object")
        unknown = set(settings) - set(_FIELDS)
        if unknown:
            raise DomainError(f"{args.config}: unknown keys {sorted(unknown)}")
        if isinstance(settings.get("rho_matrix"), str):
            settings["rho_matrix"] = read_rho_matrix(base / settings["rho_matrix"])
    for name in _FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            settings[name] = value
    if isinstance(settings.get("rho_matrix"), str):
        settings["rho_matrix"] = read_rho_matrix(settings["rho_matrix"])
    if "kind" not in settings:
        raise DomainError("an experiment kind is required (positional or in --config)")
    if "seed" not in settings:
        env = environ.get(SEED_ENV)
        try:
            settings["seed"] = int(env) if env else 0
        except ValueError:
            raise DomainError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return ExperimentConfig(**settings)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "approx":
            print(json.dumps(cmd_approx(cfg), indent=2))
            return EXIT_OK
        if args.command == "sample":
            print(json.dumps(cmd_sample(cfg), indent=2))
            return EXIT_OK
        report, passed = cmd_validate(cfg)
        print(json.dumps({**report, "passed": passed}, indent=2))
        return EXIT_OK if passed else EXIT_FIT
    except (DomainError, ConvergenceError, TypeError, ValueError) as exc:
        print(f"corrgamma: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"corrgamma: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
