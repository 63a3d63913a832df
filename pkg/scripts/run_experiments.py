"""Run ``corrgamma validate`` on every shipped config and summarise the fits.

Each config writes its report, ECDF and density tables to ``<out>/<config stem>/``;
plotting those two tables against each other shows the fit of the approximant.
"""
import argparse
import contextlib
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from corrgamma.cli import EXIT_FIT, EXIT_OK, main

ROOT = Path(__file__).resolve().parent.parent


def run_one(config: Path, out: Path, n: int | None,
            threshold: float | None) -> tuple[str, int, dict]:
    target = out / config.stem
    argv = ["validate", "--config", str(config), "--out", str(target)]
    if n is not None:
        argv += ["--n", str(n)]
    if threshold is not None:
        argv += ["--ks-threshold", str(threshold)]
    with contextlib.redirect_stdout(io.StringIO()):
        code = main(argv)
    report = {}
    if code in (EXIT_OK, EXIT_FIT):
        report = json.loads((target / "gof_report.json").read_text())
    return config.stem, code, report


def parse_args(argv=None) -> argparse.Namespace:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--configs", type=Path, default=ROOT / "configs")
    p.add_argument("--pattern", default="*.json", help="glob inside the configs directory")
    p.add_argument("--out", type=Path, default=ROOT / "results")
    p.add_argument("--n", type=int, default=None, help="override the sample size")
    p.add_argument("--ks-threshold", type=float, default=None,
                   help="override the pass threshold, e.g. for small --n")
    p.add_argument("--jobs", type=int, default=1, help="worker processes, one config each")
    return p.parse_args(argv)


def main_script(argv=None) -> int:
    args = parse_args(argv)
    configs = sorted(args.configs.glob(args.pattern))
    if not configs:
        print(f"no configs match {args.configs / args.pattern}", file=sys.stderr)
        return 2
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        futures = [pool.submit(run_one, c, args.out, args.n, args.ks_threshold) for c in configs]
        rows = [f.result() for f in futures]
    worst = 0
    print(f"{'config':40s} {'exit':>4s} {'ks':>8s} {'mean':>10s} {'model':>10s}")
    for stem, code, rep in rows:
        worst = max(worst, code)
        if rep:
            print(f"{stem:40s} {code:4d} {rep['ks_distance']:8.4f} "
                  f"{rep['sample_mean']:10.4f} {rep['model_mean']:10.4f}")
        else:
            print(f"{stem:40s} {code:4d}")
    return worst


if __name__ == "__main__":
    sys.exit(main_script())
