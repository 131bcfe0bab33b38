"""Command line entry point: fetch, characterize, run, report, selftest."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

from ..datahub import DEFAULT_CACHE, fetch_openml, make_splits, profile
from .config import ConfigError, load_config
from .report import ReportError, write_report
from .run import RunError, load_run, progress_printer, resolve_dataset, run
from .selftest import SUITES, run_selftest

PROFILE_COLUMNS = ("dataset_id", "n", "d", "n_categorical", "n_classes", "fs_ratio", "c_score", "difficulty", "lr_acc", "gbt_acc")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, help="split/trial seed (overrides config)")
    p.add_argument("--budget-mb", type=int, help="memory budget for the OOM guard, MiB")
    p.add_argument("--out", help="output directory")
    p.add_argument("--cache-dir", help=f"OpenML cache (default {DEFAULT_CACHE})")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="tabbench", description="Tabular attention/contrastive benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{fetch,characterize,run,report,selftest}")

    p = sub.add_parser("fetch", parents=[common], help="download OpenML datasets into the cache")
    p.add_argument("ids", nargs="+", type=int)

    p = sub.add_parser("characterize", parents=[common], help="FS-ratio, C-score and difficulty per dataset")
    p.add_argument("refs", nargs="+", help="OpenML ids or CSV paths")
    p.add_argument("--splits", type=int, default=30, help="splits for the GBT/LR difficulty rule (0 skips it)")

    p = sub.add_parser("run", parents=[common], help="run an experiment config (resumes if --out has results)")
    p.add_argument("config")
    p.add_argument("--workers", type=int)
    p.add_argument("--quiet", action="store_true", help="no per-trial progress lines")

    p = sub.add_parser("report", parents=[common], help="render tables from a run's manifest")
    p.add_argument("manifest", help="manifest.json or the run directory holding it")

    p = sub.add_parser("selftest", parents=[common], help="gradient, Wilcoxon and InfoNCE oracle suites")
    p.add_argument("--suite", action="append", choices=sorted(SUITES))
    return parser


def cmd_fetch(args) -> int:
    cache = args.cache_dir or DEFAULT_CACHE
    failed = 0
    for did in args.ids:
        try:
            ds = fetch_openml(did, cache)
        except Exception as e:  # noqa: BLE001 - report per dataset, keep going
            print(f"{did}: FAILED {type(e).__name__}: {e}", file=sys.stderr)
            failed += 1
            continue
        print(f"{did}: {ds.n} rows, {ds.d} features, {ds.schema.n_classes} classes -> {Path(cache) / str(did)}")
    return 1 if failed else 0


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def cmd_characterize(args) -> int:
    seed = 0 if args.seed is None else args.seed
    rows, failed = [], 0
    print("\t".join(PROFILE_COLUMNS), file=sys.stderr)
    for ref in args.refs:
        try:
            ds = resolve_dataset(ref, args.cache_dir)
            splits = make_splits(ds, seed, args.splits) if args.splits > 0 else None
            prof = profile(ds, splits)
        except Exception as e:  # noqa: BLE001
            print(f"{ref}: FAILED {type(e).__name__}: {e}", file=sys.stderr)
            failed += 1
            continue
        rows.append(prof)
        print("\t".join(_fmt(getattr(prof, c)) for c in PROFILE_COLUMNS), flush=True)
    if rows and args.out:
        dest = Path(args.out)
        dest.mkdir(parents=True, exist_ok=True)
        with open(dest / "profiles.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(PROFILE_COLUMNS)
            for prof in rows:
                w.writerow([getattr(prof, c) for c in PROFILE_COLUMNS])
    return 1 if failed else 0


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    overrides = {
        "seed": args.seed,
        "budget_mb": args.budget_mb,
        "out": args.out,
        "cache_dir": args.cache_dir,
        "workers": args.workers,
    }
    cfg = dataclasses.replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    manifest, results = run(cfg, on_result=None if args.quiet else progress_printer())
    counts = {}
    for r in results:
        counts[r.status] = counts.get(r.status, 0) + 1
    summary = ", ".join(f"{n} {s}" for s, n in sorted(counts.items()))
    print(f"{len(results)}/{manifest.expected} trials in {cfg.out} ({summary})")
    return 0


def cmd_report(args) -> int:
    path = Path(args.manifest)
    run_dir = path.parent if path.name == "manifest.json" else path
    _, cfg, results = load_run(run_dir)
    paths = write_report(cfg, results, args.out or run_dir / "report")
    print(paths["f1_table.md"].read_text())
    for p in paths.values():
        print(f"wrote {p}")
    return 0


def cmd_selftest(args) -> int:
    return 0 if run_selftest(args.suite) else 1


COMMANDS = {
    "fetch": cmd_fetch,
    "characterize": cmd_characterize,
    "run": cmd_run,
    "report": cmd_report,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 with usage on unknown subcommands or flags
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, RunError, ReportError, FileNotFoundError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
