"""Markdown/CSV rendering of a finished (or partial) run.

Every number is derived from the raw trial records through evalstat alone:
per-dataset ``ScoreRecord``s feed ``rank_methods``, ``average_ranks``,
``per_diff`` and ``build_win_matrix``.
"""

from __future__ import annotations

import math
import os
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from ..evalstat import ScoreRecord, average_ranks, build_win_matrix, per_diff, rank_methods
from .config import ExperimentConfig, display_name
from .trials import TrialResult

REPORT_FILES = ("f1_table.md", "ranks.md", "win_matrix.csv", "runtime.md", "scores.jsonl")


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class Cell:
    record: ScoreRecord
    status: str  # "ok", "OOM" or "diverged"


def collect(results: list[TrialResult], methods: list[str], datasets: list[str] | None = None) -> dict[str, dict[str, Cell]]:
    """Per dataset and method, the weighted-F1 scores on the splits every
    successful method of that dataset has finished. A method with any OOM or
    diverged split is marked with that status and carries no scores."""
    by = defaultdict(lambda: defaultdict(list))
    for r in results:
        by[r.dataset_id][r.method].append(r)
    order = datasets if datasets is not None else sorted(by, key=lambda s: (not s.isdigit(), int(s) if s.isdigit() else 0, s))
    table: dict[str, dict[str, Cell]] = {}
    for ds in order:
        if ds not in by:
            continue
        statuses, ok_splits = {}, {}
        for m in methods:
            trials = by[ds].get(m, [])
            bad = [t.status for t in trials if t.status != "ok"]
            if bad:
                statuses[m] = "OOM" if "OOM" in bad else "diverged"
            elif trials:
                statuses[m] = "ok"
                ok_splits[m] = {t.split: t.f1_weighted for t in trials}
        common = set.intersection(*(set(s) for s in ok_splits.values())) if ok_splits else set()
        row = {}
        for m, st in statuses.items():
            if st == "ok":
                scores = tuple(ok_splits[m][s] for s in sorted(common))
                row[m] = Cell(ScoreRecord(ds, m, scores), st)
            else:
                row[m] = Cell(ScoreRecord(ds, m, oom=True), st)
        table[ds] = row
    return table


def _fmt(x: float, decimals: int) -> str:
    return f"{x:.{decimals}f}"


def _md_table(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join(["---"] * len(header)) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def f1_grid(table, methods: list[str], decimals: int = 3, diff_exclude=()) -> str:
    """Mean (std) weighted F1 per dataset; best mean as printed is bold; Diff(%) is PerDiff."""
    rows = []
    for ds, row in table.items():
        summaries = {m: row[m].record.summary() for m in methods if m in row}
        shown = {m: round(s[0], decimals) for m, s in summaries.items() if s is not None}
        best = max(shown.values()) if shown else None
        cells = [ds]
        for m in methods:
            if m not in row:
                cells.append("")
            elif summaries[m] is None:
                cells.append(row[m].status)
            else:
                mean, std = summaries[m]
                text = f"{_fmt(mean, decimals)} ({_fmt(std, decimals)})"
                cells.append(f"**{text}**" if shown[m] == best else text)
        means = {m: (s[0] if s is not None else None) for m, s in summaries.items()}
        try:
            cells.append(f"{per_diff(means, diff_exclude):.2f}")
        except ValueError:
            cells.append("-")
        rows.append(cells)
    return _md_table(["Dataset", *map(display_name, methods), "Diff(%)"], rows)


def rank_table(table, methods: list[str], decimals: int = 3) -> tuple[dict[str, dict[str, int | None]], str]:
    """Ranks per dataset (dash for unranked) and an average row of mean (std) rank."""
    ranks = {}
    for ds, row in table.items():
        summaries = {m: row[m].record.summary() for m in methods if m in row}
        try:
            ranks[ds] = rank_methods(summaries, decimals)
        except ValueError:
            ranks[ds] = {m: None for m in summaries}
    rows = [[ds, *("-" if r.get(m) is None else str(r[m]) for m in methods)] for ds, r in ranks.items()]
    avg = average_ranks(ranks)
    avg_row = ["Average"]
    for m in methods:
        mean, std = avg.get(m, (math.nan, math.nan))
        avg_row.append("-" if math.isnan(mean) else f"{mean:.2f} ({std:.2f})")
    rows.append(avg_row)
    return ranks, _md_table(["Dataset", *map(display_name, methods)], rows)


def runtime_table(results: list[TrialResult], methods: list[str]) -> str:
    total = defaultdict(float)
    count = defaultdict(int)
    for r in results:
        total[r.method] += r.seconds
        count[r.method] += 1
    rows = [[display_name(m), str(count[m]), f"{total[m]:.1f}"] for m in methods if count[m]]
    return _md_table(["Method", "Trials", "Total time (s)"], rows)


def render(cfg: ExperimentConfig, results: list[TrialResult]) -> dict[str, str]:
    if not results:
        raise ReportError("manifest has no trial results to report")
    methods = [m.id for m in cfg.methods]
    rep = cfg.report
    table = collect(results, methods)
    out = {"f1_table.md": "# Weighted F1, mean (std) over splits\n\n" + f1_grid(table, methods, rep.decimals, rep.diff_exclude)}

    groups = dict(rep.groups) or {"all": tuple(table)}
    parts = []
    for name, members in groups.items():
        sub = {ds: table[ds] for ds in members if ds in table}
        if not sub:
            parts.append(f"## {name}\n\n(no results)\n")
            continue
        parts.append(f"## {name}\n\n" + rank_table(sub, methods, rep.decimals)[1])
    out["ranks.md"] = "# Ranks (1 = best; - = OOM or diverged)\n\n" + "\n".join(parts)

    records = [c.record for row in table.values() for c in row.values()]
    wm = build_win_matrix(records, rep.alpha, methods)
    wm.methods = [display_name(m) for m in wm.methods]
    out["win_matrix.csv"] = wm.to_csv()
    out["runtime.md"] = "# Runtime\n\n" + runtime_table(results, methods)
    out["scores.jsonl"] = "".join(r.to_json() + "\n" for r in records)
    return out


def write_report(cfg: ExperimentConfig, results: list[TrialResult], dest: str | os.PathLike) -> dict[str, Path]:
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, text in render(cfg, results).items():
        (dest / name).write_text(text)
        paths[name] = dest / name
    return paths
