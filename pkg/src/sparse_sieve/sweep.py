"""Grid sweeps of bound ratios and their JSON-lines / CSV serialization."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterator, List, Optional, Sequence, Tuple

from .bounds import FORMULAS, BoundParams, BoundReport, ratio_report
from .errors import CapacityExceeded, max_work
from .expsum import make_sequence
from .moduli import ModuliSet, load_moduli, primes_up_to, squares_up_to

META_COLUMNS = ("N", "Q", "Q1", "M", "family", "seed", "lhs")
FITTED_COLUMNS = ("X", "C", "rewrite_residual")
CSV_COLUMNS = (
    META_COLUMNS
    + tuple(f"rhs.{f}" for f in FORMULAS)
    + tuple(f"ratios.{f}" for f in FORMULAS)
    + tuple(f"fitted_constants.{f}" for f in FITTED_COLUMNS)
)


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


@dataclass(frozen=True)
class SweepConfig:
    family: str
    N_list: Tuple[int, ...]
    Q1_list: Tuple[int, ...] = ()
    Q1_exponents: Tuple[float, ...] = ()
    Q_list: Tuple[int, ...] = ()
    moduli_path: Optional[str] = None
    coeffs: str = "ones"
    seed: Optional[int] = None
    eps: float = 0.1
    z_grid_per_octave: Optional[int] = None
    format: str = "json"
    jobs: int = 1
    verify_rewrite: bool = True

    def __post_init__(self):
        if not self.N_list:
            raise ValueError("N list must be nonempty")
        if any(n < 1 for n in self.N_list):
            raise ValueError("every N must be positive")
        if self.family == "squares" and not (self.Q1_list or self.Q1_exponents):
            raise ValueError("the squares family needs a Q1 list or Q1 exponents")
        if self.family == "primes" and not self.Q_list:
            raise ValueError("the primes family needs a Q list")
        if self.family == "file" and not self.moduli_path:
            raise ValueError("the file family needs a moduli path")
        if self.family not in ("squares", "primes", "file"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.coeffs == "random" and self.seed is None:
            raise ValueError("the random coefficient family needs --seed")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")


def cells(cfg: SweepConfig) -> List[Tuple[int, ModuliSet, Optional[int]]]:
    """(N, moduli set, Q1) per cell in deterministic order."""
    out = []
    file_set = load_moduli(cfg.moduli_path) if cfg.family == "file" else None
    for N in cfg.N_list:
        if cfg.family == "squares":
            q1s = list(cfg.Q1_list) + [max(1, round(N**e)) for e in cfg.Q1_exponents]
            out.extend((N, squares_up_to(q1), q1) for q1 in q1s)
        elif cfg.family == "primes":
            out.extend((N, primes_up_to(Q), None) for Q in cfg.Q_list)
        else:
            out.append((N, file_set, None))
    return out


def check_capacity(grid) -> None:
    limit = max_work()
    for N, S, _ in grid:
        work = S.farey_size()
        if work > limit:
            raise CapacityExceeded(f"cell N={N}, |S|={len(S)} needs {work} fractions, guard is {limit}")


def run_cell(cfg: SweepConfig, N: int, S: ModuliSet, Q1: Optional[int]) -> BoundReport:
    seq = make_sequence(cfg.coeffs, N, cfg.seed)
    p = BoundParams(N=N, Q=S.Q, Z=seq.Z, M=S.M, Q1=Q1, eps=cfg.eps)
    return ratio_report(seq, S, p, seed=cfg.seed, verify_rewrite=cfg.verify_rewrite, thm1_grid=cfg.z_grid_per_octave)


def _run_cell_args(args):
    return run_cell(*args)


def run(cfg: SweepConfig) -> Iterator[BoundReport]:
    grid = cells(cfg)
    check_capacity(grid)
    tasks = [(cfg, N, S, Q1) for N, S, Q1 in grid]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            yield from pool.map(_run_cell_args, tasks)
    else:
        for task in tasks:
            yield _run_cell_args(task)


def summarize(reports: Sequence[BoundReport], complete: bool = True) -> dict:
    fitted = {}
    for name in FORMULAS:
        vals = [r.ratios[name] for r in reports if r.ratios[name] is not None]
        fitted[name] = max(vals) if vals else None
    return {"summary": True, "cells": len(reports), "complete": complete, "fitted_constants": fitted}


def _flatten(report: BoundReport) -> dict:
    d = report.to_dict()
    row = {k: d[k] for k in META_COLUMNS}
    for f in FORMULAS:
        row[f"rhs.{f}"] = d["rhs"].get(f)
        row[f"ratios.{f}"] = d["ratios"].get(f)
    for f in FITTED_COLUMNS:
        row[f"fitted_constants.{f}"] = d["fitted_constants"].get(f)
    return {k: ("" if v is None else (repr(v) if isinstance(v, float) else v)) for k, v in row.items()}


def write(cfg: SweepConfig, out: IO[str]) -> int:
    """Stream one record per cell plus a summary; returns the exit code."""
    reports: List[BoundReport] = []
    writer = None
    if cfg.format == "csv":
        writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
    code = 0
    complete = True
    try:
        for report in run(cfg):
            reports.append(report)
            if writer is not None:
                writer.writerow(_flatten(report))
            else:
                out.write(dumps(report.to_dict()) + "\n")
            out.flush()
    except CapacityExceeded as exc:
        complete = False
        code = 3
        summary = summarize(reports, complete)
        summary["error"] = str(exc)
        _write_summary(cfg, out, summary)
        return code
    _write_summary(cfg, out, summarize(reports, complete))
    return code


def _write_summary(cfg: SweepConfig, out: IO[str], summary: dict) -> None:
    line = dumps(summary)
    out.write(("# " + line if cfg.format == "csv" else line) + "\n")
    out.flush()


def to_string(cfg: SweepConfig) -> str:
    buf = io.StringIO()
    write(cfg, buf)
    return buf.getvalue()
