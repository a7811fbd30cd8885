"""Replicated ECM trials over (gamma, n) grids and scaling-exponent fits."""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import os
import struct
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cm_core import erase, pair_stubs
from .degree_model import DegreeDistribution, sample_sequence
from .estimators import bound_lemma1, exp_bound_term, loglog_fit, theoretical_exponent

logger = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_GAMMAS",
    "SweepPlan",
    "TrialRecord",
    "FitResult",
    "derive_seed",
    "run_trial",
    "run_sweep",
    "read_records",
    "write_records",
    "fit_exponent",
    "fit_all",
    "level_means",
    "growth_trend",
    "write_fits",
    "write_plot_data",
]

DEFAULT_GAMMAS = (1.1, 1.2, 1.35, 1.5, 1.7, 1.9, 2.0, 2.5, 3.0)


@dataclass(frozen=True)
class SweepPlan:
    gamma_grid: tuple
    n_grid: tuple
    replications: int
    k_min: int = 1
    master_seed: int = 0
    output_path: str = "sweep.csv"

    def __post_init__(self):
        object.__setattr__(self, "gamma_grid", tuple(float(g) for g in self.gamma_grid))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.gamma_grid:
            raise ValueError("gamma_grid is empty")
        if not self.n_grid:
            raise ValueError("n_grid is empty")
        for g in self.gamma_grid:
            DegreeDistribution(g, self.k_min)
        if any(n < 2 for n in self.n_grid):
            raise ValueError("every n must be >= 2")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def keys(self):
        for g in self.gamma_grid:
            for n in self.n_grid:
                for r in range(self.replications):
                    yield (g, n, r)


@dataclass(frozen=True)
class TrialRecord:
    gamma: float
    n: int
    replication_index: int
    seed: int
    L_n: int
    sum_squares: int
    self_loops: int
    excess_multiplicity: int
    total_erased: int
    erased_fraction: float
    lemma1_bound: float
    pairwise_exp_term: float
    wall_time_ms: float = field(compare=False)

    @property
    def key(self):
        return (self.gamma, self.n, self.replication_index)


FIELDS = [f.name for f in dataclasses.fields(TrialRecord)]
_INT_FIELDS = {"n", "replication_index", "seed", "L_n", "sum_squares", "self_loops", "excess_multiplicity", "total_erased"}


@dataclass(frozen=True)
class FitResult:
    gamma: float
    fitted_slope: float
    slope_stderr: float
    theoretical_slope: float
    intercept: float
    points_used: int


def derive_seed(master_seed: int, gamma: float, n: int, replication_index: int) -> int:
    """64-bit trial seed, a pure function of its arguments."""
    gamma_bits = struct.unpack("<Q", struct.pack("<d", float(gamma)))[0]
    ss = np.random.SeedSequence([master_seed, gamma_bits, n, replication_index])
    return int(ss.generate_state(1, np.uint64)[0])


def run_trial(gamma: float, n: int, k_min: int, seed: int, replication_index: int = 0) -> TrialRecord:
    """Sample degrees, pair stubs, erase, and record the statistics."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    dist = DegreeDistribution(gamma, k_min)
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    seq = sample_sequence(n, dist, rng)
    _, stats = erase(pair_stubs(seq, rng))
    lemma1 = bound_lemma1(seq)
    exp_term = exp_bound_term(seq)
    elapsed = (time.perf_counter() - t0) * 1e3
    return TrialRecord(
        gamma=float(gamma),
        n=int(n),
        replication_index=int(replication_index),
        seed=int(seed),
        L_n=seq.L_n,
        sum_squares=seq.sum_squares,
        self_loops=stats.self_loop_count,
        excess_multiplicity=stats.excess_multiplicity,
        total_erased=stats.total_erased,
        erased_fraction=stats.erased_fraction,
        lemma1_bound=lemma1,
        pairwise_exp_term=exp_term,
        wall_time_ms=round(elapsed, 3),
    )


def _trial_task(args):
    gamma, n, k_min, seed, rep = args
    return run_trial(gamma, n, k_min, seed, rep)


def _format(rec: TrialRecord) -> list[str]:
    out = []
    for name in FIELDS:
        v = getattr(rec, name)
        out.append(repr(v) if isinstance(v, float) else str(v))
    return out


def _parse(row: dict) -> TrialRecord:
    kw = {}
    for name in FIELDS:
        raw = row[name]
        kw[name] = int(raw) if name in _INT_FIELDS else float(raw)
    return TrialRecord(**kw)


def read_records(path) -> list[TrialRecord]:
    """Read a record CSV, silently skipping incomplete or malformed rows."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != FIELDS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            try:
                out.append(_parse(row))
            except (TypeError, ValueError, KeyError):
                continue
    return out


def write_records(path, records: Iterable[TrialRecord]) -> None:
    """Write records sorted by ``(gamma, n, replication_index)``."""
    recs = sorted(records, key=lambda r: r.key)
    tmp = Path(f"{path}.tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIELDS)
        for r in recs:
            w.writerow(_format(r))
    os.replace(tmp, path)


def run_sweep(plan: SweepPlan, threads: int | None = None, resume: bool = True) -> list[TrialRecord]:
    """Run every trial of ``plan``, streaming rows to ``plan.output_path``.

    Trials already present in the output file are kept and not rerun when
    ``resume`` is set. The file is rewritten in sorted order at the end, so
    the result does not depend on scheduling.
    """
    out = Path(plan.output_path)
    done: dict = {}
    if resume and out.exists() and out.stat().st_size:
        for rec in read_records(out):
            done[rec.key] = rec
    # fail on an unwritable path before any computation
    write_records(out, done.values())

    wanted = set(plan.keys())
    done = {k: v for k, v in done.items() if k in wanted}
    todo = [
        (g, n, plan.k_min, derive_seed(plan.master_seed, g, n, r), r)
        for (g, n, r) in plan.keys()
        if (g, n, r) not in done
    ]
    # large n first for better load balance
    todo.sort(key=lambda t: -t[1])
    logger.info("sweep: %d trials to run, %d reused", len(todo), len(done))

    threads = threads or os.cpu_count() or 1
    with open(out, "a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")

        def consume(results):
            for rec in results:
                done[rec.key] = rec
                writer.writerow(_format(rec))
                fh.flush()

        if threads == 1 or len(todo) <= 1:
            consume(map(_trial_task, todo))
        else:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                consume(pool.map(_trial_task, todo, chunksize=1))

    records = sorted(done.values(), key=lambda r: r.key)
    write_records(out, records)
    return records


def _group(records: Iterable[TrialRecord]) -> dict:
    groups: dict = {}
    for r in records:
        groups.setdefault(r.gamma, {}).setdefault(r.n, []).append(r)
    return groups


def level_means(records: Sequence[TrialRecord], field_name: str = "erased_fraction"):
    """Per-n mean, standard error and count of one record field (single gamma)."""
    by_n: dict = {}
    for r in records:
        by_n.setdefault(r.n, []).append(float(getattr(r, field_name)))
    ns = sorted(by_n)
    means = np.array([np.mean(by_n[n]) for n in ns])
    counts = np.array([len(by_n[n]) for n in ns])
    se = np.array([np.std(by_n[n], ddof=1) / math.sqrt(len(by_n[n])) if len(by_n[n]) > 1 else 0.0 for n in ns])
    return np.array(ns, dtype=np.float64), means, se, counts


def fit_exponent(records: Sequence[TrialRecord], min_replications: int = 10) -> FitResult:
    """Fit the growth exponent of the mean erased fraction for one gamma.

    OLS of ``log(mean erased_fraction)`` on ``log n``. Levels with mean zero
    are dropped with a warning.
    """
    gammas = {r.gamma for r in records}
    if len(gammas) != 1:
        raise ValueError(f"records must share one gamma, got {sorted(gammas)}")
    gamma = gammas.pop()
    ns, means, _, counts = level_means(records)
    if np.any(counts < min_replications):
        raise ValueError(f"every n needs >= {min_replications} replications, got {counts.tolist()}")
    keep = means > 0
    if not keep.all():
        warnings.warn(
            f"gamma={gamma}: dropping n={ns[~keep].astype(int).tolist()} with zero mean erased fraction",
            stacklevel=2,
        )
    if keep.sum() < 3:
        raise ValueError(f"gamma={gamma}: fewer than 3 usable n levels")
    fit = loglog_fit(ns[keep], means[keep])
    return FitResult(
        gamma=gamma,
        fitted_slope=fit.slope,
        slope_stderr=fit.stderr,
        theoretical_slope=theoretical_exponent(gamma),
        intercept=fit.intercept,
        points_used=fit.points,
    )


def fit_all(records: Iterable[TrialRecord], min_replications: int = 10) -> list[FitResult]:
    """`fit_exponent` for every gamma present, sorted by gamma."""
    groups = _group(records)
    return [
        fit_exponent([r for rs in groups[g].values() for r in rs], min_replications)
        for g in sorted(groups)
    ]


def growth_trend(records: Sequence[TrialRecord], field_name: str = "total_erased"):
    """Weighted log-log slope of a per-n mean, weights from the standard errors.

    Returns the `LogLogFit`; its stderr reflects only replication noise.
    """
    ns, means, se, _ = level_means(records, field_name)
    if np.any(means <= 0):
        raise ValueError(f"{field_name}: non-positive level mean")
    # delta method: sd(log mean) ~ se / mean
    rel = np.maximum(se / means, 1e-12)
    return loglog_fit(ns, means, sigma=rel)


def write_fits(path, fits: Sequence[FitResult]) -> None:
    import json

    with open(path, "w") as fh:
        json.dump([dataclasses.asdict(f) for f in fits], fh, indent=2)
        fh.write("\n")


def write_plot_data(directory, records: Iterable[TrialRecord]) -> list[Path]:
    """Per gamma, write ``log10(n) log10(mean_fraction)`` rows and a reference line.

    The reference line has the theoretical slope and passes through the
    first data point.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for gamma, by_n in sorted(_group(records).items()):
        rs = [r for v in by_n.values() for r in v]
        ns, means, _, _ = level_means(rs)
        keep = means > 0
        x, y = np.log10(ns[keep]), np.log10(means[keep])
        rho = theoretical_exponent(gamma)
        path = directory / f"plot_gamma_{gamma!r}.txt"
        with open(path, "w") as fh:
            fh.write(f"# gamma={gamma!r} columns: log10(n) log10(mean_fraction)\n")
            for a, b in zip(x.tolist(), y.tolist()):
                fh.write(f"{a!r} {b!r}\n")
            if x.size:
                fh.write(f"\n# reference slope={rho!r} columns: log10(n) log10(reference)\n")
                for a in x.tolist():
                    fh.write(f"{a!r} {float(y[0] + rho * (a - x[0]))!r}\n")
        paths.append(path)
    return paths
