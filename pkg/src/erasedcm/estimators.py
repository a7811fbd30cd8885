"""Closed-form bounds and analytic terms for the erased fraction.

Everything here is a pure function of a degree sequence or a degree law.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from .degree_model import DegreeDistribution, DegreeSequence, mean_degree, pmf, power_tail_sum

__all__ = [
    "BoundReport",
    "LogLogFit",
    "bound_lemma1",
    "pairwise_exp_sum",
    "exp_bound_term",
    "erased_identity_rhs",
    "no_edge_upper_bound",
    "tauberian_kernel",
    "tauberian_transform",
    "tauberian_term",
    "theoretical_exponent",
    "loglog_fit",
    "CLTDiagnostic",
    "clt_scaling_diagnostic",
    "bound_report",
]


def bound_lemma1(seq: DegreeSequence) -> float:
    """Upper bound on the expected erased fraction of a fixed sequence.

    ``sum D_i^2 / L_n^2 + 2 (sum D_i^2)^2 / L_n^3``: the self-loop bound plus
    the multi-edge bound, both divided by ``L_n``.
    """
    L = seq.L_n
    if L <= 0:
        raise ValueError("L_n must be positive")
    s2 = seq.sum_squares
    return s2 / L**2 + 2.0 * (s2 / L) ** 2 / L


def _histogram(seq: DegreeSequence) -> tuple[np.ndarray, np.ndarray]:
    values, counts = np.unique(seq.degrees, return_counts=True)
    return values.astype(np.float64), counts.astype(np.float64)


def pairwise_exp_sum(seq: DegreeSequence, scale: float, block: int = 4096) -> float:
    """``sum_{i,j} exp(-D_i D_j / scale)`` over all ordered pairs, diagonal included.

    Works on the histogram of distinct degrees, so the cost is quadratic in
    the number of distinct values rather than in ``n``.
    """
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    values, counts = _histogram(seq)
    total = 0.0
    for start in range(0, values.size, block):
        a = values[start : start + block, None]
        ca = counts[start : start + block, None]
        total += float(np.sum(ca * counts[None, :] * np.exp(-(a * values[None, :]) / scale)))
    return total


def exp_bound_term(seq: DegreeSequence) -> float:
    """``1 - n^2/L_n + pairwise_exp_sum(seq, L_n) / L_n``.

    The erased-fraction identity with every no-edge probability replaced by
    ``exp(-D_i D_j / L_n)``; non-negative since ``exp(-x) >= 1 - x``.
    """
    L = seq.L_n
    n = seq.n
    return 1.0 - n * n / L + pairwise_exp_sum(seq, L) / L


def _probability_matrix(no_edge_probs, n: int) -> np.ndarray:
    if isinstance(no_edge_probs, Mapping):
        p = np.full((n, n), np.nan)
        for (i, j), v in no_edge_probs.items():
            p[i, j] = p[j, i] = float(v)
        if np.isnan(p).any():
            raise ValueError("no-edge probabilities missing for some pairs")
    else:
        p = np.asarray(no_edge_probs, dtype=np.float64)
        if p.shape != (n, n):
            raise ValueError(f"expected an {n}x{n} matrix, got shape {p.shape}")
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    return p


def erased_identity_rhs(seq: DegreeSequence, no_edge_probs, diagonal: str = "stub") -> float:
    """``1 - n^2/L_n + (1/L_n) sum_{i,j} P(E_ij = 0)`` over ordered pairs.

    Parameters
    ----------
    seq : DegreeSequence
    no_edge_probs : (n, n) array or mapping ``{(i, j): p}``
        A mapping is read as symmetric; ``(i, i)`` is the probability that
        node ``i`` has no self-loop.
    diagonal : {"stub", "exclude"}
        ``"stub"`` sums all ``n^2`` ordered pairs. With the diagonal
        multiplicity ``E_ii`` taken as twice the self-loop count this equals
        the expected ordered-pair erased fraction exactly (see
        `erasedcm.oracle.ExactResult.expected_erased_ordered`). ``"exclude"``
        drops the diagonal and uses ``n(n-1)``; it is not an identity and is
        kept only for comparison.
    """
    n, L = seq.n, seq.L_n
    p = _probability_matrix(no_edge_probs, n)
    if diagonal == "stub":
        return 1.0 - n * n / L + float(p.sum()) / L
    if diagonal == "exclude":
        off = float(p.sum() - np.trace(p))
        return 1.0 - n * (n - 1) / L + off / L
    raise ValueError(f"unknown diagonal convention {diagonal!r}")


def no_edge_upper_bound(d_i: int, d_j: int, L_n: int, running: bool = False) -> float:
    """Upper bound on the probability that nodes of degrees ``d_i``, ``d_j`` are not joined.

    ``prod_{k<d_i} (1 - d_j/(L_n - 2 d_i - 1)) + d_i^2 d_j / (L_n - 2 d_i)^2``,
    each factor clamped at 0. With ``running=True`` the k-th factor uses the
    denominator ``L_n - 2k - 1`` instead.

    Notes
    -----
    The fixed-denominator form is only asymptotically valid: it undercuts the
    exact probability for many small sequences, e.g. degrees ``(1, 1, 1, 1)``
    (bound 1/4, exact 2/3). The running form dominates on every sequence with
    ``L_n <= 12``.
    """
    if d_i < 0 or d_j < 0:
        raise ValueError("degrees must be non-negative")
    if L_n <= 2 * d_i + 1:
        raise ValueError(f"bound undefined: need L_n > 2*d_i + 1, got L_n={L_n}, d_i={d_i}")
    if running:
        prod = 1.0
        for k in range(d_i):
            prod *= max(0.0, 1.0 - d_j / (L_n - 2 * k - 1))
    else:
        prod = max(0.0, 1.0 - d_j / (L_n - 2 * d_i - 1)) ** d_i
    return prod + d_i * d_i * d_j / (L_n - 2 * d_i) ** 2


def tauberian_kernel(x):
    """``exp(-x) - 1 + x`` without cancellation for small ``x``."""
    x = np.asarray(x, dtype=np.float64)
    small = x < 1e-3
    xs = np.where(small, x, 0.0)
    series = xs * xs * (0.5 - xs * (1 / 6 - xs * (1 / 24 - xs / 120)))
    return np.where(small, series, np.expm1(-np.where(small, 1.0, x)) + x)


def tauberian_transform(values, weights, t: float) -> float:
    """``E[X]/t - 1 + E[exp(-X/t)]`` for a finitely supported ``X``."""
    w = np.asarray(weights, dtype=np.float64)
    return float(np.sum(w * tauberian_kernel(np.asarray(values, dtype=np.float64) / t)) / w.sum())


def tauberian_term(dist: DegreeDistribution, t: float, cutoff: float = 60.0) -> float:
    """``E[X]/t - 1 + E[exp(-X/t)]`` for ``X = D_1 D_2``, two independent degrees.

    Pairs with ``a*b <= cutoff*t`` are summed exactly (over the hyperbola,
    using the symmetry of the product); beyond it the kernel is
    ``a*b/t - 1`` up to a relative ``exp(-cutoff)`` and the remaining double
    sum factorises into tail moments of the degree law.
    """
    g, kmin = dist.gamma, dist.k_min
    if not 1 < g < 2:
        raise ValueError(f"gamma must lie in (1, 2), got {g}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    C = cutoff * t
    K = int(C // kmin)  # largest a with a * k_min <= C
    mu = mean_degree(dist)
    if K < kmin:
        # every pair is past the cutoff
        return mu * mu / t - 1.0

    vals = np.arange(kmin, K + 1, dtype=np.float64)
    p = pmf(dist, vals)

    # exact part over {a*b <= C}
    r = min(int(math.isqrt(int(C))), K)
    inside = 0.0
    for a in range(kmin, r + 1):
        bmax = int(C // a)
        pb = p[: bmax - kmin + 1]
        inner = np.dot(pb, tauberian_kernel(a * vals[: bmax - kmin + 1] / t))
        inside += 2.0 * p[a - kmin] * inner
    if r >= kmin:
        sq = vals[: r - kmin + 1]
        psq = p[: r - kmin + 1]
        inside -= float(psq @ tauberian_kernel(np.outer(sq, sq) / t) @ psq)

    # tail moments B0(m) = P(D > m), B1(m) = E[D; D > m] for m = k_min..K
    ms = vals
    T_next = (kmin / (ms + 1)) ** g
    inv = (ms + 1) ** -g  # terms of sum_{b >= m+1} b^-g
    zeta_tail = np.cumsum(inv[::-1])[::-1] + power_tail_sum(g, K + 2)
    B0 = T_next
    B1 = ms * T_next + kmin**g * zeta_tail

    # pairs (a, b) with a*b > C, kernel taken as a*b/t - 1
    # a <= K gives floor(C / a) >= k_min
    idx = np.floor(C / vals).astype(np.int64) - kmin
    outside = float(np.sum(p * (vals * B1[idx] / t - B0[idx])))
    # a > K: all b qualify
    outside += mu / t * B1[-1] - B0[-1]
    return inside + outside


def theoretical_exponent(gamma: float) -> float:
    """Scaling exponent of the erased-fraction upper bound as a function of ``gamma``."""
    if gamma <= 1:
        raise ValueError(f"gamma must be > 1, got {gamma}")
    if gamma <= 1.5:
        return 1.0 / gamma - 1.0
    if gamma <= 2.0:
        return 4.0 / gamma - 3.0
    return -1.0


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    stderr: float
    points: int


def loglog_fit(x, y, sigma=None) -> LogLogFit:
    """OLS (or weighted, given ``sigma`` of ``log y``) fit of ``log y`` on ``log x``."""
    lx = np.log(np.asarray(x, dtype=np.float64))
    ly = np.log(np.asarray(y, dtype=np.float64))
    k = lx.size
    if k < 2:
        raise ValueError("need at least two points")
    if sigma is None:
        w = np.ones(k)
    else:
        w = 1.0 / np.asarray(sigma, dtype=np.float64) ** 2
    X = np.column_stack((np.ones(k), lx))
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    beta = cov @ (XtW @ ly)
    resid = ly - X @ beta
    if sigma is None:
        dof = k - 2
        s2 = float(resid @ resid) / dof if dof > 0 else 0.0
        cov = cov * s2
    return LogLogFit(float(beta[1]), float(beta[0]), float(math.sqrt(max(cov[1, 1], 0.0))), k)


@dataclass(frozen=True)
class CLTDiagnostic:
    """Log-log slopes of upper quantiles of ``|L_n - mu n|`` and ``sum D_i^2``.

    ``deviation_slope`` is None when the deviation is identically zero at some
    ``n`` (``degenerate`` is then set).
    """

    deviation_slope: float | None
    sum_squares_slope: float
    n_values: tuple
    degenerate: bool


def clt_scaling_diagnostic(
    samples: Sequence[tuple[int, int, int]], mu: float, quantile: float = 0.9
) -> CLTDiagnostic:
    """Fit growth exponents of ``|L_n - mu n|`` and ``sum D_i^2``.

    ``samples`` holds ``(n, L_n, sum D_i^2)`` triples, many per ``n``.
    """
    by_n: dict[int, list] = {}
    for n, L, s2 in samples:
        by_n.setdefault(int(n), []).append((float(L), float(s2)))
    if len(by_n) < 4:
        raise ValueError(f"need at least 4 distinct n values, got {len(by_n)}")
    ns = np.array(sorted(by_n), dtype=np.float64)
    dev_q, sq_q = [], []
    for n in sorted(by_n):
        arr = np.array(by_n[n])
        dev_q.append(np.quantile(np.abs(arr[:, 0] - mu * n), quantile))
        sq_q.append(np.quantile(arr[:, 1], quantile))
    dev_q = np.array(dev_q)
    sq_slope = loglog_fit(ns, sq_q).slope
    if np.any(dev_q <= 0):
        return CLTDiagnostic(None, sq_slope, tuple(int(n) for n in ns), True)
    return CLTDiagnostic(loglog_fit(ns, dev_q).slope, sq_slope, tuple(int(n) for n in ns), False)


@dataclass(frozen=True)
class BoundReport:
    lemma1_bound: float
    pairwise_exp_sum: float
    identity_value: float
    second_moment_ratio: float
    n: int
    L_n: int

    def to_dict(self) -> dict:
        return asdict(self)


def bound_report(seq: DegreeSequence, no_edge_probs=None) -> BoundReport:
    """Evaluate every bound for ``seq``.

    ``identity_value`` uses the exact no-edge probabilities when given and the
    exponential surrogate `exp_bound_term` otherwise.
    """
    L = seq.L_n
    pes = pairwise_exp_sum(seq, L)
    if no_edge_probs is None:
        identity = 1.0 - seq.n**2 / L + pes / L
    else:
        identity = erased_identity_rhs(seq, no_edge_probs)
    return BoundReport(
        lemma1_bound=bound_lemma1(seq),
        pairwise_exp_sum=pes,
        identity_value=identity,
        second_moment_ratio=seq.sum_squares / L**2,
        n=seq.n,
        L_n=L,
    )
