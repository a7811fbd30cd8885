"""Discrete Pareto degree law and i.i.d. degree sequences.

The degree law has tail ``P(D >= k) = (k_min / k) ** gamma`` for integer
``k >= k_min`` and is sampled exactly by inverse transform,
``floor(k_min * U ** (-1 / gamma))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MAX_DEGREE",
    "DegreeDistribution",
    "DegreeSequence",
    "tail_prob",
    "pmf",
    "power_tail_sum",
    "mean_degree",
    "degree_quantile",
    "sample_degree",
    "sample_degrees",
    "sample_sequence",
]

# Draws above this are resampled. P(D > MAX_DEGREE) <= 2**-31 for gamma > 1.
MAX_DEGREE = 2**31 - 1


@dataclass(frozen=True)
class DegreeDistribution:
    """Regularly varying degree law with a constant slowly varying part.

    Parameters
    ----------
    gamma : float
        Tail exponent, must exceed 1 so the mean is finite.
    k_min : int
        Smallest degree in the support.
    """

    gamma: float
    k_min: int = 1

    def __post_init__(self):
        if not (isinstance(self.gamma, (int, float)) and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be a finite real, got {self.gamma!r}")
        if self.gamma <= 1:
            raise ValueError(f"gamma must be > 1 for a finite mean, got {self.gamma}")
        if int(self.k_min) != self.k_min or self.k_min < 1:
            raise ValueError(f"k_min must be an integer >= 1, got {self.k_min!r}")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "k_min", int(self.k_min))

    def tail(self, k):
        return tail_prob(self, k)

    def pmf(self, k):
        return pmf(self, k)

    @property
    def mean(self) -> float:
        return mean_degree(self)


def tail_prob(dist: DegreeDistribution, k):
    """``P(D >= k)``; scalar in, float out, array in, array out."""
    k_arr = np.asarray(k, dtype=np.float64)
    if np.any(k_arr < 1):
        raise ValueError("k must be >= 1")
    out = np.where(
        k_arr <= dist.k_min,
        1.0,
        np.power(dist.k_min / np.maximum(k_arr, 1.0), dist.gamma),
    )
    if out.ndim == 0:
        return float(out)
    return out


def pmf(dist: DegreeDistribution, k):
    """``P(D == k)``, zero below ``k_min``."""
    k_arr = np.asarray(k, dtype=np.float64)
    below = k_arr < dist.k_min
    k_safe = np.maximum(k_arr, 1.0)
    out = np.where(below, 0.0, tail_prob(dist, k_safe) - tail_prob(dist, k_safe + 1))
    if out.ndim == 0:
        return float(out)
    return out


def power_tail_sum(gamma: float, start: int) -> float:
    """Return ``sum_{k >= start} k ** -gamma`` for ``gamma > 1``.

    Terms up to a cutoff are summed exactly; the remainder uses the
    Euler-Maclaurin expansion, whose truncation error at the cutoff is far
    below double precision.
    """
    if gamma <= 1:
        raise ValueError("series diverges for gamma <= 1")
    if start < 1:
        raise ValueError("start must be >= 1")
    cutoff = max(start, 1000)
    head = 0.0
    if cutoff > start:
        ks = np.arange(start, cutoff, dtype=np.float64)
        head = math.fsum(ks ** -gamma)
    return head + _euler_maclaurin_remainder(gamma, cutoff)


def _euler_maclaurin_remainder(gamma: float, m: float) -> float:
    # sum_{k >= m} k^-g ~ m^(1-g)/(g-1) + m^-g/2 + g m^(-g-1)/12 - g(g+1)(g+2) m^(-g-3)/720
    g = gamma
    return (
        m ** (1 - g) / (g - 1)
        + 0.5 * m**-g
        + g * m ** (-g - 1) / 12.0
        - g * (g + 1) * (g + 2) * m ** (-g - 3) / 720.0
        + g * (g + 1) * (g + 2) * (g + 3) * (g + 4) * m ** (-g - 5) / 30240.0
    )


def mean_degree(dist: DegreeDistribution) -> float:
    """Mean of the degree law, ``sum_{k >= 1} P(D >= k)``.

    Sums the first ``10**6 * k_min`` tail terms exactly and adds the
    analytic remainder.
    """
    g, kmin = dist.gamma, dist.k_min
    cutoff = 10**6 * kmin
    ks = np.arange(kmin + 1, cutoff, dtype=np.float64)
    head = math.fsum((kmin / ks) ** g)
    rest = kmin**g * _euler_maclaurin_remainder(g, float(cutoff))
    # k = 1..k_min all have tail probability 1
    return kmin + head + rest


def _floor_pareto(dist: DegreeDistribution, u):
    with np.errstate(over="ignore", divide="ignore"):
        return np.floor(dist.k_min * np.power(u, -1.0 / dist.gamma))


def degree_quantile(dist: DegreeDistribution, u):
    """Inverse transform ``floor(k_min * u**(-1/gamma))`` for ``u`` in (0, 1]."""
    out = _floor_pareto(dist, np.asarray(u, dtype=np.float64))
    if out.ndim == 0:
        return int(out) if out <= MAX_DEGREE else float(out)
    return out


def sample_degree(dist: DegreeDistribution, rng: np.random.Generator) -> int:
    """Draw one degree by inverse transform."""
    while True:
        u = 1.0 - rng.random()  # in (0, 1]
        d = float(_floor_pareto(dist, u))
        if d <= MAX_DEGREE:
            return int(d)


def sample_degrees(dist: DegreeDistribution, size: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorised `sample_degree`, returns an int64 array of length ``size``."""
    u = 1.0 - rng.random(size)
    d = _floor_pareto(dist, u)
    bad = ~(d <= MAX_DEGREE)
    while bad.any():
        d[bad] = _floor_pareto(dist, 1.0 - rng.random(int(bad.sum())))
        bad = ~(d <= MAX_DEGREE)
    return d.astype(np.int64)


def _exact_sum_squares(degrees: np.ndarray) -> int:
    # split d = hi * 2**16 + lo so every partial sum fits in int64
    d = np.asarray(degrees, dtype=np.int64)
    hi, lo = d >> 16, d & 0xFFFF
    s_hh = int(np.sum(hi * hi))
    s_hl = int(np.sum(hi * lo))
    s_ll = int(np.sum(lo * lo))
    return (s_hh << 32) + (s_hl << 17) + s_ll


@dataclass(frozen=True)
class DegreeSequence:
    """Degrees ``D_1..D_n`` with cached ``L_n`` and sum of squares.

    Use `from_draws` to apply the parity fix, or `from_degrees` for a given
    sequence. Node ``i`` of the sequence is index ``i`` of ``degrees``.
    """

    degrees: np.ndarray
    evenized: bool = False
    sum_degrees: int = field(init=False)
    sum_squares: int = field(init=False)

    def __post_init__(self):
        d = np.array(self.degrees, dtype=np.int64)
        if d.ndim != 1:
            raise ValueError("degrees must be one-dimensional")
        if d.size and d.min() < 0:
            raise ValueError("degrees must be non-negative")
        d.setflags(write=False)
        object.__setattr__(self, "degrees", d)
        object.__setattr__(self, "sum_degrees", int(d.sum()))
        object.__setattr__(self, "sum_squares", _exact_sum_squares(d))

    @classmethod
    def from_draws(cls, draws) -> "DegreeSequence":
        """Build a graphical sequence, bumping the last degree if the sum is odd."""
        d = np.array(draws, dtype=np.int64)
        if d.size == 0:
            raise ValueError("need at least one draw")
        evenized = bool(d.sum() % 2)
        if evenized:
            d[-1] += 1
        return cls(d, evenized=evenized)

    @classmethod
    def from_degrees(cls, degrees) -> "DegreeSequence":
        seq = cls(degrees)
        if seq.sum_degrees % 2:
            raise ValueError(f"degree sum {seq.sum_degrees} is odd")
        return seq

    @property
    def n(self) -> int:
        return int(self.degrees.size)

    @property
    def L_n(self) -> int:
        return self.sum_degrees

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, DegreeSequence):
            return NotImplemented
        return self.evenized == other.evenized and np.array_equal(self.degrees, other.degrees)

    __hash__ = None


def sample_sequence(n: int, dist: DegreeDistribution, rng: np.random.Generator) -> DegreeSequence:
    """Draw ``n`` i.i.d. degrees and make their sum even."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return DegreeSequence.from_draws(sample_degrees(dist, n, rng))
