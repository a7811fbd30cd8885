"""Exact expectations over all perfect matchings of a small degree sequence."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .degree_model import DegreeSequence
from .estimators import no_edge_upper_bound

__all__ = [
    "MAX_STUBS",
    "ExactResult",
    "double_factorial",
    "iter_matchings",
    "enumerate_exact",
    "bound_checks",
]

MAX_STUBS = 14


def double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def iter_matchings(L: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Yield every perfect matching of stubs ``0..L-1``.

    The lowest free stub is always matched first, and its partner runs in
    increasing order, so the output order is fixed.
    """
    if L % 2:
        raise ValueError(f"cannot pair an odd number of stubs ({L})")

    def rec(free):
        if not free:
            yield ()
            return
        first = free[0]
        for k in range(1, len(free)):
            rest = free[1:k] + free[k + 1 :]
            for tail in rec(rest):
                yield ((first, free[k]),) + tail

    yield from rec(tuple(range(L)))


def _fmt(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class ExactResult:
    """Exact expectations under the uniform matching.

    ``no_edge_prob`` is keyed by 0-based ``(i, j)`` with ``i <= j``; the
    diagonal entry is the probability that ``i`` carries no self-loop.
    ``expected_erased_ordered`` is ``(1/L_n) sum_{i,j} E[E_ij - 1{E_ij > 0}]``
    over ordered pairs with ``E_ii`` = twice the self-loop count at ``i``.
    """

    degrees: tuple
    matching_count: int
    expected_self_loops: Fraction
    expected_excess: Fraction
    expected_erased_fraction: Fraction
    expected_erased_ordered: Fraction
    no_edge_prob: dict

    @property
    def L_n(self) -> int:
        return sum(self.degrees)

    def no_edge_matrix(self) -> np.ndarray:
        n = len(self.degrees)
        p = np.empty((n, n))
        for (i, j), q in self.no_edge_prob.items():
            p[i, j] = p[j, i] = float(q)
        return p

    def to_dict(self) -> dict:
        """JSON-ready form: rationals as ``"p/q"`` strings, node labels 1-based."""
        return {
            "degrees": list(self.degrees),
            "L_n": self.L_n,
            "matching_count": self.matching_count,
            "expected_self_loops": _fmt(self.expected_self_loops),
            "expected_excess": _fmt(self.expected_excess),
            "expected_erased_fraction": _fmt(self.expected_erased_fraction),
            "expected_erased_ordered": _fmt(self.expected_erased_ordered),
            "no_edge_prob": {f"{i + 1},{j + 1}": _fmt(q) for (i, j), q in sorted(self.no_edge_prob.items())},
        }


def enumerate_exact(seq: DegreeSequence) -> ExactResult:
    """Average erasure statistics over all ``(L_n - 1)!!`` matchings.

    Raises
    ------
    ValueError
        If ``L_n`` exceeds `MAX_STUBS`.
    """
    L = seq.L_n
    if L > MAX_STUBS:
        raise ValueError(f"L_n = {L} exceeds the enumeration limit L_n <= {MAX_STUBS}")
    if L % 2:
        raise ValueError(f"degree sum {L} is odd")
    n = seq.n
    owner = [i for i, d in enumerate(seq.degrees.tolist()) for _ in range(d)]
    keys = [(i, j) for i in range(n) for j in range(i, n)]
    no_edge = dict.fromkeys(keys, 0)
    loops_total = excess_total = ordered_total = count = 0

    for matching in iter_matchings(L):
        count += 1
        mult: dict[tuple[int, int], int] = {}
        for a, b in matching:
            i, j = owner[a], owner[b]
            key = (i, j) if i <= j else (j, i)
            mult[key] = mult.get(key, 0) + 1
        for key in keys:
            if key not in mult:
                no_edge[key] += 1
        for (i, j), c in mult.items():
            if i == j:
                loops_total += c
                ordered_total += 2 * c - 1
            else:
                excess_total += c - 1
                ordered_total += 2 * (c - 1)

    loops = Fraction(loops_total, count)
    excess = Fraction(excess_total, count)
    return ExactResult(
        degrees=tuple(seq.degrees.tolist()),
        matching_count=count,
        expected_self_loops=loops,
        expected_excess=excess,
        expected_erased_fraction=(loops + excess) / L if L else Fraction(0),
        expected_erased_ordered=Fraction(ordered_total, count * L) if L else Fraction(0),
        no_edge_prob={k: Fraction(v, count) for k, v in no_edge.items()},
    )


def bound_checks(exact: ExactResult, running: bool = False) -> list[tuple[str, bool, str]]:
    """Compare exact expectations with the self-loop, multi-edge and no-edge bounds.

    Returns ``(name, passed, detail)`` triples; no-edge checks cover every
    ordered pair ``i != j`` meeting ``L_n > 2 D_i + 1``.
    """
    d = exact.degrees
    L = exact.L_n
    out = []
    if L == 0:
        return out
    ratio = Fraction(sum(x * x for x in d), L)
    out.append(
        (
            "self_loops",
            exact.expected_self_loops <= ratio,
            f"E[S_n]={_fmt(exact.expected_self_loops)} <= sum D^2/L_n={_fmt(ratio)}",
        )
    )
    out.append(
        (
            "multi_edges",
            exact.expected_excess <= 2 * ratio**2,
            f"E[M_n]={_fmt(exact.expected_excess)} <= 2(sum D^2/L_n)^2={_fmt(2 * ratio**2)}",
        )
    )
    for i in range(len(d)):
        for j in range(len(d)):
            if i == j or L <= 2 * d[i] + 1:
                continue
            p = exact.no_edge_prob[(min(i, j), max(i, j))]
            b = no_edge_upper_bound(d[i], d[j], L, running=running)
            out.append(
                (
                    f"no_edge[{i + 1},{j + 1}]",
                    float(p) <= b + 1e-12,
                    f"P(E_ij=0)={_fmt(p)}={float(p):.6g} <= {b:.6g}",
                )
            )
    return out
