import json
from fractions import Fraction

import pytest

from erasedcm.degree_model import DegreeSequence
from erasedcm.estimators import erased_identity_rhs
from erasedcm.oracle import (
    MAX_STUBS,
    bound_checks,
    double_factorial,
    enumerate_exact,
    iter_matchings,
)
from oracles import all_degree_sequences


def exact(*d):
    return enumerate_exact(DegreeSequence.from_degrees(list(d)))


def test_two_by_two():
    r = exact(2, 2)
    assert r.matching_count == 3
    assert r.expected_self_loops == Fraction(2, 3)
    assert r.expected_excess == Fraction(2, 3)
    assert r.expected_erased_fraction == Fraction(1, 3)
    assert r.no_edge_prob[(0, 1)] == Fraction(1, 3)
    assert r.no_edge_prob[(0, 0)] == Fraction(2, 3)


def test_single_edge():
    r = exact(1, 1)
    assert r.matching_count == 1
    assert r.expected_self_loops == r.expected_excess == r.expected_erased_fraction == 0


def test_forced_self_loop():
    r = exact(2)
    assert r.matching_count == 1
    assert r.expected_self_loops == 1
    assert r.expected_erased_fraction == Fraction(1, 2)


def test_iter_matchings_order_and_count():
    ms = list(iter_matchings(4))
    assert ms == [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]
    for L in range(0, 11, 2):
        ms = list(iter_matchings(L))
        assert len(ms) == double_factorial(L - 1)
        assert len(set(ms)) == len(ms)


def test_limit_enforced():
    with pytest.raises(ValueError, match=f"L_n <= {MAX_STUBS}"):
        exact(8, 8)


@pytest.mark.parametrize("degrees", all_degree_sequences(8))
def test_exact_invariants(degrees):
    r = exact(*degrees)
    L = sum(degrees)
    assert r.matching_count == double_factorial(L - 1)
    for q in [r.expected_self_loops, r.expected_excess, *r.no_edge_prob.values()]:
        assert r.matching_count % (q.denominator) == 0
    assert r.expected_erased_fraction == (r.expected_self_loops + r.expected_excess) / L


@pytest.mark.parametrize("degrees", all_degree_sequences(10))
def test_self_loop_and_multi_edge_bounds_hold(degrees):
    checks = {name: ok for name, ok, _ in bound_checks(exact(*degrees))}
    assert checks["self_loops"] and checks["multi_edges"]


@pytest.mark.parametrize("degrees", all_degree_sequences(10))
def test_erased_identity_is_exact_under_stub_convention(degrees):
    r = exact(*degrees)
    seq = DegreeSequence.from_degrees(list(degrees))
    n, L = len(degrees), sum(degrees)
    # exact rational evaluation of the identity
    total = sum((q if i == j else 2 * q) for (i, j), q in r.no_edge_prob.items())
    rhs = 1 - Fraction(n * n, L) + total / L
    assert rhs == r.expected_erased_ordered
    assert erased_identity_rhs(seq, r.no_edge_matrix()) == pytest.approx(float(rhs), abs=1e-12)


def test_ordered_convention_bracketing():
    # ordered-pair erased count lies between (S+M) and 2(S+M)
    for degrees in all_degree_sequences(10):
        r = exact(*degrees)
        assert r.expected_erased_fraction <= r.expected_erased_ordered <= 2 * r.expected_erased_fraction


def test_json_rationals():
    payload = exact(2, 2).to_dict()
    text = json.dumps(payload)
    assert payload["expected_erased_fraction"] == "1/3"
    assert payload["no_edge_prob"]["1,2"] == "1/3"
    assert payload["expected_self_loops"] == "2/3"
    assert json.loads(text)["matching_count"] == 3
    assert exact(1, 1).to_dict()["expected_excess"] == "0/1"
