import dataclasses
import json
import math

import numpy as np
import pytest

from erasedcm import experiment
from erasedcm.experiment import (
    FIELDS,
    SweepPlan,
    TrialRecord,
    derive_seed,
    fit_all,
    fit_exponent,
    growth_trend,
    read_records,
    run_sweep,
    run_trial,
    write_fits,
    write_plot_data,
    write_records,
)


def synthetic(gamma, ns, fraction, reps=10):
    """Records whose erased fraction is ``fraction(n)`` exactly."""
    out = []
    for n in ns:
        for r in range(reps):
            out.append(
                TrialRecord(
                    gamma=gamma, n=n, replication_index=r, seed=r, L_n=2 * n, sum_squares=4 * n,
                    self_loops=0, excess_multiplicity=0, total_erased=0,
                    erased_fraction=fraction(n), lemma1_bound=1.0, pairwise_exp_term=0.0,
                    wall_time_ms=0.0,
                )
            )
    return out


def test_derive_seed_pure_and_distinct():
    assert derive_seed(0, 2.5, 10, 0) == derive_seed(0, 2.5, 10, 0)
    seeds = {derive_seed(m, g, n, r) for m in (0, 1) for g in (1.2, 2.5) for n in (10, 100) for r in range(5)}
    assert len(seeds) == 40
    assert all(0 <= s < 2**64 for s in seeds)


def test_run_trial_deterministic():
    a = run_trial(2.5, 10, 1, seed=42)
    b = run_trial(2.5, 10, 1, seed=42)
    assert a == b
    assert a.total_erased == a.self_loops + a.excess_multiplicity
    assert a.erased_fraction == pytest.approx(a.total_erased / a.L_n)
    with pytest.raises(ValueError):
        run_trial(2.5, 1, 1, seed=0)


def test_run_trial_fields_consistent():
    rec = run_trial(1.5, 10**4, 1, seed=3)
    assert 0 <= rec.erased_fraction <= 0.5
    assert rec.L_n % 2 == 0
    assert rec.lemma1_bound > 0
    assert rec.pairwise_exp_term >= 0
    assert rec.wall_time_ms >= 0


@pytest.mark.slow
def test_total_erased_bounded_at_gamma_three():
    totals = [run_trial(3.0, 10**5, 1, derive_seed(7, 3.0, 10**5, r)).total_erased for r in range(100)]
    assert np.mean(totals) < 50


def test_plan_validation():
    with pytest.raises(ValueError):
        SweepPlan((), (10,), 1)
    with pytest.raises(ValueError):
        SweepPlan((2.5,), (), 1)
    with pytest.raises(ValueError):
        SweepPlan((2.5,), (100, 10), 1)
    with pytest.raises(ValueError):
        SweepPlan((0.9,), (10,), 1)
    with pytest.raises(ValueError):
        SweepPlan((2.5,), (10,), 0)
    with pytest.raises(ValueError):
        SweepPlan((2.5,), (10,), 1, master_seed=-1)


def test_sweep_counts_and_seeds(tmp_path):
    plan = SweepPlan((2.5,), (50,), 3, output_path=str(tmp_path / "s.csv"))
    recs = run_sweep(plan, threads=1)
    assert len(recs) == 3
    assert len({r.seed for r in recs}) == 3
    assert [r.replication_index for r in recs] == [0, 1, 2]


def test_sweep_rerun_byte_identical_except_timing(tmp_path):
    def run(name):
        plan = SweepPlan((1.5, 2.5), (20, 200), 4, master_seed=11, output_path=str(tmp_path / name))
        return run_sweep(plan, threads=1)

    a, b = run("a.csv"), run("b.csv")
    assert a == b  # wall_time_ms is excluded from comparison
    strip = lambda p: [row.rsplit(",", 1)[0] for row in (tmp_path / p).read_text().splitlines()]
    assert strip("a.csv") == strip("b.csv")


def test_sweep_threads_do_not_change_results(tmp_path):
    base = dict(gamma_grid=(1.3, 2.5), n_grid=(30, 300), replications=3, master_seed=5)
    one = run_sweep(SweepPlan(**base, output_path=str(tmp_path / "1.csv")), threads=1)
    two = run_sweep(SweepPlan(**base, output_path=str(tmp_path / "2.csv")), threads=2)
    assert one == two


def test_unwritable_path_fails_before_work(tmp_path, monkeypatch):
    calls = []
    monkeypatch.setattr(experiment, "run_trial", lambda *a, **k: calls.append(a))
    plan = SweepPlan((2.5,), (10,), 2, output_path=str(tmp_path / "missing" / "s.csv"))
    with pytest.raises(OSError):
        run_sweep(plan, threads=1)
    assert calls == []


def test_resume_after_interrupt(tmp_path):
    plan = SweepPlan((1.5, 2.5), (20, 200), 5, master_seed=3, output_path=str(tmp_path / "full.csv"))
    full = run_sweep(plan, threads=1)

    part = tmp_path / "part.csv"
    lines = (tmp_path / "full.csv").read_text().splitlines()
    # keep 7 complete rows and a torn final row
    part.write_text("\n".join(lines[:8]) + "\n" + lines[8][:10])
    resumed = run_sweep(dataclasses.replace(plan, output_path=str(part)), threads=1)
    assert resumed == full
    kept = {r.key: r.wall_time_ms for r in read_records(tmp_path / "full.csv")}
    again = {r.key: r.wall_time_ms for r in read_records(part)}
    # the seven surviving rows were reused, not recomputed
    assert sum(again[k] == kept[k] for k in kept) >= 7


def test_records_roundtrip(tmp_path):
    recs = [run_trial(1.7, 100, 2, seed=s, replication_index=s) for s in range(3)]
    write_records(tmp_path / "r.csv", reversed(recs))
    back = read_records(tmp_path / "r.csv")
    assert back == recs
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == ",".join(FIELDS)


def test_fit_exponent_exact_power_law():
    recs = synthetic(2.5, [10**3, 10**4, 10**5, 10**6], lambda n: 3.0 * n**-0.5)
    fit = fit_exponent(recs)
    assert fit.fitted_slope == pytest.approx(-0.5, abs=1e-12)
    assert fit.slope_stderr == pytest.approx(0.0, abs=1e-10)
    assert fit.theoretical_slope == -1.0
    assert fit.points_used == 4


def test_fit_exponent_drops_zero_levels():
    recs = synthetic(3.0, [10, 100, 1000, 10**4], lambda n: 0.0 if n == 10**4 else 1 / n)
    with pytest.warns(UserWarning, match="dropping"):
        fit = fit_exponent(recs)
    assert fit.points_used == 3
    assert fit.fitted_slope == pytest.approx(-1.0)
    recs = synthetic(3.0, [10, 100, 1000], lambda n: 0.0 if n > 10 else 0.1)
    with pytest.warns(UserWarning), pytest.raises(ValueError, match="fewer than 3"):
        fit_exponent(recs)


def test_fit_exponent_errors():
    with pytest.raises(ValueError):
        fit_exponent(synthetic(2.5, [10, 100, 1000], lambda n: 1 / n, reps=3))
    mixed = synthetic(2.5, [10, 100, 1000], lambda n: 1 / n) + synthetic(3.0, [10, 100, 1000], lambda n: 1 / n)
    with pytest.raises(ValueError):
        fit_exponent(mixed)
    assert [f.gamma for f in fit_all(mixed)] == [2.5, 3.0]


def test_growth_trend_flat():
    rng = np.random.default_rng(0)
    recs = []
    for n in (10**3, 10**4, 10**5):
        for r in range(50):
            recs.append(dataclasses.replace(synthetic(2.5, [n], lambda n: 0.1, reps=1)[0],
                                            replication_index=r, total_erased=int(rng.poisson(5)) + 1))
    fit = growth_trend(recs)
    assert abs(fit.slope) < 3 * fit.stderr


def test_fits_and_plot_files(tmp_path):
    recs = synthetic(2.5, [10**2, 10**3, 10**4], lambda n: 2.0 / n)
    fits = fit_all(recs)
    write_fits(tmp_path / "f.json", fits)
    data = json.loads((tmp_path / "f.json").read_text())
    assert data[0]["theoretical_slope"] == -1.0
    assert set(data[0]) == {"gamma", "fitted_slope", "slope_stderr", "theoretical_slope", "intercept", "points_used"}

    (path,) = write_plot_data(tmp_path / "plot", recs)
    lines = [l for l in path.read_text().splitlines() if l and not l.startswith("#")]
    assert len(lines) == 6
    x, y = map(float, lines[1].split())
    assert x == pytest.approx(3.0)
    assert y == pytest.approx(math.log10(2e-3))
    xr, yr = map(float, lines[5].split())
    assert yr == pytest.approx(math.log10(2e-2) - 2.0)
