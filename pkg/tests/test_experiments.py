import math
from fractions import Fraction

import pytest

from oracles import ip_success_by_enumeration
from nlbox.correlations import (
    CorrelationModel,
    LocalDeterministic,
    NoisyPR,
    PerfectPR,
    Quantum,
    SharedRandomness,
    chsh_score_exact,
    enumerate_local_strategies,
)
from nlbox.errors import InvalidArgumentError
from nlbox.experiments import (
    SWEEP_COLUMNS,
    analytic_ip_success,
    chsh_monte_carlo,
    local_bound_report,
    no_signalling_test,
    noisy_sweep,
    sweep_to_csv,
)


class SignallingBox(CorrelationModel):
    """Bob's output copies Alice's input: a box that signals from A to B."""

    descriptor = "mock:signalling"

    def joint(self, x, y):
        probs = [Fraction(0)] * 4
        for alpha in (0, 1):
            probs[2 * alpha + x] = Fraction(1, 2)
        return tuple(probs)


def test_chsh_pr_exact_four():
    est = chsh_monte_carlo(PerfectPR(), 10_000, seed=1)
    assert est.score == 4.0
    assert est.std_error == 0.0
    assert est.wins == (10_000,) * 4


def test_chsh_quantum_close_to_tsirelson():
    est = chsh_monte_carlo(Quantum.canonical(), 1_000_000, seed=2)
    assert abs(est.score - 3.4142) < 0.005
    assert est.std_error == pytest.approx(math.sqrt(4 * 0.8536 * 0.1464 / 1e6), rel=0.01)


def test_chsh_best_local_exactly_three():
    best = max(enumerate_local_strategies(), key=lambda pair: pair[1])[0]
    est = chsh_monte_carlo(best, 10_000, seed=3)
    assert est.score == 3.0


def test_chsh_deterministic_and_worker_independent():
    a = chsh_monte_carlo(Quantum.canonical(), 200_000, seed=9, workers=1)
    b = chsh_monte_carlo(Quantum.canonical(), 200_000, seed=9, workers=2)
    c = chsh_monte_carlo(Quantum.canonical(), 200_000, seed=10)
    assert a == b
    assert a != c


def test_chsh_estimator_unbiased_over_seeds():
    models = [Quantum.canonical(), NoisyPR(0.8), PerfectPR(),
              SharedRandomness(((Fraction(1, 2), LocalDeterministic(0, 0, 0, 0)),
                                (Fraction(1, 2), LocalDeterministic(0, 1, 1, 0))))]
    for model in models:
        ests = [chsh_monte_carlo(model, 10_000, seed=s) for s in range(100)]
        mean = sum(e.score for e in ests) / len(ests)
        combined = math.sqrt(sum(e.std_error**2 for e in ests)) / len(ests)
        assert abs(mean - float(chsh_score_exact(model))) <= 3 * combined + 1e-12


def test_chsh_rejects_zero_trials():
    with pytest.raises(InvalidArgumentError):
        chsh_monte_carlo(PerfectPR(), 0, seed=0)


@pytest.mark.parametrize("model", [PerfectPR(), Quantum.canonical()], ids=lambda m: m.descriptor)
def test_no_signalling_passes(model):
    rep = no_signalling_test(model, 1_000_000, seed=4)
    assert rep.passed
    assert rep.max_tv < 0.01
    assert len(rep.checks) == 4


def test_no_signalling_catches_mock():
    rep = no_signalling_test(SignallingBox(), 10_000, seed=5)
    assert not rep.passed
    bob = [c for c in rep.checks if c.site == "bob"]
    assert all(c.tv_distance == 1.0 for c in bob)


def test_no_signalling_needs_trials():
    with pytest.raises(InvalidArgumentError):
        no_signalling_test(PerfectPR(), 100, seed=0)


def test_analytic_formula_is_exact_against_enumeration():
    for p in (Fraction(1, 2), Fraction(3, 4), Fraction(17, 20), Fraction(9, 10), Fraction(19, 20), Fraction(1)):
        for n in range(1, 9):
            assert analytic_ip_success(p, n) == ip_success_by_enumeration(p, n)


def test_sweep_edges():
    rows = noisy_sweep([1.0, 0.5], [1, 3], trials=20_000, seed=6)
    assert [(r.p, r.N) for r in rows] == [(1.0, 1), (1.0, 3), (0.5, 1), (0.5, 3)]
    for r in rows[:2]:
        assert r.empirical_success == 1.0 and r.analytic_success == 1.0
    for r in rows[2:]:
        assert r.analytic_success == 0.5
        assert r.within(3)


def test_sweep_09_n4():
    (row,) = noisy_sweep([0.9], [4], trials=100_000, seed=7)
    assert row.analytic_success == pytest.approx(0.7048)
    assert row.within(3)


def test_sweep_mostly_consistent():
    rows = noisy_sweep([0.6, 0.7, 0.8, 0.9], [1, 2, 3, 5], trials=5_000, seed=8)
    assert sum(r.within(3) for r in rows) >= 0.95 * len(rows)


def test_sweep_deterministic_and_worker_independent():
    a = noisy_sweep([0.8], [2, 3], trials=3_000, seed=1, workers=1)
    b = noisy_sweep([0.8], [2, 3], trials=3_000, seed=1, workers=2)
    assert a == b


def test_sweep_rejects_low_p():
    with pytest.raises(InvalidArgumentError):
        noisy_sweep([0.4], [1], trials=10, seed=0)


def test_sweep_csv_columns():
    text = sweep_to_csv(noisy_sweep([0.9], [2], trials=100, seed=0))
    header, row, _ = text.split("\n")
    assert tuple(header.split(",")) == SWEEP_COLUMNS
    assert row.startswith("0.9,2,100,")


def test_local_bound_report():
    rep = local_bound_report()
    assert rep["max"] == "3"
    assert rep["min"] == "1"
    assert len(rep["strategies"]) == 16
    assert len(rep["argmax"]) == 8
    assert "local:0000" in rep["argmax"]
