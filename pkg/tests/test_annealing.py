import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asofs.annealing import (
    AnnealSchedule,
    anneal,
    boltzmann_p,
    neighbor_budget,
    perturb,
)
from asofs.errors import ConfigError
from asofs.evaluation import ClassifierSpec, EvaluationContext, evaluate


@pytest.fixture(scope="module")
def ctx():
    rng = np.random.default_rng(11)
    X = rng.random((60, 8))
    y = (X[:, 0] + X[:, 3] > 1).astype(int)
    return EvaluationContext(X[:45], y[:45], X[45:], y[45:], ClassifierSpec(k=3))


def test_boltzmann_examples():
    assert boltzmann_p(0.3, 0.3, 2.0) == 1.0
    assert boltzmann_p(1.5, 0.5, 1.0) == pytest.approx(0.367879441171442, rel=1e-14)
    assert boltzmann_p(0.2, 0.5, 1.0) == 1.0
    assert boltzmann_p(0.9, 0.1, 1e12) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        boltzmann_p(0.1, 0.0, 0.0)


def test_perturb_single_bit():
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert perturb([True], rng).tolist() == [False]


@given(st.lists(st.booleans(), min_size=1, max_size=64), st.integers(0, 2**32 - 1))
def test_perturb_changes_something(bits, seed):
    out = perturb(bits, np.random.default_rng(seed))
    assert len(out) == len(bits)
    assert (out != np.array(bits)).sum() >= 1


def test_perturb_mean_step():
    # Binomial(n, 1/n) flips, plus one forced flip when none occurred:
    # E = 1 + (1 - 1/n)^n, about 1.366 at n = 100 (binomial sd/sqrt(10k) ~ 0.007).
    rng = np.random.default_rng(1)
    base = np.zeros(100, dtype=bool)
    steps = [int(perturb(base, rng).sum()) for _ in range(10_000)]
    assert abs(np.mean(steps) - (1 + 0.99**100)) <= 0.03


def test_schedule_validation():
    with pytest.raises(ConfigError):
        AnnealSchedule(10, cooling_factor=1.0)
    with pytest.raises(ConfigError):
        AnnealSchedule(10, stop_temp=0)
    with pytest.raises(ConfigError):
        AnnealSchedule(10, acceptance="greedy")
    assert AnnealSchedule.for_features(34).initial_temp == 68


def test_budget_example():
    assert neighbor_budget(AnnealSchedule.for_features(34)) == 59
    assert neighbor_budget(AnnealSchedule(5.0, stop_temp=5.0)) == 0


def test_empty_walk(ctx):
    start = evaluate(ctx, np.ones(8, bool))
    out = anneal(start.mask, start, ctx, AnnealSchedule(1.0, stop_temp=2.0),
                 np.random.default_rng(0))
    assert out.neighbors_evaluated == 0
    assert out.mask.tolist() == start.mask.tolist() and out.value == start


@pytest.mark.parametrize("seed", range(10))
def test_walk_contract(ctx, seed):
    rng = np.random.default_rng(seed)
    start = evaluate(ctx, rng.random(8) < 0.5, rng)
    sched = AnnealSchedule.for_features(8, stop_temp=0.5)
    out = anneal(start.mask, start, ctx, sched, rng)
    assert out.value.fitness <= start.fitness
    assert out.neighbors_evaluated == neighbor_budget(sched)
    assert evaluate(ctx, out.mask).fitness == out.value.fitness


def test_better_neighbor_always_accepted(monkeypatch):
    import asofs.annealing as an
    from asofs.evaluation import FitnessValue

    # Every neighbour improves on the previous best.
    seq = iter(np.linspace(0.9, 0.1, 50))

    def fake_eval(ctx, mask, rng=None):
        return FitnessValue(float(next(seq)), 0.0, int(mask.sum()), mask)

    monkeypatch.setattr(an, "evaluate", fake_eval)
    start = FitnessValue(1.0, 0.0, 1, np.array([1, 0, 0], bool))
    out = an.anneal(start.mask, start, None, AnnealSchedule(4.0, stop_temp=1.0),
                    np.random.default_rng(0))
    assert out.neighbors_evaluated == neighbor_budget(AnnealSchedule(4.0, stop_temp=1.0))
    assert out.value.fitness == pytest.approx(np.linspace(0.9, 0.1, 50)[out.neighbors_evaluated - 1])
    assert out.accepted_worse == 0


def test_acceptance_frequency(monkeypatch):
    import asofs.annealing as an
    from asofs.evaluation import FitnessValue

    gap, temp = 0.7, 1.0
    trials, accepted = 10_000, 0
    rng = np.random.default_rng(3)

    def fake_eval(ctx, mask, rng=None):
        return FitnessValue(gap, 0.0, 1, mask)

    monkeypatch.setattr(an, "evaluate", fake_eval)
    start = FitnessValue(0.0, 0.0, 1, np.array([1, 0], bool))
    # one neighbour per walk at exactly `temp`
    sched = AnnealSchedule(temp, cooling_factor=0.5, stop_temp=temp * 0.75)
    for _ in range(trials):
        accepted += an.anneal(start.mask, start, None, sched, rng).accepted_worse
    assert abs(accepted / trials - math.exp(-gap / temp)) <= 0.05


def test_current_reference_mode(ctx):
    rng = np.random.default_rng(5)
    start = evaluate(ctx, np.ones(8, bool))
    sched = AnnealSchedule.for_features(8, acceptance="current")
    out = anneal(start.mask, start, ctx, sched, rng)
    assert out.value.fitness <= start.fitness


def test_reproducible(ctx):
    start = evaluate(ctx, np.array([1, 0, 1, 0, 1, 0, 1, 0], bool))
    sched = AnnealSchedule.for_features(8)
    a = anneal(start.mask, start, ctx, sched, np.random.default_rng(9))
    b = anneal(start.mask, start, ctx, sched, np.random.default_rng(9))
    assert a.mask.tobytes() == b.mask.tobytes()
    assert (a.neighbors_evaluated, a.accepted_worse) == (b.neighbors_evaluated, b.accepted_worse)
