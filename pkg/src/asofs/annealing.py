"""Simulated-annealing refinement of a single evaluated mask."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .evaluation import EvaluationContext, FitnessValue, evaluate

__all__ = ["AnnealSchedule", "AnnealOutcome", "anneal", "boltzmann_p", "perturb", "neighbor_budget"]

COOLING_FACTOR = 0.93


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric cooling from ``initial_temp`` until the temperature reaches ``stop_temp``.

    ``acceptance`` selects the reference for the Boltzmann test: ``"best"``
    compares a neighbour with the best fitness seen on the walk, ``"current"``
    with the walk's current solution (the textbook form).
    """

    initial_temp: float
    cooling_factor: float = COOLING_FACTOR
    stop_temp: float = 1.0
    acceptance: str = "best"

    def __post_init__(self):
        if not 0.0 < self.cooling_factor < 1.0:
            raise ConfigError(f"cooling_factor must lie in (0, 1), got {self.cooling_factor}")
        if not self.stop_temp > 0:
            raise ConfigError(f"stop_temp must be > 0, got {self.stop_temp}")
        if not self.initial_temp > 0:
            raise ConfigError(f"initial_temp must be > 0, got {self.initial_temp}")
        if self.acceptance not in ("best", "current"):
            raise ConfigError(f"acceptance must be 'best' or 'current', got {self.acceptance!r}")

    @classmethod
    def for_features(cls, n_features: int, **kwargs) -> "AnnealSchedule":
        return cls(initial_temp=2.0 * n_features, **kwargs)


@dataclass
class AnnealOutcome:
    mask: np.ndarray
    value: FitnessValue
    neighbors_evaluated: int = 0
    accepted_worse: int = 0


def neighbor_budget(schedule: AnnealSchedule) -> int:
    """Closed-form number of neighbours one walk evaluates."""
    if schedule.stop_temp >= schedule.initial_temp:
        return 0
    ratio = math.log(schedule.initial_temp / schedule.stop_temp)
    return math.ceil(ratio / math.log(1.0 / schedule.cooling_factor))


def boltzmann_p(cur_fitness: float, best_fitness: float, temp: float) -> float:
    if temp <= 0:
        raise ValueError(f"temperature must be positive, got {temp}")
    gap = cur_fitness - best_fitness
    if gap <= 0:
        return 1.0
    return math.exp(-gap / temp)


def perturb(mask, rng) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    n = len(mask)
    if n == 0:
        raise ValueError("cannot perturb an empty-length mask")
    flips = rng.random(n) < 1.0 / n
    if not flips.any():
        flips[rng.integers(n)] = True
    return mask ^ flips


def anneal(mask, value: FitnessValue, ctx: EvaluationContext,
           schedule: AnnealSchedule, rng) -> AnnealOutcome:
    """Anneal from an already evaluated mask and return the best mask seen."""
    best_mask = np.asarray(mask, dtype=bool).copy()
    best = value
    cur_mask, cur = best_mask, best
    out = AnnealOutcome(best_mask, best)
    k = 0
    temp = schedule.initial_temp
    while temp > schedule.stop_temp:
        cand = evaluate(ctx, perturb(cur_mask, rng), rng)
        out.neighbors_evaluated += 1
        if cand.fitness < best.fitness:
            cur_mask, cur = cand.mask, cand
            best_mask, best = cand.mask, cand
        else:
            ref = best.fitness if schedule.acceptance == "best" else cur.fitness
            if rng.random() < boltzmann_p(cand.fitness, ref, temp):
                if cand.fitness > ref:
                    out.accepted_worse += 1
                cur_mask, cur = cand.mask, cand
        k += 1
        temp = schedule.initial_temp * schedule.cooling_factor ** k
    out.mask, out.value = best_mask.copy(), best
    return out
