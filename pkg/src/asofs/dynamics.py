"""Atom dynamics on binary feature masks.

Positions are boolean masks, but every quantity derived from them (distances,
forces, accelerations, velocities) is real-valued. Bits are read as 0.0/1.0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError

__all__ = [
    "Atom",
    "DynamicsParams",
    "Population",
    "acceleration",
    "compute_masses",
    "constraint_force",
    "depth_eta",
    "drift_g",
    "h_bounds",
    "kbest_indices",
    "length_scale_sigma",
    "neighbor_count_K",
    "pair_force_scalar",
    "scaled_h",
    "total_force",
    "update_velocity",
]

# Equilibrium point of 2h^13 - h^7.
H_ZERO = 2.0 ** (-1.0 / 6.0)
DEFAULT_V_CAP = 6.0


@dataclass(frozen=True)
class DynamicsParams:
    """Coefficients of the interaction and constraint forces.

    Parameters
    ----------
    alpha : float
        Depth weight scaling the interaction force.
    beta : float
        Multiplier weight scaling the pull toward the global best.
    u : float
        Upper clamp on the scaled pair distance.
    g0 : float
        Base of the lower clamp; the drift term adds up to 0.1 on top.
    T : int
        Iteration budget.
    """

    alpha: float = 50.0
    beta: float = 0.2
    u: float = 1.24
    g0: float = 1.1
    T: int = 30

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        if not self.beta >= 0:
            raise ConfigError(f"beta must be >= 0, got {self.beta}")
        if not self.g0 > 0:
            raise ConfigError(f"g0 must be > 0, got {self.g0}")
        if not self.u > self.g0:
            raise ConfigError(f"u must exceed g0 (u={self.u}, g0={self.g0})")
        if self.g0 + 0.1 >= self.u:
            raise ConfigError(
                f"h bounds cross at t=T: g0 + 0.1 = {self.g0 + 0.1} >= u = {self.u}"
            )
        if int(self.T) != self.T or self.T < 1:
            raise ConfigError(f"T must be a positive integer, got {self.T}")


@dataclass
class Atom:
    """One candidate subset: a mask plus the real-valued motion state."""

    position: np.ndarray
    velocity: np.ndarray
    fitness: float = math.inf
    mass: float = 1.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=bool)
        self.velocity = np.asarray(self.velocity, dtype=float)
        if self.position.shape != self.velocity.shape or self.position.ndim != 1:
            raise ValueError(
                f"position {self.position.shape} and velocity {self.velocity.shape} "
                "must be 1-d and the same length"
            )

    @property
    def x(self) -> np.ndarray:
        return self.position.astype(float)


@dataclass
class Population:
    atoms: list
    best_position: Optional[np.ndarray] = None
    best_fitness: float = math.inf
    t: int = 1
    history: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.atoms) < 2:
            raise ConfigError(f"population needs at least 2 atoms, got {len(self.atoms)}")

    def __len__(self):
        return len(self.atoms)

    @property
    def fitnesses(self) -> np.ndarray:
        return np.array([a.fitness for a in self.atoms], dtype=float)

    @property
    def positions(self) -> np.ndarray:
        return np.array([a.position for a in self.atoms], dtype=float)

    def update_best(self) -> bool:
        """Fold current atom fitnesses into the global best; ties keep the incumbent."""
        fits = self.fitnesses
        i = int(np.argmin(fits))
        if fits[i] < self.best_fitness:
            self.best_fitness = float(fits[i])
            self.best_position = self.atoms[i].position.copy()
            return True
        return False

    def assign_masses(self) -> np.ndarray:
        masses = compute_masses(self.fitnesses)
        for atom, m in zip(self.atoms, masses):
            atom.mass = float(m)
        return masses


def depth_eta(t: int, params: DynamicsParams) -> float:
    T = params.T
    return params.alpha * (1.0 - (t - 1) / T) ** 3 * math.exp(-20.0 * t / T)


def drift_g(t: int, T: int) -> float:
    return 0.1 * math.sin(math.pi / 2.0 * (t / T))


def h_bounds(t: int, params: DynamicsParams) -> tuple[float, float]:
    return params.g0 + drift_g(t, params.T), params.u


def lagrange_multiplier(t: int, params: DynamicsParams) -> float:
    return params.beta * math.exp(-20.0 * t / params.T)


def length_scale_sigma(atom_position, kbest_mean) -> float:
    x = np.asarray(atom_position, dtype=float)
    return float(np.linalg.norm(x - np.asarray(kbest_mean, dtype=float)))


def scaled_h(r: float, sigma: float, h_min: float, h_max: float) -> float:
    # A KBest collapsed onto the atom is treated as maximal crowding.
    if sigma == 0:
        return h_min
    return min(max(r / sigma, h_min), h_max)


def pair_force_scalar(h: float, eta: float) -> float:
    return -eta * (2.0 * h**13 - h**7)


def neighbor_count_K(t: int, T: int, N: int) -> int:
    raw = N - (N - 2) * math.sqrt(t / T)
    k = math.floor(raw + 0.5)
    return min(max(k, 2), N)


def kbest_indices(fitnesses: Sequence[float], K: int) -> np.ndarray:
    """Indices of the K lowest fitness values, equal values ordered by index."""
    order = np.argsort(np.asarray(fitnesses, dtype=float), kind="stable")
    return order[:K]


def compute_masses(fitnesses) -> np.ndarray:
    fit = np.asarray(fitnesses, dtype=float)
    best, worst = fit.min(), fit.max()
    if worst == best:
        M = np.ones_like(fit)
    else:
        M = np.exp(-(fit - best) / (worst - best))
    return M / M.sum()


def total_force(atom_index: int, population: Population, kbest, t: int,
                params: DynamicsParams, rng) -> np.ndarray:
    """Randomly weighted sum of pair forces exerted on one atom by the KBest set.

    One uniform weight is drawn per KBest member, in KBest order, including
    the atom itself when it belongs to KBest (its own term is zero).
    """
    kbest = np.asarray(kbest, dtype=int)
    xs = population.positions
    xi = xs[atom_index]
    weights = rng.random(len(kbest))
    force = np.zeros_like(xi)
    sigma = length_scale_sigma(xi, xs[kbest].mean(axis=0))
    h_min, h_max = h_bounds(t, params)
    eta = depth_eta(t, params)
    for w, j in zip(weights, kbest):
        if j == atom_index:
            continue
        diff = xs[j] - xi
        r = float(np.linalg.norm(diff))
        if r == 0.0:
            continue
        h = scaled_h(r, sigma, h_min, h_max)
        force += w * pair_force_scalar(h, eta) * diff / r
    return force


def constraint_force(atom: Atom, best_position, t: int, params: DynamicsParams) -> np.ndarray:
    lam = lagrange_multiplier(t, params)
    return lam * (np.asarray(best_position, dtype=float) - atom.x)


def acceleration(atom_index: int, population: Population, t: int,
                 params: DynamicsParams, rng, kbest=None) -> np.ndarray:
    """(interaction force + constraint force) / mass for one atom.

    Masses must already be assigned for iteration ``t``. When ``kbest`` is
    omitted it is derived from the current fitnesses and K(t).
    """
    if kbest is None:
        K = neighbor_count_K(t, params.T, len(population))
        kbest = kbest_indices(population.fitnesses, K)
    atom = population.atoms[atom_index]
    if atom.mass <= 0:
        raise ValueError(f"atom {atom_index} has non-positive mass {atom.mass}")
    F = total_force(atom_index, population, kbest, t, params, rng)
    G = constraint_force(atom, population.best_position, t, params)
    return (F + G) / atom.mass


def update_velocity(velocity, accel, rng, v_cap: float = DEFAULT_V_CAP) -> np.ndarray:
    v = np.asarray(velocity, dtype=float)
    new = rng.random(v.shape) * v + np.asarray(accel, dtype=float)
    return np.clip(new, -v_cap, v_cap)
