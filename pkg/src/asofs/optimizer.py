"""Binary atom search over feature masks, with optional annealing of every atom."""
from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .annealing import AnnealSchedule, anneal
from .binarize import FlipMode, FlipPolicy, TransferKind, apply_flip
from .datasets import Dataset, SplitSpec, prepare
from .dynamics import (
    DEFAULT_V_CAP,
    Atom,
    DynamicsParams,
    Population,
    acceleration,
    kbest_indices,
    neighbor_count_K,
    update_velocity,
)
from .errors import ConfigError
from .evaluation import ClassifierSpec, EvaluationContext, FitnessWeights, evaluate

__all__ = ["METHODS", "OptimizerConfig", "RunReport", "run", "method_label", "mask_to_str"]

log = logging.getLogger(__name__)

METHODS = {
    "asos": (TransferKind.S_SHAPED, False),
    "asov": (TransferKind.V_SHAPED, False),
    "asos-sa": (TransferKind.S_SHAPED, True),
    "asov-sa": (TransferKind.V_SHAPED, True),
}

# Random substream tags; each (tag, iteration, atom) triple owns one generator.
_INIT, _EVAL, _MOTION, _ANNEAL = range(4)


def method_label(transfer: TransferKind, sa_enabled: bool) -> str:
    base = "ASOs" if TransferKind(transfer) is TransferKind.S_SHAPED else "ASOv"
    return base + ("-SA" if sa_enabled else "")


def mask_to_str(mask) -> str:
    return "".join("1" if b else "0" for b in np.asarray(mask, dtype=bool))


def str_to_mask(bits: str) -> np.ndarray:
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"not a bit string: {bits!r}")
    return np.array([c == "1" for c in bits], dtype=bool)


@dataclass(frozen=True)
class OptimizerConfig:
    population_size: int = 20
    iterations: int = 30
    transfer: TransferKind = TransferKind.S_SHAPED
    sa_enabled: bool = False
    alpha: float = 50.0
    beta: float = 0.2
    u: float = 1.24
    g0: float = 1.1
    v_cap: float = DEFAULT_V_CAP
    omega: float = 0.99
    k: int = 5
    initial_temp: Optional[float] = None  # None -> 2 * n_features
    cooling_factor: float = 0.93
    stop_temp: float = 1.0
    sa_acceptance: str = "best"
    sa_fraction: float = 1.0
    flip_mode: FlipMode = FlipMode.FIXED
    flip_threshold: float = 0.5
    train_fraction: float = 0.8
    stratified: bool = True
    seed: int = 0
    split_seed: Optional[int] = None  # None -> seed
    # Thread count for per-atom work; never changes results.
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "transfer", TransferKind(self.transfer))
        object.__setattr__(self, "flip_mode", FlipMode(self.flip_mode))
        if self.population_size < 2:
            raise ConfigError(f"population_size must be >= 2, got {self.population_size}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if not self.v_cap > 0:
            raise ConfigError(f"v_cap must be > 0, got {self.v_cap}")
        if not 0.0 < self.sa_fraction <= 1.0:
            raise ConfigError(f"sa_fraction must lie in (0, 1], got {self.sa_fraction}")
        if self.seed < 0 or (self.split_seed is not None and self.split_seed < 0):
            raise ConfigError("seeds must be non-negative integers")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        # Fail fast on the component invariants.
        self.dynamics
        self.weights
        self.classifier
        self.flip_policy
        self.split_spec
        self.schedule(1)

    @classmethod
    def for_method(cls, method: str, **kwargs) -> "OptimizerConfig":
        try:
            transfer, sa = METHODS[method.lower()]
        except KeyError:
            raise ConfigError(f"unknown method {method!r}; choose from {sorted(METHODS)}") from None
        return cls(transfer=transfer, sa_enabled=sa, **kwargs)

    @property
    def method(self) -> str:
        return method_label(self.transfer, self.sa_enabled)

    @property
    def dynamics(self) -> DynamicsParams:
        return DynamicsParams(self.alpha, self.beta, self.u, self.g0, self.iterations)

    @property
    def weights(self) -> FitnessWeights:
        return FitnessWeights(self.omega)

    @property
    def classifier(self) -> ClassifierSpec:
        return ClassifierSpec("knn", self.k)

    @property
    def flip_policy(self) -> FlipPolicy:
        return FlipPolicy(self.flip_mode, self.flip_threshold)

    @property
    def split_spec(self) -> SplitSpec:
        seed = self.seed if self.split_seed is None else self.split_seed
        return SplitSpec(self.train_fraction, self.stratified, seed)

    def schedule(self, n_features: int) -> AnnealSchedule:
        t0 = 2.0 * n_features if self.initial_temp is None else self.initial_temp
        return AnnealSchedule(t0, self.cooling_factor, self.stop_temp, self.sa_acceptance)

    def echo(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name == "workers":
                continue
            v = getattr(self, f.name)
            out[f.name] = v.value if hasattr(v, "value") else v
        out["method"] = self.method
        return out


@dataclass
class RunReport:
    dataset: str
    method: str
    best_mask: str
    selected_count: int
    n_features: int
    test_accuracy: float
    best_fitness: float
    full_feature_accuracy: float
    convergence: list
    seed: int
    split_seed: int
    train_size: int
    test_size: int
    distinct_masks_evaluated: int
    config: dict
    wall_time: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        d = asdict(self)
        if not include_timing:
            d.pop("wall_time")
        return d

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2) + "\n"

    def convergence_csv(self) -> str:
        lines = ["iteration,best_fitness"]
        lines += [f"{t},{f!r}" for t, f in enumerate(self.convergence, start=1)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def _stream(seed: int, tag: int, t: int, i: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(tag, t, i)))


class _Runner:
    def __init__(self, config: OptimizerConfig, ctx: EvaluationContext, pool):
        self.cfg = config
        self.ctx = ctx
        self.params = config.dynamics
        self.policy = config.flip_policy
        self.schedule = config.schedule(ctx.n_features)
        self.pool = pool

    def map(self, fn, items):
        if self.pool is None:
            return [fn(x) for x in items]
        return list(self.pool.map(fn, items))

    def init_population(self) -> Population:
        cfg, d = self.cfg, self.ctx.n_features
        rng = _stream(cfg.seed, _INIT, 0, 0)
        pos = rng.random((cfg.population_size, d)) < 0.5
        vel = rng.uniform(-1.0, 1.0, (cfg.population_size, d))
        return Population([Atom(p, v) for p, v in zip(pos, vel)])

    def evaluate_all(self, pop: Population, t: int):
        def one(i):
            return evaluate(self.ctx, pop.atoms[i].position, _stream(self.cfg.seed, _EVAL, t, i))

        for atom, fv in zip(pop.atoms, self.map(one, range(len(pop)))):
            atom.position = fv.mask.copy()
            atom.fitness = fv.fitness

    def move(self, pop: Population, t: int):
        N = len(pop)
        kb = kbest_indices(pop.fitnesses, neighbor_count_K(t, self.params.T, N))
        rngs = [_stream(self.cfg.seed, _MOTION, t, i) for i in range(N)]
        accs = self.map(lambda i: acceleration(i, pop, t, self.params, rngs[i], kbest=kb),
                        range(N))
        for atom, a, rng in zip(pop.atoms, accs, rngs):
            atom.velocity = update_velocity(atom.velocity, a, rng, self.cfg.v_cap)
            atom.position = apply_flip(atom.position, atom.velocity, self.cfg.transfer,
                                       self.policy, rng)

    def refine(self, pop: Population, t: int):
        N = len(pop)
        rngs = [_stream(self.cfg.seed, _ANNEAL, t, i) for i in range(N)]
        starts = self.map(lambda i: evaluate(self.ctx, pop.atoms[i].position, rngs[i]), range(N))
        for atom, fv in zip(pop.atoms, starts):
            atom.position = fv.mask.copy()
            atom.fitness = fv.fitness
        n_sa = math.ceil(self.cfg.sa_fraction * N)
        chosen = kbest_indices(pop.fitnesses, n_sa)
        outs = self.map(
            lambda i: anneal(starts[i].mask, starts[i], self.ctx, self.schedule, rngs[i]), chosen)
        for i, out in zip(chosen, outs):
            pop.atoms[i].position = out.mask.copy()
            pop.atoms[i].fitness = out.value.fitness

    def execute(self) -> Population:
        pop = self.init_population()
        for t in range(1, self.params.T + 1):
            pop.t = t
            self.evaluate_all(pop, t)
            pop.update_best()
            pop.assign_masses()
            self.move(pop, t)
            if self.cfg.sa_enabled:
                self.refine(pop, t)
                pop.update_best()
            pop.history.append(pop.best_fitness)
            log.debug("t=%d best=%.6f", t, pop.best_fitness)
        return pop


def run(config: OptimizerConfig, dataset: Dataset) -> RunReport:
    """Search ``dataset`` for a low-fitness feature subset.

    The data is split and normalized per ``config.split_spec``; the held-out
    partition scores every candidate and also yields the reported accuracy.
    """
    start = time.perf_counter()
    train, test = prepare(dataset, config.split_spec)
    if config.k > len(train):
        raise ConfigError(f"k={config.k} exceeds training partition size {len(train)}")
    ctx = EvaluationContext.from_split(train, test, classifier=config.classifier,
                                       weights=config.weights)
    pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        pop = _Runner(config, ctx, pool).execute()
    finally:
        if pool is not None:
            pool.shutdown()
    best = evaluate(ctx, pop.best_position)
    full_err = ctx.model.error(np.ones(ctx.n_features, dtype=bool), ctx.y_eval)
    return RunReport(
        dataset=dataset.name,
        method=config.method,
        best_mask=mask_to_str(pop.best_position),
        selected_count=best.selected_count,
        n_features=ctx.n_features,
        test_accuracy=1.0 - best.error_rate,
        best_fitness=best.fitness,
        full_feature_accuracy=1.0 - full_err,
        convergence=list(pop.history),
        seed=config.seed,
        split_seed=config.split_spec.seed,
        train_size=len(train),
        test_size=len(test),
        distinct_masks_evaluated=ctx.cache_size,
        config=config.echo(),
        wall_time=time.perf_counter() - start,
    )
