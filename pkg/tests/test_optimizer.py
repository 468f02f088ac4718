import json
from dataclasses import replace

import numpy as np
import pytest

from asofs.binarize import FlipMode, TransferKind
from asofs.datasets import make_xor_task, load_bundled
from asofs.errors import ConfigError
from asofs.evaluation import EvaluationContext, evaluate
from asofs.datasets import prepare
from asofs.optimizer import METHODS, OptimizerConfig, RunReport, run, str_to_mask


@pytest.fixture(scope="module")
def tiny():
    return make_xor_task(n_instances=40, n_noise=3, seed=2)


def test_method_labels():
    labels = {m: OptimizerConfig.for_method(m).method for m in METHODS}
    assert labels == {"asos": "ASOs", "asov": "ASOv", "asos-sa": "ASOs-SA", "asov-sa": "ASOv-SA"}
    with pytest.raises(ConfigError):
        OptimizerConfig.for_method("bgwo")


@pytest.mark.parametrize("kw", [
    dict(population_size=1), dict(iterations=0), dict(omega=2.0), dict(u=1.15),
    dict(stop_temp=0.0), dict(sa_fraction=0.0), dict(k=0), dict(seed=-1),
    dict(train_fraction=1.0), dict(cooling_factor=1.5, initial_temp=3.0),
])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        OptimizerConfig(**kw)


def test_defaults():
    cfg = OptimizerConfig()
    assert (cfg.population_size, cfg.iterations, cfg.alpha, cfg.beta, cfg.u) == (20, 30, 50, 0.2, 1.24)
    assert cfg.k == 5 and cfg.omega == 0.99 and cfg.train_fraction == 0.8
    assert cfg.flip_mode is FlipMode.FIXED and cfg.flip_threshold == 0.5
    assert cfg.schedule(34).initial_temp == 68 and cfg.schedule(34).cooling_factor == 0.93


def test_minimal_run(tiny):
    rep = run(OptimizerConfig(population_size=2, iterations=1, k=1), tiny)
    assert len(rep.convergence) == 1
    assert len(rep.best_mask) == tiny.n_features and "1" in rep.best_mask
    assert rep.selected_count == rep.best_mask.count("1")


@pytest.mark.parametrize("method", sorted(METHODS))
def test_report_invariants(tiny, method):
    cfg = OptimizerConfig.for_method(method, population_size=6, iterations=8, k=3, seed=4)
    rep = run(cfg, tiny)
    conv = rep.convergence
    assert len(conv) == 8
    assert all(a >= b for a, b in zip(conv, conv[1:]))
    assert conv[-1] == rep.best_fitness
    train, test = prepare(tiny, cfg.split_spec)
    ctx = EvaluationContext.from_split(train, test, classifier=cfg.classifier, weights=cfg.weights)
    fv = evaluate(ctx, str_to_mask(rep.best_mask))
    assert rep.test_accuracy == 1 - fv.error_rate
    assert rep.best_fitness == fv.fitness
    assert rep.method == cfg.method
    assert rep.train_size + rep.test_size == len(tiny)


def test_determinism_and_parallel_equivalence(tiny):
    cfg = OptimizerConfig.for_method("asov-sa", population_size=5, iterations=4, k=3, seed=9)
    a = run(cfg, tiny).to_json()
    b = run(cfg, tiny).to_json()
    c = run(replace(cfg, workers=4), tiny).to_json()
    assert a == b == c


def test_seed_changes_run(tiny):
    cfg = OptimizerConfig(population_size=5, iterations=3, k=3)
    a = run(cfg, tiny)
    b = run(replace(cfg, seed=1, split_seed=0), tiny)
    assert a.config != b.config


@pytest.mark.parametrize("transfer", list(TransferKind))
@pytest.mark.parametrize("seed", range(4))
def test_annealing_only_improves_first_iteration(transfer, seed):
    ds = make_xor_task(n_instances=80, n_noise=6, seed=seed)
    base = OptimizerConfig(transfer=transfer, population_size=8, iterations=1, seed=seed)
    plain = run(base, ds)
    hybrid = run(replace(base, sa_enabled=True), ds)
    assert hybrid.convergence[0] <= plain.convergence[0]


def test_sampled_flip_mode_runs(tiny):
    rep = run(OptimizerConfig(flip_mode="sampled", population_size=4, iterations=3, k=3), tiny)
    assert rep.config["flip_mode"] == "sampled"


def test_partial_annealing(tiny):
    cfg = OptimizerConfig.for_method("asos-sa", population_size=6, iterations=3, k=3,
                                     sa_fraction=0.5)
    assert len(run(cfg, tiny).convergence) == 3


def test_report_roundtrip(tiny):
    rep = run(OptimizerConfig(population_size=3, iterations=2, k=3), tiny)
    d = json.loads(rep.to_json())
    assert "wall_time" not in d
    assert RunReport.from_dict(d).to_json() == rep.to_json()
    assert "wall_time" in rep.to_dict(include_timing=True)
    csv_lines = rep.convergence_csv().splitlines()
    assert csv_lines[0] == "iteration,best_fitness" and len(csv_lines) == 3


def test_k_larger_than_train_is_config_error(tiny):
    with pytest.raises(ConfigError):
        run(OptimizerConfig(k=500, population_size=2, iterations=1), tiny)
