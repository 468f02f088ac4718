"""
A small benchmark grid
======================

Every method on Wine and Zoo over a few seeds. Reports land in ./demo_results.
The same grid is available as ``asofs batch --config grid.cfg``.
"""
from asofs.bench import batch
from asofs.datasets import load_bundled
from asofs.optimizer import METHODS, OptimizerConfig

configs = [OptimizerConfig.for_method(m, split_seed=0) for m in METHODS]
datasets = [load_bundled("wine"), load_bundled("zoo")]
summaries, _ = batch(configs, datasets, seeds=range(3), out_dir="demo_results")

for s in summaries:
    print(f"{s.dataset:5s} {s.method:8s} mean acc {s.mean_accuracy:.3f} +- {s.std_accuracy:.3f}"
          f"  best {s.best_accuracy:.3f}  features {s.mean_selected:.1f}")
