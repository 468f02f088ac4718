"""
Selecting features for the Wine data
====================================

One run of each method on the bundled Wine set, compared with using all 13 features.
"""
from asofs.datasets import load_bundled
from asofs.optimizer import METHODS, OptimizerConfig, run

wine = load_bundled("wine")
print(wine.name, wine.features.shape)

for method in METHODS:
    rep = run(OptimizerConfig.for_method(method, seed=1), wine)
    chosen = [n for n, b in zip(wine.feature_names, rep.best_mask) if b == "1"]
    print(f"{rep.method:8s} acc={rep.test_accuracy:.3f} (all features {rep.full_feature_accuracy:.3f})"
          f"  {rep.selected_count} features: {', '.join(chosen)}")

# The best fitness never rises from one iteration to the next.
print("curve:", [round(f, 4) for f in rep.convergence[::5]])
