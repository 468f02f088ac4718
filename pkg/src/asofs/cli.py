"""Command-line entry point: ``asofs run | batch | oracle | verify``.

Exit codes: 0 success, 1 configuration/validation error, 2 data error.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys

from .bench import batch, exhaustive_oracle, verify_report, write_report
from .datasets import BUNDLED, load_bundled, load_csv
from .errors import ConfigError, DataError
from .optimizer import METHODS, OptimizerConfig, RunReport, mask_to_str, run

# flag name -> (OptimizerConfig field, parser)
RUN_KEYS = {
    "pop": ("population_size", int),
    "iters": ("iterations", int),
    "omega": ("omega", float),
    "k": ("k", int),
    "alpha": ("alpha", float),
    "beta": ("beta", float),
    "u": ("u", float),
    "g0": ("g0", float),
    "v-cap": ("v_cap", float),
    "stop-temp": ("stop_temp", float),
    "initial-temp": ("initial_temp", float),
    "cooling": ("cooling_factor", float),
    "sa-acceptance": ("sa_acceptance", str),
    "sa-fraction": ("sa_fraction", float),
    "flip-mode": ("flip_mode", str),
    "flip-threshold": ("flip_threshold", float),
    "train-fraction": ("train_fraction", float),
    "split-seed": ("split_seed", int),
    "workers": ("workers", int),
}
EXTRA_KEYS = {"data", "label-col", "method", "seed", "out", "seeds", "methods", "out-dir"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; keys are flag names with or without dashes."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        text = fh.read()
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string("[asofs]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    out = {}
    for key, value in parser["asofs"].items():
        key = key.replace("_", "-")
        if key not in RUN_KEYS and key not in EXTRA_KEYS and key not in ("stratified",):
            raise ConfigError(f"{path}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def _settings(args, file_values: dict) -> dict:
    merged = dict(file_values)
    for key in list(RUN_KEYS) + sorted(EXTRA_KEYS) + ["stratified"]:
        v = getattr(args, key.replace("-", "_"), None)
        if v is not None:
            merged[key] = v
    return merged


def _config_kwargs(settings: dict) -> dict:
    kw = {}
    for key, (name, conv) in RUN_KEYS.items():
        if key in settings:
            try:
                kw[name] = conv(settings[key])
            except ValueError:
                raise ConfigError(f"bad value for {key}: {settings[key]!r}") from None
    if "stratified" in settings:
        kw["stratified"] = str(settings["stratified"]).lower() in ("1", "true", "yes", "on")
    return kw


def _load(data: str, label_col):
    if data is None:
        raise ConfigError("--data is required")
    if not os.path.exists(data):
        if data in BUNDLED:
            return load_bundled(data)
        raise DataError(f"data file not found: {data}")
    return load_csv(data, label_col)


def _label_col(value):
    if value is None:
        return None
    value = str(value)
    return int(value) if value.lstrip("-").isdigit() else value


def _parse_seeds(text: str) -> list:
    seeds = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ConfigError(f"no seeds in {text!r}")
    return seeds


def _split_list(text) -> list:
    return [p.strip() for p in str(text).split(",") if p.strip()]


def cmd_run(args) -> int:
    s = _settings(args, read_config_file(args.config) if args.config else {})
    if "out" not in s:
        raise ConfigError("--out is required")
    cfg = OptimizerConfig.for_method(s.get("method", "asos"), seed=int(s.get("seed", 0)),
                                     **_config_kwargs(s))
    ds = _load(s.get("data"), _label_col(s.get("label-col")))
    report = run(cfg, ds)
    os.makedirs(os.path.dirname(os.path.abspath(s["out"])), exist_ok=True)
    write_report(report, s["out"])
    print(f"{report.method} on {report.dataset}: accuracy={report.test_accuracy:.4f} "
          f"selected={report.selected_count}/{report.n_features} "
          f"fitness={report.best_fitness:.6f} ({report.wall_time:.2f}s)")
    return 0


def cmd_batch(args) -> int:
    s = read_config_file(args.config)
    if args.out_dir:
        s["out-dir"] = args.out_dir
    if "out-dir" not in s:
        raise ConfigError("--out-dir is required")
    methods = _split_list(s.get("methods", s.get("method", ",".join(METHODS))))
    seeds = _parse_seeds(s.get("seeds", "0-9"))
    kwargs = _config_kwargs(s)
    configs = [OptimizerConfig.for_method(m, **kwargs) for m in methods]
    label_col = _label_col(s.get("label-col"))
    datasets = [_load(d, label_col) for d in _split_list(s.get("data", ""))]
    if not datasets:
        raise ConfigError("batch config lists no data")
    summaries, _ = batch(configs, datasets, seeds, s["out-dir"])
    for c in summaries:
        print(f"{c.method:8s} {c.dataset:12s} runs={c.runs} failed={c.failures} "
              f"acc mean={c.mean_accuracy:.4f} best={c.best_accuracy:.4f} "
              f"std={c.std_accuracy:.4f} selected={c.mean_selected:.2f}")
    return 0


def cmd_oracle(args) -> int:
    s = _settings(args, read_config_file(args.config) if args.config else {})
    cfg = OptimizerConfig(seed=int(s.get("seed", 0)), **_config_kwargs(s))
    ds = _load(s.get("data"), _label_col(s.get("label-col")))
    mask, fit = exhaustive_oracle(ds, cfg.weights, cfg.classifier, cfg.split_spec)
    result = {"dataset": ds.name, "best_mask": mask_to_str(mask),
              "selected_count": int(mask.sum()), "best_fitness": fit,
              "split_seed": cfg.split_spec.seed}
    text = json.dumps(result, indent=2) + "\n"
    if s.get("out"):
        with open(s["out"], "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    with open(args.report) as fh:
        report = RunReport.from_dict(json.load(fh))
    ds = _load(args.data, _label_col(args.label_col))
    acc, ok = verify_report(report, ds)
    print(f"stored={report.test_accuracy!r} recomputed={acc!r} {'MATCH' if ok else 'MISMATCH'}")
    return 0 if ok else 1


def _add_run_flags(p, with_method=True):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--data", help="CSV path, or a bundled name: " + ", ".join(sorted(BUNDLED)))
    p.add_argument("--label-col", help="label column name or index (default: last)")
    if with_method:
        p.add_argument("--method", choices=sorted(METHODS))
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    for key, (_, conv) in RUN_KEYS.items():
        kw = {"type": conv}
        if key == "flip-mode":
            kw["choices"] = ["fixed", "sampled"]
        if key == "sa-acceptance":
            kw["choices"] = ["best", "current"]
        p.add_argument(f"--{key}", **kw)
    p.add_argument("--stratified", choices=["true", "false"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="asofs", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="one optimization run")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", help="methods x datasets x seeds grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("oracle", help="exhaustive search (d <= 20)")
    _add_run_flags(p, with_method=False)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="recompute a report's accuracy")
    p.add_argument("report")
    p.add_argument("--data", required=True)
    p.add_argument("--label-col")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
