"""Experiment configuration and the command-line pipeline.

Subcommands: generate (write datasets), train (fit and persist networks),
certify (end-to-end certificates as JSON plus a summary CSV), validate
(run the configured lemma validators), rademacher (exact vs Monte Carlo
complexity on a built-in class). All outputs are deterministic functions of
the config: files carry no timestamps, floats are written with repr, JSON
keys are sorted, and --jobs only changes wall time, never bytes.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .bounds import (
    certification_run,
    validate_lemma3,
    validate_mcdiarmid,
    validate_ramp_dominance,
    validate_symmetrization,
)
from .errors import NotDiscrete
from .network import Architecture, TrainConfig, train_sgd
from .process import ProcessSpec, mixing_profile, sample_sequence, sample_target
from .rademacher import (
    FunctionClass,
    constant_class,
    empirical_rademacher_exact,
    empirical_rademacher_mc,
)
from .seeding import combine_seeds

_VALIDATOR_DEFAULTS = {
    "mcdiarmid": {"n": 50, "trials": 20000, "seed": 7,
                  "epsilons": [0.02, 0.05, 0.1, 0.2, 0.3], "delta_override": None},
    "lemma3": {"n": 100},
    "symmetrization": {"n": 8, "trials": 1000, "seed": 11},
    "lemma4": {"trials": 100000, "seed": 5},
}

_CSV_COLUMNS = (
    "seed", "gamma", "n", "delta", "empirical_ramp_loss", "empirical_zero_one",
    "rademacher_term", "rademacher_source", "mu_mean", "concentration_term",
    "small_term", "complexity_term", "total_bound", "population_ramp_estimate",
    "population_zero_one_estimate", "population_halfwidth", "bound_holds",
    "phi_exact", "mu_exact",
)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Everything one pipeline run depends on; serializes to JSON."""

    process: ProcessSpec
    arch: Architecture
    train: TrainConfig
    n_train: int
    m_target: int
    gamma_list: tuple
    delta: float
    seeds: tuple
    out_dir: str
    validators: tuple = ()

    def __post_init__(self):
        if self.n_train < 1:
            raise ValueError("n_train must be >= 1")
        if self.m_target < 1:
            raise ValueError("m_target must be >= 1")
        gammas = tuple(float(g) for g in self.gamma_list)
        if not gammas or any(g <= 0.0 for g in gammas):
            raise ValueError("gamma_list must be nonempty with positive entries")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds:
            raise ValueError("seeds must be nonempty")
        if len(set(seeds)) != len(seeds):
            raise ValueError("seeds must be distinct")
        validators = tuple(_normalize_validator(v) for v in self.validators)
        object.__setattr__(self, "gamma_list", gammas)
        object.__setattr__(self, "seeds", seeds)
        object.__setattr__(self, "validators", validators)
        object.__setattr__(self, "out_dir", str(self.out_dir))

    def to_json_dict(self) -> dict:
        return {
            "process": self.process.to_json_dict(),
            "arch": {"dims": list(self.arch.dims),
                     "activations": list(self.arch.activations)},
            "train": {
                "learning_rate": self.train.learning_rate,
                "epochs": self.train.epochs,
                "batch_size": self.train.batch_size,
                "seed": self.train.seed,
                "init_scale": self.train.init_scale,
            },
            "n_train": self.n_train,
            "m_target": self.m_target,
            "gamma_list": list(self.gamma_list),
            "delta": self.delta,
            "seeds": list(self.seeds),
            "out_dir": self.out_dir,
            "validators": [dict(v) for v in self.validators],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ExperimentConfig":
        arch = doc["arch"]
        train = doc["train"]
        return cls(
            process=ProcessSpec.from_json_dict(doc["process"]),
            arch=Architecture(dims=tuple(arch["dims"]),
                              activations=tuple(arch["activations"])),
            train=TrainConfig(learning_rate=train["learning_rate"],
                              epochs=train["epochs"],
                              batch_size=train["batch_size"],
                              seed=train["seed"],
                              init_scale=train.get("init_scale")),
            n_train=doc["n_train"],
            m_target=doc["m_target"],
            gamma_list=tuple(doc["gamma_list"]),
            delta=doc["delta"],
            seeds=tuple(doc["seeds"]),
            out_dir=doc.get("out_dir", "out"),
            validators=tuple(doc.get("validators", ())),
        )

    def save(self, path) -> None:
        write_json(self.to_json_dict(), path)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_json_dict(json.load(fh))


def _normalize_validator(entry) -> tuple:
    if isinstance(entry, str):
        name, params = entry, {}
    elif isinstance(entry, dict):
        params = dict(entry)
        name = params.pop("name", None)
    else:
        name, params = None, {}
    if name not in _VALIDATOR_DEFAULTS:
        raise ValueError(f"unknown validator {name!r}")
    merged = dict(_VALIDATOR_DEFAULTS[name])
    for key, val in params.items():
        if key not in merged:
            raise ValueError(f"unknown {name} parameter {key!r}")
        merged[key] = val
    merged["name"] = name
    return tuple(sorted(merged.items()))


def write_json(doc: dict, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def file_digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _print_digest(path) -> None:
    print(f"{file_digest(path)}  {path}")


def _label_indicator_f(spec: ProcessSpec):
    """Default statistic: indicator of label 1, as a table when possible."""
    em = spec.emission
    if em.mode == "discrete":
        tab = np.zeros((em.alphabet.shape[0], spec.num_classes))
        tab[:, 0] = 1.0
        return tab
    return lambda X, y: (y == 1).astype(np.float64)


def builtin_class(spec: ProcessSpec) -> FunctionClass:
    """Small canonical class: constants plus one indicator per label."""
    def make(k: int):
        return lambda X, y, k=k: (y == k).astype(np.float64)
    members = list(constant_class((0.0, 0.5, 1.0)).evaluators)
    members.extend(make(k) for k in range(1, spec.num_classes + 1))
    return FunctionClass(evaluators=tuple(members), label="builtin")


def cmd_generate(config: ExperimentConfig, out_dir) -> list:
    """Write one sequence dataset per seed plus the shared target sample."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for seed in config.seeds:
        ds = sample_sequence(config.process, config.n_train, seed)
        path = os.path.join(out_dir, f"data_seed{seed}.txt")
        ds.save(path)
        paths.append(path)
    target = sample_target(config.process, config.m_target, config.seeds[0])
    tpath = os.path.join(out_dir, "target.txt")
    target.save(tpath)
    paths.append(tpath)
    for p in paths:
        _print_digest(p)
    return paths


def cmd_train(config: ExperimentConfig, out_dir) -> list:
    """Train one network per seed; persist weights and loss trajectories."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for seed in config.seeds:
        data = sample_sequence(config.process, config.n_train, seed)
        cfg = replace(config.train, seed=combine_seeds(config.train.seed, seed))
        result = train_sgd(data, config.arch, cfg)
        path = os.path.join(out_dir, f"params_seed{seed}.txt")
        result.params.save(path)
        paths.append(path)
        lpath = os.path.join(out_dir, f"losses_seed{seed}.json")
        write_json({"seed": seed, "epoch_losses": list(result.epoch_losses)}, lpath)
        paths.append(lpath)
    for p in paths:
        _print_digest(p)
    return paths


def _certify_worker(args) -> list:
    (spec, arch, train, profile, n_train, m_target, gamma_list, delta, seed) = args
    return certification_run(spec, arch, train, profile, n_train, m_target,
                             gamma_list, delta, seed)


def cmd_certify(config: ExperimentConfig, out_dir, jobs: int = 1) -> list:
    """Certificates for every seed x gamma; JSON per pair plus summary.csv."""
    os.makedirs(out_dir, exist_ok=True)
    profile = mixing_profile(config.process, config.n_train)
    work = [(config.process, config.arch, config.train, profile, config.n_train,
             config.m_target, config.gamma_list, config.delta, seed)
            for seed in config.seeds]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            per_seed = list(pool.map(_certify_worker, work))
    else:
        per_seed = [_certify_worker(w) for w in work]
    reports = [r for batch in per_seed for r in batch]
    paths = []
    for rep in reports:
        path = os.path.join(out_dir, f"report_seed{rep.seed}_gamma{repr(rep.gamma)}.json")
        write_json(rep.to_json_dict(), path)
        paths.append(path)
    rows = [",".join(_CSV_COLUMNS)]
    for rep in sorted(reports, key=lambda r: (r.seed, r.gamma)):
        doc = rep.to_json_dict()
        rows.append(",".join(_csv_field(doc[c]) for c in _CSV_COLUMNS))
    cpath = os.path.join(out_dir, "summary.csv")
    with open(cpath, "w", encoding="ascii") as fh:
        fh.write("\n".join(rows) + "\n")
    paths.append(cpath)
    for p in paths:
        _print_digest(p)
    return paths


def _csv_field(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_validate(config: ExperimentConfig, out_dir) -> list:
    """Run every configured validator and write one JSON report each."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for entry in config.validators:
        params = dict(entry)
        name = params.pop("name")
        if name == "mcdiarmid":
            report = validate_mcdiarmid(
                config.process, _label_indicator_f(config.process),
                n=params["n"], trials=params["trials"], seed=params["seed"],
                epsilons=tuple(params["epsilons"]),
                delta_inf=params["delta_override"])
        elif name == "lemma3":
            f = _label_indicator_f(config.process)
            if callable(f):
                raise NotDiscrete("lemma3 validation needs discrete emissions")
            report = validate_lemma3(config.process, f, n=params["n"])
        elif name == "symmetrization":
            report = validate_symmetrization(
                builtin_class(config.process), config.process,
                n=params["n"], trials=params["trials"], seed=params["seed"])
        else:
            report = validate_ramp_dominance(trials=params["trials"],
                                             seed=params["seed"])
        path = os.path.join(out_dir, f"validate_{name}.json")
        write_json(report.to_json_dict(), path)
        paths.append(path)
    for p in paths:
        _print_digest(p)
    return paths


def cmd_rademacher(config: ExperimentConfig, out_dir) -> list:
    """Exact vs Monte Carlo complexity of the built-in class on a short path."""
    os.makedirs(out_dir, exist_ok=True)
    n = min(config.n_train, 12)
    data = sample_sequence(config.process, n, config.seeds[0])
    fclass = builtin_class(config.process)
    exact = empirical_rademacher_exact(fclass, data)
    mc = empirical_rademacher_mc(fclass, data, trials=10000, seed=config.seeds[0])
    gap = abs(mc.value - exact.value)
    doc = {
        "n": n,
        "class_size": fclass.size,
        "exact": exact.value,
        "mc_value": mc.value,
        "mc_stderr": mc.stderr,
        "mc_trials": mc.trials,
        "gap": gap,
        "within_3_stderr": bool(gap <= 3.0 * mc.stderr or mc.stderr == 0.0),
    }
    path = os.path.join(out_dir, "rademacher.json")
    write_json(doc, path)
    _print_digest(path)
    return [path]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mixcert",
        description="certification pipeline for networks trained on mixing sequences")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("generate", "write datasets for every seed"),
            ("train", "train and persist one network per seed"),
            ("certify", "emit bound reports and a summary table"),
            ("validate", "run the configured lemma validators"),
            ("rademacher", "compare exact and Monte Carlo complexity")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--out", default=None, help="output directory (default: config out_dir)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for certify")
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        config = ExperimentConfig.load(args.config)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", flush=True)
        return 2
    out_dir = args.out if args.out is not None else config.out_dir
    try:
        if args.command == "generate":
            cmd_generate(config, out_dir)
        elif args.command == "train":
            cmd_train(config, out_dir)
        elif args.command == "certify":
            cmd_certify(config, out_dir, jobs=args.jobs)
        elif args.command == "validate":
            cmd_validate(config, out_dir)
        else:
            cmd_rademacher(config, out_dir)
    except Exception as exc:  # pipeline errors are reported, not raised, at the CLI
        print(f"error: {type(exc).__name__}: {exc}", flush=True)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
