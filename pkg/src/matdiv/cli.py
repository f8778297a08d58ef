"""Batch command-line front end.

Usage::

    matdiv diversity|bounds|icl-train|icl-eval|gen --config <file>
           [--out <dir>] [--seed <u64>] [--threads <k>] [--svg]

Configs are strict JSON documents (unknown keys are rejected); every
command is a pure function of (config, seed), so reruns produce
byte-identical outputs.  Exit codes: 0 success, 2 config error, 3 numeric
or domain failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

from . import bounds as bounds_mod
from . import icl
from .centralizer import estimate_diversity_probability
from .errors import ConfigError, DomainError, MatdivError, NumericError, SizingError
from .matrixio import write_matrix
from .operators import (
    BERNOULLI_POINT,
    FD,
    FEM,
    PIECEWISE_BERNOULLI,
    POTENTIAL_KINDS,
    SEPARABLE_SUM,
    LOGNORMAL_FIELD,
    PotentialSpec,
    TaskDistribution,
    deterministic_part,
    sample_task_matrix,
)
from .rng import RngStream
from .svgplot import line_plot

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _check_keys(obj, where: str, required, optional=()) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}")
    missing = sorted(set(required) - set(obj))
    if missing:
        raise ConfigError(f"missing required key(s) {missing} in {where}")


def _as_int(obj, key, where):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}.{key} must be an integer, got {v!r}")
    return v


def _as_float(obj, key, where):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    return float(v)


def _as_bool(obj, key, where):
    v = obj[key]
    if not isinstance(v, bool):
        raise ConfigError(f"{where}.{key} must be true or false, got {v!r}")
    return v


def _as_str(obj, key, where):
    v = obj[key]
    if not isinstance(v, str):
        raise ConfigError(f"{where}.{key} must be a string, got {v!r}")
    return v


def _as_list(obj, key, where, elem="number"):
    v = obj[key]
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{where}.{key} must be a nonempty list")
    for item in v:
        ok = isinstance(item, (int, float)) and not isinstance(item, bool)
        if elem == "int":
            ok = isinstance(item, int) and not isinstance(item, bool)
        if not ok:
            raise ConfigError(f"{where}.{key} must hold {elem}s, got {item!r}")
    return list(v)


def _potential_from_config(obj, where: str) -> PotentialSpec:
    _check_keys(obj, where, required=("kind",), optional=("p", "a", "b", "terms", "alpha", "beta", "truncation"))
    kind = _as_str(obj, "kind", where)
    if kind not in POTENTIAL_KINDS:
        raise ConfigError(f"{where}.kind must be one of {sorted(POTENTIAL_KINDS)}, got {kind!r}")
    try:
        if kind == LOGNORMAL_FIELD:
            _check_keys(obj, where, required=("kind", "alpha", "beta"), optional=("truncation",))
            return PotentialSpec.lognormal_field(
                alpha=_as_float(obj, "alpha", where),
                beta=_as_float(obj, "beta", where),
                truncation=_as_int(obj, "truncation", where) if "truncation" in obj else None,
            )
        allowed = ("kind", "p", "a", "b") + (("terms",) if kind == SEPARABLE_SUM else ())
        _check_keys(obj, where, required=("kind", "p"), optional=allowed)
        return PotentialSpec(
            kind=kind,
            p=_as_float(obj, "p", where),
            a=_as_float(obj, "a", where) if "a" in obj else 1.0,
            b=_as_float(obj, "b", where) if "b" in obj else 2.0,
            terms=_as_int(obj, "terms", where) if "terms" in obj else None,
        )
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _dist_from_config(obj, where: str) -> TaskDistribution:
    _check_keys(obj, where, required=("method", "M", "potential"), optional=("D",))
    try:
        return TaskDistribution(
            method=_as_str(obj, "method", where),
            M=_as_int(obj, "M", where),
            D=_as_int(obj, "D", where) if "D" in obj else 1,
            potential=_potential_from_config(obj["potential"], f"{where}.potential"),
        )
    except (DomainError, SizingError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


DIVERSITY_HEADER = "method,M,D,p,N,trials,successes,p_hat,stderr,bound_thm_fd2,bound_thm_fd_augmented"


def cmd_diversity(config, out: Path, seed: int, threads: int, svg: bool) -> int:
    """Monte Carlo sweep of the trivial-centralizer probability over (p, N)."""
    _check_keys(
        config,
        "config",
        required=("method", "M", "p_values", "N_values", "trials"),
        optional=("D", "kind", "a", "b", "terms", "augment_with_k", "seed"),
    )
    method = _as_str(config, "method", "config")
    m = _as_int(config, "M", "config")
    dim = _as_int(config, "D", "config") if "D" in config else 1
    default_kind = BERNOULLI_POINT if method == FD else PIECEWISE_BERNOULLI
    kind = _as_str(config, "kind", "config") if "kind" in config else default_kind
    if kind == LOGNORMAL_FIELD:
        raise ConfigError("config.kind: a diversity sweep varies p, so the potential must be a Bernoulli kind")
    a = _as_float(config, "a", "config") if "a" in config else 1.0
    b = _as_float(config, "b", "config") if "b" in config else 2.0
    terms = _as_int(config, "terms", "config") if "terms" in config else None
    p_values = _as_list(config, "p_values", "config")
    n_values = _as_list(config, "N_values", "config", elem="int")
    trials = _as_int(config, "trials", "config")
    augment = _as_bool(config, "augment_with_k", "config") if "augment_with_k" in config else False

    rows = []
    series = []
    for ip, p in enumerate(p_values):
        try:
            pot = PotentialSpec(kind=kind, p=p, a=a, b=b, terms=terms)
            dist = TaskDistribution(method=method, M=m, D=dim, potential=pot)
        except (DomainError, SizingError) as exc:
            raise ConfigError(f"config: {exc}") from exc
        curve = []
        for i_n, n_samples in enumerate(n_values):
            cell = ip * len(n_values) + i_n
            est = estimate_diversity_probability(
                dist,
                n_samples,
                trials,
                augment_with_k=augment,
                rng=RngStream(seed, cell * trials),
                threads=threads,
            )
            if method == FD:
                b_fd2 = bounds_mod.bound_fd2(m, p, n_samples).clamped if n_samples >= 2 else 0.0
                try:
                    b_aug = bounds_mod.bound_fd(m, dim, p, n_samples).clamped
                except DomainError:
                    b_aug = float("nan")
            else:
                b_fd2 = float("nan")
                try:
                    b_aug = bounds_mod.bound_fem(m, p, n_samples).clamped
                except DomainError:
                    b_aug = float("nan")
            rows.append(
                (method, m, dim, float(p), n_samples, trials, est.successes, est.p_hat, est.stderr, b_fd2, b_aug)
            )
            curve.append((n_samples, est.p_hat))
        series.append((f"p={p:g}", [c[0] for c in curve], [c[1] for c in curve]))

    _write_csv(out / "diversity.csv", DIVERSITY_HEADER, rows)
    if svg:
        line_plot(
            out / "diversity.svg",
            series,
            title="Trivial-centralizer probability",
            xlabel="sample size N",
            ylabel="estimated probability",
        )
    return EXIT_OK


_THEOREMS = {
    "ThmMain": (("d", "c", "N"), "c", lambda g: bounds_mod.bound_main(g["d"], g["c"], g["N"])),
    "Thm2": (("d", "c_V", "N"), "c_V", lambda g: bounds_mod.bound_thm2(g["d"], g["c_V"], g["N"])),
    "ThmFD": (("M", "D", "p", "N"), "c", lambda g: bounds_mod.bound_fd(g["M"], g["D"], g["p"], g["N"])),
    "ThmFD2": (("M", "p", "N"), "c_V", lambda g: bounds_mod.bound_fd2(g["M"], g["p"], g["N"])),
    "ThmFEM": (("M", "p", "N"), "c", lambda g: bounds_mod.bound_fem(g["M"], g["p"], g["N"])),
}

_INT_PARAMS = {"d", "N", "M", "D"}


def cmd_bounds(config, out: Path, seed: int, threads: int, svg: bool) -> int:
    """Evaluate one theorem's bound over a parameter grid."""
    _check_keys(config, "config", required=("theorem", "grid"), optional=("seed",))
    theorem = _as_str(config, "theorem", "config")
    if theorem not in _THEOREMS:
        raise ConfigError(f"config.theorem must be one of {sorted(_THEOREMS)}, got {theorem!r}")
    params, const_name, evaluator = _THEOREMS[theorem]
    grid_cfg = config["grid"]
    _check_keys(grid_cfg, "config.grid", required=params)
    axes = []
    for name in params:
        elem = "int" if name in _INT_PARAMS else "number"
        axes.append(_as_list(grid_cfg, name, "config.grid", elem=elem))
    rows = []
    failures = 0
    for combo in itertools.product(*axes):
        point = dict(zip(params, combo))
        try:
            res = evaluator(point)
            rows.append((theorem, *combo, res.raw_value, res.clamped, res.constants[const_name]))
        except DomainError as exc:
            failures += 1
            print(f"bounds: {point}: {exc}", file=sys.stderr)
            rows.append((theorem, *combo, float("nan"), float("nan"), float("nan")))
    header = "theorem," + ",".join(params) + f",raw,clamped,{const_name}"
    _write_csv(out / "bounds.csv", header, rows)
    return EXIT_NUMERIC if failures else EXIT_OK


_HYPER_KEYS = ("learning_rate", "lr_final", "batch_size", "steps", "init_scale", "normalize_tasks", "task_scale")


def _hyper_from_config(obj, where: str) -> icl.TrainConfig:
    _check_keys(obj, where, required=(), optional=_HYPER_KEYS)
    kwargs = {}
    for key in ("learning_rate", "lr_final", "task_scale", "init_scale"):
        if key in obj and obj[key] is not None:
            kwargs[key] = _as_float(obj, key, where)
    for key in ("batch_size", "steps"):
        if key in obj:
            kwargs[key] = _as_int(obj, key, where)
    if "normalize_tasks" in obj:
        kwargs["normalize_tasks"] = _as_bool(obj, "normalize_tasks", where)
    return icl.TrainConfig(**kwargs)


def cmd_icl_train(config, out: Path, seed: int, threads: int, svg: bool) -> int:
    """Train a linear transformer and write its checkpoint."""
    _check_keys(config, "config", required=("dist", "N", "n"), optional=("label", "hyper", "seed"))
    dist = _dist_from_config(config["dist"], "config.dist")
    n_tasks = _as_int(config, "N", "config")
    n_prompt = _as_int(config, "n", "config")
    label = _as_str(config, "label", "config") if "label" in config else "model"
    hyper = _hyper_from_config(config.get("hyper", {}), "config.hyper")
    params = icl.train(dist, n_tasks, n_prompt, hyper, RngStream(seed, 0))
    icl.save_params(params, out, label)
    print(f"final_train_loss={params.final_train_loss!r}")
    return EXIT_OK


ICL_EVAL_HEADER = "test_label,m,error,error_kind"


def cmd_icl_eval(config, out: Path, seed: int, threads: int, svg: bool) -> int:
    """Evaluate a checkpoint on one or more task families."""
    _check_keys(
        config,
        "config",
        required=("checkpoint_dir", "checkpoint_label", "tests", "m_values", "tasks"),
        optional=("queries_per_task", "error_kind", "seed"),
    )
    tests = config["tests"]
    if not isinstance(tests, list) or not tests:
        raise ConfigError("config.tests must be a nonempty list")
    m_values = _as_list(config, "m_values", "config", elem="int")
    tasks = _as_int(config, "tasks", "config")
    queries = _as_int(config, "queries_per_task", "config") if "queries_per_task" in config else 10
    error_kind = _as_str(config, "error_kind", "config") if "error_kind" in config else icl.MSE
    if error_kind not in icl.ERROR_KINDS:
        raise ConfigError(f"config.error_kind must be one of {icl.ERROR_KINDS}, got {error_kind!r}")
    params = icl.load_params(_as_str(config, "checkpoint_dir", "config"), _as_str(config, "checkpoint_label", "config"))

    lines = [ICL_EVAL_HEADER]
    series = []
    for i, test in enumerate(tests):
        _check_keys(test, f"config.tests[{i}]", required=("label", "dist"))
        label = _as_str(test, "label", f"config.tests[{i}]")
        dist = _dist_from_config(test["dist"], f"config.tests[{i}].dist")
        report = icl.evaluate(params, dist, m_values, tasks, queries, error_kind, RngStream(seed, 1 + i))
        for m, err in zip(report.prompt_lengths, report.errors):
            lines.append(f"{label},{m},{_fmt(err)},{error_kind}")
        slope = "na" if report.fitted_slope is None else repr(report.fitted_slope)
        lines.append(f"slope,{slope}")
        series.append((label, list(report.prompt_lengths), list(report.errors)))
    (out / "icl_eval.csv").write_text("\n".join(lines) + "\n")
    if svg:
        line_plot(
            out / "icl_eval.svg",
            series,
            title="Error vs inference prompt length",
            xlabel="prompt length m",
            ylabel=error_kind,
            xlog=True,
            ylog=True,
            reference_slope=-1,
        )
    return EXIT_OK


def cmd_gen(config, out: Path, seed: int, threads: int, svg: bool) -> int:
    """Sample task matrices to matrix text files."""
    _check_keys(config, "config", required=("dist", "count"), optional=("prefix", "include_deterministic", "seed"))
    dist = _dist_from_config(config["dist"], "config.dist")
    count = _as_int(config, "count", "config")
    if count < 1:
        raise ConfigError("config.count must be >= 1")
    prefix = _as_str(config, "prefix", "config") if "prefix" in config else "sample"
    include_k = _as_bool(config, "include_deterministic", "config") if "include_deterministic" in config else True
    if include_k:
        write_matrix(out / f"{prefix}_deterministic.txt", deterministic_part(dist))
    for i in range(count):
        write_matrix(out / f"{prefix}_{i:03d}.txt", sample_task_matrix(dist, RngStream(seed, i)))
    return EXIT_OK


_COMMANDS = {
    "diversity": cmd_diversity,
    "bounds": cmd_bounds,
    "icl-train": cmd_icl_train,
    "icl-eval": cmd_icl_eval,
    "gen": cmd_gen,
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matdiv", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "diversity": "Monte Carlo sweep of the trivial-centralizer probability",
        "bounds": "evaluate closed-form probability lower bounds over a grid",
        "icl-train": "train the linear transformer and write a checkpoint",
        "icl-eval": "evaluate a checkpoint; error vs inference prompt length",
        "gen": "sample task matrices to matrix text files",
    }
    for name in _COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", required=True, help="JSON configuration file (strict schema)")
        p.add_argument("--out", default=".", help="output directory (must exist)")
        p.add_argument("--seed", type=int, default=None, help="seed override; defaults to the config's seed or 0")
        p.add_argument("--threads", type=int, default=1, help="worker cap for trial-parallel estimators")
        p.add_argument("--svg", action="store_true", help="also render the SVG plot")
    return parser


def _load_config(path: str) -> dict:
    text = Path(path).read_text()
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError(f"{path}: top-level config must be a JSON object")
    return config


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        if args.seed is not None:
            seed = args.seed
        elif "seed" in config:
            seed = _as_int(config, "seed", "config")
        else:
            seed = 0
        out = Path(args.out)
        if not out.is_dir():
            raise FileNotFoundError(f"output directory does not exist: {out}")
        return _COMMANDS[args.command](config, out, seed, args.threads, args.svg)
    except ConfigError as exc:
        print(f"matdiv: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, SizingError, NumericError) as exc:
        print(f"matdiv: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MatdivError as exc:
        print(f"matdiv: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"matdiv: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
