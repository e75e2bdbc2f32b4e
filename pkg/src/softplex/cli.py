"""Command-line entry point.

Subcommands: sample (point clouds to CSV), build (complex face dumps),
constants (Monte Carlo constant estimation to JSON), experiment run /
experiment report (replication tables and CLT reports), and regime
(hypothesis proxy checks).  Configs are JSON, bulk output is CSV, reports
are JSON; every artifact embeds the fully-resolved configuration, and
reruns with the same config and seed are byte-identical regardless of the
worker count.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np
from scipy.special import ndtri

from .complexes import build_cech, build_rips, soft_thin
from .constants import (
    estimate_face_constant,
    estimate_pair_constant,
    regime_check,
)
from .densities import UniformBox, GaussianIsotropic, density_from_config
from .errors import ConfigurationError, InputError, MemoryGuardError, SoftplexError
from .geometry import ALL_SPACE, build_graph, region_from_config
from .experiments import (
    clt_report,
    config_from_dict,
    run_experiment,
    statistic_samples,
)
from .point_process import sample_binomial, sample_poisson
from .rng import derive_seed, REPLICATION_STREAM

log = logging.getLogger("softplex")


def _canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _fmt(value) -> str:
    return repr(float(value))


def _parse_count(text: str) -> int:
    # accept scientific notation for counts (1e6)
    value = float(text)
    if value != int(value):
        raise argparse.ArgumentTypeError(f"expected an integer-valued number, got {text!r}")
    return int(value)


def _parse_density(spec: str, d: int):
    if spec == "uniform":
        return UniformBox(lo=[0.0] * d, hi=[1.0] * d)
    if spec == "gaussian":
        return GaussianIsotropic(mean=[0.0] * d, sigma=1.0)
    if spec.lstrip().startswith("{"):
        return density_from_config(json.loads(spec))
    with open(spec, encoding="utf-8") as handle:
        return density_from_config(json.load(handle))


def _write_csv(path: str, header: list[str], rows, config_payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"# config {_canonical_json(config_payload)}\n")
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(str(v) for v in row) + "\n")


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        )


def _thread_count(args) -> int | None:
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("SOFTPLEX_THREADS")
    return int(env) if env else None


def _cmd_sample(args) -> int:
    density = _parse_density(args.density, args.d)
    if args.poisson:
        cloud = sample_poisson(args.n, density, args.seed)
    else:
        cloud = sample_binomial(args.n, density, args.seed)
    payload = {
        "subcommand": "sample",
        "n": args.n,
        "poisson": args.poisson,
        "density": density.to_config(),
        "seed": args.seed,
    }
    header = [f"x{i}" for i in range(cloud.dimension)]
    _write_csv(args.out, header, (map(_fmt, row) for row in cloud.points), payload)
    log.info("wrote %d points to %s", len(cloud), args.out)
    return 0


def _cmd_build(args) -> int:
    density = _parse_density(args.density, args.d)
    cloud = sample_binomial(args.n, density, args.seed)
    payload = {
        "subcommand": "build",
        "model": args.model,
        "n": args.n,
        "r": args.r,
        "kmax": args.kmax,
        "density": density.to_config(),
        "rho": args.rho,
        "seed": args.seed,
    }
    if args.model == "rips":
        complex_ = build_rips(build_graph(cloud, args.r, seed=args.seed), args.kmax)
    else:
        complex_ = build_cech(cloud, args.r, args.kmax)
    if args.rho is not None:
        complex_ = soft_thin(complex_, args.rho, args.seed)
    edges = complex_.faces_by_dim[1] if args.kmax >= 1 else np.empty((0, 2), np.int64)
    _write_csv(f"{args.out}.edges.csv", ["i", "j"], edges.tolist(), payload)
    for dim, faces in enumerate(complex_.faces_by_dim):
        header = [f"v{c}" for c in range(dim + 1)]
        _write_csv(f"{args.out}.dim{dim}.csv", header, faces.tolist(), payload)
    log.info("face vector %s written under prefix %s", complex_.face_vector(), args.out)
    return 0


def _cmd_constants(args) -> int:
    density = _parse_density(args.density, args.d)
    region = region_from_config(json.loads(args.region)) if args.region else ALL_SPACE
    threads = _thread_count(args)
    if args.kind in ("mu", "nu"):
        flavor = "rips" if args.kind == "mu" else "cech"
        est = estimate_face_constant(args.k, args.d, density, region,
                                     samples=args.samples, seed=args.seed, flavor=flavor,
                                     threads=threads)
    elif args.kind in ("phi", "theta"):
        if args.l is None or args.j is None:
            raise ConfigurationError(f"kind {args.kind!r} requires --l and --j")
        flavor = "rips" if args.kind == "phi" else "cech"
        est = estimate_pair_constant(args.k, args.l, args.j, args.d, density, region,
                                     samples=args.samples, seed=args.seed, flavor=flavor,
                                     threads=threads)
    else:
        raise ConfigurationError(f"unknown constant kind {args.kind!r}")
    payload = est.to_json()
    payload["params"].update({"d": args.d, "density": density.to_config(), "seed": args.seed})
    with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(_canonical_json(payload) + "\n")
    log.info("%s estimate %.6g +/- %.2g -> %s", args.kind, est.value, est.stderr, args.out)
    return 0


def _resolved_config(args) -> "ExperimentConfig":
    raw = _load_json(args.config)
    if not isinstance(raw, dict):
        raise ConfigurationError("experiment config must be a JSON object")
    overrides = {
        "n": args.n,
        "r": args.r,
        "k_max": args.kmax,
        "master_seed": args.seed,
    }
    for key, value in overrides.items():
        if value is not None:
            raw[key] = value
            if key == "r":
                raw.pop("r_exponent", None)
    return config_from_dict(raw)


def _cmd_experiment_run(args) -> int:
    config = _resolved_config(args)
    results = run_experiment(config, threads=_thread_count(args))
    header = ["rep"] + [f"f{k}" for k in range(config.k_max + 1)] + ["chi", "n_points"]
    rows = [[res.index, *res.f, res.chi, res.n_points] for res in results]
    _write_csv(args.out, header, rows, config.to_config())
    total = sum(res.seconds for res in results)
    log.info("%d replications in %.2fs total work time -> %s",
             len(results), total, args.out)
    return 0


def _read_results_csv(path: str):
    try:
        with open(path, encoding="utf-8") as handle:
            lines = [line.strip() for line in handle if line.strip()]
    except FileNotFoundError:
        raise ConfigurationError(f"results file not found: {path}")
    lines = [line for line in lines if not line.startswith("#")]
    if len(lines) < 2:
        raise ConfigurationError(f"results file {path} has no data rows")
    header = lines[0].split(",")
    rows = [list(map(int, line.split(","))) for line in lines[1:]]
    return header, rows


def _cmd_experiment_report(args) -> int:
    from .experiments import ReplicationResult

    config = _resolved_config(args)
    header, rows = _read_results_csv(args.results)
    expected = ["rep"] + [f"f{k}" for k in range(config.k_max + 1)] + ["chi", "n_points"]
    if header != expected:
        raise ConfigurationError(f"results header {header} does not match config ({expected})")
    results = [
        ReplicationResult(index=row[0], f=tuple(row[1:-2]), chi=row[-2],
                          n_points=row[-1], seconds=0.0)
        for row in rows
    ]
    report = clt_report(results, config)
    payload = {"config": config.to_config(), "report": report.to_json()}
    with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(_canonical_json(payload) + "\n")
    qq_path = os.path.splitext(args.out)[0] + ".qq.csv"
    z = np.sort(statistic_samples(results, config))
    z = (z - z.mean()) / z.std() if z.std() > 0 else z * 0.0
    theoretical = ndtri((np.arange(1, len(z) + 1) - 0.5) / len(z))
    _write_csv(qq_path, ["theoretical", "empirical"],
               ([_fmt(t), _fmt(e)] for t, e in zip(theoretical, z)),
               config.to_config())
    log.info("report -> %s, qq plot data -> %s", args.out, qq_path)
    return 0


def _parse_rho(text: str) -> tuple:
    return tuple(float(v) for v in text.split(","))


def _cmd_regime(args) -> int:
    rho = args.rho if args.rho is not None else (1.0,) * max(args.k + 1, 2)
    r = args.r if args.r is not None else float(args.n) ** (-args.a / args.d)
    mode = ("chi", args.k) if args.mode == "chi" else ("fk", args.k)
    report = regime_check(args.n, r, args.d, rho, mode,
                          sparse_threshold=args.sparse_threshold,
                          growth_threshold=args.growth_threshold,
                          vanish_threshold=args.vanish_threshold)
    sys.stdout.write(_canonical_json(report.to_json()) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softplex",
        description="Simulation and statistical verification of soft random geometric complexes",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_sample = sub.add_parser("sample", help="sample a point cloud to CSV")
    p_sample.add_argument("--n", type=_parse_count, required=True)
    p_sample.add_argument("--density", default="uniform")
    p_sample.add_argument("--d", type=int, default=1)
    p_sample.add_argument("--seed", type=_parse_count, default=0)
    p_sample.add_argument("--poisson", action="store_true",
                          help="treat --n as a Poisson intensity")
    p_sample.add_argument("--out", required=True)
    p_sample.set_defaults(func=_cmd_sample)

    p_build = sub.add_parser("build", help="build a complex and dump faces per dimension")
    p_build.add_argument("--model", choices=["rips", "cech"], default="rips")
    p_build.add_argument("--n", type=_parse_count, required=True)
    p_build.add_argument("--r", type=float, required=True)
    p_build.add_argument("--kmax", type=int, default=4)
    p_build.add_argument("--density", default="uniform")
    p_build.add_argument("--d", type=int, default=1)
    p_build.add_argument("--rho", type=_parse_rho, default=None,
                         help="comma-separated retention probabilities p1,p2,...")
    p_build.add_argument("--seed", type=_parse_count, default=0)
    p_build.add_argument("--out", required=True, help="output path prefix")
    p_build.set_defaults(func=_cmd_build)

    p_const = sub.add_parser("constants", help="Monte Carlo constant estimation")
    p_const.add_argument("--kind", choices=["mu", "nu", "phi", "theta"], required=True)
    p_const.add_argument("--k", type=int, required=True)
    p_const.add_argument("--l", type=int, default=None)
    p_const.add_argument("--j", type=int, default=None)
    p_const.add_argument("--d", type=int, required=True)
    p_const.add_argument("--density", default="uniform")
    p_const.add_argument("--region", default=None, help="region JSON, default all space")
    p_const.add_argument("--samples", type=_parse_count, default=1_000_000)
    p_const.add_argument("--seed", type=_parse_count, default=0)
    p_const.add_argument("--threads", type=int, default=None)
    p_const.add_argument("--out", required=True)
    p_const.set_defaults(func=_cmd_constants)

    p_exp = sub.add_parser("experiment", help="replicated simulations")
    exp_sub = p_exp.add_subparsers(dest="experiment_command", required=True)

    p_run = exp_sub.add_parser("run", help="run replications to a CSV table")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--n", type=_parse_count, default=None)
    p_run.add_argument("--r", type=float, default=None)
    p_run.add_argument("--kmax", type=int, default=None)
    p_run.add_argument("--seed", type=_parse_count, default=None)
    p_run.add_argument("--threads", type=int, default=None)
    p_run.set_defaults(func=_cmd_experiment_run)

    p_rep = exp_sub.add_parser("report", help="CLT report from a results CSV")
    p_rep.add_argument("--config", required=True)
    p_rep.add_argument("--in", dest="results", required=True)
    p_rep.add_argument("--out", required=True)
    p_rep.add_argument("--n", type=_parse_count, default=None)
    p_rep.add_argument("--r", type=float, default=None)
    p_rep.add_argument("--kmax", type=int, default=None)
    p_rep.add_argument("--seed", type=_parse_count, default=None)
    p_rep.set_defaults(func=_cmd_experiment_report)

    p_reg = sub.add_parser("regime", help="check regime hypotheses for (n, r, rho)")
    p_reg.add_argument("--n", type=float, required=True)
    p_reg.add_argument("--d", type=int, required=True)
    p_reg.add_argument("--r", type=float, default=None)
    p_reg.add_argument("--a", type=float, default=None, help="rule r^d = n^(-a)")
    p_reg.add_argument("--k", type=int, required=True, help="face dimension k (or l for chi)")
    p_reg.add_argument("--mode", choices=["fk", "chi"], default="fk")
    p_reg.add_argument("--rho", type=_parse_rho, default=None)
    p_reg.add_argument("--sparse-threshold", type=float, default=0.1)
    p_reg.add_argument("--growth-threshold", type=float, default=100.0)
    p_reg.add_argument("--vanish-threshold", type=float, default=0.1)
    p_reg.set_defaults(func=_cmd_regime)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    if args.subcommand == "regime" and (args.r is None) == (args.a is None):
        log.error("regime requires exactly one of --r / --a")
        return 1
    try:
        return args.func(args)
    except MemoryGuardError as exc:
        log.error("refused: %s", exc)
        return 2
    except (ConfigurationError, InputError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return 1
    except SoftplexError as exc:
        log.error("%s", exc)
        return 1


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
