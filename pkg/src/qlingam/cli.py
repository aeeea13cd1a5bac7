"""Command-line front end.

Subcommands: ``gen`` (benchmark data), ``prep`` (clean/subsample a CSV),
``discover`` (one dataset), ``gram`` (dump a Gram matrix) and ``table1``
(benchmark counts for both kernels). Exit codes: 0 success, 2 usage or
validation, 3 data, 4 numerical.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from ._rng import SEED_MAX, derive_seed
from .dataset import (
    UCI_HEART_COLUMNS,
    MissingPolicy,
    SyntheticSpec,
    gen_synthetic,
    load_csv,
    standardize,
    subsample,
    synthetic_adjacency,
)
from .errors import HeaderMissing, QLingamError, ValidationError
from .independence import NoccoConfig
from .kernels import FeatureMapConfig, KernelConfig, center_gram, gram
from .lingam import DiscoveryConfig, discover, ordering_consistent, structure_equal
from .quantum import NOISY_DEFAULT, IqpCircuitSpec, ReadoutNoiseModel
from .reporting import build_manifest, dumps, manifest_path, write_json, write_matrix_csv

DATASET_KINDS = {
    "heart": {"vars": ["age", "cp", "exang"], "tokens": ["?"], "zero": []},
    "pima": {"vars": ["age", "insulin", "glucose"], "tokens": [], "zero": ["insulin", "glucose"]},
    "generic": {"vars": None, "tokens": ["?"], "zero": []},
}

# Paper's reported split over 100 benchmark datasets
REFERENCE_COUNTS = {"both": 39, "neither": 38, "only_quantum": 14, "only_gaussian": 9}

CAL_SHOTS_DEFAULT = 100_000
# key that separates the calibration stream from the per-pair kernel streams
_CAL_STREAM = 0xCA1


class UsageError(ValidationError):
    pass


def _seed(text):
    try:
        value = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be a decimal integer, got {text!r}") from None
    if not 0 <= value <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _names(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def _add_kernel_flags(p, with_kind=True):
    if with_kind:
        p.add_argument("--kernel", choices=["quantum", "gaussian"], default="quantum")
    p.add_argument("--qubits", type=int, default=None,
                   help="circuit qubits (default 5, or 4 when readout noise is simulated)")
    p.add_argument("--depth", type=int, default=None,
                   help="diagonal layers (default 2, or 1 when readout noise is simulated)")
    p.add_argument("--scale", type=float, default=2.0, help="feature-map multiplier after standardizing")
    p.add_argument("--bandwidth", default="median", help="Gaussian bandwidth or 'median'")
    p.add_argument("--mode", choices=["exact", "shots"], default="exact")
    p.add_argument("--shots", type=int, default=8192)
    p.add_argument("--noise", type=float, default=None, metavar="P",
                   help="readout flip probability for both 0->1 and 1->0 (implies --mode shots)")
    p.add_argument("--p01", type=float, default=None)
    p.add_argument("--p10", type=float, default=None)
    p.add_argument("--mitigate", action="store_true", help="apply calibration-matrix readout mitigation")
    p.add_argument("--cal-shots", type=int, default=CAL_SHOTS_DEFAULT, help="shots per calibration basis state")
    p.add_argument("--seed", type=_seed, default=0)


def _kernel_config(args, kind=None):
    kind = kind or args.kernel
    p01 = args.p01 if args.p01 is not None else args.noise
    p10 = args.p10 if args.p10 is not None else args.noise
    noise = None
    if p01 is not None or p10 is not None:
        noise = ReadoutNoiseModel(p01 or 0.0, p10 or 0.0)
    mode = "shots" if (noise is not None or args.mitigate) else args.mode
    base = NOISY_DEFAULT if noise is not None else IqpCircuitSpec()
    circuit = IqpCircuitSpec(args.qubits or base.q, args.depth or base.depth)
    kcfg = KernelConfig(kind, circuit, args.bandwidth, mode, args.shots, noise)
    if args.mitigate and kind == "quantum":
        kcfg = kcfg.with_calibration(args.cal_shots, derive_seed(args.seed, _CAL_STREAM))
    return kcfg


def _kernel_echo(args, kcfg):
    out = kcfg.to_dict()
    if kcfg.calibration is not None:
        out["calibration_shots"] = args.cal_shots
    return out


def _finish(command, seed, config, inputs, outputs, started):
    manifest = build_manifest(command, config, seed, inputs, outputs,
                              time.perf_counter() - started)
    write_json(manifest_path(outputs[0]), manifest)


# -- commands ---------------------------------------------------------------

def cmd_gen(args):
    started = time.perf_counter()
    if args.n < 1:
        raise UsageError("n must be ≥ 1")
    dm = gen_synthetic(SyntheticSpec(args.n, args.seed))
    dm.to_csv(args.out)
    _finish("gen", args.seed, {"n": args.n, "seed": args.seed}, [], [args.out], started)
    print(f"wrote {dm.n} rows to {args.out}")


def cmd_prep(args):
    started = time.perf_counter()
    kind = DATASET_KINDS[args.kind]
    names = _names(args.vars) if args.vars else kind["vars"]
    tokens = args.missing_token if args.missing_token is not None else kind["tokens"]
    zero = _names(args.zero_missing) if args.zero_missing is not None else kind["zero"]
    policy = MissingPolicy(tokens, zero)
    try:
        dm = load_csv(args.input, policy, names)
    except HeaderMissing:
        if args.kind != "heart":
            raise
        # the UCI distribution file ships without a header row
        dm = load_csv(args.input, policy, names, column_names=UCI_HEART_COLUMNS)
    n_clean = dm.n
    if args.subsample is not None:
        dm = subsample(dm, args.subsample, args.seed)
    dm.to_csv(args.out)
    config = {
        "kind": args.kind,
        "variables": dm.names,
        "missing_tokens": tokens,
        "zero_as_missing": zero,
        "rows_after_cleaning": n_clean,
        "subsample": args.subsample,
        "n": dm.n,
    }
    _finish("prep", args.seed, config, [args.input], [args.out], started)
    print(f"{args.input}: {n_clean} complete rows; wrote n={dm.n} to {args.out}")


def _discovery_config(args):
    return DiscoveryConfig(
        kernel=_kernel_config(args),
        fmap=FeatureMapConfig(args.scale),
        nocco=NoccoConfig(args.epsilon),
        prune_threshold=args.prune,
        master_seed=args.seed,
    )


def cmd_discover(args):
    started = time.perf_counter()
    dm = load_csv(args.input, MissingPolicy([], []), _names(args.vars) if args.vars else None)
    cfg = _discovery_config(args)
    model = discover(dm, cfg)
    if cfg.kernel.calibration is not None:
        model.config["kernel"]["calibration_shots"] = args.cal_shots
    outputs = []
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(model.to_json())
        outputs.append(args.out)
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(model.to_dot())
        outputs.append(args.dot)
    if outputs:
        _finish("discover", args.seed, model.config, [args.input], outputs, started)
    print("ordering: " + " -> ".join(model.variables[k] for k in model.ordering))
    edges = model.edges()
    if not edges:
        print("edges: none")
    for c, e in edges:
        print(f"  {model.variables[c]} -> {model.variables[e]}  {model.B[e, c]:.2f}")


def cmd_gram(args):
    started = time.perf_counter()
    dm = load_csv(args.input, MissingPolicy([], []), [args.var])
    series = dm.values[0]
    standardize(series)  # a constant variable is a data error here, not a degenerate Gram
    kcfg = _kernel_config(args)
    fcfg = FeatureMapConfig(args.scale)
    K, hist = gram(series, kcfg, fcfg, seed=args.seed, histograms=True)
    if args.centered:
        K = center_gram(K)
    write_matrix_csv(args.out, K.entries)
    sidecar = args.sidecar or os.path.splitext(args.out)[0] + ".json"
    config = _kernel_echo(args, kcfg)
    meta = {
        "kind": kcfg.kind,
        "n": K.n,
        "variable": dm.names[0],
        "centered": K.centered,
        "config": config,
        "feature_scale": fcfg.scale,
        "seed": args.seed,
        "min_eigenvalue": K.min_eigenvalue(),
    }
    write_json(sidecar, meta)
    outputs = [args.out, sidecar]
    if args.histograms:
        if hist is None:
            raise UsageError("--histograms needs a quantum kernel in shot mode")
        iu, ju, counts = hist
        write_json(args.histograms, [
            {"i": int(i), "j": int(j), "counts": c.tolist()} for i, j, c in zip(iu, ju, counts)
        ])
        outputs.append(args.histograms)
    _finish("gram", args.seed, meta, [args.input], outputs, started)
    print(f"wrote {K.n}x{K.n} {kcfg.kind} Gram to {args.out} (min eigenvalue {meta['min_eigenvalue']:.3e})")


def _table1_one(job):
    index, seed, n, cfgs = job
    ref = synthetic_adjacency()
    record = {"dataset": index, "seed": seed}
    try:
        data = gen_synthetic(SyntheticSpec(n, seed))
        for name, cfg in cfgs.items():
            cfg = DiscoveryConfig(cfg.kernel, cfg.fmap, cfg.nocco, cfg.prune_threshold, seed)
            model = discover(data, cfg)
            record[name] = {
                "ordering": model.ordering,
                "edges": [list(e) for e in model.edges()],
                "structure_correct": structure_equal(model, ref),
                "ordering_correct": ordering_consistent(model.ordering, ref),
            }
    except QLingamError as exc:
        record = {"dataset": index, "seed": seed, "error": f"{type(exc).__name__}: {exc}"}
    return record


def run_table1(datasets, n, seed_base, cfgs, workers=1):
    """Benchmark both kernels on ``datasets`` synthetic draws; returns the report dict."""
    jobs = [(k, seed_base + k, n, cfgs) for k in range(datasets)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            details = list(pool.map(_table1_one, jobs))
    else:
        details = [_table1_one(job) for job in jobs]

    counts = dict.fromkeys(REFERENCE_COUNTS, 0)
    totals = {name: {"structure_correct": 0, "ordering_correct": 0} for name in cfgs}
    done = [d for d in details if "error" not in d]
    for d in done:
        q, g = d["quantum"]["structure_correct"], d["gaussian"]["structure_correct"]
        key = "both" if q and g else "only_quantum" if q else "only_gaussian" if g else "neither"
        counts[key] += 1
        for name in cfgs:
            totals[name]["structure_correct"] += d[name]["structure_correct"]
            totals[name]["ordering_correct"] += d[name]["ordering_correct"]
    return {
        "config": {
            "datasets": datasets,
            "n": n,
            "seed_base": seed_base,
            **{name: cfg.to_dict() for name, cfg in cfgs.items()},
        },
        "counts": counts,
        "totals": totals,
        "completed": len(done),
        "failed": len(details) - len(done),
        "reference_counts": dict(REFERENCE_COUNTS),
        "details": details,
    }


def format_table1(report):
    c, r, t = report["counts"], report["reference_counts"], report["totals"]
    lines = [
        f"{'':14}{'both':>8}{'neither':>9}{'only_q':>8}{'only_g':>8}",
        f"{'this run':14}{c['both']:>8}{c['neither']:>9}{c['only_quantum']:>8}{c['only_gaussian']:>8}",
        f"{'reference':14}{r['both']:>8}{r['neither']:>9}{r['only_quantum']:>8}{r['only_gaussian']:>8}",
        "",
    ]
    for name in ("quantum", "gaussian"):
        lines.append(
            f"{name:9} structure {t[name]['structure_correct']:>3}/{report['completed']}"
            f"   ordering {t[name]['ordering_correct']:>3}/{report['completed']}"
        )
    if report["failed"]:
        lines.append(f"failed datasets: {report['failed']}")
    return "\n".join(lines)


def cmd_table1(args):
    started = time.perf_counter()
    if args.datasets < 1:
        raise UsageError("datasets must be ≥ 1")
    if args.n < 2:
        raise UsageError("n must be ≥ 2")
    cfgs = {}
    for kind in ("quantum", "gaussian"):
        cfgs[kind] = DiscoveryConfig(
            kernel=_kernel_config(args, kind),
            fmap=FeatureMapConfig(args.scale),
            nocco=NoccoConfig(args.epsilon),
            prune_threshold=args.prune,
        )
    report = run_table1(args.datasets, args.n, args.seed_base, cfgs, args.workers)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps(report))
        _finish("table1", args.seed_base, report["config"], [], [args.out], started)
    print(format_table1(report))
    if report["completed"] < 0.9 * args.datasets:
        print(f"error: only {report['completed']} of {args.datasets} datasets completed", file=sys.stderr)
        return 4
    return 0


# -- entry point ------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="qlingam", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"qlingam {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic three-variable Laplace SEM dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("prep", help="drop incomplete records, select variables, optionally subsample")
    p.add_argument("--kind", choices=sorted(DATASET_KINDS), default="generic")
    p.add_argument("--input", required=True)
    p.add_argument("--vars", help="comma-separated variable names (kind default otherwise)")
    p.add_argument("--missing-token", action="append", default=None,
                   help="cell value marking a missing entry (repeatable)")
    p.add_argument("--zero-missing", default=None, help="comma-separated columns where 0 means missing")
    p.add_argument("--subsample", type=int, default=None, metavar="K")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("discover", help="run kernel DirectLiNGAM on a prepared CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--vars", help="comma-separated subset of columns (all by default)")
    _add_kernel_flags(p)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--prune", type=float, default=0.1, help="standardized-strength threshold")
    p.add_argument("--out", help="CausalModel JSON path")
    p.add_argument("--dot", help="Graphviz DOT path")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("gram", help="dump the Gram matrix of one variable")
    p.add_argument("--input", required=True)
    p.add_argument("--var", required=True)
    _add_kernel_flags(p)
    p.add_argument("--centered", action="store_true", help="write H K H instead of K")
    p.add_argument("--out", required=True, help="Gram CSV path")
    p.add_argument("--sidecar", help="JSON metadata path (default: --out with .json suffix)")
    p.add_argument("--histograms", help="write per-pair shot histograms to this JSON path")
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("table1", help="count correct structures over synthetic datasets, both kernels")
    p.add_argument("--datasets", type=int, default=100)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed-base", type=_seed, default=0)
    _add_kernel_flags(p, with_kind=False)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--prune", type=float, default=0.1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=cmd_table1)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except QLingamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
