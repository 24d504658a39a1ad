"""Command-line entry point.

Subcommands: gen (write a random state), validate (pattern checks), run
(single-cell benchmark), sweep (full grid), kernelbench (compare kernel
backends). Exit codes: 0 success, 1 usage error, 2 validation failure,
3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict

import numpy as np

from . import kernels
from .bench import ExperimentConfig, load_config, run_sweep
from .errors import AlgQSTError
from .patterns import load_pattern, validate_pattern
from .qcore import ginibre_random_state, save_density
from .subspace import _ptot_buffers, padded_basis

USAGE_ERROR = 1
VALIDATION_FAILURE = 2
RUNTIME_ERROR = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage by default; the interface
    # reserves 2 for validation failures, so remap to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_ERROR)


def _build_parser() -> _Parser:
    parser = _Parser(prog="algqst", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a random rank-R state as JSON")
    gen.add_argument("--qubits", type=int, required=True)
    gen.add_argument("--rank", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    val = sub.add_parser("validate", help="check a pattern file, print the report")
    val.add_argument("--pattern", required=True)
    val.add_argument("--rank", type=int, required=True)

    run = sub.add_parser("run", help="single-method, single-d benchmark")
    run.add_argument("--config", required=True)

    sweep = sub.add_parser("sweep", help="full benchmark grid")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--jobs", type=int, default=1)

    kb = sub.add_parser("kernelbench", help="time the kernel backends")
    kb.add_argument("--dim", type=int, default=256)
    kb.add_argument("--rank", type=int, default=2)
    kb.add_argument("--step", type=int, default=1)
    kb.add_argument("--reps", type=int, default=50)
    return parser


def _cmd_gen(args) -> int:
    state = ginibre_random_state(2 ** args.qubits, args.rank, args.seed)
    save_density(state, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_validate(args) -> int:
    pattern = load_pattern(args.pattern)
    report = validate_pattern(pattern, args.rank)
    print(json.dumps(asdict(report), indent=2))
    return 0 if report.all_ok() else VALIDATION_FAILURE


def _cmd_run(args, parser) -> int:
    cfg = _read_config(args.config, parser)
    if len(cfg.methods) != 1 or len(cfg.d_values) != 1:
        parser.error("run takes exactly one method and one d; use sweep for grids")
    _, medians = run_sweep(cfg)
    print(json.dumps(medians, indent=2))
    return 0


def _cmd_sweep(args, parser) -> int:
    cfg = _read_config(args.config, parser)
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    _, medians = run_sweep(cfg, jobs=args.jobs)
    print(json.dumps(medians, indent=2))
    return 0


def _read_config(path: str, parser) -> ExperimentConfig:
    try:
        return load_config(path)
    except (OSError, json.JSONDecodeError, TypeError, AlgQSTError) as e:
        parser.error(f"bad config {path}: {e}")


def _cmd_kernelbench(args) -> int:
    D, R, d = args.dim, args.rank, args.step
    rng = np.random.default_rng(0)
    bases = []
    start = 1
    while start + R + d - 1 <= D:
        idx = tuple(range(start, start + R + d))
        local = np.linalg.qr(rng.standard_normal((len(idx), R))
                             + 1j * rng.standard_normal((len(idx), R)))[0]
        bases.append(padded_basis(local, idx, D))
        start += d
    w, idx_flat, idx_off, u_stack, _, _ = _ptot_buffers(bases)
    V = np.ascontiguousarray(rng.standard_normal((D, R + 4))
                             + 1j * rng.standard_normal((D, R + 4)))

    report = {"dim": D, "rank": R, "step": d, "blocks": len(bases),
              "active_backend": kernels.backend_name()}
    outputs = {}
    for name in kernels.available_backends():
        fn = kernels.get_backend(name)
        fn(V, w, idx_flat, idx_off, u_stack)
        times = []
        for _ in range(args.reps):
            t0 = time.perf_counter()
            out = fn(V, w, idx_flat, idx_off, u_stack)
            times.append(time.perf_counter() - t0)
        outputs[name] = out
        report[f"seconds_per_apply_{name}"] = float(np.median(times))
    if len(outputs) == 2:
        report["max_abs_diff"] = float(np.max(np.abs(outputs["cython"] - outputs["python"])))
        report["speedup"] = (report["seconds_per_apply_python"]
                             / report["seconds_per_apply_cython"])
    print(json.dumps(report, indent=2))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "run":
            return _cmd_run(args, parser)
        if args.command == "sweep":
            return _cmd_sweep(args, parser)
        return _cmd_kernelbench(args)
    except SystemExit:
        raise
    except (OSError, json.JSONDecodeError) as e:
        sys.stderr.write(f"error: {e}\n")
        return RUNTIME_ERROR
    except AlgQSTError as e:
        sys.stderr.write(f"error: {e}\n")
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
