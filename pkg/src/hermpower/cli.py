"""Command-line front end.

Exit codes: 0 success, 2 bad arguments or unreadable input, 3 a method
precondition failed (for example a non-Hermitian matrix given to a quantum method).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bench, chebyshev, fourier, mmio
from .errors import HermPowerError, ParseError, PreconditionError
from .matrix import (gen_cycle_walk, gen_parity_chain, gen_parity_chain_irreducible,
                     gen_random_stable, parity_delta, validate)
from .overlap import METHODS, matrix_power_element

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PRECONDITION = 3


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


def _parse_bits(text: str) -> list[int]:
    if not text or any(ch not in "01" for ch in text):
        raise UsageError(f"--bits must be a non-empty string of 0/1, got {text!r}")
    return [int(ch) for ch in text]


def _write_instance(prefix: str, a, u, v) -> dict:
    base = Path(prefix)
    if base.parent and not base.parent.exists():
        raise UsageError(f"output directory {base.parent} does not exist")
    paths = [base.with_name(base.name + ext) for ext in (".mtx", ".u", ".v")]
    mmio.write_matrix(paths[0], a)
    mmio.write_vector(paths[1], u)
    mmio.write_vector(paths[2], v)
    return {
        "matrix": str(paths[0]),
        "u": str(paths[1]),
        "v": str(paths[2]),
        "dim": a.dim,
        "hermitian": a.hermitian_flag,
        "digest": mmio.file_digest(*paths),
    }


def cmd_gen(args) -> int:
    try:
        if args.kind == "parity":
            a, u, v = gen_parity_chain(_parse_bits(args.bits))
        elif args.kind == "parity-irreducible":
            bits = _parse_bits(args.bits)
            delta = args.delta if args.delta is not None else parity_delta(len(bits), args.eps)
            a = gen_parity_chain_irreducible(bits, delta)
            _, u, v = gen_parity_chain(bits)
        elif args.kind == "random":
            a = gen_random_stable(args.n, args.d, args.rho, args.seed)
            rng = np.random.default_rng(args.seed + 1)
            u, v = (rng.standard_normal(args.n) + 1j * rng.standard_normal(args.n) for _ in range(2))
            u /= np.linalg.norm(u)
            v /= np.linalg.norm(v)
        else:
            a = gen_cycle_walk(args.n)
            u = np.zeros(args.n, dtype=np.complex128)
            u[0] = 1.0
            v = u.copy()
    except PreconditionError as exc:
        raise UsageError(str(exc)) from exc
    info = {"kind": args.kind, **_write_instance(args.out, a, u, v)}
    print(_dump(info))
    return EXIT_OK


def run_report(args) -> dict:
    a = mmio.read_matrix(args.matrix)
    u = mmio.read_vector(args.u)
    v = mmio.read_vector(args.v)
    if len(u) != a.dim or len(v) != a.dim:
        raise ParseError(f"vector lengths {len(u)}, {len(v)} do not match matrix dimension {a.dim}")
    rep = matrix_power_element(
        a, u, v, args.t, args.eps, args.method,
        c_bound=args.c_bound, seed=args.seed, completion_seed=args.completion_seed,
        lcu_mode=args.lcu_mode, simulator=args.simulator,
    )
    return {
        "method": rep.method,
        "t": args.t,
        "estimate": {"re": rep.value.real, "im": rep.value.imag},
        "target_eps": args.eps,
        "internal_eps": rep.internal_eps,
        "samples": rep.samples,
        "oracle_calls_OF": rep.ledger.calls_OF,
        "oracle_calls_OA": rep.ledger.calls_OA,
        "ledger_mode": rep.ledger.mode,
        "C_bound": rep.c_bound,
        "seed": args.seed,
        "wall_ms": rep.wall_ms,
        "matrix_digest": mmio.file_digest(args.matrix, args.u, args.v),
        "std_error": rep.std_error,
        "cost_constant": rep.ledger.cost_constant,
    }


def cmd_power(args) -> int:
    if args.t < 0:
        raise UsageError("--t must be non-negative")
    if not args.eps > 0:
        raise UsageError("--eps must be positive")
    report = run_report(args)
    if args.json:
        print(_dump(report))
    else:
        est = report["estimate"]
        print(f"{report['method']}  t={report['t']}  estimate={est['re']:.12g}{est['im']:+.12g}j"
              f"  +/- {report['target_eps']:g}  calls={report['oracle_calls_OF']} ({report['ledger_mode']})")
    return EXIT_OK


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def cmd_bench(args) -> int:
    table = bench.run_suite(args.suite, args.method, ts=args.t, epss=args.eps, seed=args.seed)
    text = table.to_csv()
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_weights(args) -> int:
    if args.t < 0:
        raise UsageError("--t must be non-negative")
    w = chebyshev.weights(args.t)
    if args.json:
        print(_dump({"t": args.t, "expected_order": chebyshev.expected_order(args.t),
                     "weights": {str(m): p for m, p in w.as_dict().items()}}))
    else:
        for m, p in w.as_dict().items():
            print(f"{m} {float(p)!r}")
    return EXIT_OK


def cmd_fourier(args) -> int:
    if args.t < 1 or args.harmonics < 0:
        raise UsageError("need --t >= 1 and --harmonics >= 0")
    fc = fourier.coefficients(args.t, args.harmonics)
    tail = fourier.tail_bound(args.t, args.harmonics)
    if args.json:
        print(_dump({
            "t": args.t,
            "parity": fc.parity,
            "harmonic_index": [int(n) for n in fc.harmonic_index],
            "coeffs": [float(c) for c in fc.coeffs],
            "l1": fc.l1,
            "tail_bound": None if math.isinf(tail) else tail,
        }))
    else:
        for p, (n, c) in enumerate(zip(fc.harmonic_index, fc.coeffs)):
            print(f"{p} {n} {float(c)!r}")
    return EXIT_OK


def cmd_validate(args) -> int:
    a = mmio.read_matrix(args.matrix)
    rep = validate(a, require_hermitian=False)
    out = {
        "dim": rep.dim,
        "nnz": rep.nnz,
        "sparsity": rep.sparsity,
        "hermitian": rep.hermitian,
        "one_norm": rep.norms.one_norm,
        "two_norm_lower": rep.norms.two_norm_lower,
        "two_norm_upper": rep.norms.two_norm_upper,
        "stable": rep.stable,
        "digest": mmio.file_digest(args.matrix),
    }
    if args.json:
        print(_dump(out))
    else:
        for k, val in out.items():
            print(f"{k}: {val}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hermpower", description="Powers of sparse Hermitian matrices via simulated quantum walks.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a test instance (matrix + u + v)")
    g.add_argument("kind", choices=["parity", "parity-irreducible", "random", "cycle"])
    g.add_argument("--bits", default=None, help="bit string for parity kinds, e.g. 101")
    g.add_argument("--delta", type=float, default=None, help="perturbation strength (parity-irreducible)")
    g.add_argument("--eps", type=float, default=0.1, help="target eps used to pick delta when --delta is absent")
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--rho", type=float, default=0.9)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output prefix; writes PREFIX.mtx, PREFIX.u, PREFIX.v")
    g.set_defaults(func=cmd_gen)

    w = sub.add_parser("power", help="estimate v^dag A^t u")
    w.add_argument("matrix")
    w.add_argument("u")
    w.add_argument("v")
    w.add_argument("--t", type=int, required=True)
    w.add_argument("--eps", type=float, default=0.1)
    w.add_argument("--method", choices=METHODS, default="dense")
    w.add_argument("--c-bound", type=float, default=None, help="bound C >= ||A||_1 (default: ||A||_1)")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--completion-seed", type=int, default=0)
    w.add_argument("--lcu-mode", choices=["exact", "sampled"], default="exact")
    w.add_argument("--simulator", choices=["spectral", "stepped"], default="spectral")
    w.add_argument("--json", action="store_true")
    w.set_defaults(func=cmd_power)

    b = sub.add_parser("bench", help="scaling sweeps as CSV")
    b.add_argument("suite", choices=bench.SUITES)
    b.add_argument("--method", choices=METHODS, default=None)
    b.add_argument("--t", type=_int_list, default=None, help="comma-separated powers")
    b.add_argument("--eps", type=_float_list, default=None, help="comma-separated precisions")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--csv", default=None, help="write CSV here instead of stdout")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("weights", help="Chebyshev weights p_m for x^t")
    c.add_argument("--t", type=int, required=True)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_weights)

    f = sub.add_parser("fourier-coeffs", help="Fourier coefficients of x^t")
    f.add_argument("--t", type=int, required=True)
    f.add_argument("--harmonics", type=int, required=True)
    f.add_argument("--json", action="store_true")
    f.set_defaults(func=cmd_fourier)

    v = sub.add_parser("validate", help="Hermiticity, norms and stability of a matrix file")
    v.add_argument("matrix")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen" and args.kind.startswith("parity") and args.bits is None:
        parser.error("--bits is required for parity instances")
    try:
        return args.func(args)
    except (UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except HermPowerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
