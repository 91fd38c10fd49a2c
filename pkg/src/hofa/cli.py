"""Command-line front end.

Subcommands: ``count`` (the averaged counting operators over set files),
``popdiff`` (popular-difference search, direct or through the decomposition
pipeline), ``verify`` (seeded property suites), ``gen`` (deterministic set
generation), and ``bench`` (kernel implementations timed against each other).

stdout carries exactly one JSON document (CSV for ``bench``); diagnostics go
to stderr.  JSON outputs conform to the schema shipped at
``hofa/schemas/cli.schema.json``.  Exit codes: 0 ok, 1 property failure,
2 usage or malformed input, 3 precondition or invariant violation.
All randomness is Philox-keyed by ``--seed``; ``--threads`` (or the
HOFA_THREADS variable) sets the worker count without affecting any result.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import counting, energy, kernels, verify
from .core import BoxSpec, ConfigSpec, PhaseTable, SetIndicator, TorusPhase
from .rng import make_rng
from .setfile import SetFileError, read_set, write_set

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_USAGE = 2
EXIT_PRECONDITION = 3


class UsageError(ValueError):
    pass


def _parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _parse_phases(text: str) -> list[TorusPhase]:
    out = []
    for part in text.split(","):
        if "/" in part:
            num, den = part.split("/")
            out.append(TorusPhase.exact(int(num), int(den)))
        else:
            out.append(TorusPhase.from_float(float(part)))
    return out


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _complex_doc(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _apply_threads(args) -> None:
    threads = getattr(args, "threads", None)
    if threads is None:
        env = os.environ.get("HOFA_THREADS", "").strip()
        threads = int(env) if env else 1
    counting.set_threads(threads)


# ---------------------------------------------------------------------------
# count


def cmd_count(args) -> int:
    A = read_set(args.set)
    m = _parse_ints(args.m)
    phases = _parse_phases(args.phase_const) if args.phase_const else []
    k = len(phases)
    n = len(m) - k
    if n < 1:
        raise UsageError("need more exponents than phases")
    if A.box.n != n:
        raise ValueError(f"set is {A.box.n}-D but the configuration needs {n}-D")
    grid = A.to_grid()
    fs = [grid] * (n + 1)
    integer_count = None
    if args.N is not None:
        base_dims = tuple(args.N ** mi for mi in m[:n])
        rng_size = args.N
        if phases:
            operator = "phased"
            alphas = [PhaseTable.constant(BoxSpec(base_dims), p) for p in phases]
            lam = counting.lambda_phased(fs, alphas, m, args.N)
            oracle = (counting.lambda_phased_bruteforce(fs, alphas, m, args.N)
                      if args.oracle else None)
        else:
            operator = "simple"
            lam = counting.lambda_simple(fs, m, args.N)
            shifts = [[r ** mi for mi in m] for r in range(1, args.N + 1)]
            integer_count = sum(
                kernels.pattern_count_fast([A.mask] * (n + 1), base_dims, row)
                for row in shifts)
            oracle = (counting.lambda_simple_bruteforce(fs, m, args.N)
                      if args.oracle else None)
    else:
        if phases:
            raise UsageError("--phase-const needs --N (the phased operator "
                             "averages over the power box)")
        operator = "general"
        M = args.M if args.M is not None else 1
        spec = ConfigSpec(m, A.box, q=args.q, M=M)
        base_dims = A.box.dims
        rng_size = M
        lam = counting.lambda_general(fs, spec)
        integer_count = int(counting.lambda_indicator_counts(
            [A] * (n + 1), spec).sum())
        oracle = counting.lambda_general_bruteforce(fs, spec) if args.oracle else None
    norm = rng_size
    for d in base_dims:
        norm *= d
    doc = {"command": "count", "operator": operator,
           "lambda": _complex_doc(lam), "normalization": int(norm),
           "integer_count": integer_count, "oracle": None, "ok": True}
    if oracle is not None:
        dev = abs(lam - oracle)
        doc["oracle"] = {"lambda": _complex_doc(oracle), "max_dev": float(dev)}
        doc["ok"] = bool(dev <= 1e-9)
    _emit(doc)
    return EXIT_OK if doc["ok"] else EXIT_PROPERTY


# ---------------------------------------------------------------------------
# popdiff


def cmd_popdiff(args) -> int:
    A = read_set(args.set)
    m = _parse_ints(args.m)
    if A.box.n != len(m):
        raise ValueError(f"set is {A.box.n}-D but m has {len(m)} entries")
    if A.count == 0:
        raise ValueError("popular-difference search needs a nonempty set")
    if args.pipeline:
        if args.delta is None:
            raise UsageError("--pipeline needs --delta")
        res = energy.popular_difference_pipeline(
            A, m, args.delta, allow_fallback=args.fallback)
        doc = {"command": "popdiff", "mode": "pipeline", "r_star": res.r,
               "count": res.count, "certificate": res.certificate}
        hist = res.histogram
    else:
        M = args.M
        if M is None:
            M = max(1, energy._integer_root(A.box.dims[-1], m[-1]))
        direct = counting.best_popular_difference(A, m, M)
        doc = {"command": "popdiff", "mode": "direct", "r_star": direct.r_star,
               "count": direct.count, "certificate": None}
        hist = direct.histogram
    doc["histogram_path"] = None
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"histogram": [int(c) for c in hist]}, fh)
        doc["histogram_path"] = args.out
    _emit(doc)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    try:
        rep = verify.run_suite(args.suite, args.seed, args.trials)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    rep["command"] = "verify"
    _emit(rep)
    return EXIT_OK if rep["failures"] == 0 else EXIT_PROPERTY


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    box = BoxSpec(_parse_ints(args.box))
    kind = args.kind
    if kind == "full":
        A = SetIndicator.full(box)
    elif kind == "empty":
        A = SetIndicator.empty(box)
    elif kind == "random":
        if args.p is None:
            raise UsageError("random needs --p")
        rng = make_rng(args.seed)
        A = SetIndicator(box, rng.random(box.dims) < args.p)
    elif kind == "residue":
        if args.q is None or args.allowed is None:
            raise UsageError("residue needs --q and --allowed")
        allowed = set(_parse_ints(args.allowed))
        mask = np.ones(box.dims, dtype=bool)
        for a, d in enumerate(box.dims):
            axis_ok = np.isin(np.arange(1, d + 1) % args.q,
                              [v % args.q for v in allowed])
            shape = [1] * box.n
            shape[a] = d
            mask &= axis_ok.reshape(shape)
        A = SetIndicator(box, mask)
    elif kind == "product-ap":
        if args.start is None or args.step is None:
            raise UsageError("product-ap needs --start and --step")
        start = _parse_ints(args.start)
        step = _parse_ints(args.step)
        if len(start) != box.n or len(step) != box.n:
            raise UsageError("--start/--step must match the box dimension")
        mask = np.ones(box.dims, dtype=bool)
        for a, d in enumerate(box.dims):
            xs = np.arange(1, d + 1)
            axis_ok = (xs >= start[a]) & ((xs - start[a]) % max(1, step[a]) == 0)
            shape = [1] * box.n
            shape[a] = d
            mask &= axis_ok.reshape(shape)
        A = SetIndicator(box, mask)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown kind {kind}")
    write_set(A, args.out, binary=args.binary)
    _emit({"command": "gen", "kind": kind, "path": args.out,
           "box": list(box.dims), "members": A.count,
           "format": "binary" if args.binary else "text"})
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench


def cmd_bench(args) -> int:
    box = BoxSpec(_parse_ints(args.box))
    m = _parse_ints(args.m)
    rng = make_rng(args.seed)
    A = SetIndicator(box, rng.random(box.dims) < args.p)
    M = args.M if args.M is not None else max(1, box.dims[0] - 1)
    impls = [("numpy", kernels.pattern_count_numpy),
             ("naive", kernels.pattern_count_pointwise)]
    if kernels.pattern_count_numba is not None:
        impls.insert(0, ("numba", kernels.pattern_count_numba))
    masks = [A.mask] * (box.n + 1)
    rows = []
    results = {}
    for name, fn in impls:
        shift_rows = [tuple(r ** mi for mi in m) for r in range(1, M + 1)]
        fn(masks, box.dims, shift_rows[0])  # warm-up (jit compile, caches)
        t0 = time.perf_counter()
        counts = [fn(masks, box.dims, row) for row in shift_rows]
        dt = time.perf_counter() - t0
        results[name] = counts
        rows.append((name, "x".join(map(str, box.dims)), M, sum(counts), dt))
    reference = results[impls[0][0]]
    agree = all(v == reference for v in results.values())
    sys.stdout.write("impl,box,M,total_count,seconds\n")
    for name, boxs, Mv, tot, dt in rows:
        sys.stdout.write(f"{name},{boxs},{Mv},{tot},{dt:.6f}\n")
    if not agree:
        print("bench: implementations disagree", file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hofa",
                                description="configuration counting and "
                                            "popular-difference tooling")
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("count", help="averaged counting operators on a set file")
    c.add_argument("--set", required=True)
    c.add_argument("--m", required=True, help="comma-separated exponents")
    c.add_argument("--N", type=int, help="difference range of the power-box operator")
    c.add_argument("--q", type=int, default=1)
    c.add_argument("--M", type=int, help="difference range of the general operator")
    c.add_argument("--phase-const", help="constant phases t/T, comma-separated")
    c.add_argument("--oracle", action="store_true",
                   help="cross-check against the brute-force path")
    c.add_argument("--threads", type=int)
    c.set_defaults(fn=cmd_count)

    d = sub.add_parser("popdiff", help="popular-difference search")
    d.add_argument("--set", required=True)
    d.add_argument("--m", required=True)
    d.add_argument("--M", type=int)
    d.add_argument("--delta", type=float)
    d.add_argument("--pipeline", action="store_true")
    d.add_argument("--fallback", action="store_true")
    d.add_argument("--out", help="write the count histogram to this JSON file")
    d.add_argument("--threads", type=int)
    d.set_defaults(fn=cmd_popdiff)

    v = sub.add_parser("verify", help="run a seeded property suite")
    v.add_argument("suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=10)
    v.set_defaults(fn=cmd_verify)

    g = sub.add_parser("gen", help="generate a set file")
    g.add_argument("kind", choices=["random", "full", "empty", "residue",
                                    "product-ap"])
    g.add_argument("--box", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--p", type=float)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--q", type=int)
    g.add_argument("--allowed")
    g.add_argument("--start")
    g.add_argument("--step")
    g.add_argument("--binary", action="store_true")
    g.set_defaults(fn=cmd_gen)

    b = sub.add_parser("bench", help="time the counting kernels against each other")
    b.add_argument("--box", default="64,4096")
    b.add_argument("--m", default="1,2")
    b.add_argument("--M", type=int)
    b.add_argument("--p", type=float, default=0.5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--format", choices=["csv"], default="csv")
    b.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _apply_threads(args)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SetFileError as exc:
        print(f"bad set file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OverflowError, energy.DecompositionError) as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
