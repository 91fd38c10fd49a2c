"""Configuration-counting operators and popular-difference search.

The basic object is the normalized count of patterns

    x, x + d_1 e_1, ..., x + d_n e_n      with d_j = (q r)^(m_j)

averaged over base points x in a box and differences r in a range.  Complex
weights give the averaged operators ``lambda_*``; 0/1 indicators admit an
exact integer path (``popular_count`` and friends) built on the kernels
module.  Brute-force oracles are kept alongside for verification.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .core import BoxSpec, ConfigSpec, GridFunction, PhaseTable, SetIndicator

MAX_SHIFT = 1 << 62

_threads = 1


def set_threads(k: int) -> None:
    """Worker count for the per-difference loops (results are unaffected)."""
    global _threads
    _threads = max(1, int(k))


def get_threads() -> int:
    return _threads


def _check_shift(d: int) -> int:
    if d > MAX_SHIFT:
        raise OverflowError(f"shift {d} exceeds 2^62 index guard")
    return d


def _shifts(m: Sequence[int], step: int) -> tuple[int, ...]:
    return tuple(_check_shift(step ** mi) for mi in m)


def _check_compatible(fs: Sequence[GridFunction], base_dims: Sequence[int]) -> None:
    for i, f in enumerate(fs):
        if f.box.n != len(base_dims):
            raise ValueError(f"f_{i} has dimension {f.box.n}, expected {len(base_dims)}")
        for a, (d, b) in enumerate(zip(f.box.dims, base_dims)):
            if d not in (b, 2 * b):
                raise ValueError(
                    f"f_{i} axis {a + 1} has extent {d}; expected {b} or {2 * b}")


def _lambda_sum(fs: Sequence[GridFunction], base_dims: tuple[int, ...],
                shift_rows: Sequence[tuple[int, ...]],
                phase_factors: Sequence[np.ndarray] | None = None) -> complex:
    """Sum over r-rows of sum_x f_0(x) prod_j f_j(x + d_j e_j) [, phase(x, r)]."""
    n = len(base_dims)
    zero = (0,) * n
    f0_win = fs[0].read_window(zero, base_dims)
    per_r = []
    for ri, row in enumerate(shift_rows):
        prod = f0_win.copy()
        for j in range(n):
            off = tuple(row[j] if a == j else 0 for a in range(n))
            prod *= fs[j + 1].read_window(off, base_dims)
        if phase_factors is not None:
            prod *= phase_factors[ri]
        per_r.append(prod.sum())
    return complex(np.sum(np.asarray(per_r))) if per_r else 0j


def lambda_simple(fs: Sequence[GridFunction], m: Sequence[int], N: int) -> complex:
    """Average of f_0(x) prod_j f_j(x + r^(m_j) e_j) over x in prod [N^(m_j)],
    r in [N].

    Each f_j lives on the base box, possibly doubled along any axis; reads
    outside its own box are zero.  The normalization is exactly
    N^(m_1 + ... + m_n) * N.
    """
    m = tuple(int(v) for v in m)
    n = len(fs) - 1
    if len(m) != n:
        raise ValueError(f"{n + 1} functions need an exponent tuple of length {n}")
    base_dims = tuple(_check_shift(N ** mi) for mi in m)
    _check_compatible(fs, base_dims)
    rows = [_shifts(m, r) for r in range(1, N + 1)]
    total = _lambda_sum(fs, base_dims, rows)
    norm = N
    for d in base_dims:
        norm *= d
    return total / norm


def lambda_general(fs: Sequence[GridFunction], spec: ConfigSpec) -> complex:
    """Average of f_0(x) prod_j f_j(x + (q r)^(m_j) e_j) over the box of
    ``spec`` and r in [M]."""
    n = spec.n
    if len(fs) != n + 1:
        raise ValueError(f"spec has n={n}, got {len(fs)} functions")
    base_dims = spec.box.dims
    _check_compatible(fs, base_dims)
    rows = [_shifts(spec.m, spec.q * r) for r in range(1, spec.M + 1)]
    total = _lambda_sum(fs, base_dims, rows)
    return total / (spec.box.cells * spec.M)


def lambda_phased(fs: Sequence[GridFunction], alphas: Sequence[PhaseTable],
                  m: Sequence[int], N: int) -> complex:
    """lambda_simple with the extra factor e(sum_j alpha_j(x) r^(m_(n+j))).

    ``m`` has length n + k where k = len(alphas); the first n exponents drive
    the shifts and the last k drive the phase powers.
    """
    m = tuple(int(v) for v in m)
    n = len(fs) - 1
    k = len(alphas)
    if len(m) != n + k:
        raise ValueError(f"need {n + k} exponents, got {len(m)}")
    if any(a >= b for a, b in zip(m, m[1:])):
        raise ValueError(f"m must be strictly increasing, got {m}")
    base_dims = tuple(_check_shift(N ** mi) for mi in m[:n])
    _check_compatible(fs, base_dims)
    zero = (0,) * n
    alpha_wins = [a.window_frac(zero, base_dims) for a in alphas]
    rows = []
    phases = []
    for r in range(1, N + 1):
        rows.append(_shifts(m[:n], r))
        if k:
            acc = np.zeros(base_dims, dtype=np.float64)
            for j in range(k):
                acc += alpha_wins[j] * float(r ** m[n + j])
            phases.append(np.exp(2j * np.pi * acc))
    total = _lambda_sum(fs, base_dims, rows, phases if k else None)
    norm = N
    for d in base_dims:
        norm *= d
    return total / norm


# ---------------------------------------------------------------------------
# Brute-force oracles (small inputs only; every read is an independent
# per-point lookup)


def _read_point(f: GridFunction, pt: Sequence[int]) -> complex:
    idx = tuple(c - 1 for c in pt)
    if any(c < 0 or c >= d for c, d in zip(idx, f.box.dims)):
        return 0j
    return complex(f.values[idx])


def lambda_phased_bruteforce(fs: Sequence[GridFunction],
                             alphas: Sequence[PhaseTable],
                             m: Sequence[int], N: int) -> complex:
    m = tuple(int(v) for v in m)
    n = len(fs) - 1
    k = len(alphas)
    base_dims = tuple(N ** mi for mi in m[:n])
    total = 0j
    for idx in np.ndindex(*base_dims):
        x = tuple(c + 1 for c in idx)
        for r in range(1, N + 1):
            term = _read_point(fs[0], x)
            if term == 0:
                continue
            for j in range(n):
                pt = list(x)
                pt[j] += r ** m[j]
                term *= _read_point(fs[j + 1], pt)
            if term == 0:
                continue
            phase = 0.0
            for j in range(k):
                phase += float(alphas[j].at(x).approx) * (r ** m[n + j])
            total += term * np.exp(2j * np.pi * phase)
    norm = N
    for d in base_dims:
        norm *= d
    return total / norm


def lambda_simple_bruteforce(fs, m, N) -> complex:
    return lambda_phased_bruteforce(fs, [], m, N)


def lambda_general_bruteforce(fs: Sequence[GridFunction], spec: ConfigSpec) -> complex:
    total = 0j
    for idx in np.ndindex(*spec.box.dims):
        x = tuple(c + 1 for c in idx)
        for r in range(1, spec.M + 1):
            term = _read_point(fs[0], x)
            if term == 0:
                continue
            for j in range(spec.n):
                pt = list(x)
                pt[j] += (spec.q * r) ** spec.m[j]
                term *= _read_point(fs[j + 1], pt)
            total += term
    return total / (spec.box.cells * spec.M)


# ---------------------------------------------------------------------------
# Exact integer counting for indicators


def pattern_count_int(inds: Sequence[SetIndicator], base_dims: Sequence[int],
                      shifts: Sequence[int]) -> int:
    """#{x in base box : x in A_0 and x + d_j e_j in A_j for all j}."""
    masks = [A.mask for A in inds]
    return kernels.pattern_count_fast(masks, base_dims, shifts)


def popular_count(A: SetIndicator, m: Sequence[int], r: int) -> int:
    """Exact size of {x in A : x + r^(m_j) e_j in A for every axis j}."""
    if r < 1:
        raise ValueError("difference r must be >= 1")
    m = tuple(int(v) for v in m)
    if len(m) != A.box.n:
        raise ValueError("exponent tuple does not match the box dimension")
    shifts = _shifts(m, r)
    masks = [A.mask] * (A.box.n + 1)
    return kernels.pattern_count_fast(masks, A.box.dims, shifts)


def popular_count_naive(A: SetIndicator, m: Sequence[int], r: int) -> int:
    """Oracle: member-driven membership loop."""
    shifts = _shifts(tuple(int(v) for v in m), r)
    masks = [A.mask] * (A.box.n + 1)
    return kernels.pattern_count_pointwise(masks, A.box.dims, shifts)


@dataclass
class PopDiffResult:
    r_star: int
    count: int
    histogram: np.ndarray  # histogram[r-1] = count at difference r

    def to_dict(self) -> dict:
        return {"r_star": self.r_star, "count": self.count,
                "histogram": [int(c) for c in self.histogram]}


def best_popular_difference(A: SetIndicator, m: Sequence[int], M: int) -> PopDiffResult:
    """Arg-max of popular_count over r in [1, M]; ties go to the smallest r."""
    if M < 1:
        raise ValueError("difference range M must be >= 1")
    m = tuple(int(v) for v in m)
    rs = range(1, M + 1)
    if _threads > 1:
        with ThreadPoolExecutor(max_workers=_threads) as pool:
            counts = list(pool.map(lambda r: popular_count(A, m, r), rs))
    else:
        counts = [popular_count(A, m, r) for r in rs]
    hist = np.asarray(counts, dtype=np.int64)
    r_star = int(np.argmax(hist)) + 1  # argmax returns the first maximum
    return PopDiffResult(r_star, int(hist[r_star - 1]), hist)


def lambda_indicator_counts(inds: Sequence[SetIndicator],
                            spec: ConfigSpec) -> np.ndarray:
    """Per-r integer pattern counts behind lambda_general on indicators."""
    if len(inds) != spec.n + 1:
        raise ValueError(f"spec has n={spec.n}, got {len(inds)} indicators")
    counts = [pattern_count_int(inds, spec.box.dims, _shifts(spec.m, spec.q * r))
              for r in range(1, spec.M + 1)]
    return np.asarray(counts, dtype=np.int64)


# ---------------------------------------------------------------------------
# Averaging identity linking the general operator to the simple one


def _strided_window(values: np.ndarray, starts: Sequence[int],
                    strides: Sequence[int], out_dims: Sequence[int]) -> np.ndarray:
    """out[k] = values[starts + strides * k] with zero padding (0-based)."""
    axes_idx = []
    valid = []
    for size, st, sp, od in zip(values.shape, starts, strides, out_dims):
        ks = np.arange(od)
        idx = st + sp * ks
        good = (idx >= 0) & (idx < size)
        axes_idx.append(idx[good])
        valid.append(good)
    if any(len(ix) == 0 for ix in axes_idx):
        return np.zeros(tuple(out_dims), dtype=values.dtype)
    out = np.zeros(tuple(out_dims), dtype=values.dtype)
    out[np.ix_(*valid)] = values[np.ix_(*axes_idx)]
    return out


def averaging_identity_check(fs: Sequence[GridFunction],
                             spec: ConfigSpec) -> tuple[complex, complex, float]:
    """Evaluate both sides of the reparameterization

        lambda_general(f_0..f_n) = C * avg over x in prod [+-2 N_j] of
                                   lambda_simple(f_0^(x,q), ..., f_n^(x,q))

    where f_i^(x,q)(x') = f_i(x + sum_j q^(m_j) x'_j e_j) and the constant C
    is the ratio of the two base-range cardinalities.  Requires supports in
    prod [2^(j==i) N_j] and the range condition; small inputs only.
    """
    n, m, q, M = spec.n, spec.m, spec.q, spec.M
    dims = spec.box.dims
    inner_dims = tuple(M ** mi for mi in m)
    c_n = 1.0
    for d in dims:
        c_n *= (4 * d + 1) / d
    strides = tuple(q ** mi for mi in m)
    vals = []
    for idx in np.ndindex(*tuple(4 * d + 1 for d in dims)):
        x = tuple(c - 2 * d for c, d in zip(idx, dims))  # x_j in [-2N_j, 2N_j]
        slices = []
        for i, f in enumerate(fs):
            out = tuple(2 * inner_dims[a] if (i >= 1 and a == i - 1)
                        else inner_dims[a] for a in range(n))
            starts = tuple(x[a] - 1 + strides[a] for a in range(n))
            win = _strided_window(f.values, starts, strides, out)
            slices.append(GridFunction(BoxSpec(out), win))
        vals.append(lambda_simple(slices, m, M))
    rhs = c_n * complex(np.mean(np.asarray(vals)))
    lhs = lambda_general(fs, spec)
    return lhs, rhs, c_n
