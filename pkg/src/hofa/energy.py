"""Box-count inequalities, the energy-increment decomposition, and the
popular-difference pipeline.

The decomposition approximates each weight f_i by the conditional expectation
of its axis-i slices on a progression partition whose modulus and scale are
raised, axis by axis, whenever the approximation error of the counting
operator stays above delta.  Each accepted step must raise the energy
(the squared 2-norm of the projected slices, averaged over the other
coordinates) of some axis by at least tau * N_i, so the loop terminates
within n * ceil(2 / tau) steps; the scale dies once (delta / 8n) L < 1.

Existential parameters in the underlying theory (the modulus bound, the
shrink rate, the final constant) are replaced by explicit knobs: exhaustive
modulus search up to Qmax, a configurable shrink factor gamma, and a
reporting divisor that is a stand-in, never a proved constant.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import BoxSpec, ConfigSpec, GridFunction, SetIndicator
from .counting import (best_popular_difference, lambda_general,
                       lambda_indicator_counts, popular_count)


class DecompositionError(RuntimeError):
    """Raised when the pipeline cannot proceed and fallback is disabled."""


# ---------------------------------------------------------------------------
# Box counts


def _real_unit_values(f: GridFunction) -> np.ndarray:
    vals = f.values
    if np.abs(vals.imag).max(initial=0.0) > 1e-12:
        raise ValueError("box counts need real-valued input")
    g = vals.real
    if g.min(initial=0.0) < -1e-12 or g.max(initial=0.0) > 1 + 1e-12:
        raise ValueError("box counts need values in [0, 1]")
    return np.clip(g, 0.0, 1.0)


def box_count(f: GridFunction) -> float:
    """E over x, x' in the box of f(x) prod_j f(x with axis j from x').

    The x' average factorizes into per-axis means, so this equals
    E_x f(x) prod_j (mean of f along axis j), an O(cells) computation.
    For n = 1 it is exactly (E f)^2.
    """
    g = _real_unit_values(f)
    acc = g.copy()
    for ax in range(g.ndim):
        acc = acc * g.mean(axis=ax, keepdims=True)
    return float(acc.mean())


def box_count_naive(f: GridFunction) -> float:
    """Oracle: literal double loop over (x, x'); small boxes only."""
    g = _real_unit_values(f)
    dims = g.shape
    total = 0.0
    for x in np.ndindex(*dims):
        fx = g[x]
        if fx == 0.0:
            continue
        for xp in np.ndindex(*dims):
            term = fx
            for j in range(len(dims)):
                y = list(x)
                y[j] = xp[j]
                term *= g[tuple(y)]
            total += term
    return total / float(np.prod(dims)) ** 2


# ---------------------------------------------------------------------------
# Axis projections


def _atom_ids(length: int, Q: int, Lp: int) -> tuple[np.ndarray, int]:
    xs = np.arange(1, length + 1)
    r0 = (xs - 1) % Q
    s = (xs - 1 - r0) // (Q * Lp)
    _, aid = np.unique(s * Q + r0, return_inverse=True)
    return aid.ravel(), int(aid.max()) + 1


def axis_projection_energy(f: GridFunction, axis: int, Q: int, Lp: int) -> float:
    """Average over the other coordinates of the energy of the axis slices
    projected on the (Q, Lp) partition: E ||proj of slice||_2^2."""
    ax = axis - 1
    arr = np.moveaxis(f.values, ax, 0)
    length = arr.shape[0]
    cols = arr.reshape(length, -1)
    aid, K = _atom_ids(length, Q, Lp)
    onehot = np.zeros((K, length))
    onehot[aid, np.arange(length)] = 1.0
    sums = onehot @ cols
    energies = np.sum(np.abs(sums) ** 2, axis=0) / Lp
    return float(energies.mean())


def axis_approximant(f: GridFunction, axis: int, Q: int, Lp: int) -> GridFunction:
    """Grid function x -> E(slice of f at the other coordinates | partition)(x_i),
    materialized with the axis doubled (projections spill onto whole atoms)."""
    ax = axis - 1
    dims = f.box.dims
    n_i = dims[ax]
    arr = np.moveaxis(f.values, ax, 0).reshape(n_i, -1)
    aid_full, K = _atom_ids(2 * n_i, Q, Lp)
    sums = np.zeros((K, arr.shape[1]), dtype=np.complex128)
    np.add.at(sums, aid_full[:n_i], arr)
    vals = sums[aid_full] / Lp
    out_dims = tuple(2 * d if a == ax else d for a, d in enumerate(dims))
    moved = tuple(out_dims[ax:ax + 1] + out_dims[:ax] + out_dims[ax + 1:])
    vals = np.moveaxis(vals.reshape(moved), 0, ax)
    return GridFunction(BoxSpec(out_dims), vals)


def cond_box_count(f: GridFunction, qs: Sequence[int],
                   Ls: Sequence[int]) -> tuple[float, float]:
    """E_x f(x) prod_i E(slice_i | partition (q_i, L_i))(x_i), with the
    comparison value (E f)^(n+1) reported alongside."""
    g = _real_unit_values(f)
    dims = f.box.dims
    acc = g.copy()
    for ax in range(len(dims)):
        proj = axis_approximant(f, ax + 1, int(qs[ax]), int(Ls[ax]))
        sl = tuple(slice(0, d) for d in dims)
        acc = acc * proj.values[sl].real
    return float(acc.mean()), float(g.mean()) ** (len(dims) + 1)


def cond_box_expansion(f: GridFunction, qs: Sequence[int],
                       Ls: Sequence[int]) -> dict:
    """Expand cond_box_count over partition cells and check the convexity step.

    Requires every q_i L_i to divide N_i so cells tile the box exactly.  Each
    cell contributes the box count of the sub-grid sampled at strides q_i;
    the cell-level inequality against the (n+1)-st power of the cell mean and
    the aggregated convexity bound are both reported.
    """
    g = _real_unit_values(f)
    dims = f.box.dims
    n = len(dims)
    qs = [int(v) for v in qs]
    Ls = [int(v) for v in Ls]
    for d, q, L in zip(dims, qs, Ls):
        if d % (q * L):
            raise ValueError("cell expansion needs q_i L_i | N_i")
    weight = 1.0
    for d, L in zip(dims, Ls):
        weight *= L / d  # equals 1 / (number of cells) under exact tiling
    cells = []
    blocks = [range(d // (q * L)) for d, q, L in zip(dims, qs, Ls)]
    offsets = [range(q) for q in qs]
    for s in np.ndindex(*[len(b) for b in blocks]):
        for x0 in np.ndindex(*[len(o) for o in offsets]):
            # cell grid: x + q_i k_i along axis i, k_i in [0, L_i)
            idx = [s[a] * qs[a] * Ls[a] + x0[a] + qs[a] * np.arange(Ls[a])
                   for a in range(n)]
            sub = g[np.ix_(*idx)]
            bc = box_count(GridFunction(BoxSpec(sub.shape), sub))
            mean_pow = float(sub.mean()) ** (n + 1)
            cells.append({"cell_box_count": bc, "cell_mean_pow": mean_pow})
    expansion_value = weight * sum(c["cell_box_count"] for c in cells)
    convexity_lhs = weight * sum(c["cell_mean_pow"] for c in cells)
    global_mean_pow = float(g.mean()) ** (n + 1)
    value, _ = cond_box_count(f, qs, Ls)
    return {
        "cond_box_count": value,
        "expansion_value": expansion_value,
        "cells": cells,
        "cell_violations": sum(1 for c in cells
                               if c["cell_box_count"] < c["cell_mean_pow"] - 1e-12),
        "convexity_lhs": convexity_lhs,
        "global_mean_pow": global_mean_pow,
        "convexity_ok": convexity_lhs >= global_mean_pow - 1e-12,
    }


# ---------------------------------------------------------------------------
# Linearization gap


@dataclass
class LinGapReport:
    gap: float
    bound: float
    lambda_projected: float
    frozen_value: float
    reference: float  # (E f)^(n+1) - delta/2, reporting only

    @property
    def ok(self) -> bool:
        return self.gap <= self.bound + 1e-9

    def to_dict(self) -> dict:
        return {"gap": self.gap, "bound": self.bound,
                "lambda_projected": self.lambda_projected,
                "frozen_value": self.frozen_value,
                "reference": self.reference, "ok": self.ok}


def linearization_gap(f: GridFunction, spec: ConfigSpec, L: int,
                      delta: float) -> LinGapReport:
    """Gap between the counting operator applied to (f, projections) and its
    frozen version with the shifts inside the projections removed.

    Each projection is constant on progressions of length L^(m_i) and stride
    q^(m_i); a shift by (q r)^(m_i) <= (q M)^(m_i) changes it on at most a
    4 (M/L)^(m_i) fraction, whence the bound sum_i 4 (M/L)^(m_i).  Requires
    M <= (delta / 8n) L.
    """
    n = spec.n
    if spec.M > delta / (8 * n) * L:
        raise ValueError(f"need M <= (delta/8n) L, got M={spec.M}, L={L}")
    g = _real_unit_values(f)
    qs = [spec.q ** mi for mi in spec.m]
    Ls = [L ** mi for mi in spec.m]
    approx = [axis_approximant(f, i + 1, qs[i], Ls[i]) for i in range(n)]
    lam = lambda_general([f] + approx, spec)
    frozen, _ = cond_box_count(f, qs, Ls)
    bound = sum(4.0 * (spec.M / L) ** mi for mi in spec.m)
    reference = float(g.mean()) ** (n + 1) - delta / 2
    return LinGapReport(abs(lam.real - frozen), bound, float(lam.real),
                        frozen, reference)


# ---------------------------------------------------------------------------
# Energy increment


@dataclass
class IncrementParams:
    Qmax: int = 8
    tau: float = 0.05
    gamma: float | None = None  # default delta / (16 n)
    iter_cap: int | None = None  # default n * ceil(2 / tau)

    def resolved(self, n: int, delta: float) -> tuple[float, int]:
        gamma = self.gamma if self.gamma is not None else delta / (16 * n)
        cap = self.iter_cap if self.iter_cap is not None else n * int(np.ceil(2 / self.tau))
        return gamma, cap


@dataclass
class TraceStep:
    iteration: int
    axis: int
    energy_before: float
    energy_after: float
    q_step: int
    L_new: int

    def to_dict(self) -> dict:
        return {"iteration": self.iteration, "axis": self.axis,
                "energy_before": self.energy_before,
                "energy_after": self.energy_after,
                "q_step": self.q_step, "L_new": self.L_new}


@dataclass
class DecompositionResult:
    q: int
    L: int
    status: str  # converged | iteration_cap | scale_exhausted | oracle_stalled
    approximants: list[GridFunction]
    trace: list[TraceStep]
    iterations: int
    final_gap: float | None
    range_ok: bool

    def to_dict(self) -> dict:
        return {"q": self.q, "L": self.L, "status": self.status,
                "iterations": self.iterations, "final_gap": self.final_gap,
                "range_ok": self.range_ok,
                "trace": [t.to_dict() for t in self.trace]}

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["iteration", "axis", "energy_before", "energy_after",
                    "q_step", "L_new"])
        for t in self.trace:
            w.writerow([t.iteration, t.axis, t.energy_before, t.energy_after,
                        t.q_step, t.L_new])
        return buf.getvalue()


def _integer_root(N: int, m: int) -> int:
    r = int(round(N ** (1.0 / m)))
    while r**m > N:
        r -= 1
    while (r + 1) ** m <= N:
        r += 1
    return r


def energy_increment(fs: Sequence[GridFunction], m: Sequence[int], delta: float,
                     params: IncrementParams | None = None) -> DecompositionResult:
    """Iteratively refine per-axis progression partitions until the counting
    operator is approximated by the projected weights within delta.

    At scale L with accumulated modulus q, the test compares the operator on
    (f_0, f_1..f_n) against (f_0, F_1..F_n), F_i the axis-i projection on the
    (q^(m_i), L^(m_i)) partition, with difference range floor(delta L / 8n).
    On failure the modulus search tries every step multiplier up to Qmax and
    every axis at the shrunk scale floor(gamma L), accepting the smallest
    (multiplier, axis) whose axis energy grows by at least tau * N_i.
    """
    m = tuple(int(v) for v in m)
    n = len(m)
    if len(fs) != n + 1:
        raise ValueError(f"need n+1 = {n + 1} weight functions")
    dims = fs[0].box.dims
    if any(f.box.dims != dims for f in fs):
        raise ValueError("weights must share the base box")
    box = BoxSpec(dims)
    issues = box.chain_issues(m)
    if issues:
        raise ValueError("; ".join(issues))
    params = params or IncrementParams()
    gamma, cap = params.resolved(n, delta)
    L0 = _integer_root(dims[-1], m[-1])

    q_acc = 1
    L = L0
    # per-axis partition parameters; the starting partition is the trivial
    # one-block split (modulus 1, atom length N_i)
    part = [(1, dims[i]) for i in range(n)]
    trace: list[TraceStep] = []
    steps = 0
    final_gap = None
    range_ok = True

    def approximants() -> list[GridFunction]:
        return [axis_approximant(fs[i + 1], i + 1, part[i][0], part[i][1])
                for i in range(n)]

    while True:
        M_t = int(delta * L / (8 * n))
        if M_t < 1:
            return DecompositionResult(q_acc, L, "scale_exhausted",
                                       approximants(), trace, steps,
                                       final_gap, range_ok)
        spec_t = ConfigSpec(m, box, q=q_acc, M=M_t)
        range_ok = range_ok and spec_t.validate().ok
        F = approximants()
        lam_f = lambda_general(fs, spec_t)
        lam_F = lambda_general([fs[0]] + F, spec_t)
        final_gap = abs(lam_f - lam_F)
        if final_gap <= delta:
            return DecompositionResult(q_acc, L, "converged", F, trace,
                                       steps, final_gap, range_ok)
        if steps >= cap:
            return DecompositionResult(q_acc, L, "iteration_cap", F, trace,
                                       steps, final_gap, range_ok)
        L_next = int(gamma * L)
        if L_next < 1:
            return DecompositionResult(q_acc, L, "scale_exhausted", F, trace,
                                       steps, final_gap, range_ok)
        found = None
        energy_now = [axis_projection_energy(fs[i + 1], i + 1, *part[i])
                      for i in range(n)]
        for q_step in range(1, params.Qmax + 1):
            for i in range(n):
                Q_new = (q_acc * q_step) ** m[i]
                Lp_new = L_next ** m[i]
                e_new = axis_projection_energy(fs[i + 1], i + 1, Q_new, Lp_new)
                if e_new - energy_now[i] >= params.tau * dims[i]:
                    found = (q_step, i, energy_now[i], e_new)
                    break
            if found:
                break
        if not found:
            return DecompositionResult(q_acc, L, "oracle_stalled", F, trace,
                                       steps, final_gap, range_ok)
        q_step, i, e_before, e_after = found
        q_acc *= q_step
        L = L_next
        part = [((q_acc) ** m[a], L ** m[a]) for a in range(n)]
        steps += 1
        trace.append(TraceStep(steps, i + 1, e_before, e_after, q_step, L))


# ---------------------------------------------------------------------------
# Popular-difference pipeline


@dataclass
class PipelineResult:
    r: int                  # effective difference achieving the count
    count: int
    certificate: dict
    histogram: np.ndarray   # per-multiplier counts over the searched range

    def to_dict(self) -> dict:
        return {"r": self.r, "count": self.count,
                "certificate": self.certificate,
                "histogram": [int(c) for c in self.histogram]}


def popular_difference_pipeline(A: SetIndicator, m: Sequence[int], delta: float,
                                params: IncrementParams | None = None,
                                allow_fallback: bool = True,
                                divisor_exponent: int | None = None) -> PipelineResult:
    """Locate a difference r whose configuration count in A is large.

    Runs the energy-increment decomposition on the indicator, evaluates the
    counting operator at the final (q, L), and takes the best multiplier in
    [1, floor(delta L / 8n)] (the counted difference is q times it).  When
    the decomposition does not converge the direct search over the full
    admissible range is used instead and flagged.  The certificate reports
    the density power mu^(n+1) and a configurable reporting threshold
    (mu^(n+1) - delta) / 2^(n+1); the divisor is a stand-in, never a proved
    constant.
    """
    m = tuple(int(v) for v in m)
    n = len(m)
    if A.count == 0:
        raise ValueError("popular-difference search needs a nonempty set")
    dims = A.box.dims
    cells = A.box.cells
    mu = A.density
    mu_pow = mu ** (n + 1)
    L0 = _integer_root(dims[-1], m[-1])
    div = 2 ** (n + 1) if divisor_exponent is None else 2 ** divisor_exponent
    cert: dict = {"mu": mu, "mu_pow": mu_pow, "delta": delta,
                  "threshold": (mu_pow - delta) / div,
                  "threshold_divisor": div}

    if mu_pow <= delta:
        res = best_popular_difference(A, m, max(L0, 1))
        cert.update({"vacuous": True, "fallback": False, "status": "vacuous",
                     "q": 1, "L": None, "lambda": None,
                     "normalized_count": res.count / cells})
        return PipelineResult(res.r_star, res.count, cert, res.histogram)
    cert["vacuous"] = False

    chi = A.to_grid()
    dec = energy_increment([chi] * (n + 1), m, delta, params)
    cert["status"] = dec.status
    cert["iterations"] = dec.iterations
    if dec.status == "converged":
        Mp = int(delta * dec.L / (8 * n))
        spec = ConfigSpec(m, A.box, q=dec.q, M=Mp)
        counts = lambda_indicator_counts([A] * (n + 1), spec)
        lam = float(counts.sum()) / (cells * Mp)
        best = int(np.argmax(counts))
        r_eff = dec.q * (best + 1)
        count = int(counts[best])
        cert.update({"fallback": False, "q": dec.q, "L": dec.L, "M": Mp,
                     "lambda": lam, "r_multiplier": best + 1,
                     "normalized_count": count / cells,
                     "range_ok": dec.range_ok})
        return PipelineResult(r_eff, count, cert, counts)

    if not allow_fallback:
        raise DecompositionError(
            f"decomposition ended with status {dec.status} and fallback is off")
    res = best_popular_difference(A, m, max(L0, 1))
    cert.update({"fallback": True, "q": 1, "L": dec.L, "lambda": None,
                 "normalized_count": res.count / cells,
                 "range_ok": dec.range_ok})
    return PipelineResult(res.r_star, res.count, cert, res.histogram)


# ---------------------------------------------------------------------------
# One-dimensional lift


def lift_1d(A: SetIndicator, m: Sequence[int], N: int) -> tuple[SetIndicator, dict]:
    """Lift a subset of [N] to the grid {x : x_1 + ... + x_n in A}.

    Needs N^(1/m_n) to be an integer t; the grid box is [t^(m_1)] x ... x
    [t^(m_n)].  The exact integer lower bound
    |A'| >= (|A| - (n-1) t^(m_(n-1))) * t^(m_1 + ... + m_(n-1)) is verified
    and reported.
    """
    if A.box.n != 1:
        raise ValueError("lift_1d expects a 1-D set")
    m = tuple(int(v) for v in m)
    n = len(m)
    if n < 2:
        raise ValueError("lift needs n >= 2 exponents")
    t = _integer_root(N, m[-1])
    if t ** m[-1] != N:
        raise ValueError(f"N^(1/m_n) = {N}^(1/{m[-1]}) is not an integer")
    dims = tuple(t ** mi for mi in m)
    member = np.zeros(sum(dims) + 1, dtype=bool)
    idx = np.nonzero(A.mask)[0] + 1
    member[idx[idx <= sum(dims)]] = True
    coord_sum = np.zeros((1,) * n, dtype=np.int64)
    for a, d in enumerate(dims):
        shape = [1] * n
        shape[a] = d
        coord_sum = coord_sum + np.arange(1, d + 1, dtype=np.int64).reshape(shape)
    mask = member[coord_sum]
    lifted = SetIndicator(BoxSpec(dims), mask)
    side = 1
    for mi in m[:-1]:
        side *= t**mi
    lower = (A.count - (n - 1) * t ** m[-2]) * side
    report = {"count": lifted.count, "lower_bound": lower,
              "ok": lifted.count >= lower, "t": t, "dims": list(dims)}
    return lifted, report
