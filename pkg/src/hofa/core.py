"""Shared domain types: boxes, grid functions, set indicators, torus phases.

Conventions used throughout the package:

* A box of dimension n is the product [1, N_1] x ... x [1, N_n] of integer
  intervals.  Grid values are stored in dense C-order arrays whose first axis
  is coordinate 1 (axis 1 slowest in the flattened order).
* Every function on a box is implicitly extended by zero to all of Z^n.
* All averaging denominators are exact integers; floating point enters only
  through the stored values themselves.  Reductions over arrays rely on
  numpy's pairwise summation for deterministic low-error results.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

MAX_GRID_CELLS = 1 << 27
MAX_GRID_DIM = 3


def _as_dims(dims: Sequence[int]) -> tuple[int, ...]:
    out = tuple(int(d) for d in dims)
    if not out:
        raise ValueError("box needs at least one axis")
    if any(d < 1 for d in out):
        raise ValueError(f"box dims must be positive, got {out}")
    return out


@dataclass(frozen=True)
class BoxSpec:
    """The product box [1, N_1] x ... x [1, N_n]."""

    dims: tuple[int, ...]

    def __init__(self, dims: Sequence[int]):
        object.__setattr__(self, "dims", _as_dims(dims))

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def cells(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out

    def chain_issues(self, m: Sequence[int]) -> list[str]:
        """Check N_n^(1/m_n) <= ... <= N_1^(1/m_1) exactly in integers.

        a^(1/p) <= b^(1/q) iff a^q <= b^p for a, b, p, q >= 1, so the chain
        is decided without floating-point roots.
        """
        m = tuple(int(v) for v in m)
        if len(m) != self.n:
            return [f"m has length {len(m)}, box has {self.n} axes"]
        issues = []
        for i in range(self.n - 1):
            a, p = self.dims[i], m[i]
            b, q = self.dims[i + 1], m[i + 1]
            if b**p > a**q:
                issues.append(
                    f"N_{i + 2}^(1/m_{i + 2}) > N_{i + 1}^(1/m_{i + 1}): "
                    f"{b}^(1/{q}) vs {a}^(1/{p})")
        return issues

    def __str__(self) -> str:
        return "x".join(str(d) for d in self.dims)


@dataclass
class GridFunction:
    """Complex-valued function with finite support on a box.

    ``values[i1-1, ..., in-1]`` is the value at (i1, ..., in); everything
    outside the box is zero.  ``bounded`` asserts sup |f| <= 1.
    """

    box: BoxSpec
    values: np.ndarray
    bounded: bool = False

    def __post_init__(self):
        if self.box.n > MAX_GRID_DIM:
            raise ValueError(f"dense grids support n <= {MAX_GRID_DIM}")
        if self.box.cells > MAX_GRID_CELLS:
            raise ValueError(
                f"box {self.box} exceeds the dense-storage cap of 2^27 cells")
        self.values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if self.values.shape != self.box.dims:
            raise ValueError(
                f"values shape {self.values.shape} != box {self.box.dims}")
        if self.bounded and self.max_abs() > 1.0 + 1e-12:
            raise ValueError(f"bounded flag set but max |f| = {self.max_abs()}")

    @classmethod
    def zeros(cls, box: BoxSpec) -> "GridFunction":
        return cls(box, np.zeros(box.dims, dtype=np.complex128))

    @classmethod
    def ones(cls, box: BoxSpec) -> "GridFunction":
        return cls(box, np.ones(box.dims, dtype=np.complex128), bounded=True)

    def max_abs(self) -> float:
        if self.values.size == 0:
            return 0.0
        return float(np.abs(self.values).max())

    def read_window(self, offsets: Sequence[int], out_dims: Sequence[int]) -> np.ndarray:
        """Values f(x + offsets) for x in [1, out_dims], zero-padded.

        This is the only read primitive the counting operators need: a window
        of the grid translated by an integer vector, with out-of-box reads
        returning zero.
        """
        return read_window(self.values, offsets, out_dims)

    def slice_line(self, axis: int, hat_index: tuple[int, ...]) -> "Line":
        """The 1-D slice along ``axis`` (0-based) at the other coordinates.

        ``hat_index`` gives the remaining coordinates in order, 1-based.
        """
        idx = list(hat_index)
        sl: list[object] = []
        k = 0
        for a in range(self.box.n):
            if a == axis:
                sl.append(slice(None))
            else:
                sl.append(idx[k] - 1)
                k += 1
        return Line(1, self.values[tuple(sl)].copy())


def read_window(values: np.ndarray, offsets: Sequence[int],
                out_dims: Sequence[int]) -> np.ndarray:
    """Window of a dense array under translation, with zero padding.

    out[x - 1] = values[x + offsets - 1] when x + offsets is inside the array
    and 0 otherwise, for x in the box [1, out_dims].
    """
    out_dims = tuple(int(d) for d in out_dims)
    offsets = tuple(int(o) for o in offsets)
    if len(offsets) != values.ndim or len(out_dims) != values.ndim:
        raise ValueError("offsets/out_dims rank mismatch")
    src_sl = []
    dst_sl = []
    for size, off, out_size in zip(values.shape, offsets, out_dims):
        lo = max(0, -off)
        hi = min(out_size, size - off)
        if lo >= hi:
            return np.zeros(out_dims, dtype=values.dtype)
        src_sl.append(slice(lo + off, hi + off))
        dst_sl.append(slice(lo, hi))
    src = values[tuple(src_sl)]
    if src.shape == out_dims:
        return src
    out = np.zeros(out_dims, dtype=values.dtype)
    out[tuple(dst_sl)] = src
    return out


@dataclass
class SetIndicator:
    """Subset of a box stored as a dense bit mask (axis 1 slowest)."""

    box: BoxSpec
    mask: np.ndarray

    def __post_init__(self):
        self.mask = np.ascontiguousarray(self.mask, dtype=bool)
        if self.mask.shape != self.box.dims:
            raise ValueError(
                f"mask shape {self.mask.shape} != box {self.box.dims}")

    @classmethod
    def empty(cls, box: BoxSpec) -> "SetIndicator":
        return cls(box, np.zeros(box.dims, dtype=bool))

    @classmethod
    def full(cls, box: BoxSpec) -> "SetIndicator":
        return cls(box, np.ones(box.dims, dtype=bool))

    @classmethod
    def from_members(cls, box: BoxSpec, members: Iterable[Sequence[int]]) -> "SetIndicator":
        mask = np.zeros(box.dims, dtype=bool)
        for pt in members:
            idx = tuple(int(c) - 1 for c in pt)
            if len(idx) != box.n:
                raise ValueError(f"point {pt} has wrong dimension")
            if any(c < 0 or c >= d for c, d in zip(idx, box.dims)):
                raise ValueError(f"point {pt} outside box {box}")
            mask[idx] = True
        return cls(box, mask)

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def density(self) -> float:
        return self.count / self.box.cells

    def members(self) -> np.ndarray:
        """Member coordinates as an (count, n) int array, 1-based, row-major order."""
        return np.argwhere(self.mask) + 1

    def to_grid(self) -> GridFunction:
        return GridFunction(self.box, self.mask.astype(np.complex128), bounded=True)


@dataclass(frozen=True)
class ConfigSpec:
    """Parameters of a counting configuration: exponents, box, modulus, range.

    The counted pattern is x, x + (q r)^(m_1) e_1, ..., x + (q r)^(m_n) e_n
    with x in the box and r in [1, M].
    """

    m: tuple[int, ...]
    box: BoxSpec
    q: int = 1
    M: int = 1

    def __init__(self, m: Sequence[int], box: BoxSpec, q: int = 1, M: int = 1):
        object.__setattr__(self, "m", tuple(int(v) for v in m))
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "q", int(q))
        object.__setattr__(self, "M", int(M))

    @property
    def n(self) -> int:
        return len(self.m)

    def validate(self, require_range: bool = True) -> "ValidationReport":
        return validate_config(self, require_range=require_range)


@dataclass
class ValidationReport:
    """Pass/fail record per invariant; never raises."""

    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, bool(ok), detail))

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def failures(self) -> list[str]:
        return [f"{name}: {detail}" if detail else name
                for name, ok, detail in self.checks if not ok]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [{"name": n, "ok": ok, "detail": d}
                       for n, ok, d in self.checks],
        }


def validate_config(spec: ConfigSpec, require_range: bool = True) -> ValidationReport:
    """Check a ConfigSpec against its invariants, reporting each one."""
    rep = ValidationReport()
    m, dims = spec.m, spec.box.dims
    rep.add("dimension match", len(m) == len(dims),
            f"m has {len(m)} entries, box has {len(dims)} axes")
    rep.add("m positive", all(v >= 1 for v in m), f"m={m}")
    rep.add("m strictly increasing",
            all(a < b for a, b in zip(m, m[1:])), f"m={m}")
    rep.add("q positive", spec.q >= 1, f"q={spec.q}")
    rep.add("M positive", spec.M >= 1, f"M={spec.M}")
    if len(m) == len(dims):
        issues = spec.box.chain_issues(m)
        rep.add("box chain", not issues, "; ".join(issues))
        if require_range:
            # qM <= N_n^(1/m_n), checked as (qM)^(m_n) <= N_n in exact integers
            qm = spec.q * spec.M
            ok = qm ** m[-1] <= dims[-1]
            rep.add("range condition", ok,
                    f"(qM)^m_n = {qm}^{m[-1]} vs N_n = {dims[-1]}")
    return rep


# ---------------------------------------------------------------------------
# 1-D functions with arbitrary (finite) support


@dataclass
class Line:
    """Finitely supported function on Z: values[k] sits at start + k."""

    start: int
    values: np.ndarray

    def __post_init__(self):
        self.start = int(self.start)
        self.values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if self.values.ndim != 1:
            raise ValueError("Line values must be 1-D")

    @classmethod
    def on_interval(cls, values: Sequence[complex], start: int = 1) -> "Line":
        return cls(start, np.asarray(values, dtype=np.complex128))

    @property
    def stop(self) -> int:
        """One past the last stored coordinate."""
        return self.start + len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def at(self, x: int) -> complex:
        k = x - self.start
        if 0 <= k < len(self.values):
            return complex(self.values[k])
        return 0j

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Values on [lo, hi] inclusive, zero-padded."""
        return read_window(self.values, (lo - self.start,), (hi - lo + 1,))

    def shifted(self, h: int) -> "Line":
        """The function x -> f(x + h)."""
        return Line(self.start - h, self.values.copy())

    def l2sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def lk_pow(self, k: int) -> float:
        return float(np.sum(np.abs(self.values) ** k))

    def total(self) -> complex:
        return complex(np.sum(self.values))

    def max_abs(self) -> float:
        return float(np.abs(self.values).max()) if len(self.values) else 0.0

    def inner(self, other: "Line") -> complex:
        """l2 inner product sum f(x) conj(g(x)) over Z."""
        lo = max(self.start, other.start)
        hi = min(self.stop, other.stop)
        if lo >= hi:
            return 0j
        a = self.values[lo - self.start:hi - self.start]
        b = other.values[lo - other.start:hi - other.start]
        return complex(np.sum(a * np.conj(b)))


# ---------------------------------------------------------------------------
# Torus elements and phase tables


@dataclass(frozen=True)
class TorusPhase:
    """A point of R/Z, exact rational when possible.

    ``frac`` is a Fraction in [0, 1) for exact phases; float phases (used by
    the spectral searches) carry ``frac=None`` and a float ``approx``.
    """

    frac: Fraction | None
    approx: float

    @classmethod
    def exact(cls, num: int, den: int = 1) -> "TorusPhase":
        f = Fraction(num, den) % 1
        return cls(f, float(f))

    @classmethod
    def from_fraction(cls, f: Fraction) -> "TorusPhase":
        f = f % 1
        return cls(f, float(f))

    @classmethod
    def from_float(cls, x: float) -> "TorusPhase":
        return cls(None, float(x) % 1.0)

    @classmethod
    def zero(cls) -> "TorusPhase":
        return cls.exact(0)

    @property
    def is_exact(self) -> bool:
        return self.frac is not None

    def norm_dist(self) -> "Fraction | float":
        """Distance to the nearest integer; exact for rational phases."""
        if self.frac is not None:
            return min(self.frac, 1 - self.frac)
        v = self.approx
        return min(v, 1.0 - v)

    def times_int(self, k: int) -> "TorusPhase":
        if self.frac is not None:
            return TorusPhase.from_fraction(self.frac * k)
        return TorusPhase.from_float(self.approx * k)

    def __add__(self, other: "TorusPhase") -> "TorusPhase":
        if self.frac is not None and other.frac is not None:
            return TorusPhase.from_fraction(self.frac + other.frac)
        return TorusPhase.from_float(self.approx + other.approx)

    def __neg__(self) -> "TorusPhase":
        if self.frac is not None:
            return TorusPhase.from_fraction(-self.frac)
        return TorusPhase.from_float(-self.approx)

    def e(self) -> complex:
        """exp(2 pi i a)."""
        return cmath.exp(2j * cmath.pi * self.approx)


def e_of(x: float | Fraction) -> complex:
    return cmath.exp(2j * cmath.pi * float(x))


@dataclass
class PhaseTable:
    """A map from a box into R/Z, read as zero outside the box.

    ``frac`` stores the values in [0, 1) as float64.  When the table was
    built on a rational grid {t/T} the integer numerators are kept alongside
    so that exact arithmetic stays available.
    """

    box: BoxSpec
    frac: np.ndarray
    numerators: np.ndarray | None = None
    denominator: int | None = None

    def __post_init__(self):
        self.frac = np.ascontiguousarray(self.frac, dtype=np.float64)
        if self.frac.shape != self.box.dims:
            raise ValueError("phase table shape mismatch")
        if (self.numerators is None) != (self.denominator is None):
            raise ValueError("numerators and denominator go together")
        if self.numerators is not None:
            self.numerators = np.ascontiguousarray(self.numerators, dtype=np.int64)
            if self.numerators.shape != self.box.dims:
                raise ValueError("numerator table shape mismatch")

    @classmethod
    def zeros(cls, box: BoxSpec) -> "PhaseTable":
        return cls(box, np.zeros(box.dims), np.zeros(box.dims, dtype=np.int64), 1)

    @classmethod
    def constant(cls, box: BoxSpec, phase: TorusPhase) -> "PhaseTable":
        if phase.is_exact:
            num = int(phase.frac.numerator)
            den = int(phase.frac.denominator)
            return cls(box, np.full(box.dims, float(phase.frac)),
                       np.full(box.dims, num, dtype=np.int64), den)
        return cls(box, np.full(box.dims, phase.approx))

    @classmethod
    def from_floats(cls, box: BoxSpec, values: np.ndarray) -> "PhaseTable":
        return cls(box, np.mod(values, 1.0))

    @classmethod
    def from_rationals(cls, box: BoxSpec, numerators: np.ndarray, T: int) -> "PhaseTable":
        nums = np.mod(np.asarray(numerators, dtype=np.int64), T)
        return cls(box, nums / float(T), nums, int(T))

    @property
    def is_exact(self) -> bool:
        return self.numerators is not None

    def at(self, point: Sequence[int]) -> TorusPhase:
        idx = tuple(int(c) - 1 for c in point)
        if any(c < 0 or c >= d for c, d in zip(idx, self.box.dims)):
            return TorusPhase.zero()
        if self.is_exact:
            return TorusPhase.exact(int(self.numerators[idx]), self.denominator)
        return TorusPhase.from_float(float(self.frac[idx]))

    def window_frac(self, offsets: Sequence[int], out_dims: Sequence[int]) -> np.ndarray:
        return read_window(self.frac, offsets, out_dims)

    def snapped(self, T: int) -> "PhaseTable":
        """Round every value to the grid {t/T : 0 <= t < T}."""
        nums = np.mod(np.rint(self.frac * T).astype(np.int64), T)
        return PhaseTable.from_rationals(self.box, nums, T)
