"""Arithmetic-progression partitions of Z and conditional expectation.

The partition with parameters (q, L) tiles Z by the atoms

    {qLs + qk + r : 0 <= k < L},   s in Z, 0 < r <= q,

so each block (qLs, qL(s+1)] splits into q progressions of length L and
common difference q.  Conditional expectation replaces a function by its
average over the atom through each point; the calculus verified here
(self-adjointness, the Pythagoras identity under refinement, the tower
property, the l^k-norm formula, periodicity and almost-periodicity under
shifts, almost-refinement) drives the energy-increment machinery.

Atom averages divide by the full atom length, so projections extend past the
support of the input onto whole atoms; atoms not meeting the support are
zero.  Sums over atoms are exact integers whenever the input is
integer-valued.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import Line


@dataclass(frozen=True)
class APPartition:
    """Partition of Z into progressions of length L and common difference q."""

    q: int
    L: int

    def __post_init__(self):
        if self.q < 1 or self.L < 1:
            raise ValueError("q and L must be positive")

    @property
    def block(self) -> int:
        return self.q * self.L

    @classmethod
    def from_block(cls, block: int, q: int) -> "APPartition":
        if block % q:
            raise ValueError(f"block length {block} not a multiple of q={q}")
        return cls(q, block // q)

    def atom_of(self, x: int) -> tuple[int, int]:
        """(block index s, residue r) with x = qLs + qk + r, 0 <= k < L."""
        r = (x - 1) % self.q + 1
        s = (x - r) // self.block
        return s, r

    def atom_points(self, s: int, r: int) -> list[int]:
        base = self.block * s + r
        return [base + self.q * k for k in range(self.L)]


@dataclass(frozen=True)
class RefinedPartition:
    """Common refinement of several AP partitions; atoms are label tuples."""

    parts: tuple[APPartition, ...]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("need at least one component partition")

    def atom_of(self, x: int) -> tuple[tuple[int, int], ...]:
        return tuple(p.atom_of(x) for p in self.parts)


Partition = Union[APPartition, RefinedPartition]


def refines(coarse: APPartition, fine: Partition) -> bool:
    """Structural check that ``fine`` refines ``coarse`` within the AP family.

    For a pair of AP partitions this holds exactly when q | q' and the fine
    block length divides the coarse one (blocks are aligned at 0, so the
    divisibility makes every fine atom sit inside one coarse atom).  A common
    refinement refines ``coarse`` when one of its components does.
    """
    if isinstance(fine, RefinedPartition):
        return any(p == coarse or refines(coarse, p) for p in fine.parts)
    return fine.q % coarse.q == 0 and coarse.block % fine.block == 0


def _is_integral(values: np.ndarray) -> bool:
    return bool(np.all(values.imag == 0) and np.all(values.real == np.rint(values.real)))


def _atom_data(f: Line, P: Partition):
    """Atom ids, exact sums, and full atom sizes on a hull of whole atoms.

    Returns (hull_start, atom_id_per_point, sums_per_atom, size_per_atom).
    The hull is wide enough that every atom meeting supp(f) lies inside it
    entirely, so sums and sizes are those of the full atoms.
    """
    parts = P.parts if isinstance(P, RefinedPartition) else (P,)
    if len(f) == 0:
        xs = np.arange(1, 2)
    else:
        pad = max(p.q * p.L for p in parts)
        xs = np.arange(f.start - pad, f.stop + pad)
    labels = np.empty((len(xs), len(parts)), dtype=np.int64)
    for col, p in enumerate(parts):
        r0 = (xs - 1) % p.q
        s = (xs - 1 - r0) // p.block
        labels[:, col] = s * p.q + r0
    _, atom_id, counts = np.unique(labels, axis=0, return_inverse=True,
                                   return_counts=True)
    atom_id = atom_id.ravel()
    fext = np.zeros(len(xs), dtype=np.complex128)
    if len(f):
        fext[f.start - xs[0]: f.start - xs[0] + len(f)] = f.values
    if _is_integral(fext):
        ints = np.rint(fext.real).astype(np.int64)
        acc = np.zeros(len(counts), dtype=np.int64)
        np.add.at(acc, atom_id, ints)
        sums = acc.astype(np.complex128)
    else:
        sums = (np.bincount(atom_id, weights=fext.real, minlength=len(counts))
                + 1j * np.bincount(atom_id, weights=fext.imag, minlength=len(counts)))
    if isinstance(P, RefinedPartition):
        sizes = counts  # refined atoms vary in size; the hull holds all of each
    else:
        sizes = np.full(len(counts), P.L, dtype=np.int64)
    return int(xs[0]), atom_id, sums, sizes


def cond_expect(f: Line, P: Partition) -> Line:
    """Average f over each atom; zero on atoms not meeting supp(f)."""
    start, atom_id, sums, sizes = _atom_data(f, P)
    # divide componentwise: complex-by-real division rounds differently
    means = sums.real / sizes + 1j * (sums.imag / sizes)
    return Line(start, means[atom_id])


def projection_lk_norm(f: Line, P: APPartition, k: int) -> float:
    """||E(f|P)||_k^k via the closed form

        L * sum over blocks s and x in (qLs, qLs + q] of |avg_l f(x + q l)|^k.

    Agrees with the k-th power norm of cond_expect(f, P).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _, atom_id, sums, sizes = _atom_data(f, P)
    # one representative per atom: |S/L|^k * L summed over atoms
    means_abs = np.abs(sums) / sizes
    return float(np.sum(means_abs**k * sizes))


def self_adjointness_check(f: Line, g: Line, P: Partition) -> tuple[complex, complex]:
    """Return (<E(f|P), g>, <f, E(g|P)>); the two agree for any partition."""
    return cond_expect(f, P).inner(g), f.inner(cond_expect(g, P))


@dataclass
class ShiftDeltaReport:
    lhs: float
    rhs: float
    bound: float | None
    clause: str | None

    @property
    def ok(self) -> bool:
        if self.bound is None:
            return False
        return abs(self.lhs - self.rhs) <= self.bound + 1e-9

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "bound": self.bound,
                "clause": self.clause, "ok": self.ok}


def shift_norm_delta(f: Line, P: APPartition, h: int,
                     N: int | None = None) -> ShiftDeltaReport:
    """Compare ||E(f(.+h)|P)||_2^2 with ||E(f|P)||_2^2.

    The applicable bound on the difference is 0 for h a multiple of qL
    (shifting by whole blocks permutes atoms), 8 (|h|/q) N for |h| < q, and
    8 (|s|/L) N for h = s q with |s| < L, where N is the support interval
    length.  ``clause=None`` flags shifts outside all three cases.
    """
    if N is None:
        N = len(f)
    lhs = cond_expect(f.shifted(h), P).l2sq()
    rhs = cond_expect(f, P).l2sq()
    if h % P.block == 0:
        return ShiftDeltaReport(lhs, rhs, 0.0, "periodic")
    if abs(h) < P.q:
        return ShiftDeltaReport(lhs, rhs, 8.0 * abs(h) / P.q * N, "sub-q")
    if h % P.q == 0 and abs(h // P.q) < P.L:
        return ShiftDeltaReport(lhs, rhs, 8.0 * abs(h // P.q) / P.L * N, "multiple-of-q")
    return ShiftDeltaReport(lhs, rhs, None, None)


def _line_max_diff(u: Line, v: Line) -> float:
    lo = min(u.start, v.start)
    hi = max(u.stop, v.stop)
    return float(np.abs(u.window(lo, hi - 1) - v.window(lo, hi - 1)).max())


@dataclass
class PythagorasReport:
    diff_energy: float        # ||E(f|B') - E(f|B)||_2^2
    energy_gap: float         # ||E(f|B')||_2^2 - ||E(f|B)||_2^2
    tower_fine_dev: float     # max |E(E(f|B)|B') - E(f|B)|
    tower_coarse_dev: float   # max |E(E(f|B')|B) - E(f|B)|

    def to_dict(self) -> dict:
        return {"diff_energy": self.diff_energy, "energy_gap": self.energy_gap,
                "tower_fine_dev": self.tower_fine_dev,
                "tower_coarse_dev": self.tower_coarse_dev}


def refinement_pythagoras(f: Line, B: APPartition, Bp: Partition) -> PythagorasReport:
    """Pythagoras and tower identities for a nested pair B inside B'.

    Rejects pairs where B' does not structurally refine B.
    """
    if not refines(B, Bp):
        raise ValueError(f"{Bp} does not refine {B}")
    pf = cond_expect(f, B)
    pfp = cond_expect(f, Bp)
    lo = min(pf.start, pfp.start)
    hi = max(pf.stop, pfp.stop)
    diff = pfp.window(lo, hi - 1) - pf.window(lo, hi - 1)
    diff_energy = float(np.sum(np.abs(diff) ** 2))
    energy_gap = pfp.l2sq() - pf.l2sq()
    tower_fine = _line_max_diff(cond_expect(pf, Bp), pf)
    tower_coarse = _line_max_diff(cond_expect(pfp, B), pf)
    return PythagorasReport(diff_energy, energy_gap, tower_fine, tower_coarse)


@dataclass
class AlmostRefinementReport:
    lhs: float
    rhs: float
    bound: float
    differing_points: int

    @property
    def ok(self) -> bool:
        return abs(self.lhs - self.rhs) <= self.bound + 1e-9

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "bound": self.bound,
                "differing_points": self.differing_points, "ok": self.ok}


def almost_refinement_delta(f: Line, q: int, L1: int, qt: int,
                            L2: int, N: int | None = None) -> AlmostRefinementReport:
    """Compare the energy under B_1 v B_2 with the energy under B_2 alone.

    B_1 has parameters (q, L1) and B_2 has (q qt, L2).  When qt L2 <= L1 the
    two projections differ only near block boundaries of B_1, so the energies
    agree up to 8 (qt L2 / L1) N.  The number of points where the projections
    actually differ is measured and reported rather than assumed.
    """
    if qt * L2 > L1:
        raise ValueError("almost refinement needs qt * L2 <= L1")
    if N is None:
        N = len(f)
    B1 = APPartition(q, L1)
    B2 = APPartition(q * qt, L2)
    both = RefinedPartition((B1, B2))
    p12 = cond_expect(f, both)
    p2 = cond_expect(f, B2)
    lo = min(p12.start, p2.start)
    hi = max(p12.stop, p2.stop)
    delta = np.abs(p12.window(lo, hi - 1) - p2.window(lo, hi - 1))
    differing = int(np.count_nonzero(delta > 1e-12))
    bound = 8.0 * (qt * L2 / L1) * N
    return AlmostRefinementReport(p12.l2sq(), p2.l2sq(), bound, differing)
