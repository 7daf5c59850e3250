"""Cascade evaluation of scaling functions on refined lattices A^{-J} Z^d.

Starting values on the integer lattice come from the eigenvalue-1 eigenvector
of the transition matrix T[j, k] = c_{A j - k}; each refinement level then
reads the two-scale relation phi(x) = sum_k c_k phi(A x - k) off the coarser
level with exact index arithmetic (x = A^{-J} j keeps every lookup on the
lattice, so the cascade itself never interpolates).

Grids are stored densely over the integer index bounding box of the support
region; entries outside the support parallelogram stay 0, which doubles as
the zero extension used by stencils.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence, NonSimpleEigenvalue, NumericalBreakdown
from .matana import DilationMatrix
from .trigpoly import RefinementCoefficients, TrigPoly, refinement_coefficients

_EIG_TOL = 1e-6


@dataclass(frozen=True)
class SupportBox:
    """Axis-aligned integer box [lo, hi] containing supp(phi)."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo.setflags(write=False)
        self.hi.setflags(write=False)

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo


def support_box(A: DilationMatrix, rc: RefinementCoefficients, tol: float = 1e-9) -> SupportBox:
    """Bounding box of the fixed point of Omega -> A^{-1}(Omega + supp c).

    Accumulates the Minkowski sum of the images A^{-j} supp(c) exactly
    (bounding boxes of Minkowski sums add), which converges geometrically at
    rate q^{-1/d}.  The result is rounded outward to integers.
    """
    total = abs(sum(rc.c.values()))
    if abs(total - rc.q) > 1e-6 * rc.q:
        raise ValueError("refinement coefficients must sum to q")
    d = rc.d
    K = np.array(sorted(rc.c), dtype=float).reshape(len(rc.c), d)
    Ainv = A.inv
    lo = np.zeros(d)
    hi = np.zeros(d)
    ratio = A.q ** (-1.0 / A.d)
    V = K.copy()
    extent = math.inf
    for _ in range(1000):
        V = V @ Ainv.T
        step_lo = V.min(axis=0)
        step_hi = V.max(axis=0)
        lo += step_lo
        hi += step_hi
        extent = max(np.max(np.abs(step_lo)), np.max(np.abs(step_hi)))
        if extent < tol * 1e-2:
            break
    else:
        raise NoConvergence("support box iteration did not contract")
    tail = 4.0 * extent * ratio / (1.0 - ratio)
    lo_int = np.floor(lo - tail + 1e-9).astype(np.int64)
    hi_int = np.ceil(hi + tail - 1e-9).astype(np.int64)
    return SupportBox(lo_int, hi_int)


@dataclass
class LatticeGrid:
    """Values of phi on A^{-J} Z^d restricted to the support box.

    `data` is dense over the index bounding box with `offset` mapping index
    vectors to array positions; `inside` marks indices whose Cartesian point
    lies in the box.  quadrature_weight = q^{-J} = |det A^{-J}|.
    """

    J: int
    A: DilationMatrix
    box: SupportBox
    offset: np.ndarray
    data: np.ndarray
    inside: np.ndarray = field(repr=False)

    @property
    def quadrature_weight(self) -> float:
        return float(self.A.q) ** (-self.J)

    @property
    def index_points(self) -> np.ndarray:
        """In-box integer index vectors j, lexicographic order."""
        return np.argwhere(self.inside) + self.offset

    @property
    def values(self) -> np.ndarray:
        return self.data[self.inside]

    def cartesian_points(self) -> np.ndarray:
        """x = A^{-J} j for the in-box indices."""
        AmJ = np.linalg.inv(self.A.power(self.J).astype(float))
        return self.index_points @ AmJ.T

    def lookup(self, idx) -> np.ndarray:
        """Values at integer index vectors (N, d); 0 outside the stored range."""
        idx = np.atleast_2d(np.asarray(idx, dtype=np.int64))
        pos = idx - self.offset
        shape = np.array(self.data.shape, dtype=np.int64)
        ok = np.all((pos >= 0) & (pos < shape), axis=1)
        out = np.zeros(len(idx))
        if np.any(ok):
            out[ok] = self.data[tuple(pos[ok].T)]
        return out

    def value_at_index(self, j) -> float:
        return float(self.lookup(np.asarray(j, dtype=np.int64)[None, :])[0])

    def mass(self) -> float:
        """Quadrature approximation of the integral of phi (tends to 1)."""
        return float(self.data.sum()) * self.quadrature_weight

    def query(self, x) -> tuple[float, bool]:
        """Value at an arbitrary point, with an `approximate` label.

        On-lattice points return the stored value and False; anything else is
        multilinear interpolation in index space at this level and is flagged
        True, since phi has no closed form between lattice points.
        """
        u = self.A.power(self.J).astype(float) @ np.asarray(x, dtype=float)
        base = np.floor(u).astype(np.int64)
        frac = u - base
        on_lattice = bool(np.all(np.abs(frac) < 1e-12) or np.all(np.abs(frac - 1.0) < 1e-12))
        corners = np.array(list(np.ndindex(*(2,) * len(u))), dtype=np.int64)
        vals = self.lookup(base + corners)
        weights = np.prod(np.where(corners == 1, frac, 1.0 - frac), axis=1)
        return float(vals @ weights), not on_lattice


def _empty_grid(A: DilationMatrix, box: SupportBox, J: int) -> LatticeGrid:
    d = A.d
    AJ = A.power(J)
    corners = np.stack(np.meshgrid(*zip(box.lo, box.hi), indexing="ij"), axis=-1).reshape(-1, d)
    idx_corners = corners @ AJ.T
    lo_idx = idx_corners.min(axis=0).astype(np.int64)
    hi_idx = idx_corners.max(axis=0).astype(np.int64)
    shape = tuple(int(h - l + 1) for l, h in zip(lo_idx, hi_idx))
    grids = np.indices(shape).reshape(d, -1).T + lo_idx
    x = grids @ np.linalg.inv(AJ.astype(float)).T
    inside = np.all((x >= box.lo - 1e-9) & (x <= box.hi + 1e-9), axis=1).reshape(shape)
    return LatticeGrid(J, A, box, lo_idx, np.zeros(shape), inside)


def transition_matrix(A: DilationMatrix, rc: RefinementCoefficients, box: SupportBox):
    """T[j, k] = c_{A j - k} over the integer points of the box."""
    pts = [tuple(p) for p in np.indices(tuple(box.widths + 1)).reshape(A.d, -1).T + box.lo]
    T = np.zeros((len(pts), len(pts)))
    Af = A.entries
    for a, j in enumerate(pts):
        Aj = Af @ np.array(j, dtype=np.int64)
        for b, k in enumerate(pts):
            key = tuple(int(v) for v in (Aj - np.array(k, dtype=np.int64)))
            if key in rc.c:
                T[a, b] = rc.c[key]
    return T, pts


def integer_values(A: DilationMatrix, rc: RefinementCoefficients,
                   box: SupportBox | None = None) -> LatticeGrid:
    """Values of phi on Z^d via the eigenvalue-1 eigenvector of T.

    Normalized so sum_k phi(k) = 1, matching phi_hat(0) = 1.  Raises
    NonSimpleEigenvalue when eigenvalue 1 is not simple; that happens for
    masks whose solution is only a distribution, and must be reported
    rather than silently resolved.
    """
    if box is None:
        box = support_box(A, rc)
    T, pts = transition_matrix(A, rc, box)
    lam, vecs = np.linalg.eig(T)
    close = np.nonzero(np.abs(lam - 1.0) < _EIG_TOL)[0]
    if len(close) == 0:
        raise NumericalBreakdown("transition matrix has no eigenvalue 1")
    if len(close) > 1:
        gaps = ", ".join(f"{abs(lam[i] - 1.0):.2e}" for i in close)
        raise NonSimpleEigenvalue(f"eigenvalue 1 has multiplicity {len(close)} (|lam-1|: {gaps})")
    v = vecs[:, close[0]]
    pivot = v[np.argmax(np.abs(v))]
    v = v / pivot
    if np.max(np.abs(v.imag)) > 1e-9:
        raise NumericalBreakdown("eigenvector for eigenvalue 1 is not real")
    v = v.real
    s = v.sum()
    if abs(s) < 1e-10 * np.abs(v).sum():
        raise NumericalBreakdown("eigenvector cannot be normalized to partition unity")
    v = v / s
    grid = _empty_grid(A, box, 0)
    for p, val in zip(pts, v):
        grid.data[tuple(np.array(p) - grid.offset)] = val
    return grid


def shift_accumulate(dst: LatticeGrid, src: LatticeGrid, shift, weight: float):
    """dst[j] += weight * src[j - shift] on the overlap of the index ranges.

    Pure dense slice arithmetic; contributions falling outside dst's stored
    range are exact zeros of the refinement algebra and may be dropped.
    """
    shift = np.asarray(shift, dtype=np.int64)
    dshape = np.array(dst.data.shape, dtype=np.int64)
    sshape = np.array(src.data.shape, dtype=np.int64)
    lo = np.maximum(dst.offset, src.offset + shift)
    hi = np.minimum(dst.offset + dshape, src.offset + shift + sshape)
    if np.any(hi <= lo):
        return
    dsl = tuple(slice(int(a - o), int(b - o)) for a, b, o in zip(lo, hi, dst.offset))
    ssl = tuple(slice(int(a - o), int(b - o))
                for a, b, o in zip(lo - shift, hi - shift, src.offset))
    dst.data[dsl] += weight * src.data[ssl]


def refine(A: DilationMatrix, rc: RefinementCoefficients, grid: LatticeGrid) -> LatticeGrid:
    """One subdivision step: level J values to level J + 1.

    new[j] = sum_k c_k old[j - A^J k]; all index arithmetic exact.  Realized
    as a scatter: each tap adds a shifted copy of the coarse array.
    """
    out = _empty_grid(A, grid.box, grid.J + 1)
    AJ = A.power(grid.J)
    for k, ck in rc.c.items():
        shift_accumulate(out, grid, AJ @ np.array(k, dtype=np.int64), ck)
    return out


def sample_phi_m(A: DilationMatrix, m0: TrigPoly, m: int, J: int) -> LatticeGrid:
    """Cascade phi^m to level J from the order-m mask (m0)^m."""
    if m < 1 or J < 0:
        raise ValueError("need m >= 1 and J >= 0")
    rc = refinement_coefficients(m0 ** m, A.q)
    grid = integer_values(A, rc)
    for _ in range(J):
        grid = refine(A, rc, grid)
    return grid
