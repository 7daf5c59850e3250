"""The central-difference operator with symbol G, and the operator relations.

The finite-difference operator is -P(D_1, ..., D_d) built from the iterated
central differences D_i^2 and the mixed four-tap stencils D_ij; its symbol is
exactly the trigonometric polynomial G.  The companion objects are the symbol
P/M (whose m-th power annihilates phi^m off the integer lattice) and the
Green spectrum (M/P)^m; both are defined only through their symbols, so every
relation involving them is verified spectrally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cascade, spectral
from .cascade import LatticeGrid, _empty_grid
from .matana import QuadraticForm, eval_P
from .spectral import SpectralProfile
from .trigpoly import TrigPoly, eval_G_stable


@dataclass(frozen=True)
class DifferenceStencil:
    """Finite map offset -> weight with sum 0 and symbol G."""

    taps: dict[tuple[int, ...], float]
    d: int

    def symbol(self, xi):
        """sum_n taps_n e^{-i n.xi}, evaluated at a point or batch."""
        x = np.asarray(xi, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        out = np.zeros(len(x), dtype=complex)
        for n, w in self.taps.items():
            out += w * np.exp(-1j * (x @ np.asarray(n, dtype=float)))
        return complex(out[0]) if single else out


def build_stencil(qf: QuadraticForm) -> DifferenceStencil:
    """Taps of -sum q_ii D_i^2 - 2 sum_{i<j} q_ij D_ij.

    D_i^2 f = f(.-e_i) - 2f + f(.+e_i); the mixed D_ij is its own four-tap
    stencil with weight 1/4 and is never collapsed to D_j^2.
    """
    d = qf.d
    Q2 = qf.Q2
    taps: dict[tuple[int, ...], float] = {}

    def bump(offset, w):
        offset = tuple(offset)
        taps[offset] = taps.get(offset, 0.0) + w

    for i in range(d):
        qii = Q2[i, i]
        e = [0] * d
        bump(e, 2.0 * qii)
        for s in (1, -1):
            e = [0] * d
            e[i] = s
            bump(e, -qii)
    for i in range(d):
        for j in range(i + 1, d):
            qij = Q2[i, j]
            if qij == 0:
                continue
            # -2 q_ij D_ij with D_ij carrying the 1/4 factor.
            for si, sj, sign in ((1, 1, -1), (-1, -1, -1), (1, -1, 1), (-1, 1, 1)):
                e = [0] * d
                e[i], e[j] = si, sj
                bump(e, sign * qij / 2.0)
    taps = {k: v for k, v in taps.items() if v != 0.0}
    return DifferenceStencil(taps, d)


def apply_stencil(st: DifferenceStencil, grid: LatticeGrid, k: int = 1) -> LatticeGrid:
    """k-fold application on a lattice grid.

    Reads outside the input box are exact zeros (compact support); the output
    box grows by the tap hull per application, since supp(Gf) is contained in
    supp(f) + supp(taps).  Integer offsets shift by A^J in index space.
    """
    if k < 1:
        raise ValueError("power k must be >= 1")
    AJ = grid.A.power(grid.J)
    offs = np.array(list(st.taps), dtype=np.int64)
    out = grid
    for _ in range(k):
        box = cascade.SupportBox(out.box.lo + offs.min(axis=0),
                                 out.box.hi + offs.max(axis=0))
        nxt = _empty_grid(grid.A, box, grid.J)
        for n, w in st.taps.items():
            cascade.shift_accumulate(nxt, out, AJ @ np.asarray(n, dtype=np.int64), w)
        out = nxt
    return out


def delta_sharp_symbol(profile: SpectralProfile, xi, tol: float | None = None):
    """Symbol P(xi)/M(xi) of the operator whose m-th power annihilates phi^m
    between lattice points."""
    x = np.asarray(xi, dtype=float)
    return eval_P(profile.Q2, x) / spectral.M_eval(profile, x, tol)


def green_spectrum(profile: SpectralProfile, xi, tol: float | None = None,
                   order: int | None = None):
    """Fourier transform (M/P)^m of the Green function of the operator."""
    m = profile.m if order is None else order
    x = np.asarray(xi, dtype=float)
    return (spectral.M_eval(profile, x, tol) / eval_P(profile.Q2, x)) ** m


def green_combination(profile: SpectralProfile, order: int | None = None) -> TrigPoly:
    """Weights w with phi^m = sum_k w_k rho(. - k); these are exactly the
    coefficients of G^m, since phi_hat^m = G^m rho_hat."""
    m = profile.m if order is None else order
    return profile.G ** m


def verify_operator_relation(profile: SpectralProfile, m: int, k: int,
                             n_samples: int = 200, seed: int = 7) -> float:
    """Max relative residual of (P/M)^k phi_hat^m = G^k phi_hat^{m-k}.

    Checked at random points away from the lattice, with the three M factors
    truncated at different tolerances so the identity is not an algebraic
    tautology of one shared truncation.
    """
    if not 1 <= k < m:
        raise ValueError("need 1 <= k < m")
    rng = np.random.default_rng(seed)
    d = profile.d
    tol = profile.truncation_tol
    pts = []
    while len(pts) < n_samples:
        cand = rng.uniform(-4 * math.pi, 4 * math.pi, size=(4 * n_samples, d))
        eta, _ = spectral._reduce_torus(cand)
        keep = np.linalg.norm(eta, axis=1) > 0.3
        pts.extend(cand[keep][: n_samples - len(pts)])
    pts = np.array(pts)
    P = eval_P(profile.Q2, pts)
    Gv = eval_G_stable(profile.Q2, pts)
    M1 = spectral.M_eval(profile, pts, tol)
    M2 = spectral.M_eval(profile, pts, tol * 1e-2)
    M3 = spectral.M_eval(profile, pts, tol * 0.3)
    lhs = (P / M1) ** k * (Gv / P * M2) ** m
    rhs = Gv ** k * (Gv / P * M3) ** (m - k)
    return float(np.max(np.abs(lhs - rhs) / (np.abs(rhs) + 1e-300)))
