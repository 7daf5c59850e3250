"""Sparse trigonometric polynomials and mask synthesis.

A TrigPoly is a finite map from integer frequency vectors k to complex
coefficients, representing p(xi) = sum_k c_k exp(-i k . xi).  Frequencies are
exact integers; only coefficient values are floating point.  This module
builds the nonnegative polynomial G from a quadratic form, the mask m0 as the
digit-shifted product of G, and the refinement coefficients of the scaling
relation phi(x) = sum_k c_k phi(A x - k).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .digits import DigitSet
from .errors import MaskPoleAtDigit, NotPositiveDefinite, NumericalBreakdown
from .matana import DilationMatrix, QuadraticForm

_PRUNE_REL = 1e-14
REALNESS_TOL = 1e-12


def _phase(fr: Fraction) -> complex:
    """exp(-2 pi i fr), exact for the dyadic values 0, 1/2, 1/4, 3/4."""
    fr = fr % 1
    if fr == 0:
        return 1.0 + 0.0j
    if fr == Fraction(1, 2):
        return -1.0 + 0.0j
    if fr == Fraction(1, 4):
        return -1.0j
    if fr == Fraction(3, 4):
        return 1.0j
    return cmath.exp(-2j * math.pi * float(fr))


class TrigPoly:
    """Finite-support trigonometric polynomial sum_k c_k e^{-i k.xi}."""

    __slots__ = ("d", "coeffs")

    def __init__(self, d: int, coeffs: dict | None = None):
        self.d = d
        self.coeffs: dict[tuple[int, ...], complex] = {}
        if coeffs:
            for k, c in coeffs.items():
                c = complex(c)
                if c != 0:
                    self.coeffs[tuple(int(v) for v in k)] = c

    @classmethod
    def constant(cls, d: int, value=1.0) -> "TrigPoly":
        return cls(d, {(0,) * d: value})

    def __len__(self):
        return len(self.coeffs)

    def __repr__(self):
        return f"TrigPoly(d={self.d}, terms={len(self.coeffs)})"

    def _frequency_matrix(self):
        K = np.array(sorted(self.coeffs), dtype=np.int64).reshape(len(self.coeffs), self.d)
        C = np.array([self.coeffs[tuple(k)] for k in K])
        return K, C

    def eval(self, xi):
        """Evaluate at a point (d,) or batch (N, d); returns complex."""
        if not self.coeffs:
            x = np.asarray(xi, dtype=float)
            return 0j if x.ndim == 1 else np.zeros(x.shape[0], dtype=complex)
        K, C = self._frequency_matrix()
        x = np.asarray(xi, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        vals = np.exp(-1j * (x @ K.T)) @ C
        return complex(vals[0]) if single else vals

    def eval_real(self, xi):
        """Real part of eval; the natural value for real even polynomials."""
        out = self.eval(xi)
        return out.real if isinstance(out, np.ndarray) else out.real

    def eval_at_two_pi(self, s) -> complex:
        """Evaluate at xi = 2 pi s for exact rational s, with compensated sums.

        Phases e^{-2 pi i k.s} are exact for dyadic k.s, so digit products
        with determinant a power of two come out bit-exact.
        """
        s = tuple(Fraction(c) for c in s)
        re, im = [], []
        for k, c in self.coeffs.items():
            fr = sum((Fraction(ki) * si for ki, si in zip(k, s)), Fraction(0))
            z = c * _phase(fr)
            re.append(z.real)
            im.append(z.imag)
        return complex(math.fsum(re), math.fsum(im))

    def shift_argument(self, t) -> "TrigPoly":
        """Realize xi -> xi + 2 pi t exactly for rational t: c_k *= e^{-2 pi i k.t}."""
        t = tuple(Fraction(c) for c in t)
        if len(t) != self.d:
            raise ValueError("shift vector has wrong dimension")
        out = {}
        for k, c in self.coeffs.items():
            fr = sum((Fraction(ki) * ti for ki, ti in zip(k, t)), Fraction(0))
            out[k] = c * _phase(fr)
        return TrigPoly(self.d, out)

    def transform_frequencies(self, M) -> "TrigPoly":
        """Map k -> M k on frequencies; the result evaluates to p(M^T xi)."""
        M = np.asarray(M, dtype=np.int64)
        out = {}
        for k, c in self.coeffs.items():
            nk = tuple(int(v) for v in M @ np.array(k, dtype=np.int64))
            out[nk] = out.get(nk, 0) + c
        return TrigPoly(self.d, out)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return TrigPoly(self.d, out)

    def __sub__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) - c
        return TrigPoly(self.d, out)

    def __mul__(self, other):
        """Product; coefficient maps convolve, supports add."""
        if isinstance(other, (int, float, complex)):
            return TrigPoly(self.d, {k: c * other for k, c in self.coeffs.items()})
        other = self._coerce(other)
        out: dict[tuple[int, ...], complex] = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0) + c1 * c2
        p = TrigPoly(self.d, out)
        p._prune()
        return p

    __rmul__ = __mul__

    def __pow__(self, m: int):
        if not isinstance(m, int) or m < 0:
            raise ValueError("power must be a nonnegative integer")
        out = TrigPoly.constant(self.d)
        for _ in range(m):
            out = out * self
        return out

    def _coerce(self, other) -> "TrigPoly":
        if isinstance(other, TrigPoly):
            if other.d != self.d:
                raise ValueError("dimension mismatch")
            return other
        return TrigPoly.constant(self.d, other)

    def _prune(self):
        if not self.coeffs:
            return
        cut = _PRUNE_REL * max(abs(c) for c in self.coeffs.values())
        for k in [k for k, c in self.coeffs.items() if abs(c) <= cut]:
            del self.coeffs[k]

    @property
    def is_real(self) -> bool:
        """True iff c_{-k} = conj(c_k) for every frequency (checked, not assumed)."""
        scale = max((abs(c) for c in self.coeffs.values()), default=1.0)
        for k, c in self.coeffs.items():
            mk = tuple(-v for v in k)
            if abs(self.coeffs.get(mk, 0) - c.conjugate()) > REALNESS_TOL * max(scale, 1.0):
                return False
        return True

    def realify(self, tol: float = REALNESS_TOL) -> "TrigPoly":
        """Drop imaginary coefficient parts below tol (absolute); fail otherwise."""
        worst = max((abs(c.imag) for c in self.coeffs.values()), default=0.0)
        if worst > tol:
            raise NumericalBreakdown(f"imaginary residue {worst:.3e} above {tol:.1e}")
        return TrigPoly(self.d, {k: complex(c.real, 0.0) for k, c in self.coeffs.items()})

    def real_coeffs(self) -> dict[tuple[int, ...], float]:
        return {k: c.real for k, c in self.realify().coeffs.items()}


def build_G(qf: QuadraticForm) -> TrigPoly:
    """Trigonometric polynomial with Taylor expansion P(xi) + O(|xi|^4).

    G(xi) = 4 sum_i q_ii sin^2(xi_i/2) + 2 sum_{i<j} q_ij sin xi_i sin xi_j,
    nonnegative on R^d and vanishing exactly on 2 pi Z^d.
    """
    Q2 = qf.Q2
    d = qf.d
    if np.linalg.eigvalsh(Q2)[0] <= 0:
        raise NotPositiveDefinite("quadratic form must be positive definite")
    coeffs: dict[tuple[int, ...], complex] = {}

    def bump(k, v):
        k = tuple(k)
        coeffs[k] = coeffs.get(k, 0) + v

    for i in range(d):
        qii = Q2[i, i]
        e = [0] * d
        bump(e, 2 * qii)
        e[i] = 1
        bump(e, -qii)
        e[i] = -1
        bump(e, -qii)
    for i in range(d):
        for j in range(i + 1, d):
            qij = Q2[i, j]
            if qij == 0:
                continue
            for si, sj, w in ((1, 1, -0.5), (-1, -1, -0.5), (1, -1, 0.5), (-1, 1, 0.5)):
                e = [0] * d
                e[i], e[j] = si, sj
                bump(e, w * qij)
    return TrigPoly(d, coeffs)


def eval_G_stable(qf: QuadraticForm, xi):
    """Evaluate G in its sin form; no cancellation even next to 2 pi Z^d."""
    x = np.asarray(xi, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    Q2 = qf.Q2
    s2 = np.sin(0.5 * x) ** 2
    out = 4.0 * (s2 @ np.diag(Q2).copy())
    if qf.d > 1:
        sx = np.sin(x)
        for i in range(qf.d):
            for j in range(i + 1, qf.d):
                if Q2[i, j] != 0:
                    out = out + 2.0 * Q2[i, j] * sx[:, i] * sx[:, j]
    return float(out[0]) if single else out


def build_mask(A: DilationMatrix, G: TrigPoly, ds: DigitSet) -> TrigPoly:
    """Mask m0(xi) = prod_{s in S(A^T)\\{0}} G(xi + 2 pi s) / G(2 pi s).

    `ds` must be the digit set of A^T.  Raises MaskPoleAtDigit when some
    G(2 pi s) vanishes, in which case the construction is undefined.
    """
    expected = tuple(tuple(int(v) for v in row) for row in A.entries.T)
    if ds.matrix != expected:
        raise ValueError("digit set does not belong to A^T")
    shifts = ds.nonzero_S()
    num = TrigPoly.constant(G.d)
    den = 1.0
    scale = max(abs(c) for c in G.coeffs.values())
    for s in shifts:
        g = G.eval_at_two_pi(s)
        if abs(g) <= 1e-12 * scale:
            raise MaskPoleAtDigit(f"G(2 pi {tuple(map(str, s))}) = {g:.3e}")
        num = num * G.shift_argument(s)
        den *= g.real if abs(g.imag) <= 1e-12 * abs(g) else g
    mask = num * (1.0 / den)
    return mask.realify()


@dataclass(frozen=True)
class RefinementCoefficients:
    """Weights of phi(x) = sum_k c_k phi(A x - k), with sum c_k = q.

    c_k is q times the Fourier coefficient of the mask at k; the L2-normalized
    weights of the scaling relation are h_k = c_k / sqrt(q).
    """

    c: dict[tuple[int, ...], float]
    q: int
    d: int

    def support(self) -> list[tuple[int, ...]]:
        return sorted(self.c)

    def total(self) -> float:
        return math.fsum(self.c.values())


def refinement_coefficients(m0: TrigPoly, q: int) -> RefinementCoefficients:
    if not m0.is_real:
        raise ValueError("mask must be real")
    cmap = m0.real_coeffs()
    total = math.fsum(cmap.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"mask is not normalized, m0(0) = {total!r}")
    c = {k: q * v for k, v in cmap.items()}
    return RefinementCoefficients(c, q, m0.d)


def render_cosine(p: TrigPoly, digits: int = 12) -> str:
    """Human-readable cosine/sine rendering for comparison against tables."""
    coeffs = dict(p.coeffs)
    zero = (0,) * p.d
    parts = []
    c0 = coeffs.pop(zero, 0)
    if c0 != 0 or not coeffs:
        parts.append(f"{c0.real:.{digits}g}")
    seen = set()
    for k in sorted(coeffs):
        if k in seen:
            continue
        mk = tuple(-v for v in k)
        pos = max(k, mk)
        seen.update((k, mk))
        ck = coeffs.get(pos, 0)
        cmk = coeffs.get(tuple(-v for v in pos), 0)
        freq = " + ".join(
            f"{'' if abs(v) == 1 else str(abs(v)) + ' '}x{i + 1}" if v > 0
            else f"-{'' if abs(v) == 1 else str(abs(v)) + ' '}x{i + 1}"
            for i, v in enumerate(pos) if v != 0
        ).replace("+ -", "- ")
        a = (ck + cmk).real
        b = (1j * (cmk - ck)).real
        if abs(a) > 1e-15:
            parts.append(f"{a:+.{digits}g} cos({freq})")
        if abs(b) > 1e-15:
            parts.append(f"{b:+.{digits}g} sin({freq})")
    return " ".join(parts) if parts else "0"


def mask_to_json(p: TrigPoly) -> list[dict]:
    """Export format: list of {"k": [...], "c": float} sorted by frequency."""
    cmap = p.real_coeffs()
    return [{"k": list(k), "c": cmap[k]} for k in sorted(cmap)]
