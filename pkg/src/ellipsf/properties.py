"""Property-verification harness.

Each check_* function measures one claimed property of a scaling function and
returns a residual; run_all executes the whole battery against a profile with
pinned tolerances and collects a PropertyReport.  Checks never panic on a
failing property: failures and skips are values in the report.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import cascade, operators, spectral
from .cascade import LatticeGrid
from .errors import DegreeTooHigh, NonSimpleEigenvalue
from .spectral import SpectralProfile
from .trigpoly import TrigPoly, refinement_coefficients


@dataclass(frozen=True)
class Polynomial:
    """Multivariate polynomial as a finite map multi-index -> coefficient."""

    terms: dict
    d: int

    @property
    def total_degree(self) -> int:
        return max((sum(k) for k, c in self.terms.items() if c != 0), default=0)

    def eval(self, x) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(len(pts))
        for k, c in self.terms.items():
            term = np.full(len(pts), float(c))
            for i, p in enumerate(k):
                if p:
                    term *= pts[:, i] ** p
            out += term
        return out

    @classmethod
    def from_terms(cls, d: int, *term_list) -> "Polynomial":
        return cls({tuple(k): float(c) for k, c in term_list}, d)


def _monomial_exponents(d: int, max_degree: int) -> list[tuple[int, ...]]:
    out = [k for k in product(range(max_degree + 1), repeat=d) if sum(k) <= max_degree]
    return sorted(out, key=lambda k: (sum(k), k))


# ---------------------------------------------------------------------------
# Finite differences (Fornberg weights) for the Strang-Fix check.

def _fd_weights(nodes, m: int) -> np.ndarray:
    """Weights of the m-th derivative at 0 on the given nodes (Fornberg)."""
    n = len(nodes)
    C = np.zeros((n, m + 1))
    C[0, 0] = 1.0
    c1 = 1.0
    for i in range(1, n):
        c2 = 1.0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(min(i, m), 0, -1):
                    C[i, k] = c1 * (k * C[i - 1, k - 1] - nodes[i - 1] * C[i - 1, k]) / c2
                C[i, 0] = -c1 * nodes[i - 1] * C[i - 1, 0] / c2
            for k in range(min(i, m), 0, -1):
                C[j, k] = (nodes[i] * C[j, k] - k * C[j, k - 1]) / c3
            C[j, 0] = nodes[i] * C[j, 0] / c3
        c1 = c2
    return C[:, m]


# ---------------------------------------------------------------------------
# Individual checks.

def check_partition_of_unity(grid: LatticeGrid, n_samples: int = 50, seed: int = 0) -> float:
    """Max over sample points of |sum_k phi(x - k) - 1|."""
    if grid.J < 3:
        raise ValueError("need J >= 3")
    rng = np.random.default_rng(seed)
    idx = grid.index_points
    sel = idx[rng.choice(len(idx), size=min(n_samples, len(idx)), replace=False)]
    AJ = grid.A.power(grid.J)
    lo, hi = grid.box.lo, grid.box.hi
    ks = np.array(list(product(*(range(int(l - h - 1), int(h - l + 2))
                                 for l, h in zip(lo, hi)))), dtype=np.int64)
    worst = 0.0
    for n in sel:
        total = math.fsum(grid.lookup(n - ks @ AJ.T))
        worst = max(worst, abs(total - 1.0))
    return worst


def check_total_positivity(profile: SpectralProfile, grid_n: int = 64) -> float:
    """Min of phi_hat over a [-6 pi, 6 pi]^d grid; totally positive means >= 0."""
    axes = [np.linspace(-6 * math.pi, 6 * math.pi, grid_n) for _ in range(profile.d)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, profile.d)
    return float(np.min(spectral.phi_hat(profile, pts)))


def check_strang_fix(profile: SpectralProfile, step: float = 1e-3) -> float:
    """Max |D^n phi_hat(2 pi k)| over 0 < |k|_inf <= 2 and |n| <= 2m - 1.

    Derivatives are 4th-order central differences (9-point Fornberg stencils
    per axis, tensorized for mixed orders).
    """
    d = profile.d
    max_order = 2 * profile.m - 1
    nodes = list(range(-4, 5))
    ks = [k for k in product(range(-2, 3), repeat=d) if any(k)]
    worst = 0.0
    for n in _monomial_exponents(d, max_order):
        axes = []
        for ni in n:
            if ni == 0:
                axes.append(([0], np.array([1.0])))
            else:
                axes.append((nodes, _fd_weights(nodes, ni) / step ** ni))
        offs = np.array(list(product(*(a[0] for a in axes))), dtype=float)
        w = np.ones(len(offs))
        for pos, (_, wts) in enumerate(axes):
            reps = [len(a[0]) for a in axes]
            col = np.array(list(product(*(range(r) for r in reps))))[:, pos]
            w *= np.asarray(wts)[col]
        base = 2 * math.pi * np.array(ks, dtype=float)
        pts = (base[:, None, :] + step * offs[None, :, :]).reshape(-1, d)
        vals = spectral.phi_hat(profile, pts).reshape(len(ks), len(offs))
        worst = max(worst, float(np.max(np.abs(vals @ w))))
    return worst


def check_fourier_refinement(profile: SpectralProfile, n_samples: int = 100,
                             seed: int = 0) -> float:
    """Max relative residual of phi_hat(xi) = m0(A^{-T} xi)^m phi_hat(A^{-T} xi)."""
    rng = np.random.default_rng(seed)
    d = profile.d
    pts = []
    while len(pts) < n_samples:
        cand = rng.uniform(-4 * math.pi, 4 * math.pi, size=(4 * n_samples, d))
        eta, _ = spectral._reduce_torus(cand)
        keep = np.linalg.norm(eta, axis=1) > 0.3
        pts.extend(cand[keep][: n_samples - len(pts)])
    pts = np.array(pts)
    B = profile.contraction
    lhs = spectral.phi_hat(profile, pts)
    rhs = profile.m0.eval_real(pts @ B.T) ** profile.m * spectral.phi_hat(profile, pts @ B.T)
    return float(np.max(np.abs(lhs - rhs) / (np.abs(lhs) + 1e-15)))


def check_non_decay(profile: SpectralProfile, J_max: int = 4) -> float:
    """Spot check that M(2 pi (A^T)^J s) = M(2 pi s) along digit orbits.

    This is the testable form of M's failure to decay: it repeats its
    digit-point values at arbitrarily large lattice scales.
    """
    worst = 0.0
    AT = profile.A.entries.T.astype(float)
    for s in profile.digits_AT.nonzero_S():
        sf = np.array([float(c) for c in s])
        ref = spectral.M_eval(profile, 2 * math.pi * sf)
        v = sf.copy()
        for _ in range(1, J_max + 1):
            v = AT @ v
            worst = max(worst, abs(spectral.M_eval(profile, 2 * math.pi * v) - ref))
    return worst


def check_interpolation(grid0: LatticeGrid) -> float:
    """Max |phi(k) - delta_{k,0}| on the integer points of the support box."""
    if grid0.J != 0:
        raise ValueError("needs the level-0 grid")
    idx = grid0.index_points
    vals = grid0.values
    delta = np.all(idx == 0, axis=1).astype(float)
    return float(np.max(np.abs(vals - delta)))


def check_nonnegativity(grid: LatticeGrid) -> float:
    """Min value over the grid; lattice values of nonnegative-mask functions."""
    return float(np.min(grid.values))


def _fft_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    shape = [sa + sb - 1 for sa, sb in zip(a.shape, b.shape)]
    axes = list(range(a.ndim))
    fa = np.fft.rfftn(a, shape, axes=axes)
    fb = np.fft.rfftn(b, shape, axes=axes)
    return np.fft.irfftn(fa * fb, shape, axes=axes)


def check_convolution(profile: SpectralProfile, m1: int, m2: int, J: int) -> float:
    """Compare cascade phi^{m1+m2} against the discrete convolution
    q^{-J} (phi^{m1} * phi^{m2}) on the common level-J lattice."""
    if m1 < 1 or m2 < 1:
        raise ValueError("orders must be >= 1")
    A, m0 = profile.A, profile.m0
    g1 = cascade.sample_phi_m(A, m0, m1, J)
    g2 = g1 if m2 == m1 else cascade.sample_phi_m(A, m0, m2, J)
    g12 = cascade.sample_phi_m(A, m0, m1 + m2, J)
    conv = _fft_convolve(g1.data, g2.data) * g1.quadrature_weight
    off = g1.offset + g2.offset
    idx = g12.index_points
    pos = idx - off
    shape = np.array(conv.shape)
    ok = np.all((pos >= 0) & (pos < shape), axis=1)
    approx = np.zeros(len(idx))
    approx[ok] = conv[tuple(pos[ok].T)]
    return float(np.max(np.abs(approx - g12.values)))


def check_polynomial_reproduction(profile: SpectralProfile, p: Polynomial,
                                  grid: LatticeGrid | None = None,
                                  n_samples: int = 60, window: float = 2.0,
                                  seed: int = 3):
    """Shift-sum r(x) = sum_k p(k) phi(x - k) tested for leading-term
    reproduction r = p + (degree < deg p).

    Returns (leading_ok, residual_degree, fit_residual).  leading_ok is the
    verdict of a least-squares fit of r - p against monomials of lower
    degree; polynomials outside the operator null space are expected to fail
    it, and that expected failure is asserted by the caller.
    """
    if p.total_degree > 2 * profile.m + 1:
        raise DegreeTooHigh(f"degree {p.total_degree} exceeds 2m + 1 = {2 * profile.m + 1}")
    if grid is None:
        grid = cascade.sample_phi_m(profile.A, profile.m0, profile.m, 5)
    d, J = profile.d, grid.J
    rng = np.random.default_rng(seed)
    AJ = grid.A.power(J)
    inv = np.linalg.inv(AJ.astype(float))
    idx = grid.index_points
    x = idx @ inv.T
    inside = np.all(np.abs(x) <= window, axis=1)
    pool = idx[inside]
    sel = pool[rng.choice(len(pool), size=min(n_samples, len(pool)), replace=False)]
    xs = sel @ inv.T
    lo, hi = grid.box.lo, grid.box.hi
    ks = np.array(list(product(*(range(int(math.floor(-window - h)), int(math.ceil(window - l)) + 1)
                                 for l, h in zip(lo, hi)))), dtype=np.int64)
    pk = p.eval(ks.astype(float))
    r = np.zeros(len(sel))
    for w, k in zip(pk, ks):
        if w != 0.0:
            r += w * grid.lookup(sel - k @ AJ.T)
    resid = r - p.eval(xs)
    expo = _monomial_exponents(d, p.total_degree - 1) if p.total_degree > 0 else []
    if expo:
        V = np.stack([np.prod(xs ** np.asarray(e, dtype=float), axis=1) for e in expo], axis=1)
        coef, *_ = np.linalg.lstsq(V, resid, rcond=None)
        fit_residual = float(np.max(np.abs(resid - V @ coef)))
    else:
        coef = np.zeros(0)
        fit_residual = float(np.max(np.abs(resid)))
    leading_ok = fit_residual < 1e-5
    scale = max(1.0, float(np.max(np.abs(coef))) if len(coef) else 1.0)
    sig = [sum(e) for e, c in zip(expo, coef) if abs(c) > 1e-7 * scale]
    residual_degree = max(sig) if sig else -1
    return leading_ok, residual_degree, fit_residual


def reproduction_cases(profile: SpectralProfile) -> list[tuple[Polynomial, bool]]:
    """Candidate polynomials with their expected reproduction verdicts.

    Degree <= 2m - 1 always reproduces (Strang-Fix); degree-2 null-space
    candidates of the order-m operator reproduce at m = 1; candidates with
    P(D)^m p != 0 beyond degree 2m - 1 must fail.
    """
    d, m = profile.d, profile.m
    Q2 = profile.Q2.Q2
    cases: list[tuple[Polynomial, bool]] = []
    one = Polynomial.from_terms(d, ((0,) * d, 1.0))
    x1 = Polynomial.from_terms(d, (tuple(1 if i == 0 else 0 for i in range(d)), 1.0))
    cases.append((one, True))
    cases.append((x1, True))
    if d == 1:
        if m == 1:
            cases.append((Polynomial.from_terms(1, ((2,), 1.0)), False))
        else:
            cases.append((Polynomial.from_terms(1, ((3,), 1.0)), True))
            cases.append((Polynomial.from_terms(1, ((2 * m,), 1.0)), False))
    elif d == 2:
        if m == 1:
            # Null space of q11 dxx + 2 q12 dxy + q22 dyy at degree 2.
            cases.append((Polynomial.from_terms(
                2, ((2, 0), 1.0), ((0, 2), -Q2[0, 0] / Q2[1, 1])), True))
            cases.append((Polynomial.from_terms(
                2, ((1, 1), 1.0), ((0, 2), -Q2[0, 1] / Q2[1, 1])), True))
            cases.append((Polynomial.from_terms(2, ((2, 0), 1.0), ((0, 2), 1.0)), False))
        else:
            cases.append((Polynomial.from_terms(2, ((3, 0), 1.0)), True))
            cases.append((Polynomial.from_terms(2, ((2 * m, 0), 1.0)), False))
    return cases


def check_approximation_order(profile: SpectralProfile, levels=(2, 3, 4),
                              window: float = 3.0, oversample: int = 3,
                              f=None):
    """Fitted slope of log L2 error of the best lattice approximant vs log h.

    The approximant is the discrete least-squares projection of f onto
    span{phi(A^J x - k)}, which realizes the infimum over coefficients; the
    error should scale like h^{2m}.  Returns (slope, errors); slope is None
    when the error is at rounding level (f reproduced exactly).
    """
    d = profile.d
    if f is None:
        f = lambda x: np.exp(-np.sum(np.asarray(x) ** 2, axis=-1))
    grid_r = cascade.sample_phi_m(profile.A, profile.m0, profile.m, oversample)
    box = grid_r.box
    Ar = profile.A.power(oversample)
    errs = []
    hs = []
    for J in levels:
        AJr = profile.A.power(J + oversample)
        inv = np.linalg.inv(AJr.astype(float))
        corners = np.array(list(product((-window, window), repeat=d)))
        icorn = corners @ AJr.T
        ranges = [range(int(math.floor(c)), int(math.ceil(C)) + 1)
                  for c, C in zip(icorn.min(axis=0), icorn.max(axis=0))]
        N = np.array(list(product(*ranges)), dtype=np.int64)
        X = N @ inv.T
        keep = np.all(np.abs(X) <= window, axis=1)
        N, X = N[keep], X[keep]
        AJ = profile.A.power(J)
        kc = np.array(list(product((-window, window), repeat=d))) @ AJ.T
        pad = np.maximum(np.abs(box.lo), np.abs(box.hi))
        kranges = [range(int(math.floor(c - p)), int(math.ceil(C + p)) + 1)
                   for c, C, p in zip(kc.min(axis=0), kc.max(axis=0), pad)]
        K = np.array(list(product(*kranges)), dtype=np.int64)
        cols = []
        kept_k = []
        for k in K:
            col = grid_r.lookup(N - k @ Ar.T)
            if np.any(col):
                cols.append(col)
                kept_k.append(k)
        D = np.stack(cols, axis=1)
        target = f(X)
        coef, *_ = np.linalg.lstsq(D, target, rcond=None)
        res = target - D @ coef
        err = math.sqrt(float(np.sum(res ** 2)) * profile.q ** (-(J + oversample)))
        errs.append(err)
        hs.append(profile.q ** (-J / d))
    if max(errs) < 1e-12:
        return None, errs
    slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    return slope, errs


# ---------------------------------------------------------------------------
# Harness.

@dataclass
class PropertyConfig:
    J: int = 5
    grid_n: int = 64
    n_samples: int = 50
    seed: int = 0
    approx_levels: tuple | None = None
    tol_partition: float = 1e-8
    tol_positivity: float = -1e-10
    tol_strang_fix: float = 1e-6
    tol_refinement: float = 1e-8
    tol_convolution: float = 5e-3
    tol_interpolation: float = 1e-10
    tol_operator: float = 1e-6
    tol_reproduction: float = 1e-5
    tol_mass: float = 1e-6


@dataclass
class CheckResult:
    name: str
    status: str  # "pass" | "fail" | "skip"
    residual: float | None
    tolerance: float | None
    runtime: float
    note: str = ""

    def to_json(self, include_runtime: bool = True) -> dict:
        doc = {"name": self.name, "status": self.status, "residual": self.residual,
               "tolerance": self.tolerance, "note": self.note}
        if include_runtime:
            doc["runtime_s"] = self.runtime
        return doc


@dataclass
class PropertyReport:
    matrix: list
    m: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_json(self, include_runtime: bool = True) -> dict:
        return {"matrix": self.matrix, "m": self.m, "passed": self.passed,
                "checks": [c.to_json(include_runtime) for c in self.checks]}


def _mask_is_interpolating(profile: SpectralProfile) -> bool:
    total = TrigPoly(profile.d)
    for s in profile.digits_AT.S:
        total = total + profile.m0.shift_argument(s)
    cmap = total.coeffs
    zero = (0,) * profile.d
    if abs(cmap.get(zero, 0) - 1.0) > 1e-12:
        return False
    return all(abs(c) <= 1e-12 for k, c in cmap.items() if k != zero)


def run_all(profile: SpectralProfile, config: PropertyConfig | None = None) -> PropertyReport:
    """Execute every check against the profile; failures are report entries."""
    cfg = config or PropertyConfig()
    report = PropertyReport([[int(v) for v in row] for row in profile.A.entries], profile.m)

    def record(name, fn, tolerance, predicate, skip_reason=None):
        t0 = time.perf_counter()
        if skip_reason is not None:
            report.checks.append(CheckResult(name, "skip", None, tolerance, 0.0, skip_reason))
            return
        try:
            residual = fn()
        except NonSimpleEigenvalue as exc:
            report.checks.append(CheckResult(
                name, "skip", None, tolerance, time.perf_counter() - t0,
                f"NonSimpleEigenvalue: {exc}"))
            return
        except Exception as exc:  # aggregated, never panics
            report.checks.append(CheckResult(
                name, "fail", None, tolerance, time.perf_counter() - t0,
                f"{type(exc).__name__}: {exc}"))
            return
        status = "pass" if predicate(residual) else "fail"
        report.checks.append(CheckResult(
            name, status, float(residual), tolerance, time.perf_counter() - t0))

    # Riesz verdict first: it needs no cascade and fails honestly for
    # constructions that only exist as distributions.
    def riesz():
        spectral.riesz_verdict(profile)
        return profile.B_estimate
    record("riesz_basis", riesz, None, lambda _: bool(profile.riesz_ok))

    grid = None
    grid_err: Exception | None = None
    try:
        rc = refinement_coefficients(profile.m0 ** profile.m, profile.q)
        grid0 = cascade.integer_values(profile.A, rc)
        grid = grid0
        for _ in range(cfg.J):
            grid = cascade.refine(profile.A, rc, grid)
    except Exception as exc:
        grid_err = exc
        grid0 = None

    skip = None if grid is not None else f"{type(grid_err).__name__}: {grid_err}"
    record("mass", lambda: abs(grid.mass() - 1.0), cfg.tol_mass,
           lambda r: r <= cfg.tol_mass, skip)
    record("partition_of_unity",
           lambda: check_partition_of_unity(grid, cfg.n_samples, cfg.seed),
           cfg.tol_partition, lambda r: r <= cfg.tol_partition, skip)

    if skip is None and _mask_is_interpolating(profile) and profile.m == 1:
        record("interpolation", lambda: check_interpolation(grid0),
               cfg.tol_interpolation, lambda r: r <= cfg.tol_interpolation)
    else:
        record("interpolation", None, cfg.tol_interpolation, None,
               skip or "mask is not interpolating")

    if skip is None and all(v >= -1e-15 for v in rc.c.values()):
        record("lattice_nonnegativity", lambda: check_nonnegativity(grid),
               -1e-10, lambda r: r >= -1e-10)
    else:
        record("lattice_nonnegativity", None, -1e-10, None,
               skip or "mask has negative coefficients")

    record("total_positivity", lambda: check_total_positivity(profile, cfg.grid_n),
           cfg.tol_positivity, lambda r: r >= cfg.tol_positivity)
    record("strang_fix", lambda: check_strang_fix(profile),
           cfg.tol_strang_fix, lambda r: r <= cfg.tol_strang_fix)
    record("fourier_refinement",
           lambda: check_fourier_refinement(profile, 100, cfg.seed),
           cfg.tol_refinement, lambda r: r <= cfg.tol_refinement)
    record("non_decay", lambda: check_non_decay(profile),
           10 * profile.truncation_tol, lambda r: r <= 10 * profile.truncation_tol)
    record("convolution",
           lambda: check_convolution(profile, profile.m, profile.m, cfg.J),
           cfg.tol_convolution, lambda r: r <= cfg.tol_convolution,
           skip)

    if profile.m >= 2:
        record("operator_relation",
               lambda: operators.verify_operator_relation(profile, profile.m, 1),
               cfg.tol_operator, lambda r: r <= cfg.tol_operator)
    else:
        record("operator_relation", None, cfg.tol_operator, None,
               "needs m >= 2 (k < m)")

    def reproduction():
        worst = 0.0
        for p, expect in reproduction_cases(profile):
            ok, _, fit = check_polynomial_reproduction(
                profile, p, grid=grid, seed=cfg.seed)
            if ok != expect:
                raise AssertionError(
                    f"degree-{p.total_degree} candidate: expected "
                    f"{'reproduction' if expect else 'failure'}, fit residual {fit:.3e}")
            if expect:
                worst = max(worst, fit)
        return worst
    record("polynomial_reproduction", reproduction, cfg.tol_reproduction,
           lambda r: r <= cfg.tol_reproduction, skip)

    if cfg.approx_levels is not None:
        target = 2 * profile.m - 0.4
        def approx():
            slope, _ = check_approximation_order(profile, cfg.approx_levels)
            return math.inf if slope is None else slope
        record("approximation_order", approx, target, lambda s: s >= target,
               skip)

    return report
