"""Spectral tools for the Harper operator.

Two independent routes to the spectrum are kept side by side: dense eigen
decomposition (LAPACK at machine precision, cyclic Jacobi on gmpy2 reals
above that) and the transfer-matrix characteristic polynomial, which also
yields the determinant in closed form for b = 0.  The near-degenerate pair
statistics that motivate the high-precision path live here as well.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import gmpy2
import numpy as np

from .errors import NoConvergence, NoSplitDetected, NumericalError, PrecisionWarning
from .operators import (
    MACHINE,
    Basis,
    HarperParams,
    OperatorMatrix,
    PrecisionContext,
    build_harper,
)

TWO_PI = 2.0 * math.pi


@dataclass
class Spectrum:
    """Sorted eigenvalues with nearest-neighbor spacings.

    eigenvalues and spacings are float64 arrays on the machine path and
    tuples of gmpy2.mpfr on the high-precision path.  eigenvectors (columns,
    machine only) are in the basis the matrix was given in.
    """

    params: Optional[HarperParams]
    eigenvalues: object
    spacings: object
    precision: PrecisionContext
    basis: Optional[Basis] = None
    eigenvectors: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


@dataclass
class CharPolyEvaluation:
    """det[x 1 - 2 h(1, b, eps)] evaluated at one point.

    trace_part is the b-independent transfer-matrix trace f(x); the full
    value is f(x) - 2 cos(n b).
    """

    params: HarperParams
    x: object
    value: object
    trace_part: object
    precision: PrecisionContext


def _nearest_spacings_np(vals: np.ndarray) -> np.ndarray:
    d = np.diff(vals)
    left = np.concatenate(([np.inf], d))
    right = np.concatenate((d, [np.inf]))
    return np.minimum(left, right)


def _nearest_spacings_mp(vals):
    n = len(vals)
    out = []
    for j in range(n):
        cands = []
        if j > 0:
            cands.append(vals[j] - vals[j - 1])
        if j < n - 1:
            cands.append(vals[j + 1] - vals[j])
        out.append(min(cands))
    return tuple(out)


def spacings(spectrum: Spectrum):
    """Nearest-neighbor distance dE_j = min_k |E_j - E_k| for each level."""
    vals = spectrum.eigenvalues
    if isinstance(vals, np.ndarray):
        return _nearest_spacings_np(vals)
    return _nearest_spacings_mp(vals)


def _jacobi_eigenvalues(rows, digits):
    """Eigenvalues of a real symmetric matrix of gmpy2 reals, ascending.

    Cyclic-by-rows Jacobi rotations, run until the off-diagonal Frobenius
    norm falls below 10^-(digits-2) times the Frobenius norm of the input.
    Elements too small to matter jointly are skipped.  Eigenvalues only.
    """
    n = len(rows)
    a = [list(r) for r in rows]
    zero = gmpy2.mpfr(0)

    norm2 = zero
    for p in range(n):
        ap = a[p]
        for q in range(n):
            norm2 += ap[q] * ap[q]
    if norm2 == 0:
        return tuple(sorted(a[p][p] for p in range(n)))
    target2 = norm2 * gmpy2.mpfr(10) ** (-2 * (digits - 2))
    # even if every off element sat at this level the norm would stay under target
    skip2 = target2 / (n * n)

    def off2():
        s = zero
        for p in range(n - 1):
            ap = a[p]
            for q in range(p + 1, n):
                s += ap[q] * ap[q]
        return s

    for _ in range(64):
        if off2() <= target2:
            break
        for p in range(n - 1):
            rp = a[p]
            for q in range(p + 1, n):
                apq = rp[q]
                if apq * apq <= skip2:
                    continue
                theta = (a[q][q] - rp[p]) / (2 * apq)
                t = 1 / (abs(theta) + gmpy2.sqrt(theta * theta + 1))
                if theta < 0:
                    t = -t
                c = 1 / gmpy2.sqrt(t * t + 1)
                s = t * c
                rq = a[q]
                for i in range(n):
                    x = rp[i]
                    y = rq[i]
                    rp[i] = c * x - s * y
                    rq[i] = s * x + c * y
                for row in a:
                    x = row[p]
                    y = row[q]
                    row[p] = c * x - s * y
                    row[q] = s * x + c * y
                rp[q] = zero
                rq[p] = zero
    else:
        raise NoConvergence("jacobi sweep budget exhausted")
    return tuple(sorted(a[p][p] for p in range(n)))


def eigen_decompose(m: OperatorMatrix, want_vectors: bool = False) -> Spectrum:
    """Eigen decomposition of an operator matrix.

    Machine path checks the residual ||H v - lambda v||_inf against
    1e-12 ||H||_inf per pair.  The high-precision path requires the real
    symmetric Fourier form and returns eigenvalues only.
    """
    if m.is_machine:
        h = np.asarray(m.entries)
        w, v = np.linalg.eigh(h)
        resid = np.abs(h @ v - v * w[None, :]).max(axis=0)
        bound = 1e-12 * np.abs(h).sum(axis=1).max()
        if resid.max() > bound:
            raise NumericalError(
                f"eigen residual {resid.max():.3e} above {bound:.3e}")
        return Spectrum(
            params=m.params,
            eigenvalues=w,
            spacings=_nearest_spacings_np(w),
            precision=m.precision,
            basis=m.basis,
            eigenvectors=v if want_vectors else None,
        )
    if want_vectors:
        raise ValueError("eigenvectors are machine precision only")
    if m.basis is not Basis.FOURIER:
        raise ValueError("high-precision decomposition needs the real "
                         "symmetric momentum form")
    with m.precision.gmpy_context():
        vals = _jacobi_eigenvalues(m.entries, m.precision.digits)
        sp = _nearest_spacings_mp(vals)
    return Spectrum(
        params=m.params,
        eigenvalues=vals,
        spacings=sp,
        precision=m.precision,
        basis=m.basis,
    )


def compute_spectrum(p: HarperParams, ctx: PrecisionContext = MACHINE,
                     want_vectors: bool = False,
                     basis: Optional[Basis] = None) -> Spectrum:
    """Build the Harper matrix and decompose it in one call."""
    if basis is None:
        basis = Basis.FOURIER
    return eigen_decompose(build_harper(p, basis, ctx), want_vectors)


def min_spacing(spectrum: Spectrum):
    """Smallest nearest-neighbor spacing and the index where it occurs.

    Warns when the value sits within 10 digits of the precision floor, in
    which case the pair should be re-resolved at higher precision.
    """
    sp = spectrum.spacings
    if isinstance(sp, np.ndarray):
        idx = int(np.argmin(sp))
    else:
        idx = min(range(len(sp)), key=lambda j: sp[j])
    value = sp[idx]
    scale = max(1.0, max(abs(float(v)) for v in spectrum.eigenvalues))
    if float(value) <= 10.0 ** (-(spectrum.precision.digits - 10)) * scale:
        warnings.warn(
            f"minimum spacing {float(value):.3e} is within 10 digits of the "
            f"{spectrum.precision.digits}-digit working precision",
            PrecisionWarning, stacklevel=2)
    return value, idx


def min_spacing_model(n: int, eps: float) -> float:
    """Baseline minimum-spacing law at b = 0, a = 1.

    eps^((n-1)/2) * 3/n for odd n, eps^((n-2)/2) * 5/n for n = 2 mod 4,
    exactly 0 for n divisible by 4 (the zero pair).  Underflows to 0.0 for
    large n; use min_spacing_model_log10 when only the magnitude matters.
    """
    _validate_model_args(n, eps)
    if n % 4 == 0:
        return 0.0
    if n % 2 == 1:
        return eps ** ((n - 1) // 2) * 3.0 / n
    return eps ** ((n - 2) // 2) * 5.0 / n


def min_spacing_model_log10(n: int, eps: float) -> float:
    """log10 of min_spacing_model, computed without underflow.

    Returns -inf for n divisible by 4.
    """
    _validate_model_args(n, eps)
    if n % 4 == 0:
        return -math.inf
    if n % 2 == 1:
        return ((n - 1) // 2) * math.log10(eps) + math.log10(3.0 / n)
    return ((n - 2) // 2) * math.log10(eps) + math.log10(5.0 / n)


def required_digits(n: int, eps: float) -> int:
    """Decimal digits needed to resolve the modeled minimum spacing,
    with a 10 digit margin."""
    lg = min_spacing_model_log10(n, eps)
    if lg == -math.inf:
        raise ValueError("spacing is exactly zero for n divisible by 4; "
                         "no finite precision resolves it")
    return max(15, int(math.ceil(-lg)) + 10)


def _validate_model_args(n, eps):
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")
    if not 0.0 < eps <= 1.0:
        raise ValueError("model holds for 0 < eps <= 1")


def _transfer_terms_machine(x, eps, n):
    """Transfer product trace f(x) and derivative f'(x), float64."""
    cs = np.cos(TWO_PI * np.arange(n) / n)
    m00, m01, m10, m11 = 1.0, 0.0, 0.0, 1.0
    d00, d01, d10, d11 = 0.0, 0.0, 0.0, 0.0
    for j in range(n):
        d = x - 2.0 * eps * cs[j]
        t00 = d * m00 - m10
        t01 = d * m01 - m11
        e00 = m00 + d * d00 - d10
        e01 = m01 + d * d01 - d11
        m10, m11 = m00, m01
        d10, d11 = d00, d01
        m00, m01 = t00, t01
        d00, d01 = e00, e01
    return m00 + m11, d00 + d11


def _transfer_terms_mp(x, eps, n):
    """Same as the machine variant on gmpy2 reals (context set by caller)."""
    twopi = 2 * gmpy2.const_pi()
    one = gmpy2.mpfr(1)
    zero = gmpy2.mpfr(0)
    m00, m01, m10, m11 = one, zero, zero, one
    d00, d01, d10, d11 = zero, zero, zero, zero
    two_eps = 2 * eps
    for j in range(n):
        d = x - two_eps * gmpy2.cos(twopi * j / n)
        t00 = d * m00 - m10
        t01 = d * m01 - m11
        e00 = m00 + d * d00 - d10
        e01 = m01 + d * d01 - d11
        m10, m11 = m00, m01
        d10, d11 = d00, d01
        m00, m01 = t00, t01
        d00, d01 = e00, e01
    return m00 + m11, d00 + d11


def charpoly_eval(p: HarperParams, x, ctx: PrecisionContext = MACHINE) -> CharPolyEvaluation:
    """Evaluate det[x 1 - 2 h(1, b, eps)] = f(x) - 2 cos(n b).

    Requires a = 1; rescale other amplitudes before calling.  f is the trace
    of the ordered product of 2x2 transfer matrices and does not depend on b.
    """
    if p.a != 1.0:
        raise ValueError("characteristic polynomial route fixes a = 1; "
                         "rescale the operator first")
    if ctx.is_machine:
        f, _ = _transfer_terms_machine(float(x), p.eps, p.n)
        value = f - 2.0 * math.cos(p.n * p.b)
        return CharPolyEvaluation(p, float(x), value, f, ctx)
    with ctx.gmpy_context():
        xm = gmpy2.mpfr(x)
        f, _ = _transfer_terms_mp(xm, gmpy2.mpfr(p.eps), p.n)
        value = f - 2 * gmpy2.cos(p.n * gmpy2.mpfr(p.b))
    return CharPolyEvaluation(p, xm, value, f, ctx)


def _bisect_sign_change(fn, lo, hi, slo, tol):
    """Root of fn on [lo, hi] given sign(fn(lo)) = slo != sign(fn(hi))."""
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if mid <= lo or mid >= hi:
            break
        sm = gmpy2.sign(fn(mid))
        if sm == 0:
            return mid
        if sm == slo:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def refine_pair(p: HarperParams, seed_low, seed_high,
                ctx: PrecisionContext) -> Tuple:
    """Resolve a nearly degenerate eigenvalue pair from the polynomial side.

    The seeds (eigenvalues of h, typically machine values widened a little)
    must bracket the pair, with the polynomial holding one sign at both seeds
    and the opposite sign at the interior extremum.  Bisects the derivative
    to locate the extremum, then each flank for its root, all in gmpy2
    arithmetic at the context precision.

    Returns the two refined eigenvalues of h, ascending.  Raises
    NoSplitDetected if the polynomial does not change sign at the extremum,
    i.e. the pair is unresolved at this precision.
    """
    if p.a != 1.0:
        raise ValueError("characteristic polynomial route fixes a = 1; "
                         "rescale the operator first")
    digits = ctx.digits
    with ctx.gmpy_context():
        xlo = 2 * gmpy2.mpfr(seed_low)
        xhi = 2 * gmpy2.mpfr(seed_high)
        if not xlo < xhi:
            raise ValueError("seed_low must be strictly below seed_high")
        eps = gmpy2.mpfr(p.eps)
        shift = 2 * gmpy2.cos(p.n * gmpy2.mpfr(p.b))

        def g(x):
            return _transfer_terms_mp(x, eps, p.n)[0] - shift

        def gp(x):
            return _transfer_terms_mp(x, eps, p.n)[1]

        slo = gmpy2.sign(g(xlo))
        shi = gmpy2.sign(g(xhi))
        if slo == 0 or slo != shi:
            raise ValueError("seeds must bracket the pair with the "
                             "polynomial holding one sign at both ends")
        dlo = gmpy2.sign(gp(xlo))
        dhi = gmpy2.sign(gp(xhi))
        if dlo == 0 or dhi == 0 or dlo == dhi:
            raise ValueError("no interior extremum between the seeds")

        span = max(abs(xlo), abs(xhi), gmpy2.mpfr(1))
        tol_ext = gmpy2.mpfr(10) ** (-(digits + 5)) * span
        lo, hi = xlo, xhi
        while hi - lo > tol_ext:
            mid = (lo + hi) / 2
            if mid <= lo or mid >= hi:
                break
            sm = gmpy2.sign(gp(mid))
            if sm == 0:
                break
            if sm == dlo:
                lo = mid
            else:
                hi = mid
        xstar = (lo + hi) / 2

        gstar = g(xstar)
        if gstar == 0 or gmpy2.sign(gstar) == slo:
            raise NoSplitDetected(
                f"polynomial does not change sign at the extremum; pair "
                f"unresolved at {digits} digits")

        tol_root = gmpy2.mpfr(10) ** (-(digits + 3)) * span
        r1 = _bisect_sign_change(g, xlo, xstar, slo, tol_root)
        r2 = _bisect_sign_change(g, xstar, xhi, -slo, tol_root)
        return (r1 / 2, r2 / 2)


def determinant(p: HarperParams, ctx: PrecisionContext = MACHINE) -> Tuple:
    """det h(1, 0, eps) via the periodic transfer trace and in closed form.

    Requires b = 0 and a = 1 (general a rescales as a^n at the call site).
    Returns (molinari, closed_form): the trace route gives
    det[2h] = tr prod_j [[2 eps cos(2 pi j / n), -1], [1, 0]] + (-1)^(n-1) 2,
    divided by 2^n; the closed form is 0 for n = 0 mod 4,
    2^(1-n) (1 + eps^n) for odd n and -2^(2-n) (1 + eps^n) for n = 2 mod 4.
    """
    if p.b != 0.0:
        raise ValueError("determinant route requires b = 0")
    if p.a != 1.0:
        raise ValueError("determinant route fixes a = 1; general a scales "
                         "the result by a^n")
    n = p.n
    corner = 2.0 if n % 2 == 1 else -2.0
    if ctx.is_machine:
        f, _ = _transfer_terms_machine(0.0, -p.eps, n)
        # f(0) with eps negated equals tr prod [[+2 eps cos, -1],[1, 0]]
        molinari = (f + corner) / 2.0 ** n
        if n % 4 == 0:
            closed = 0.0
        elif n % 2 == 1:
            closed = 2.0 ** (1 - n) * (1.0 + p.eps ** n)
        else:
            closed = -(2.0 ** (2 - n)) * (1.0 + p.eps ** n)
        return molinari, closed
    with ctx.gmpy_context():
        f, _ = _transfer_terms_mp(gmpy2.mpfr(0), -gmpy2.mpfr(p.eps), n)
        molinari = (f + corner) / gmpy2.mpfr(2) ** n
        eps = gmpy2.mpfr(p.eps)
        if n % 4 == 0:
            closed = gmpy2.mpfr(0)
        elif n % 2 == 1:
            closed = gmpy2.mpfr(2) ** (1 - n) * (1 + eps ** n)
        else:
            closed = -(gmpy2.mpfr(2) ** (2 - n)) * (1 + eps ** n)
        return molinari, closed


def separatrix_energies(p: HarperParams) -> Tuple[float, float]:
    """(E_minus, E_plus) = -/+(|a| - |eps|), the librating region edges."""
    if p.a * p.eps == 0.0 or abs(p.a) == abs(p.eps):
        warnings.warn("separatrix is degenerate for a*eps = 0 or |a| = |eps|",
                      UserWarning, stacklevel=2)
    d = abs(p.a) - abs(p.eps)
    return (-d, d)
