"""Operators for the quantized Harper model on a periodic lattice.

The model lives on n sites with hbar = 2*pi/n.  All matrices are assembled
from clock and shift products rather than by filling a banded template, so the
cyclic corner terms and the small-n collisions (at n = 2 the superdiagonal and
the corner land on the same entry) come out right without special cases.

Machine precision uses numpy.  Anything above 16 digits uses gmpy2 reals,
with complex values stored as gmpy2.mpc (a pair of arbitrary-precision reals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import gmpy2
import numpy as np

TWO_PI = 2.0 * math.pi

TRIG_KINDS = ("cos_phi", "sin_phi", "cos_p", "sin_p")


class Basis(Enum):
    """Representation a matrix is written in."""

    CONVENTIONAL = "conventional"  # angle (site) representation
    FOURIER = "fourier"            # momentum representation


@dataclass(frozen=True)
class PrecisionContext:
    """Requested working precision in decimal digits.

    digits of 15 or 16 run on float64/complex128; 17 and up run on gmpy2
    with 10 guard digits on top of the request.
    """

    digits: int = 16

    def __post_init__(self):
        if int(self.digits) != self.digits or self.digits < 15:
            raise ValueError("precision must be an integer >= 15 digits")

    @property
    def is_machine(self) -> bool:
        return self.digits <= 16

    @property
    def working_bits(self) -> int:
        return int(math.ceil((self.digits + 10) * math.log2(10)))

    def gmpy_context(self):
        """Context manager activating this precision for gmpy2 arithmetic."""
        return gmpy2.context(precision=self.working_bits)


MACHINE = PrecisionContext(16)


@dataclass(frozen=True)
class HarperParams:
    """Parameters of h = a*cos(p - b) + eps*cos(phi) on an n-site lattice."""

    n: int
    a: float = 1.0
    b: float = 0.0
    eps: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("n must be an integer >= 2")

    @property
    def hbar(self) -> float:
        return TWO_PI / self.n


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator tagged with its basis and precision.

    entries is a read-only ndarray on the machine path and a tuple of row
    tuples of gmpy2 numbers on the high-precision path.  params is filled in
    by build_harper so spectra can carry their origin around.
    """

    n: int
    basis: Basis
    precision: PrecisionContext
    entries: object
    params: Optional[HarperParams] = None

    @property
    def is_machine(self) -> bool:
        return self.precision.is_machine


def _check_n(n):
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")


def _freeze(arr):
    arr.setflags(write=False)
    return arr


def _shift_entries(n):
    """X[(j+1) % n, j] = 1: subdiagonal plus the top-right corner."""
    x = np.zeros((n, n))
    for j in range(n):
        x[(j + 1) % n, j] = 1.0
    return x


def build_shift(n, ctx=MACHINE) -> OperatorMatrix:
    """Cyclic shift X with X Z = w^-1 Z X and X^n = 1.

    Entries are exact integers, so the same ndarray serves both precision
    paths.
    """
    _check_n(n)
    return OperatorMatrix(n, Basis.CONVENTIONAL, ctx, _freeze(_shift_entries(n)))


def build_clock(n, ctx=MACHINE) -> OperatorMatrix:
    """Clock matrix Z = diag(w^j), w = exp(2*pi*i/n)."""
    _check_n(n)
    if ctx.is_machine:
        z = np.diag(np.exp(2j * np.pi * np.arange(n) / n))
        return OperatorMatrix(n, Basis.CONVENTIONAL, ctx, _freeze(z))
    with ctx.gmpy_context():
        twopi = 2 * gmpy2.const_pi()
        zero = gmpy2.mpc(0)
        rows = []
        for j in range(n):
            ang = twopi * j / n
            wj = gmpy2.mpc(gmpy2.cos(ang), gmpy2.sin(ang))
            rows.append(tuple(wj if k == j else zero for k in range(n)))
    return OperatorMatrix(n, Basis.CONVENTIONAL, ctx, tuple(rows))


def build_fourier(n, ctx=MACHINE) -> OperatorMatrix:
    """Discrete Fourier matrix Q[j, k] = w^(j k) / sqrt(n).

    Satisfies Z = Q X Q+, so Q maps the momentum representation onto the
    angle representation.
    """
    _check_n(n)
    if ctx.is_machine:
        j = np.arange(n)
        q = np.exp(2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)
        return OperatorMatrix(n, Basis.CONVENTIONAL, ctx, _freeze(q))
    with ctx.gmpy_context():
        twopi = 2 * gmpy2.const_pi()
        root = gmpy2.sqrt(gmpy2.mpfr(n))
        rows = []
        for j in range(n):
            row = []
            for k in range(n):
                ang = twopi * ((j * k) % n) / n
                row.append(gmpy2.mpc(gmpy2.cos(ang), gmpy2.sin(ang)) / root)
            rows.append(tuple(row))
    return OperatorMatrix(n, Basis.CONVENTIONAL, ctx, tuple(rows))


def build_parity(n) -> OperatorMatrix:
    """Parity P: site j -> -j mod n.  P^2 = 1, P Z P = Z+, P X P = X+."""
    _check_n(n)
    p = np.zeros((n, n))
    for j in range(n):
        p[j, (-j) % n] = 1.0
    return OperatorMatrix(n, Basis.CONVENTIONAL, MACHINE, _freeze(p))


def build_trig(n, kind, ctx=MACHINE) -> OperatorMatrix:
    """One of cos_phi, sin_phi, cos_p, sin_p as a Hermitian matrix.

    cos_phi = (Z + Z+)/2        sin_phi = (Z - Z+)/(2i)
    cos_p   = (X + X+)/2        sin_p   = (X+ - X)/(2i)
    """
    _check_n(n)
    if kind not in TRIG_KINDS:
        raise ValueError(f"kind must be one of {TRIG_KINDS}")
    if ctx.is_machine:
        if kind in ("cos_phi", "sin_phi"):
            z = np.exp(2j * np.pi * np.arange(n) / n)
            d = z.real if kind == "cos_phi" else z.imag
            m = np.diag(d).astype(complex)
        else:
            x = _shift_entries(n)
            if kind == "cos_p":
                m = ((x + x.T) / 2).astype(complex)
            else:
                # (X+ - X)/(2i) is purely imaginary and antisymmetric
                m = (x.T - x) / 2j
        return OperatorMatrix(n, Basis.CONVENTIONAL, ctx, _freeze(m))
    with ctx.gmpy_context():
        twopi = 2 * gmpy2.const_pi()
        zero = gmpy2.mpc(0)
        half = gmpy2.mpfr(1) / 2
        rows = [[zero] * n for _ in range(n)]
        if kind in ("cos_phi", "sin_phi"):
            fn = gmpy2.cos if kind == "cos_phi" else gmpy2.sin
            for j in range(n):
                rows[j][j] = gmpy2.mpc(fn(twopi * j / n))
        else:
            for j in range(n):
                i = (j + 1) % n
                # X has a 1 at [i, j]; X+ at [j, i]
                if kind == "cos_p":
                    rows[i][j] = rows[i][j] + gmpy2.mpc(half)
                    rows[j][i] = rows[j][i] + gmpy2.mpc(half)
                else:
                    rows[i][j] = rows[i][j] + gmpy2.mpc(0, half)
                    rows[j][i] = rows[j][i] + gmpy2.mpc(0, -half)
    return OperatorMatrix(n, Basis.CONVENTIONAL, ctx, tuple(tuple(r) for r in rows))


def build_harper(p: HarperParams, basis=Basis.CONVENTIONAL, ctx=MACHINE) -> OperatorMatrix:
    """Harper matrix h = a*cos(p - b) + eps*cos(phi).

    Conventional basis: (a/2) e^{ib} X + (a/2) e^{-ib} X+ + (eps/2)(Z + Z+),
    complex Hermitian.  Fourier basis: real symmetric with diagonal
    a*cos(2*pi*k/n - b) and eps/2 on the cyclic off-diagonals.  The matrix is
    traceless in either form.
    """
    n = p.n
    if ctx.is_machine:
        if basis is Basis.CONVENTIONAL:
            x = _shift_entries(n)
            diag = p.eps * np.cos(TWO_PI * np.arange(n) / n)
            h = (p.a / 2) * np.exp(1j * p.b) * x \
                + (p.a / 2) * np.exp(-1j * p.b) * x.T \
                + np.diag(diag).astype(complex)
        else:
            s = _shift_entries(n)
            diag = p.a * np.cos(TWO_PI * np.arange(n) / n - p.b)
            h = np.diag(diag) + (p.eps / 2) * (s + s.T)
        return OperatorMatrix(n, basis, ctx, _freeze(h), params=p)

    with ctx.gmpy_context():
        twopi = 2 * gmpy2.const_pi()
        a = gmpy2.mpfr(p.a)
        b = gmpy2.mpfr(p.b)
        eps = gmpy2.mpfr(p.eps)
        if basis is Basis.FOURIER:
            zero = gmpy2.mpfr(0)
            rows = [[zero] * n for _ in range(n)]
            for k in range(n):
                rows[k][k] = a * gmpy2.cos(twopi * k / n - b)
            half_eps = eps / 2
            for j in range(n):
                i = (j + 1) % n
                rows[i][j] = rows[i][j] + half_eps
                rows[j][i] = rows[j][i] + half_eps
        else:
            zero = gmpy2.mpc(0)
            rows = [[zero] * n for _ in range(n)]
            fwd = gmpy2.mpc(gmpy2.cos(b), gmpy2.sin(b)) * a / 2
            for j in range(n):
                i = (j + 1) % n
                rows[i][j] = rows[i][j] + fwd
                rows[j][i] = rows[j][i] + gmpy2.mpc(fwd.real, -fwd.imag)
            for j in range(n):
                rows[j][j] = rows[j][j] + gmpy2.mpc(eps * gmpy2.cos(twopi * j / n))
        entries = tuple(tuple(r) for r in rows)
    return OperatorMatrix(n, basis, ctx, entries, params=p)
