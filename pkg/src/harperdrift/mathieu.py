"""Mathieu characteristic values and the pendulum-side spectral comparison.

Only the pi-periodic families a_2m, b_2m enter: they are the continuum
analog of the operator's well states.  Characteristics come from truncated
Fourier-coefficient recurrence matrices, which keeps the convergence test
(a plain truncation doubling) uniform in q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import NotConverged
from .spectral import Spectrum

_DOUBLING_BUDGET = 8
_STABILITY_TOL = 1e-10


@dataclass(frozen=True)
class MathieuCharacteristics:
    q: float
    a_even: Tuple[float, ...]     # a_0, a_2, ..., a_{2 m_max}
    b_even: Tuple[float, ...]     # b_2, ..., b_{2 m_max}
    truncation_R: int
    converged: bool

    def merged(self) -> np.ndarray:
        """Both families in one ascending list."""
        return np.sort(np.concatenate([self.a_even, self.b_even]))


def _families_at(q: float, m_max: int, r: int) -> Tuple[np.ndarray, np.ndarray]:
    # even family: rows r=0..R over cosine coefficients; the r=0 row is
    # rescaled by sqrt(2) to keep the matrix symmetric
    even = np.zeros((r + 1, r + 1))
    even[np.arange(1, r + 1), np.arange(1, r + 1)] = (2 * np.arange(1, r + 1)) ** 2
    even[0, 1] = even[1, 0] = math.sqrt(2) * q
    idx = np.arange(1, r)
    even[idx, idx + 1] = even[idx + 1, idx] = q
    # odd family: rows r=1..R over sine coefficients
    odd = np.zeros((r, r))
    odd[np.arange(r), np.arange(r)] = (2 * np.arange(1, r + 1)) ** 2
    idx = np.arange(r - 1)
    odd[idx, idx + 1] = odd[idx + 1, idx] = q
    wa = np.linalg.eigvalsh(even)[:m_max + 1]
    wb = np.linalg.eigvalsh(odd)[:m_max]
    return wa, wb


def auto_truncation(q: float, m_max: int) -> int:
    return max(3 * m_max, math.ceil(2 * math.sqrt(q))) + 10


def mathieu_characteristics(q: float, m_max: int,
                            R: Optional[int] = None) -> MathieuCharacteristics:
    """Characteristics a_0..a_{2 m_max} and b_2..b_{2 m_max}.

    With R omitted the truncation grows from an automatic guess until a
    doubling moves no value by more than 1e-10; an explicit R gets exactly
    one doubling test.  Either way NotConverged is raised when the budget
    runs out.
    """
    if q < 0:
        raise ValueError("q must be non-negative")
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    budget = _DOUBLING_BUDGET if R is None else 1
    r = auto_truncation(q, m_max) if R is None else R
    if r < m_max + 1:
        raise ValueError("truncation too small for requested m_max")
    wa, wb = _families_at(q, m_max, r)
    for _ in range(budget):
        wa2, wb2 = _families_at(q, m_max, 2 * r)
        delta = max(np.max(np.abs(wa2 - wa)), np.max(np.abs(wb2 - wb)))
        if delta < _STABILITY_TOL:
            return MathieuCharacteristics(q, tuple(wa2), tuple(wb2),
                                          2 * r, True)
        r, wa, wb = 2 * r, wa2, wb2
    raise NotConverged(f"characteristics unstable at truncation {r}")


def q_from_eps(eps: float, n: int) -> float:
    """Potential strength mapped onto the Mathieu perturbation parameter."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    return eps * (n / math.pi) ** 2


def scale_to_harper(lam: float, n: int, c: float = 0.0) -> float:
    """Mathieu characteristic mapped onto the operator's energy axis."""
    if n < 2:
        raise ValueError("dimension n must be at least 2")
    return 0.5 * lam * (math.pi / n) ** 2 + c


def _nearest_spacings(vals: np.ndarray) -> np.ndarray:
    d = np.diff(vals)
    left = np.concatenate(([np.inf], d))
    right = np.concatenate((d, [np.inf]))
    return np.minimum(left, right)


@dataclass(frozen=True)
class MathieuComparison:
    n: int
    q: float
    c_offset: float
    harper_eigenvalues: np.ndarray
    mathieu_scaled: np.ndarray
    differences: np.ndarray
    harper_spacings: np.ndarray
    mathieu_spacings: np.ndarray

    @property
    def count(self) -> int:
        return len(self.differences)


def align_spectra(harper: Spectrum, chars: MathieuCharacteristics,
                  q_rtol: float = 1e-9) -> MathieuComparison:
    """Anchor the scaled Mathieu levels to the lowest operator level and
    compare index by index from the bottom of both spectra."""
    p = harper.params
    if p is None:
        raise ValueError("harper spectrum carries no parameters")
    if p.a != 1.0 or p.b != 0.0:
        raise ValueError("comparison expects a = 1, b = 0")
    q_expect = q_from_eps(p.eps, p.n)
    if abs(chars.q - q_expect) > q_rtol * max(q_expect, 1.0):
        raise ValueError(
            f"characteristics at q={chars.q:g} do not match eps={p.eps:g}, "
            f"n={p.n} (q={q_expect:g})")
    hvals = np.asarray([float(x) for x in harper.eigenvalues])
    raw = np.asarray([scale_to_harper(lam, p.n) for lam in chars.merged()])
    c = hvals[0] - raw[0]
    count = min(len(hvals), len(raw))
    hv = hvals[:count]
    mv = raw[:count] + c
    out = (hv, mv, mv - hv, _nearest_spacings(hvals)[:count],
           _nearest_spacings(raw)[:count])
    for arr in out:
        arr.setflags(write=False)
    return MathieuComparison(p.n, chars.q, c, *out)
