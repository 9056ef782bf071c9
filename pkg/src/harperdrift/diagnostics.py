"""Adiabaticity numbers for a linear parameter drift.

All functions take a schedule object with fields n, a, b0, b1, eps0, eps1
and duration_T (see drift.DriftSchedule), but only attribute access is
assumed.  Epsilon enters through its midpoint value, which is exact for
constant-eps schedules.  Rates are reported as magnitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .operators import HarperParams
from .spectral import separatrix_energies


def _eps_mid(s):
    return 0.5 * (s.eps0 + s.eps1)


def _check_duration(s):
    if s.duration_T <= 0:
        raise ValueError("diagnostics need duration_T > 0")


def omega0(s) -> float:
    """Small-oscillation frequency sqrt(a eps) at the well bottom."""
    prod = s.a * _eps_mid(s)
    if prod <= 0:
        raise ValueError("omega0 needs a * eps > 0")
    return math.sqrt(prod)


def beta_ad(s) -> float:
    """Classical adiabaticity ratio |db/dt| / (a eps)."""
    _check_duration(s)
    prod = s.a * _eps_mid(s)
    if prod <= 0:
        raise ValueError("beta_ad needs a * eps > 0")
    return abs(s.b1 - s.b0) / s.duration_T / prod


def gamma_q_ad(s) -> float:
    """Quantum adiabaticity ratio n |delta b| / (2 pi^2 eps T)."""
    _check_duration(s)
    em = _eps_mid(s)
    if em <= 0:
        raise ValueError("gamma_q_ad needs eps > 0")
    return s.n * abs(s.b1 - s.b0) / (2 * math.pi ** 2 * em * s.duration_T)


def v_res(s) -> float:
    """Phase-space area enclosed by the separatrix, pendulum estimate."""
    em = _eps_mid(s)
    if s.a * em <= 0:
        raise ValueError("v_res needs a * eps > 0")
    return 16.0 * math.sqrt(em / s.a)


def vdot_res(s) -> float:
    _check_duration(s)
    return 8.0 * abs(s.eps1 - s.eps0) / s.duration_T / omega0(s)


def vdot_plus(s) -> float:
    _check_duration(s)
    return 2 * math.pi * abs(s.b1 - s.b0) / s.duration_T


class CaptureProbability(NamedTuple):
    raw: float
    clamped: float


def capture_probability(s) -> CaptureProbability:
    """Resonance capture probability from the area-growth ratio.

    raw = (deps/dt / db/dt) * 4 / (pi sqrt(eps a)); the raw value keeps its
    sign, the clamped one lives in [0, 1].  A schedule with db/dt = 0 is
    rejected: the formula is undefined there, and capture with certainty is
    deliberately not assumed.
    """
    _check_duration(s)
    db = s.b1 - s.b0
    if db == 0:
        raise ValueError("capture probability undefined for db/dt = 0")
    w0 = omega0(s)
    raw = (s.eps1 - s.eps0) / db * 4.0 / (math.pi * w0)
    return CaptureProbability(raw, min(max(raw, 0.0), 1.0))


def alpha_estimate(s) -> float:
    """Relative approach rate of two crossing levels during a b drift."""
    _check_duration(s)
    return 4.0 * (abs(s.a) + abs(_eps_mid(s))) / math.pi \
        * abs(s.b1 - s.b0) / s.duration_T


def lz_probability(gap_2a: float, alpha: float, hbar: float) -> float:
    """Diabatic transition probability exp(-2 pi Gamma) at an avoided
    crossing with minimum separation gap_2a approached at rate alpha."""
    if gap_2a < 0:
        raise ValueError("gap must be non-negative")
    if alpha <= 0 or hbar <= 0:
        raise ValueError("alpha and hbar must be positive")
    gamma = (0.5 * gap_2a) ** 2 / (hbar * alpha)
    return math.exp(-2 * math.pi * gamma)


def de_min_half(s) -> float:
    """Gap size whose diabatic transition probability is exactly 1/2.

    Inverts the exponential law at P = 1/2 for the schedule's approach
    rate, so lz_probability(de_min_half(s), alpha_estimate(s), hbar)
    returns 0.5 identically.
    """
    hbar = 2 * math.pi / s.n
    return 2.0 * math.sqrt(hbar * alpha_estimate(s) * math.log(2) / (2 * math.pi))


@dataclass(frozen=True)
class DiagnosticsBundle:
    omega0: Optional[float]
    beta_ad: Optional[float]
    gamma_q_ad: Optional[float]
    p_capture_raw: Optional[float]
    p_capture: Optional[float]
    alpha: Optional[float]
    de_min_half: Optional[float]
    v_res: Optional[float]
    vdot_res: Optional[float]
    vdot_plus: Optional[float]


def bundle(s) -> DiagnosticsBundle:
    """Evaluate every diagnostic, recording None where one is undefined
    for this schedule (zero b drift, non-positive a*eps, ...)."""

    def maybe(f):
        try:
            return f(s)
        except ValueError:
            return None

    cap = maybe(capture_probability)
    return DiagnosticsBundle(
        omega0=maybe(omega0),
        beta_ad=maybe(beta_ad),
        gamma_q_ad=maybe(gamma_q_ad),
        p_capture_raw=None if cap is None else cap.raw,
        p_capture=None if cap is None else cap.clamped,
        alpha=maybe(alpha_estimate),
        de_min_half=maybe(de_min_half),
        v_res=maybe(v_res),
        vdot_res=maybe(vdot_res),
        vdot_plus=maybe(vdot_plus),
    )


@dataclass(frozen=True)
class EnergyGrid:
    p: np.ndarray
    phi: np.ndarray
    energy: np.ndarray
    e_sep: Tuple[float, float]


def classical_energy_grid(p: HarperParams, resolution: int) -> EnergyGrid:
    """H(p, phi) = a cos(p - b) + eps cos(phi) over [-pi, pi]^2.

    energy[i, j] holds H(p[i], phi[j]); the separatrix pair is attached
    for contour overlays.
    """
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    pv = np.linspace(-math.pi, math.pi, resolution)
    phiv = np.linspace(-math.pi, math.pi, resolution)
    energy = p.a * np.cos(pv[:, None] - p.b) + p.eps * np.cos(phiv[None, :])
    for arr in (pv, phiv, energy):
        arr.setflags(write=False)
    return EnergyGrid(pv, phiv, energy, separatrix_energies(p))
