"""Time-ordered propagation under linearly drifting parameters.

The propagator is the ordered product of exact exponentials of the midpoint
Hamiltonian on each sub-interval (a second-order Magnus step).  Everything
runs in the momentum basis, where the operator is real symmetric, so the
endpoint eigenbases used for transition amplitudes are real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from . import diagnostics
from .errors import NoConvergence, RegionOverlap, UnitarityLoss
from .operators import MACHINE, Basis, HarperParams, OperatorMatrix
from .spectral import Spectrum, compute_spectrum, separatrix_energies

UNITARITY_TOL = 1e-10

# polar re-orthonormalization cadence during long products
_ORTHO_EVERY = 8192
_CHUNK = 2048


@dataclass(frozen=True)
class DriftSchedule:
    """Linear path (b0, eps0) -> (b1, eps1) traversed in time duration_T."""

    n: int
    a: float = 1.0
    b0: float = 0.0
    b1: float = 0.0
    eps0: float = 0.0
    eps1: float = 0.0
    duration_T: float = 0.0
    steps: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension n must be at least 2")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if not self.duration_T >= 0:
            raise ValueError("duration_T must be non-negative")

    @property
    def hbar(self) -> float:
        return 2 * math.pi / self.n

    @property
    def duration_over_hbar(self) -> float:
        return self.duration_T / self.hbar

    def params_at(self, frac: float) -> HarperParams:
        return HarperParams(
            self.n,
            a=self.a,
            b=self.b0 + (self.b1 - self.b0) * frac,
            eps=self.eps0 + (self.eps1 - self.eps0) * frac,
        )

    def time_reversed(self) -> "DriftSchedule":
        return replace(self, b0=self.b1, b1=self.b0,
                       eps0=self.eps1, eps1=self.eps0)


class RegionLabel(Enum):
    librating_lower = "librating_lower"
    circulating = "circulating"
    librating_upper = "librating_upper"


REGION_ORDER = (RegionLabel.librating_lower, RegionLabel.circulating,
                RegionLabel.librating_upper)


@dataclass(frozen=True)
class Convergence:
    steps: int
    delta: Optional[float] = None


@dataclass(frozen=True)
class TransitionReport:
    schedule: DriftSchedule
    amplitudes: np.ndarray
    labels_init: List[RegionLabel]
    labels_final: List[RegionLabel]
    boundary_init: Tuple[int, int]
    boundary_final: Tuple[int, int]
    region_probs: np.ndarray
    diagnostics: diagnostics.DiagnosticsBundle
    convergence: Convergence


def _check_region_validity(s: DriftSchedule):
    # eps(t) is linear, so its extremes sit at the endpoints
    if max(abs(s.eps0), abs(s.eps1)) >= abs(s.a):
        raise RegionOverlap(
            "|eps| must stay below |a| for the region picture to hold")


def _fourier_batch(s: DriftSchedule, fracs: np.ndarray) -> np.ndarray:
    """Stack of momentum-basis Hamiltonians at the given path fractions."""
    n = s.n
    b = s.b0 + (s.b1 - s.b0) * fracs
    eps = s.eps0 + (s.eps1 - s.eps0) * fracs
    k = 2 * np.pi * np.arange(n) / n
    h = np.zeros((len(fracs), n, n))
    h[:, np.arange(n), np.arange(n)] = s.a * np.cos(k[None, :] - b[:, None])
    half = 0.5 * eps
    for j in range(n):
        jj = (j + 1) % n
        h[:, j, jj] += half
        h[:, jj, j] += half
    return h


def _polar(u: np.ndarray) -> np.ndarray:
    v, _, wh = np.linalg.svd(u)
    return v @ wh


def unitarity_defect(u: np.ndarray) -> float:
    n = u.shape[0]
    return float(np.max(np.abs(u.conj().T @ u - np.eye(n))))


def propagate(s: DriftSchedule) -> OperatorMatrix:
    """Ordered product of midpoint-exponential factors over s.steps."""
    _check_region_validity(s)
    n = s.n
    dt = s.duration_T / s.steps
    u = np.eye(n, dtype=complex)
    done = 0
    for start in range(0, s.steps, _CHUNK):
        stop = min(start + _CHUNK, s.steps)
        fracs = (np.arange(start, stop) + 0.5) / s.steps
        w, v = np.linalg.eigh(_fourier_batch(s, fracs))
        phases = np.exp(-1j * w * (dt / s.hbar))
        for i in range(stop - start):
            u = (v[i] * phases[i]) @ v[i].T @ u
            done += 1
            if done % _ORTHO_EVERY == 0:
                u = _polar(u)
    if unitarity_defect(u) > UNITARITY_TOL:
        u = _polar(u)
        defect = unitarity_defect(u)
        if defect > UNITARITY_TOL:
            raise UnitarityLoss(f"propagator defect {defect:.3e}")
    u.setflags(write=False)
    return OperatorMatrix(n=n, basis=Basis.FOURIER, precision=MACHINE,
                          entries=u, params=None)


def classify_regions(spec: Spectrum) -> Tuple[List[RegionLabel], Tuple[int, int]]:
    """Label every level by classical region; ties go to circulating.

    Also returns the indices of the levels nearest the lower and upper
    separatrix energies.
    """
    p = spec.params
    if p is None:
        raise ValueError("spectrum carries no parameters")
    if abs(p.eps) >= abs(p.a):
        raise RegionOverlap("no circulating region once |eps| >= |a|")
    if p.a * p.eps == 0:
        raise ValueError("separatrix undefined when a*eps = 0")
    lo, hi = separatrix_energies(p)
    w = np.asarray([float(x) for x in spec.eigenvalues])
    labels = []
    for lam in w:
        if lam < lo:
            labels.append(RegionLabel.librating_lower)
        elif lam > hi:
            labels.append(RegionLabel.librating_upper)
        else:
            labels.append(RegionLabel.circulating)
    boundary = (int(np.argmin(np.abs(w - lo))), int(np.argmin(np.abs(w - hi))))
    return labels, boundary


def _region_probs(amps, labels0, labels1) -> np.ndarray:
    sq = amps ** 2
    probs = np.zeros((3, 3))
    for r, lab0 in enumerate(REGION_ORDER):
        rows = [i for i, l in enumerate(labels0) if l is lab0]
        if not rows:
            continue
        for c, lab1 in enumerate(REGION_ORDER):
            cols = [j for j, l in enumerate(labels1) if l is lab1]
            if cols:
                probs[r, c] = sq[np.ix_(rows, cols)].sum() / len(rows)
    return probs


def transition_matrix(s: DriftSchedule, u=None) -> TransitionReport:
    """Magnitudes |<final_j| U |initial_i>| with endpoint bases sorted
    ascending in energy, plus region-block aggregates.

    Individual entries inside a nearly degenerate pair depend on the
    eigensolver's arbitrary rotation; only block sums are contractual.
    """
    if u is None:
        u = propagate(s)
    um = np.asarray(u.entries if isinstance(u, OperatorMatrix) else u)
    s0 = compute_spectrum(s.params_at(0.0), want_vectors=True,
                          basis=Basis.FOURIER)
    s1 = compute_spectrum(s.params_at(1.0), want_vectors=True,
                          basis=Basis.FOURIER)
    amps = np.abs(s1.eigenvectors.T @ um @ s0.eigenvectors).T
    labels0, bound0 = classify_regions(s0)
    labels1, bound1 = classify_regions(s1)
    probs = _region_probs(amps, labels0, labels1)
    for arr in (amps, probs):
        arr.setflags(write=False)
    return TransitionReport(
        schedule=s,
        amplitudes=amps,
        labels_init=labels0,
        labels_final=labels1,
        boundary_init=bound0,
        boundary_final=bound1,
        region_probs=probs,
        diagnostics=diagnostics.bundle(s),
        convergence=Convergence(s.steps),
    )


def refine_until_converged(s: DriftSchedule, tol: float = 1e-4,
                           max_doublings: int = 12) -> TransitionReport:
    """Double the step count until the amplitude matrix stops moving.

    Convergence means the max entrywise change between successive
    refinements drops below tol; the achieved step count and final delta
    are recorded in the report.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    steps = max(64, s.steps)
    prev = transition_matrix(replace(s, steps=steps))
    for _ in range(max_doublings):
        steps *= 2
        cur = transition_matrix(replace(s, steps=steps))
        delta = float(np.max(np.abs(cur.amplitudes - prev.amplitudes)))
        if delta < tol:
            return replace(cur, convergence=Convergence(steps, delta))
        prev = cur
    raise NoConvergence(
        f"amplitudes still moving after {max_doublings} doublings "
        f"({steps} steps)")
