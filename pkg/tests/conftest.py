"""Session-scoped caches for the expensive drift computations.

The longest schedules (T/hbar = 5000, around 4096 steps after refinement)
take a few seconds each; several test modules share the converged reports
through these fixtures rather than recomputing.
"""

import math

import pytest

from harperdrift.drift import DriftSchedule, refine_until_converged

HBAR_49 = 2 * math.pi / 49
DELTA_B = 10 * math.pi / 49


def shift_drift_schedule(t_over_hbar):
    return DriftSchedule(n=49, a=1.0, b0=0.0, b1=DELTA_B,
                         eps0=0.5, eps1=0.5,
                         duration_T=t_over_hbar * HBAR_49)


def growth_drift_schedule(t_over_hbar):
    # growing resonance: eps widens while b drifts the same five periods
    return DriftSchedule(n=49, a=1.0, b0=0.0, b1=DELTA_B,
                         eps0=0.3, eps1=0.7,
                         duration_T=t_over_hbar * HBAR_49)


@pytest.fixture(scope="session")
def shift_drift_reports():
    return {t: refine_until_converged(shift_drift_schedule(t), tol=1e-4)
            for t in (20, 500, 5000)}


@pytest.fixture(scope="session")
def growth_drift_reports():
    return {t: refine_until_converged(growth_drift_schedule(t), tol=1e-4)
            for t in (500, 5000)}
