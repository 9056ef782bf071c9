"""Symmetry residual checks and the randomized validation battery."""

import math
from collections import defaultdict
from dataclasses import replace

import numpy as np
import pytest

from harperdrift.errors import EvenDimension, OddDimension
from harperdrift.operators import HarperParams, PrecisionContext
from harperdrift.spectral import compute_spectrum, min_spacing
from harperdrift.symmetry import (
    ALL_CHECKS,
    check_commutator,
    check_distinctness,
    check_even_n,
    check_fourier_duality,
    check_half_lattice_reflection,
    check_odd_n,
    check_reflection,
    check_shift_by_lattice,
    check_stationarity,
    run_battery,
    run_point,
)


def test_shift_by_lattice_example():
    r = check_shift_by_lattice(HarperParams(7, 1.0, 0.4, 0.3), k=3)
    assert r.passed and r.residual < 1e-12


def test_reflection_example():
    r = check_reflection(HarperParams(6, 1.0, 0.9, 0.5))
    assert r.passed and r.residual < 1e-12


def test_half_lattice_reflection_example_and_limit():
    r = check_half_lattice_reflection(HarperParams(9, 1.0, 0.0, 0.35), delta=0.2, k=1)
    assert r.passed and r.residual < 1e-12
    # delta -> pi/n degenerates into a pure lattice shift
    near = 0.999 * math.pi / 9
    r = check_half_lattice_reflection(HarperParams(9, 1.0, 0.0, 0.35), delta=near, k=2)
    assert r.passed
    with pytest.raises(ValueError):
        check_half_lattice_reflection(HarperParams(9), delta=1.0)


def test_commutator_examples():
    r = check_commutator(HarperParams(9, 1.0, 0.0, 0.4), "even_lattice", k=2)
    assert r.passed and r.residual < 1e-13
    r = check_commutator(HarperParams(8, 1.0, 0.0, 0.4), "odd_lattice", k=0)
    assert r.passed and r.residual < 1e-13
    # short aliases accepted
    assert check_commutator(HarperParams(8), "even", k=1).passed
    with pytest.raises(ValueError):
        check_commutator(HarperParams(8), "sideways", k=0)


def test_fourier_duality_example():
    r = check_fourier_duality(HarperParams(9, 1.0, 0.0, 0.4))
    assert r.passed and r.residual < 1e-12
    with pytest.raises(ValueError):
        check_fourier_duality(HarperParams(9, 1.0, 0.3, 0.4))


def test_even_odd_dimension_gates():
    assert check_even_n(HarperParams(8, 1.0, 0.7, 0.3)).passed
    with pytest.raises(OddDimension):
        check_even_n(HarperParams(9))
    assert check_odd_n(HarperParams(9, 1.0, 0.7, 0.3)).passed
    with pytest.raises(EvenDimension):
        check_odd_n(HarperParams(8))


def test_stationarity_example_and_validation():
    r = check_stationarity(HarperParams(9, 1.0, 0.0, 0.3))
    assert r.passed and r.residual < 1e-10
    # at a half-lattice angle too
    r = check_stationarity(HarperParams(11, 1.0, math.pi / 11, 0.45))
    assert r.passed
    with pytest.raises(ValueError):
        check_stationarity(HarperParams(9, 1.0, 0.123, 0.3))


def test_stationarity_cross_check_finite_difference():
    # central difference of each sorted level across the lattice angle
    p = HarperParams(12, 1.0, 2 * math.pi / 12, 0.4)
    h = 1e-5
    wp = compute_spectrum(replace(p, b=p.b + h)).eigenvalues
    wm = compute_spectrum(replace(p, b=p.b - h)).eigenvalues
    deriv = np.abs(wp - wm) / (2 * h)
    sp = compute_spectrum(p).spacings
    keep = sp > 1e-6 * (abs(p.a) + abs(p.eps))
    assert np.max(deriv[keep]) < 1e-6 * (abs(p.a) + abs(p.eps))


def test_stationarity_off_lattice_slope_is_visible():
    # generic b gives order-one Hellmann-Feynman slopes somewhere
    r = check_stationarity(HarperParams(9, 1.0, 0.0, 0.3), fault=0.13)
    assert not r.passed and r.residual > 1e-3


def test_distinctness_check():
    r = check_distinctness(HarperParams(12, 1.0, 0.0, 0.3))
    assert r.passed and r.residual < 1e-6
    # n divisible by 4 degenerates exactly on the lattice angle
    r = check_distinctness(HarperParams(12, 1.0, 0.0, 0.3), fault=1e-3)
    assert not r.passed and r.residual > 1.0
    # other dimensions stay distinct but the probe still runs
    assert check_distinctness(HarperParams(13, 1.0, 0.0, 0.3)).passed


def test_spacing_is_tightest_at_the_lattice_angle():
    p_lat = HarperParams(9, 1.0, 0.0, 0.3)
    p_off = HarperParams(9, 1.0, 0.37 * math.pi / 9, 0.3)
    v_lat, _ = min_spacing(compute_spectrum(p_lat))
    v_off, _ = min_spacing(compute_spectrum(p_off))
    assert v_off > 3 * v_lat


def test_distinct_spectrum_off_lattice_small_n():
    s = compute_spectrum(HarperParams(5, 1.0, 0.37 * math.pi / 5, 0.3))
    v, _ = min_spacing(s)
    assert v > 1e-8


def test_run_point_default_all_pass():
    reports = run_point(HarperParams(9, 1.0, 0.1, 0.4))
    assert len(reports) == 8
    assert all(r.passed for r in reports)
    # n divisible by 4 picks up the distinctness probe
    assert len(run_point(HarperParams(8, 1.0, 0.1, 0.4))) == 9


def test_battery_all_pass():
    reports = run_battery(seed=1234, count=50)
    assert len(reports) == 10 * 50
    bad = [r for r in reports if not r.passed]
    assert not bad, bad[:3]


def test_battery_negative_control():
    reports = run_battery(seed=99, count=8, fault=1e-3)
    worst = defaultdict(float)
    failed = defaultdict(bool)
    for r in reports:
        worst[r.check] = max(worst[r.check], r.residual)
        failed[r.check] |= not r.passed
    assert set(worst) == set(ALL_CHECKS)
    for name in ALL_CHECKS:
        assert failed[name], name
        assert worst[name] > 1e-4, (name, worst[name])
