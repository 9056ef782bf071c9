"""Spectral engine: decomposition, spacings, char poly and determinants."""

import math
import warnings

import gmpy2
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harperdrift.errors import NoSplitDetected, PrecisionWarning
from harperdrift.operators import (
    MACHINE,
    Basis,
    HarperParams,
    PrecisionContext,
    build_harper,
)
from harperdrift.spectral import (
    charpoly_eval,
    compute_spectrum,
    determinant,
    eigen_decompose,
    min_spacing,
    min_spacing_model,
    min_spacing_model_log10,
    refine_pair,
    required_digits,
    separatrix_energies,
    spacings,
)


def test_two_site_closed_form():
    # h(1, 0, 0.3) has eigenvalues -/+ sqrt(1 + 0.3^2)
    s = compute_spectrum(HarperParams(2, 1.0, 0.0, 0.3))
    r = math.sqrt(1.09)
    assert np.allclose(s.eigenvalues, [-r, r], atol=1e-14)
    val, idx = min_spacing(s)
    assert val == pytest.approx(2 * r, rel=1e-14)
    assert idx == 0


def test_spacings_definition_matches_brute_force():
    s = compute_spectrum(HarperParams(11, 1.0, 0.25, 0.4))
    w = s.eigenvalues
    brute = np.array([min(abs(w[j] - w[k]) for k in range(len(w)) if k != j)
                      for j in range(len(w))])
    assert np.allclose(spacings(s), brute, rtol=0, atol=1e-15)


def test_eigen_decompose_vectors_and_residual():
    p = HarperParams(12, 1.0, 0.3, 0.5)
    m = build_harper(p, Basis.CONVENTIONAL)
    s = eigen_decompose(m, want_vectors=True)
    h = np.asarray(m.entries)
    r = h @ s.eigenvectors - s.eigenvectors * s.eigenvalues[None, :]
    assert np.abs(r).max() < 1e-12 * np.abs(h).sum(axis=1).max()
    assert np.all(np.diff(s.eigenvalues) >= 0)


def test_even_n_spectrum_reflects_through_zero():
    for n in (6, 8, 14):
        s = compute_spectrum(HarperParams(n, 1.2, 0.9, 0.44))
        w = s.eigenvalues
        assert np.max(np.abs(w + w[::-1])) < 1e-12


def test_eps_zero_spectrum_is_sampled_cosine():
    p = HarperParams(9, 1.0, 0.6, 0.0)
    s = compute_spectrum(p)
    expected = np.sort(np.cos(2 * np.pi * np.arange(9) / 9 - 0.6))
    assert np.allclose(s.eigenvalues, expected, atol=1e-13)


# ---------------------------------------------------------------- model law

def test_min_spacing_model_cases():
    assert min_spacing_model(8, 0.5) == 0.0
    assert min_spacing_model(49, 0.3) == pytest.approx(0.3 ** 24 * 3 / 49, rel=1e-15)
    assert min_spacing_model(50, 0.3) == pytest.approx(0.3 ** 24 * 5 / 50, rel=1e-15)
    with pytest.raises(ValueError):
        min_spacing_model(10, 0.0)
    with pytest.raises(ValueError):
        min_spacing_model(10, 1.5)
    with pytest.raises(ValueError):
        min_spacing_model(10, -0.2)


@given(n=st.integers(5, 80), eps=st.floats(0.05, 1.0))
@settings(max_examples=60, deadline=None)
def test_min_spacing_model_log_consistency(n, eps):
    lg = min_spacing_model_log10(n, eps)
    if n % 4 == 0:
        assert lg == -math.inf
    else:
        val = min_spacing_model(n, eps)
        if val > 0:
            assert lg == pytest.approx(math.log10(val), rel=1e-12, abs=1e-12)


def test_required_digits_examples():
    # 0.3^24 * 3/49 = 1.7e-14 needs about 24 digits with the margin
    assert required_digits(49, 0.3) == 24
    assert required_digits(5, 0.9) == 15
    with pytest.raises(ValueError):
        required_digits(8, 0.5)


def test_min_spacing_warns_near_precision_floor():
    s = compute_spectrum(HarperParams(8, 1.0, 0.0, 0.5))
    with pytest.warns(PrecisionWarning):
        val, _ = min_spacing(s)
    assert val < 1e-10  # the zero pair collapses at machine precision


# ------------------------------------------------------- char poly and dets

def test_charpoly_two_site_oracle():
    # det[x 1 - 2 h] at x = 0, eps = 0, b = 0, n = 2:
    # 2h = 2 cos p has eigenvalues -/+2, so the polynomial is x^2 - 4
    ev = charpoly_eval(HarperParams(2, 1.0, 0.0, 0.0), 0.0)
    assert ev.value == pytest.approx(-4.0, abs=1e-15)
    assert ev.trace_part == pytest.approx(-2.0, abs=1e-15)


def test_charpoly_rejects_general_a():
    with pytest.raises(ValueError):
        charpoly_eval(HarperParams(5, a=2.0), 0.1)


def test_charpoly_b_dependence_is_the_cosine_shift():
    p1 = HarperParams(7, 1.0, 0.31, 0.4)
    rng = np.random.default_rng(3)
    for x in rng.uniform(-3, 3, size=20):
        b2 = float(rng.uniform(0, 2 * np.pi))
        e1 = charpoly_eval(p1, x)
        e2 = charpoly_eval(HarperParams(7, 1.0, b2, 0.4), x)
        assert e1.trace_part == pytest.approx(e2.trace_part, rel=1e-12, abs=1e-12)
        diff = e1.value - e2.value
        expect = 2 * math.cos(7 * b2) - 2 * math.cos(7 * 0.31)
        assert diff == pytest.approx(expect, abs=1e-10)


@pytest.mark.parametrize("n,b,eps", [(6, 0.0, 0.5), (11, 0.4, 0.3), (20, 1.1, 0.7)])
def test_charpoly_vanishes_on_doubled_eigenvalues(n, b, eps):
    p = HarperParams(n, 1.0, b, eps)
    s = compute_spectrum(p)
    evs = [charpoly_eval(p, 2 * lam) for lam in s.eigenvalues]
    scale = max(1.0, max(abs(e.trace_part) for e in evs))
    for e in evs:
        assert abs(e.value) <= 1e-6 * scale


def test_charpoly_high_precision_matches_machine():
    p = HarperParams(9, 1.0, 0.21, 0.35)
    em = charpoly_eval(p, 0.7)
    ep = charpoly_eval(p, 0.7, PrecisionContext(40))
    assert float(ep.value) == pytest.approx(em.value, rel=1e-11, abs=1e-11)


def test_determinant_three_site_value():
    mol, closed = determinant(HarperParams(3, 1.0, 0.0, 0.3))
    assert closed == pytest.approx(0.25 * 1.027, rel=1e-15)
    assert mol == pytest.approx(closed, rel=1e-12)
    # direct dense determinant as an independent check
    h = np.asarray(build_harper(HarperParams(3, 1.0, 0.0, 0.3)).entries)
    assert np.linalg.det(h).real == pytest.approx(closed, rel=1e-12)


@pytest.mark.parametrize("n", list(range(2, 17)))
@pytest.mark.parametrize("eps", [0.0, 0.3, 0.7])
def test_determinant_routes_agree(n, eps):
    mol, closed = determinant(HarperParams(n, 1.0, 0.0, eps))
    assert abs(mol - closed) <= 1e-10 * max(1.0, abs(closed))


def test_determinant_matches_eigenvalue_product():
    p = HarperParams(8, 1.0, 0.0, 0.45)
    mol, closed = determinant(p)
    w = compute_spectrum(p).eigenvalues
    assert np.prod(w) == pytest.approx(mol, abs=1e-12)
    assert closed == 0.0  # n = 0 mod 4
    p = HarperParams(7, 1.0, 0.0, 0.45)
    mol, closed = determinant(p)
    w = compute_spectrum(p).eigenvalues
    assert np.prod(w) == pytest.approx(closed, rel=1e-10)


def test_determinant_rejects_nonzero_b():
    with pytest.raises(ValueError):
        determinant(HarperParams(5, 1.0, 0.1, 0.3))


def test_determinant_high_precision():
    ctx = PrecisionContext(30)
    mol, closed = determinant(HarperParams(10, 1.0, 0.0, 0.6), ctx)
    assert abs(mol - closed) < gmpy2.mpfr(10) ** (-24)


def test_separatrix_energies_and_warnings():
    lo, hi = separatrix_energies(HarperParams(9, 1.0, 0.0, 0.4))
    assert (lo, hi) == (-0.6, 0.6)
    with pytest.warns(UserWarning):
        separatrix_energies(HarperParams(9, 1.0, 0.0, 0.0))
    with pytest.warns(UserWarning):
        separatrix_energies(HarperParams(9, 0.5, 0.0, -0.5))


# ------------------------------------------------------- high precision path

def test_jacobi_matches_lapack_at_moderate_n():
    p = HarperParams(14, 1.0, 0.2, 0.45)
    sm = compute_spectrum(p)
    sp = compute_spectrum(p, PrecisionContext(30))
    diff = max(abs(float(v) - w) for v, w in zip(sp.eigenvalues, sm.eigenvalues))
    assert diff < 1e-13


def test_high_precision_resolves_central_pair():
    # n = 14 at machine precision cannot see the eps^6-scale splitting cleanly
    p = HarperParams(14, 1.0, 0.0, 0.3)
    s = compute_spectrum(p, PrecisionContext(30))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        val, idx = min_spacing(s)
    model = min_spacing_model(14, 0.3)
    assert 0.2 < float(val) / model < 5.0
    # even n has two exactly tied minimal pairs at -/+E; the winning pair
    # sits among the four eigenvalues nearest zero
    w = [float(v) for v in s.eigenvalues]
    nearest = set(np.argsort(np.abs(w))[:4])
    assert {idx, idx + 1} <= nearest


def test_high_precision_zero_pair_n8():
    ctx = PrecisionContext(30)
    s = compute_spectrum(HarperParams(8, 1.0, 0.0, 0.5), ctx)
    small = [v for v in s.eigenvalues if abs(v) < gmpy2.mpfr(10) ** (-20)]
    assert len(small) == 2


@pytest.mark.parametrize("n", [5, 8, 12, 13])
def test_distinct_off_lattice_at_50_digits(n):
    # every eigenvalue is simple once b leaves the lattice angles
    ctx = PrecisionContext(50)
    p = HarperParams(n, 1.0, 0.37 * math.pi / n, 0.3)
    s = compute_spectrum(p, ctx)
    with ctx.gmpy_context():
        floor = gmpy2.mpfr(10) ** (-40)
        assert all(sp > floor for sp in s.spacings)


def test_high_precision_wants_fourier_and_no_vectors():
    ctx = PrecisionContext(25)
    m = build_harper(HarperParams(5, 1.0, 0.1, 0.3), Basis.CONVENTIONAL, ctx)
    with pytest.raises(ValueError):
        eigen_decompose(m)
    mf = build_harper(HarperParams(5, 1.0, 0.1, 0.3), Basis.FOURIER, ctx)
    with pytest.raises(ValueError):
        eigen_decompose(mf, want_vectors=True)


# ------------------------------------------------------------- pair refining

def _pair_seeds(spectrum):
    """Bracket the minimum-spacing pair, widened into the outer gaps."""
    w = spectrum.eigenvalues
    sp = spectrum.spacings
    idx = int(np.argmin(sp))
    lo, hi = w[idx], w[idx + 1]
    left_gap = lo - w[idx - 1] if idx > 0 else 1.0
    right_gap = w[idx + 2] - hi if idx + 2 < len(w) else 1.0
    delta = 0.3 * min(left_gap, right_gap)
    return lo - delta, hi + delta


def test_refine_pair_cross_validates_jacobi():
    p = HarperParams(5, 1.0, 0.0, 0.3)
    ctx = PrecisionContext(30)
    seeds = _pair_seeds(compute_spectrum(p))
    r1, r2 = refine_pair(p, *seeds, ctx)
    s = compute_spectrum(p, ctx)
    jac = min(s.spacings)
    # gmpy arithmetic truncates to the ambient context, so compare inside it
    with ctx.gmpy_context():
        rel = abs(float((r2 - r1 - jac) / jac))
        assert rel < 1e-25
        # both roots individually match the two central jacobi eigenvalues
        w = sorted(s.eigenvalues, key=abs)[:2]
        for root in (r1, r2):
            assert min(abs(float(root - v)) for v in w) < 1e-26


def test_refine_pair_reports_no_split_on_exact_degeneracy():
    # n = 0 mod 4 zero pair is an exact double root of the polynomial
    p = HarperParams(8, 1.0, 0.0, 0.5)
    s = compute_spectrum(p)
    w = s.eigenvalues
    order = np.argsort(np.abs(w))
    gap_out = abs(w[order[2]]) * 0.3
    with pytest.raises(NoSplitDetected):
        refine_pair(p, -gap_out, gap_out, PrecisionContext(25))


def test_refine_pair_seed_validation():
    p = HarperParams(5, 1.0, 0.0, 0.3)
    with pytest.raises(ValueError):
        refine_pair(p, 0.5, 0.5, PrecisionContext(20))
    with pytest.raises(ValueError):
        refine_pair(HarperParams(5, a=2.0), 0.1, 0.2, PrecisionContext(20))
