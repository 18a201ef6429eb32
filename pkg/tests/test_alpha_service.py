"""
alpha(D, p), its series and the F-transform.
"""
import math

import numpy as np
import pytest

from fsikit.core.exceptions import CoverageError, DomainError
from fsikit.schemas.loopgain import PartialFractionTerm, TermKind
from fsikit.services.alpha_service import AlphaService
from fsikit.services.loopgain_service import LoopGainService


# ── Closed form ──────────────────────────────────────────────────────────────

def test_alpha0_and_alpha1_at_half_duty():
    assert AlphaService.alpha0(0.5) == pytest.approx(0.0, abs=1e-15)
    assert AlphaService.alpha1(0.5) == pytest.approx(math.pi**2 / 2)


def test_alpha_returns_alpha0_below_small_p():
    assert AlphaService.alpha_closed(0.3, 1e-13) == pytest.approx(AlphaService.alpha0(0.3), rel=1e-15)


def test_alpha_follows_its_linear_term_for_small_p():
    d, p = 0.7, 1e-4
    linear = AlphaService.alpha0(d) - AlphaService.alpha1(d) * p
    assert AlphaService.alpha_closed(d, p) == pytest.approx(linear, abs=1e-6)


def test_alpha_matches_csch_form_and_never_overflows():
    d, p = 0.36, 0.18
    reference = 2 * math.pi / math.sinh(2 * math.pi * p) - math.pi * math.exp(math.pi * p * (1 - 2 * d)) / math.sinh(math.pi * p)
    assert AlphaService.alpha_closed(d, p) == pytest.approx(reference, rel=1e-12)
    assert np.isfinite(AlphaService.alpha_closed(0.01, 500.0))


def test_alpha_broadcasts_over_arrays():
    d = np.linspace(0.1, 0.9, 5)
    out = AlphaService.alpha_closed(d, 0.5)
    assert out.shape == (5,)
    assert out[2] == pytest.approx(AlphaService.alpha_closed(0.5, 0.5))


@pytest.mark.parametrize("d,p", [(1.5, 0.1), (-0.1, 0.1), (0.5, -1.0), (0.5, 0.0)])
def test_alpha_rejects_out_of_domain_arguments(d, p):
    with pytest.raises(DomainError):
        AlphaService.alpha_closed(d, p)


# ── Series ───────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("d", [0.0, 0.25, 0.6, 1.0])
def test_leading_coefficients_are_alpha0_and_alpha1(d):
    assert AlphaService.alpha_coefficient(d, 0) == pytest.approx(AlphaService.alpha0(d), abs=1e-12)
    assert AlphaService.alpha_coefficient(d, 1) == pytest.approx(AlphaService.alpha1(d), abs=1e-12)


@pytest.mark.parametrize("d,p,n", [(0.36, 0.1, 30), (0.6, 0.2, 50), (0.86, 0.3, 70)])
def test_series_converges_to_closed_form(d, p, n):
    assert AlphaService.alpha_series(d, p, n) == pytest.approx(AlphaService.alpha_closed(d, p), abs=1e-8)


def test_series_truncation_to_one_term_is_alpha0():
    assert AlphaService.alpha_series(0.86, 0.75, 1) == pytest.approx(AlphaService.alpha0(0.86))
    with pytest.raises(DomainError):
        AlphaService.alpha_series(0.86, 0.75, 0)


def test_alpha_terms_correction_is_higher_order():
    terms = AlphaService.alpha_terms(0.4, 0.01)
    assert terms.closed == pytest.approx(terms.alpha0 - terms.alpha1 * 0.01 + terms.correction)
    assert abs(terms.correction) < 1e-2


# ── F-transform ──────────────────────────────────────────────────────────────

def test_f_transform_of_simplified_type2_gain_matches_kmax_condition():
    rng = np.random.default_rng(7)
    for _ in range(100):
        d, p, k = rng.uniform(0.01, 0.99), rng.uniform(0.05, 5.0), rng.uniform(0.1, 3.0)
        w_s = rng.uniform(1e4, 1e7)
        terms = LoopGainService.partial_fractions(LoopGainService.simplified_type2_gain(k, p, w_s))
        expected = k * (AlphaService.alpha0(d) - AlphaService.alpha_closed(d, p))
        assert AlphaService.f_transform(terms, d, w_s) == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_f_transform_of_simplified_pi_gain_matches_ktilde_condition():
    rng = np.random.default_rng(11)
    for _ in range(100):
        d, z, kt = rng.uniform(0.01, 0.99), rng.uniform(0.005, 0.1), rng.uniform(0.001, 0.1)
        w_s = rng.uniform(1e4, 1e7)
        terms = LoopGainService.partial_fractions(LoopGainService.simplified_pi_gain(kt, z, w_s))
        expected = kt * (AlphaService.alpha0(d) / z + AlphaService.alpha1(d))
        assert AlphaService.f_transform(terms, d, w_s) == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_f_transform_is_linear():
    w_s = 2 * math.pi * 50e3
    a = [PartialFractionTerm(kind=TermKind.ORIGIN_1, coefficient=3e4),
         PartialFractionTerm(kind=TermKind.REAL_POLE, coefficient=-2e4, pole=0.3 * w_s)]
    b = [PartialFractionTerm(kind=TermKind.ORIGIN_2, coefficient=5e8)]
    d = 0.62
    fa = AlphaService.f_transform(a, d, w_s)
    fb = AlphaService.f_transform(b, d, w_s)
    combined = AlphaService.f_transform([t.scaled(2.5) for t in a] + [t.scaled(-1.5) for t in b], d, w_s)
    assert combined == pytest.approx(2.5 * fa - 1.5 * fb, rel=1e-13)


def test_f_transform_of_empty_list_is_zero():
    assert AlphaService.f_transform([], 0.5, 1e5) == 0.0


def test_f_transform_rejects_non_finite_pole():
    bad = PartialFractionTerm(kind=TermKind.REAL_POLE, coefficient=1.0, pole=float("inf"))
    with pytest.raises(CoverageError):
        AlphaService.f_transform([bad], 0.5, 1e5)
