"""
Operating points, loop gains, partial fractions and crossover analysis.
"""
import math

import control as ct
import numpy as np
import pytest
from pydantic import ValidationError

from fsikit.core.exceptions import CoverageError, CrossoverError, DomainError
from fsikit.schemas.converter import ConverterConfig
from fsikit.schemas.loopgain import LoopGainSum, RationalLoopGain, TermKind
from fsikit.seeds.factories import ExampleFactory
from fsikit.services.loopgain_service import LoopGainService

W_S = 2 * math.pi * 50e3


def _evaluate_terms(terms, omega):
    s = 1j * omega
    total = 0j
    for t in terms:
        if t.kind is TermKind.ORIGIN_1:
            total += t.coefficient / s
        elif t.kind is TermKind.ORIGIN_2:
            total += t.coefficient / s**2
        else:
            total += t.coefficient / (s + t.pole)
    return total


# ── Operating points ─────────────────────────────────────────────────────────

def test_duty_and_va_per_topology():
    stage = dict(scheme="pcmc", f_s=50e3, L=46.1e-6, C=380e-6, R=1.0, R_s=0.0164, V_m=1.0)
    boost = LoopGainService.duty_and_va(ConverterConfig(topology="boost", v_s=9.0, v_o=14.0, **stage))
    buck = LoopGainService.duty_and_va(ConverterConfig(topology="buck", v_s=14.0, v_o=8.4, **stage))
    inv = LoopGainService.duty_and_va(ConverterConfig(topology="buckboost", v_s=6.0, v_o=9.0, **stage))
    assert boost.duty == pytest.approx(1 - 9 / 14) and boost.v_a == pytest.approx(14.0)
    assert buck.duty == pytest.approx(0.6) and buck.v_a == pytest.approx(14.0)
    assert inv.duty == pytest.approx(0.6) and inv.v_a == pytest.approx(15.0)


def test_operating_point_without_esr_reduces_to_ideal(pcmc_buck):
    ideal = LoopGainService.duty_and_va(pcmc_buck)
    op = LoopGainService.operating_point(pcmc_buck)
    assert op.duty == pytest.approx(ideal.duty, rel=1e-12)
    assert op.v_a == pytest.approx(ideal.v_a, rel=1e-12)
    assert op.inductor_current == pytest.approx(8.4)
    assert op.valley_current == pytest.approx(8.4 - op.m1 * 0.6 * 20e-6 / 2)


def test_operating_point_with_esr_for_example1(example1):
    op = LoopGainService.operating_point(example1)
    assert op.duty == pytest.approx(0.868254, abs=2e-5)
    assert op.v_a == pytest.approx(14.877, rel=2e-4)
    assert op.inductor_current * example1.R_s == pytest.approx(example1.v_c, rel=1e-9)


def test_operating_point_with_esr_for_example3(example3):
    op = LoopGainService.operating_point(example3)
    assert op.duty == pytest.approx(0.605896, abs=2e-5)
    assert op.v_a == pytest.approx(14.2094, rel=2e-4)


def test_operating_point_rejects_unreachable_control_voltage():
    cfg = ExampleFactory.example2(0.18).model_copy(update={"v_c": -1.0})
    with pytest.raises(DomainError):
        LoopGainService.operating_point(cfg)


def test_proportional_voltage_loop_point_is_self_consistent():
    cfg = ExampleFactory.pcmc_buck_voltage_loop("proportional", k_p=5.0, v_r=8.4)
    op = LoopGainService.operating_point(cfg)
    assert op.v_c == pytest.approx(5.0 * (8.4 - op.v_o), rel=1e-9)
    assert 0.0 < op.duty < 8.4 / 14.0


# ── Loop gains and partial fractions ─────────────────────────────────────────

def test_type2_loop_gain_normalizes_to_k(example2):
    cfg = example2(0.18)
    gain = LoopGainService.build_loop_gain(cfg)
    assert gain.origin_order == 2
    assert gain.zeros == [cfg.omega_z] and gain.poles == [cfg.omega_p]
    k = gain.gain / (cfg.omega_z * cfg.omega_s)
    assert k == pytest.approx(1.2912, rel=1e-3)


@pytest.mark.parametrize("gain", [
    RationalLoopGain(gain=3e9, zeros=[5e3], poles=[6e4], origin_order=2),
    RationalLoopGain(gain=2e5, zeros=[1e3], poles=[4e4, 9e4], origin_order=1),
    RationalLoopGain(gain=7e4, poles=[3e4], origin_order=0),
    RationalLoopGain(gain=1e9, zeros=[2e3, 7e3], poles=[5e4, 1.2e5], origin_order=2),
])
def test_partial_fractions_reconstruct_the_gain(gain):
    terms = LoopGainService.partial_fractions(gain)
    for omega in (1e2, 3.3e4, 2e6):
        assert _evaluate_terms(terms, omega) == pytest.approx(LoopGainService.evaluate_at(gain, omega), rel=1e-9)


def test_partial_fractions_of_type2_origin_terms():
    gain = RationalLoopGain(gain=2.0, zeros=[10.0], poles=[100.0], origin_order=2)
    terms = {t.kind: t for t in LoopGainService.partial_fractions(gain) if t.pole is None}
    assert terms[TermKind.ORIGIN_2].coefficient == pytest.approx(2.0)
    assert terms[TermKind.ORIGIN_1].coefficient == pytest.approx(2.0 * (0.1 - 0.01))


@pytest.mark.parametrize("gain", [
    RationalLoopGain(gain=1.0, origin_order=3),
    RationalLoopGain(gain=1.0, zeros=[1.0], origin_order=1),
    RationalLoopGain.model_construct(gain=1.0, zeros=[], poles=[2.0, 2.0], origin_order=1),
])
def test_partial_fractions_outside_coverage(gain):
    with pytest.raises(CoverageError):
        LoopGainService.partial_fractions(gain)


def test_repeated_poles_are_rejected_on_construction():
    with pytest.raises(ValidationError):
        RationalLoopGain(gain=1.0, poles=[2.0, 2.0], origin_order=1)


def test_loop_gain_sum_merges_terms():
    cfg = ExampleFactory.pcmc_buck_voltage_loop("proportional")
    gain = LoopGainService.build_pcmc_voltage_loop_gain(cfg)
    assert isinstance(gain, LoopGainSum) and len(gain.parts) == 2
    terms = LoopGainService.partial_fractions(gain)
    assert sorted(t.kind.value for t in terms) == ["origin_1", "origin_2"]
    omega = 0.2 * cfg.omega_s
    assert _evaluate_terms(terms, omega) == pytest.approx(LoopGainService.evaluate_at(gain, omega), rel=1e-9)


# ── Crossover and phase margin ───────────────────────────────────────────────

@pytest.mark.parametrize("k,p", [(0.4, 0.75), (1.3, 0.18), (0.05, 3.0)])
def test_type2_crossover_closed_form_matches_numeric(k, p):
    gain = LoopGainService.simplified_type2_gain(k, p, W_S)
    numeric = LoopGainService.crossover_frequency(gain, W_S)
    assert LoopGainService.crossover_type2_closed(k, p, W_S) == pytest.approx(numeric, rel=1e-8)
    assert LoopGainService.phase_margin(gain, W_S) == pytest.approx(LoopGainService.phase_margin_type2_closed(k, p), abs=1e-6)


@pytest.mark.parametrize("kt,z", [(0.0232, 0.018), (0.01, 0.1)])
def test_pi_crossover_closed_form_matches_numeric(kt, z):
    gain = LoopGainService.simplified_pi_gain(kt, z, W_S)
    numeric = LoopGainService.crossover_frequency(gain, W_S)
    assert LoopGainService.crossover_pi_closed(kt, z, W_S) == pytest.approx(numeric, rel=1e-8)


def test_transfer_function_matches_the_factored_form():
    gain = RationalLoopGain(gain=1e9, zeros=[2e3, 7e3], poles=[5e4, 1.2e5], origin_order=2)
    tf = LoopGainService.to_transfer_function(gain)
    for omega in (1e2, 3.3e4, 2e6):
        s = 1j * omega
        direct = 1e9 * (1 + s / 2e3) * (1 + s / 7e3) / (s**2 * (1 + s / 5e4) * (1 + s / 1.2e5))
        assert complex(tf(s)) == pytest.approx(direct, rel=1e-9)
        assert LoopGainService.evaluate_at(gain, omega) == pytest.approx(direct, rel=1e-9)


def test_crossover_agrees_with_python_control():
    gain = LoopGainService.simplified_type2_gain(1.3, 0.18, W_S)
    _, pm, _, w_c = ct.margin(LoopGainService.to_transfer_function(gain))
    assert LoopGainService.crossover_frequency(gain, W_S) == pytest.approx(w_c, rel=1e-6)
    assert LoopGainService.phase_margin(gain, W_S) == pytest.approx(pm, abs=1e-4)


def test_evaluate_at_keeps_the_grid_shape():
    gain = LoopGainService.simplified_pi_gain(0.0232, 0.018, W_S)
    grid = np.geomspace(1e2, 1e6, 12).reshape(3, 4)
    values = LoopGainService.evaluate_at(gain, grid)
    assert values.shape == (3, 4)
    assert values[1, 2] == pytest.approx(LoopGainService.evaluate_at(gain, float(grid[1, 2])), rel=1e-12)


def test_crossover_outside_bracket_raises():
    with pytest.raises(CrossoverError):
        LoopGainService.crossover_frequency(RationalLoopGain(gain=1e-12, origin_order=1), W_S)


def test_phase_is_reported_in_the_lower_half_turn():
    gain = RationalLoopGain(gain=1e9, poles=[1e3], origin_order=2)
    phase = LoopGainService.phase_deg(gain, 1e4)
    assert -360.0 < phase <= 0.0
    assert phase == pytest.approx(-180.0 - math.degrees(math.atan(10.0)))


def test_ssaa_phase_margins_of_the_examples(example1, example2, example3):
    assert LoopGainService.ssaa(example1).phase_margin_deg == pytest.approx(61.6, abs=1.0)
    assert LoopGainService.ssaa(example2(0.18)).phase_margin_deg == pytest.approx(18.9, abs=1.0)
    assert LoopGainService.ssaa(example2(0.515)).phase_margin_deg == pytest.approx(33.5, abs=1.0)
    ex3 = LoopGainService.ssaa(example3)
    assert ex3.phase_margin_deg == pytest.approx(89.2, abs=1.0)
    assert ex3.crossover_ratio > 1.0
