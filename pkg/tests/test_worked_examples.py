"""
End-to-end reproductions of the worked boost examples: the closed-form
verdict, the sampled-data eigenvalues and the switched simulation must
tell the same story. Run with ``pytest -m slow``.
"""
import numpy as np
import pytest

from fsikit.schemas.results import Classification
from fsikit.seeds.factories import ExampleFactory
from fsikit.services.loopgain_service import LoopGainService
from fsikit.services.report_service import ReportService
from fsikit.services.sda_service import SdaService
from fsikit.services.stability_service import StabilityService
from fsikit.services.switchsim_service import SwitchSimService

pytestmark = pytest.mark.slow

CASES = [
    ("example1_unstable", ExampleFactory.example1(), False),
    ("example1_stable", ExampleFactory.example1(stable=True), True),
    ("example2_p017", ExampleFactory.example2(0.17), True),
    ("example2_p018", ExampleFactory.example2(0.18), False),
    ("example2_p052", ExampleFactory.example2(0.52), True),
    ("example3_stable", ExampleFactory.example3(stable=True), True),
]

SPECTRA = [
    ("example1_unstable", ExampleFactory.example1(), [-1.021, -0.01, 0.881, 0.914]),
    ("example2_p018", ExampleFactory.example2(0.18), [-1.07, -0.354, 0.88, 0.91]),
    ("example2_p0515", ExampleFactory.example2(0.515), [-1.002, -0.046, 0.876, 0.914]),
    ("example3_unstable", ExampleFactory.example3(), [-1.017, 0.0, 0.88, 0.913]),
]

MARGINS = [
    ("example1_unstable", ExampleFactory.example1(), 60.0, 5.0),
    ("example2_p018", ExampleFactory.example2(0.18), 18.0, 5.0),
    ("example2_p0515", ExampleFactory.example2(0.515), 33.0, 5.0),
    ("example3_unstable", ExampleFactory.example3(), 89.0, 2.0),
]


def _long_run(cfg):
    return SwitchSimService.simulate(cfg, 600, settle_periods=500, window_periods=100)


def _most_negative(result) -> float:
    return float(min(complex(v).real for v in result.eigenvalues))


@pytest.mark.parametrize("name,cfg,stable", CASES, ids=[c[0] for c in CASES])
def test_sda_verdict(name, cfg, stable):
    result = SdaService.sda_verdict(cfg)
    assert result.stable is stable
    if not stable:
        assert result.dominant.real < -1.0


@pytest.mark.parametrize("name,cfg,stable", CASES, ids=[c[0] for c in CASES])
def test_general_hba_verdict_agrees(name, cfg, stable):
    point = LoopGainService.operating_point(cfg)
    assert StabilityService.verdict(cfg, point, general=True).stable is stable


@pytest.mark.parametrize("name,cfg,stable", CASES, ids=[c[0] for c in CASES])
def test_simulation(name, cfg, stable):
    trace = _long_run(cfg)
    if stable:
        assert trace.classification is Classification.PERIOD1
    else:
        assert trace.classification is not Classification.PERIOD1


@pytest.mark.parametrize("name,cfg,expected", SPECTRA, ids=[c[0] for c in SPECTRA])
def test_eigenvalue_spectra(name, cfg, expected):
    result = SdaService.sda_verdict(cfg)
    eig = np.array([complex(v) for v in result.eigenvalues])
    assert np.max(np.abs(eig.imag)) < 0.02
    np.testing.assert_allclose(np.sort(eig.real), expected, atol=0.02)


@pytest.mark.parametrize("cfg", [ExampleFactory.example2(0.515), ExampleFactory.example3()],
                         ids=["example2_p0515", "example3_unstable"])
def test_near_marginal_unstable_cases(cfg):
    result = SdaService.sda_verdict(cfg)
    assert not result.stable and not result.marginal
    assert SwitchSimService.simulate(cfg, 300).classification is Classification.SUBHARMONIC


@pytest.mark.parametrize("name,cfg,quoted,tol", MARGINS, ids=[c[0] for c in MARGINS])
def test_phase_margins(name, cfg, quoted, tol):
    assert LoopGainService.ssaa(cfg).phase_margin_deg == pytest.approx(quoted, abs=tol)


def test_phase_margin_does_not_predict_instability(example1):
    ssaa = LoopGainService.ssaa(example1)
    assert ssaa.phase_margin_deg > 60.0
    assert not SdaService.sda_verdict(example1).stable


def test_slow_decay_reads_as_period1_at_default_settings():
    cfg = ExampleFactory.example2(0.52)
    assert SwitchSimService.simulate(cfg, 300).classification is Classification.PERIOD1
    report = ReportService.run_report(cfg)
    assert [leg.stable for leg in report.legs[:3]] == [True, True, True]
    assert report.agree


def test_dominant_eigenvalue_crosses_minus_one_with_the_index():
    unstable, stable = ExampleFactory.example1(), ExampleFactory.example1(stable=True)
    rows = []
    for w in np.linspace(0.0, 1.0, 6):
        cfg = unstable.model_copy(update={
            "v_s": (1 - w) * unstable.v_s + w * stable.v_s,
            "v_c": (1 - w) * unstable.v_c + w * stable.v_c,
        })
        point = LoopGainService.operating_point(cfg)
        index = StabilityService.verdict(cfg, point, general=True).index
        rows.append((point.duty, index, _most_negative(SdaService.sda_verdict(cfg))))
    duty, index, dominant = (np.array(col) for col in zip(*sorted(rows)))

    assert np.all(np.diff(dominant) < 0.0)
    assert np.all(np.diff(index) > 0.0)
    assert index[0] < 1.0 < index[-1]
    assert dominant[0] > -1.0 > dominant[-1]
    d_index = np.interp(1.0, index, duty)
    d_sda = np.interp(1.0, -dominant, duty)
    assert abs(d_index - d_sda) < 0.01
