"""
Side-by-side report: leg isolation and the collected leg values.
"""
import numpy as np
import pytest

from fsikit.schemas.results import Classification
from fsikit.services.report_service import ReportService
from fsikit.services.sda_service import SdaService


def test_report_collects_leg_values(pcmc_buck):
    report = ReportService.run_report(pcmc_buck, n_periods=200)
    assert report.agree
    assert all(leg.error is None for leg in report.legs)
    assert report.details["hba_duty"] == pytest.approx(0.6, abs=0.01)
    assert report.details["sda_dominant_modulus"] < 1.0
    assert report.details["sim_classification"] == Classification.PERIOD1.value
    assert report.details["sim_mean_duty"] == pytest.approx(report.details["sda_duty"], abs=1e-3)
    assert 0.0 < report.details["ssaa_crossover_ratio"]
    assert "ssaa_phase_margin_deg" in report.details


def test_failing_leg_does_not_abort_the_report(pcmc_buck, monkeypatch):
    def singular(cfg):
        raise np.linalg.LinAlgError("Singular matrix")

    monkeypatch.setattr(SdaService, "sda_verdict", singular)
    report = ReportService.run_report(pcmc_buck, n_periods=200)
    legs = {leg.name: leg for leg in report.legs}
    assert list(legs) == ["HBA", "SDA", "SIM", "SSAA"]
    assert legs["SDA"].error == "LinAlgError: Singular matrix"
    assert legs["SDA"].stable is None
    assert legs["HBA"].stable is True and legs["SIM"].stable is True
    assert report.agree
    assert not any(key.startswith("sda_") for key in report.details)
