import math

import numpy as np
import pytest

from rmtbias.errors import ConfigurationError, ParameterDomainError
from rmtbias.models.config import ScenarioConfig
from rmtbias.models.domain import ChannelModel, EntryDistribution, EntryMoments, ModulusLaw, SpectralPoint
from rmtbias.services.channel_model import (
    cv_of,
    distribution_for_cv,
    distribution_from_config,
    model_from_config,
    modulus_first_moment,
    moments_of,
    rician_mix,
    scenario_arrays,
    ula_los,
)

from tests.conftest import SCENARIO


def test_weibull_noncircular_moments() -> None:
    moments = moments_of(EntryDistribution(ModulusLaw.WEIBULL, 1.0, 1.6, 0.4))
    assert moments.vartheta == pytest.approx(0.6)
    assert moments.kappa == pytest.approx(4.72, abs=1e-12)
    assert moments.zeta == 0


def test_gaussian_law_has_no_fourth_cumulant_for_any_weights() -> None:
    for sr2 in (1.0, 1.6, 2.0):
        moments = moments_of(EntryDistribution(ModulusLaw.GAUSSIAN, None, sr2, 2.0 - sr2))
        assert moments.kappa == pytest.approx(0.0, abs=1e-14)
        assert moments.vartheta == pytest.approx((sr2 - (2.0 - sr2)) / 2.0)


def test_nakagami_fourth_moment() -> None:
    # circular Nakagami-m: E|x|^4 = 1 + 1/m
    moments = moments_of(EntryDistribution(ModulusLaw.NAKAGAMI, 2.0))
    assert moments.fourth_moment == pytest.approx(1.5)
    assert moments.kappa == pytest.approx(-0.5)


def test_unit_power_modulus_first_moments() -> None:
    rayleigh = math.sqrt(math.pi) / 2.0
    assert modulus_first_moment(EntryDistribution(ModulusLaw.NAKAGAMI, 1.0)) == pytest.approx(rayleigh)
    assert modulus_first_moment(EntryDistribution(ModulusLaw.WEIBULL, 2.0)) == pytest.approx(rayleigh)
    assert modulus_first_moment(EntryDistribution(ModulusLaw.LOGNORMAL, 0.0)) == pytest.approx(1.0)


def test_circular_rayleigh_cv() -> None:
    expected = math.sqrt(4.0 / math.pi - 1.0)
    assert cv_of(EntryDistribution(ModulusLaw.GAUSSIAN)) == pytest.approx(expected, rel=1e-12)
    assert cv_of(EntryDistribution(ModulusLaw.NAKAGAMI, 1.0)) == pytest.approx(expected, rel=1e-12)


def test_distribution_for_cv_hits_target() -> None:
    base = EntryDistribution(ModulusLaw.WEIBULL, 1.0, 1.6, 0.4)
    for target in (0.3, 0.5, 0.8):
        dist = distribution_for_cv(base, target)
        assert cv_of(dist) == pytest.approx(target, rel=1e-9)
        assert (dist.sigma_r2, dist.sigma_i2) == (1.6, 0.4)


def test_distribution_for_cv_rejects_gaussian_and_unreachable() -> None:
    with pytest.raises(ParameterDomainError):
        distribution_for_cv(EntryDistribution(ModulusLaw.GAUSSIAN), 0.5)
    with pytest.raises(ParameterDomainError):
        # circular Nakagami CV tops out at the half-normal value ~0.756
        distribution_for_cv(EntryDistribution(ModulusLaw.NAKAGAMI, 1.0), 0.9)


def test_entry_distribution_rejects_wrong_power() -> None:
    with pytest.raises(ParameterDomainError):
        EntryDistribution(ModulusLaw.WEIBULL, 1.0, 1.0, 0.5)
    with pytest.raises(ParameterDomainError):
        EntryDistribution(ModulusLaw.WEIBULL, None)
    with pytest.raises(ParameterDomainError):
        EntryMoments(vartheta=1.5, kappa=0.0)


def test_ula_rows_are_orthogonal_when_M_is_a_multiple_of_N() -> None:
    los = ula_los(4, 8)
    assert np.allclose(np.abs(los), 1.0)
    assert np.allclose(los @ los.conj().T, 8.0 * np.eye(4))


def test_rician_mix_scales_los_and_receive_profile() -> None:
    los = ula_los(4, 8)
    A, D = rician_mix(los, 3.0, np.full(4, 2.0))
    assert np.allclose(A, math.sqrt(0.75) / math.sqrt(8) * los)
    assert np.allclose(D, 0.5)
    with pytest.raises(ParameterDomainError):
        rician_mix(los, -1.0, np.ones(4))


def test_channel_model_rejects_bad_profiles() -> None:
    moments = EntryMoments(0.0, 0.0)
    with pytest.raises(ConfigurationError):
        ChannelModel(np.zeros((3, 4)), np.ones(2), np.ones(4), moments)
    with pytest.raises(ParameterDomainError):
        ChannelModel(np.zeros((3, 4)), np.zeros(3), np.ones(4), moments)
    with pytest.raises(ParameterDomainError):
        ChannelModel(np.zeros((3, 4)), -np.ones(3), np.ones(4), moments)


def test_channel_model_enforces_norm_cap() -> None:
    A = np.full((3, 3), 2.0)
    with pytest.raises(ParameterDomainError):
        ChannelModel(A, np.ones(3), np.ones(3), EntryMoments(0.0, 0.0), norm_cap=1.0)
    model = ChannelModel(A, np.ones(3), np.ones(3), EntryMoments(0.0, 0.0), norm_cap=10.0)
    assert model.spectral_norm == pytest.approx(6.0)


def test_default_norm_cap_scales_with_column_norm() -> None:
    moments = EntryMoments(0.0, 0.0)
    model = ChannelModel(np.full((2, 8), 0.01), np.ones(2), np.ones(8), moments)
    assert model.norm_limit == pytest.approx(10.0 * 0.01 * math.sqrt(2.0))
    assert model.spectral_norm == pytest.approx(0.04)
    # rank one: ||A|| = 0.01 sqrt(800) above 10 * 0.01 sqrt(2)
    with pytest.raises(ParameterDomainError, match="exceeds the cap"):
        ChannelModel(np.full((2, 400), 0.01), np.ones(2), np.ones(400), moments)


def test_spectral_point_domain() -> None:
    assert SpectralPoint.from_sigma2(0.2).z == -0.2
    assert SpectralPoint(1.0 + 0.5j).omega == -1.0 - 0.5j
    with pytest.raises(ParameterDomainError):
        SpectralPoint(0.3)
    with pytest.raises(ParameterDomainError):
        SpectralPoint.from_sigma2(0.0)


def test_model_from_config_ula_rician() -> None:
    model = model_from_config(ScenarioConfig.model_validate(SCENARIO))
    assert (model.N, model.M) == (4, 8)
    assert np.allclose(model.D, 0.5)
    assert np.allclose(model.Dt, 1.0)
    assert model.moments.kappa == pytest.approx(4.72)


def test_scenario_arrays_from_files(tmp_path) -> None:
    A = np.arange(8, dtype=float).reshape(2, 4) / 10.0
    np.save(tmp_path / "los.npy", A)
    (tmp_path / "d.txt").write_text("1.0 2.0\n", encoding="utf-8")
    scenario = ScenarioConfig.model_validate({
        "N": 2, "M": 4,
        "los": {"kind": "file", "path": "los.npy"},
        "D": "d.txt",
        "Dt": [1.0, 1.0, 0.5, 0.5],
        "entry": {"law": "gaussian"},
    })
    got_A, D, Dt = scenario_arrays(scenario, base_dir=tmp_path)
    assert np.allclose(got_A, A)
    assert np.allclose(D, [1.0, 2.0])
    assert np.allclose(Dt, [1.0, 1.0, 0.5, 0.5])


def test_los_file_with_rician_factor_is_rejected(tmp_path) -> None:
    np.save(tmp_path / "los.npy", np.zeros((2, 4)))
    scenario = ScenarioConfig.model_validate({
        "N": 2, "M": 4, "rician_K": 1.0,
        "los": {"kind": "file", "path": "los.npy"},
        "entry": {"law": "gaussian"},
    })
    with pytest.raises(ConfigurationError):
        scenario_arrays(scenario, base_dir=tmp_path)


def test_unknown_law_parameter_is_rejected() -> None:
    scenario = ScenarioConfig.model_validate({**SCENARIO, "entry": {"law": "weibull", "params": {"m": 1.0}}})
    with pytest.raises(ConfigurationError):
        distribution_from_config(scenario.entry)
