import numpy as np
import pytest

from rmtbias.errors import ContourViolationError, ParameterDomainError
from rmtbias.models.domain import ContourShape, ContourSpec, EntryDistribution, EntryMoments, ModulusLaw
from rmtbias.services.lss_contour import (
    contour_nodes,
    default_contour,
    lss_mean,
    mi_function,
    polynomial,
    support_bound,
)
from rmtbias.services.mi_statistics import mi_clt

from tests.conftest import WEIBULL_NONCIRCULAR, centered_model, profile_model


def test_support_bound_centered_iid() -> None:
    assert support_bound(centered_model(4, 4, EntryMoments(0.0, 0.0))) == pytest.approx(8.0)
    assert support_bound(centered_model(2, 8, EntryMoments(0.0, 0.0))) == pytest.approx(4.5)


def test_default_margin_respects_branch_point(noncircular_model) -> None:
    plain = default_contour(noncircular_model)
    assert plain.margin == pytest.approx(0.1 * plain.u_plus)
    narrowed = default_contour(noncircular_model, mi_function(0.05))
    assert narrowed.margin == pytest.approx(0.025)
    assert narrowed.left > -0.05


@pytest.mark.parametrize("shape", [ContourShape.ELLIPSE, ContourShape.RECTANGLE])
def test_quadrature_integrates_cauchy_kernel(shape) -> None:
    # (1 / 2 pi j) oint dz / (z - a) = 1 for a inside the contour
    z, q = contour_nodes(ContourSpec(u_plus=4.0, margin=0.5, nodes=256, shape=shape))
    for a in (0.0, 1.3, 4.0):
        assert np.sum(q / (z - a)) / (2j * np.pi) == pytest.approx(1.0, abs=1e-8)
    assert np.sum(q / (z + 1.0)) == pytest.approx(0.0, abs=1e-8)


def test_ellipse_nodes_are_mirrored() -> None:
    z, _ = contour_nodes(ContourSpec(u_plus=3.0, margin=0.3, nodes=64))
    assert np.allclose(z[::-1], z.conj())
    assert np.all(z[:32].imag > 0)
    assert not np.any(z.imag == 0)


def test_rectangle_needs_enough_nodes() -> None:
    with pytest.raises(ParameterDomainError):
        contour_nodes(ContourSpec(u_plus=3.0, margin=0.3, nodes=6, shape=ContourShape.RECTANGLE))


def test_constant_function_counts_eigenvalues(noncircular_model) -> None:
    result = lss_mean(noncircular_model, polynomial([1.0]))
    assert result.V_f.real == pytest.approx(noncircular_model.N, abs=1e-8)
    assert abs(result.B_f) < 1e-8


def test_identity_function_gives_expected_trace(noncircular_model) -> None:
    model = noncircular_model
    expected = np.linalg.norm(model.A) ** 2 + model.D.sum() * model.Dt.sum() / model.M
    result = lss_mean(model, polynomial([0.0, 1.0]))
    assert result.V_f.real == pytest.approx(expected, rel=1e-8)
    assert abs(result.B_f) < 1e-8


def test_mi_mean_matches_closed_form(noncircular_model) -> None:
    sigma2 = 0.2
    stats = mi_clt(noncircular_model, sigma2)
    result = lss_mean(noncircular_model, mi_function(sigma2))
    assert result.V_f.real == pytest.approx(stats.V, rel=1e-5)
    assert abs(result.V_f.imag) < 1e-10


NONCIRCULAR_MODELS = [
    (4, 6, WEIBULL_NONCIRCULAR, 5),
    (4, 6, WEIBULL_NONCIRCULAR, 2),
    (3, 8, WEIBULL_NONCIRCULAR, 7),
    (5, 5, WEIBULL_NONCIRCULAR, 1),
    (4, 6, EntryDistribution(ModulusLaw.LOGNORMAL, 0.4, 1.2, 0.8), 3),
    (3, 8, EntryDistribution(ModulusLaw.LOGNORMAL, 0.4, 1.2, 0.8), 9),
    (4, 6, EntryDistribution(ModulusLaw.NAKAGAMI, 2.5, 0.5, 1.5), 4),
    (6, 9, EntryDistribution(ModulusLaw.NAKAGAMI, 2.5, 0.5, 1.5), 8),
    (4, 6, EntryDistribution(ModulusLaw.GAUSSIAN, None, 1.6, 0.4), 6),
    (5, 10, EntryDistribution(ModulusLaw.GAUSSIAN, None, 1.6, 0.4), 2),
]


@pytest.mark.parametrize("N, M, dist, seed", NONCIRCULAR_MODELS)
def test_mi_bias_integral_matches_closed_form(N, M, dist, seed) -> None:
    sigma2 = 0.2
    model = profile_model(N, M, dist, seed=seed)
    f = mi_function(sigma2)
    stats = mi_clt(model, sigma2)
    result = lss_mean(model, f, contour=default_contour(model, f, nodes=512))
    assert abs(result.B_f.real - stats.B_C) <= 1e-4 * max(1.0, abs(stats.B_C))
    assert result.V_f.real == pytest.approx(stats.V, rel=1e-5)


def test_mi_bias_integral_is_real_on_full_contour(noncircular_model) -> None:
    f = mi_function(0.2)
    full = lss_mean(noncircular_model, f, use_symmetry=False)
    assert abs(full.B_f.imag) < 1e-8
    assert full.B_f.real == pytest.approx(mi_clt(noncircular_model, 0.2).B_C, abs=1e-4)


def test_half_contour_matches_full_contour(noncircular_model) -> None:
    f = mi_function(0.5)
    half = lss_mean(noncircular_model, f, use_symmetry=True)
    full = lss_mean(noncircular_model, f, use_symmetry=False)
    assert half.V_f == pytest.approx(full.V_f, rel=1e-9, abs=1e-10)
    assert half.B_f == pytest.approx(full.B_f, rel=1e-7, abs=1e-10)


def test_rectangle_agrees_with_ellipse(noncircular_model) -> None:
    f = polynomial([0.5, 1.0, 0.25])
    ellipse = lss_mean(noncircular_model, f, with_bias=False)
    rectangle = lss_mean(
        noncircular_model, f,
        contour=default_contour(noncircular_model, f, nodes=512, shape=ContourShape.RECTANGLE),
        with_bias=False,
    )
    assert rectangle.V_f.real == pytest.approx(ellipse.V_f.real, rel=1e-6)
    assert ellipse.B_f == 0


def test_parallel_nodes_are_summed_in_order(noncircular_model) -> None:
    f = mi_function(0.2)
    assert lss_mean(noncircular_model, f, workers=4) == lss_mean(noncircular_model, f, workers=1)


def test_branch_point_inside_contour_is_rejected(noncircular_model) -> None:
    wide = default_contour(noncircular_model, margin=1.0)
    with pytest.raises(ContourViolationError) as info:
        lss_mean(noncircular_model, mi_function(0.2), contour=wide)
    assert info.value.exit_code == 2
