import numpy as np
import pytest

from rmtbias.errors import ParameterDomainError
from rmtbias.models.domain import ChannelModel, EntryMoments
from rmtbias.services.bias_engine import bias_closed_form
from rmtbias.services.fixed_point import solve
from rmtbias.services.quantities import trace_functionals, u_functionals

from tests.conftest import centered_model, random_model


def _central_difference(model, z: complex, h: float = 1e-5):
    plus, minus = solve(model, z + h), solve(model, z - h)
    return (plus.delta - minus.delta) / (2 * h), (plus.delta_t - minus.delta_t) / (2 * h)


def test_derivatives_match_central_difference(noncircular_model) -> None:
    for z in (-0.2, -0.5 + 0.3j):
        q = trace_functionals(noncircular_model, solve(noncircular_model, z))
        d_fd, dt_fd = _central_difference(noncircular_model, z)
        assert q.dprime == pytest.approx(d_fd, rel=1e-6)
        assert q.dtprime == pytest.approx(dt_fd, rel=1e-6)


def test_scalar_derivative_closed_form() -> None:
    # N = M = 1: w x^2 + w x = 1 with w = -z, so dx/dz = 1 / (2x + 1) = 1 / sqrt(5) at z = -1
    model = centered_model(1, 1, EntryMoments(0.0, 0.0))
    q = trace_functionals(model, solve(model, -1.0))
    assert q.dprime.real == pytest.approx(1.0 / np.sqrt(5.0), abs=1e-9)
    assert q.dprime == pytest.approx(q.dtprime)


def test_transposed_F_equals_transmit_underlined_F(noncircular_model) -> None:
    for z in (-0.2, 1.0 + 0.5j):
        q = trace_functionals(noncircular_model, solve(noncircular_model, z))
        assert q.F_T == pytest.approx(q.Ft_T_under, rel=1e-10)


def test_u_functionals_reduce_to_ledger(noncircular_model) -> None:
    sol = solve(noncircular_model, -0.3)
    q = trace_functionals(noncircular_model, sol)
    receive = u_functionals(noncircular_model, sol, noncircular_model.D, side="receive")
    transmit = u_functionals(noncircular_model, sol, np.diag(noncircular_model.Dt), side="transmit")
    assert receive.gamma == pytest.approx(q.gamma, rel=1e-12)
    assert receive.gamma_T == pytest.approx(q.gamma_T, rel=1e-12)
    assert receive.F == pytest.approx(q.F, rel=1e-12)
    assert transmit.gamma == pytest.approx(q.gamma_t, rel=1e-12)
    assert transmit.F_T_under == pytest.approx(q.Ft_T_under, rel=1e-12)


def test_u_functionals_reject_wrong_shape(noncircular_model) -> None:
    sol = solve(noncircular_model, -0.3)
    with pytest.raises(ParameterDomainError):
        u_functionals(noncircular_model, sol, np.eye(noncircular_model.M), side="receive")
    with pytest.raises(ParameterDomainError):
        u_functionals(noncircular_model, sol, np.eye(noncircular_model.N), side="sideways")


def test_circular_entries_give_unit_transposed_determinant(gaussian_model) -> None:
    q = trace_functionals(gaussian_model, solve(gaussian_model, -0.2))
    assert q.Delta_T == 1.0
    assert 0 < q.Delta.real < 1


def test_real_point_ledger_is_real(noncircular_model) -> None:
    q = trace_functionals(noncircular_model, solve(noncircular_model, -0.2))
    # F_T and F_T_under are conjugate to each other, not real
    real_fields = ("gamma", "gamma_T", "gamma_t", "gamma_t_T", "eta", "eta_t", "F", "Delta", "Delta_T", "dprime", "dtprime")
    for name in real_fields:
        value = q.scalars()[name]
        assert abs(complex(value).imag) < 1e-10 * max(1.0, abs(value)), name


def _literal_ledger(model, sol) -> dict:
    """Dense matrix products written exactly as the functionals read"""
    M, z, v = model.M, sol.z.z, model.moments.vartheta
    A, AH, Ab, AT = model.A, model.A.conj().T, model.A.conj(), model.A.T
    T, Tt = sol.T, sol.Tt
    D, Dt = np.diag(model.D), np.diag(model.Dt)
    R2 = np.diag(1.0 / (1.0 + sol.delta_t * model.D) ** 2)
    Rt2 = np.diag(1.0 / (1.0 + sol.delta * model.Dt) ** 2)
    tr = lambda *factors: np.trace(np.linalg.multi_dot(factors)) / M
    ledger = {
        "gamma": tr(D, T, D, T),
        "gamma_T": tr(D, T, D, T.T),
        "gamma_t": tr(Dt, Tt, Dt, Tt),
        "gamma_t_T": tr(Dt, Tt, Dt, Tt.T),
        "F": tr(D, T, A, Rt2, Dt, AH, T),
        "F_T": tr(D, T.T, Ab, Rt2, Dt, AH, T),
        "F_T_under": tr(D, T, A, Rt2, Dt, AT, T.T),
        "Ft_T": tr(Dt, Tt.T, AT, R2, D, A, Tt),
        "Ft_T_under": tr(Dt, Tt, AH, R2, D, Ab, Tt.T),
        "eta": np.sum(np.diag(T) ** 2 * model.D ** 2) / M,
        "eta_t": np.sum(np.diag(Tt) ** 2 * model.Dt ** 2) / M,
    }
    ledger["Delta"] = (1 - ledger["F"]) ** 2 - z * z * ledger["gamma"] * ledger["gamma_t"]
    ledger["Delta_T"] = (
        (1 - v * ledger["F_T"]) * (1 - np.conj(v) * ledger["F_T_under"])
        - abs(v) ** 2 * z * z * ledger["gamma_T"] * ledger["gamma_t_T"]
    )
    return ledger


@pytest.mark.parametrize("seed", range(5))
def test_ledger_matches_literal_products(seed) -> None:
    model = random_model(seed)
    for z in (-0.4, -0.3 + 0.6j):
        sol = solve(model, z)
        scalars = trace_functionals(model, sol).scalars()
        for name, expected in _literal_ledger(model, sol).items():
            assert scalars[name] == pytest.approx(expected, rel=1e-10, abs=1e-13), (seed, z, name)


def test_u_functionals_match_literal_products() -> None:
    model = random_model(7)
    sol = solve(model, -0.2 + 0.3j)
    rng = np.random.default_rng(3)
    U = rng.standard_normal((model.N, model.N)) + 1j * rng.standard_normal((model.N, model.N))
    Ut = rng.standard_normal((model.M, model.M)) + 1j * rng.standard_normal((model.M, model.M))
    A, AH, Ab, AT = model.A, model.A.conj().T, model.A.conj(), model.A.T
    T, Tt, M = sol.T, sol.Tt, model.M
    D, Dt = np.diag(model.D), np.diag(model.Dt)
    R2 = np.diag(1.0 / (1.0 + sol.delta_t * model.D) ** 2)
    Rt2 = np.diag(1.0 / (1.0 + sol.delta * model.Dt) ** 2)
    tr = lambda *factors: np.trace(np.linalg.multi_dot(factors)) / M

    receive = u_functionals(model, sol, U, side="receive")
    assert receive.gamma == pytest.approx(tr(U, T, D, T), rel=1e-10)
    assert receive.gamma_T == pytest.approx(tr(D, T, U, T.T), rel=1e-10)
    assert receive.F == pytest.approx(tr(U, T, A, Rt2, Dt, AH, T), rel=1e-10)
    assert receive.F_T == pytest.approx(tr(U, T.T, Ab, Rt2, Dt, AH, T), rel=1e-10)
    assert receive.F_T_under == pytest.approx(tr(U, T, A, Rt2, Dt, AT, T.T), rel=1e-10)
    assert receive.script_cross == pytest.approx(tr(Dt, Tt.T, Dt, Tt, AH, R2, U, A, Tt), rel=1e-10)

    transmit = u_functionals(model, sol, Ut, side="transmit")
    assert transmit.gamma == pytest.approx(tr(Ut, Tt, Dt, Tt), rel=1e-10)
    assert transmit.gamma_T == pytest.approx(tr(Dt, Tt, Ut, Tt.T), rel=1e-10)
    assert transmit.F == pytest.approx(tr(Ut, Tt, AH, R2, D, A, Tt), rel=1e-10)
    assert transmit.F_T == pytest.approx(tr(Ut, Tt.T, AT, R2, D, A, Tt), rel=1e-10)
    assert transmit.F_T_under == pytest.approx(tr(Ut, Tt, AH, R2, D, Ab, Tt.T), rel=1e-10)
    assert transmit.script_cross == pytest.approx(tr(D, T.T, D, T, A, Rt2, Ut, AH, T), rel=1e-10)


def test_kappa_part_is_linear_in_kappa(noncircular_model) -> None:
    vartheta = noncircular_model.moments.vartheta
    for z in (-0.2, -0.5 + 0.3j):
        sol = solve(noncircular_model, z)
        one = bias_closed_form(noncircular_model.with_moments(EntryMoments(vartheta, 1.0)), sol)
        three = bias_closed_form(noncircular_model.with_moments(EntryMoments(vartheta, 3.0)), sol)
        assert three.B_kappa == pytest.approx(3.0 * one.B_kappa, rel=1e-12)
        assert three.B_theta == pytest.approx(one.B_theta, rel=1e-12)


def test_centered_bias_depends_on_vartheta_modulus_only() -> None:
    rng = np.random.default_rng(11)
    D, Dt = rng.uniform(0.5, 1.5, 5), rng.uniform(0.5, 1.5, 7)
    real = ChannelModel(np.zeros((5, 7)), D, Dt, EntryMoments(0.6, 0.0))
    for beta in (0.4, 1.9, np.pi):
        rotated = real.with_moments(EntryMoments(0.6 * np.exp(1j * beta), 0.0))
        for z in (-0.2, -0.4 + 0.5j):
            sol = solve(real, z)
            assert bias_closed_form(rotated, sol).B_theta == pytest.approx(
                bias_closed_form(real, sol).B_theta, rel=1e-12
            ), (beta, z)


def test_bias_and_delta_vanish_for_large_omega(noncircular_model) -> None:
    magnitudes = []
    for omega in (1e2, 1e4, 1e6):
        sol = solve(noncircular_model, -omega)
        assert sol.delta.real * omega == pytest.approx(
            noncircular_model.D.sum() / noncircular_model.M, rel=10.0 / omega
        )
        magnitudes.append(abs(bias_closed_form(noncircular_model, sol).total))
    assert magnitudes[-1] <= 1e-3
    assert magnitudes[0] > magnitudes[1] > magnitudes[2]


def test_delta_decreases_along_negative_axis(noncircular_model) -> None:
    solutions = [solve(noncircular_model, -omega) for omega in np.geomspace(0.05, 50.0, 25)]
    delta = np.array([sol.delta.real for sol in solutions])
    delta_t = np.array([sol.delta_t.real for sol in solutions])
    assert np.all(np.diff(delta) < 0)
    assert np.all(np.diff(delta_t) < 0)
