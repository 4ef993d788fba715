import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagtherm.core import (
    CoulombFriction,
    LinearFriction,
    NoFriction,
    SimpleModel,
    SimpleState,
    SimpleSystem,
    energy,
    internal_production,
    simple_rhs,
    temperature,
)
from lagtherm.errors import DimensionMismatch, NonPositiveTemperature, SingularMassMatrix
from lagtherm.thermo import PerfectGas

finite = st.floats(-3, 3, allow_nan=False)


def mass_spring_model(k0=1.0, alpha=2.0, m=1.0, friction=None, analytic=True):
    k = lambda S: k0 * (1 + alpha * S)
    L = lambda q, v, S: 0.5 * m * v[0] ** 2 - 0.5 * k(S) * q[0] ** 2 - np.exp(S)
    extra = {}
    if analytic:
        extra = dict(
            dL_dq=lambda q, v, S: np.array([-k(S) * q[0]]),
            dL_dv=lambda q, v, S: m * v,
            dL_dS=lambda q, v, S: -0.5 * k0 * alpha * q[0] ** 2 - np.exp(S),
            mass_matrix=lambda q, v, S: np.array([[m]]),
            separable=True,
        )
    return SimpleModel(1, L, friction=friction or NoFriction(), **extra)


def harmonic(m=1.0, k=1.0, U=lambda S: np.exp(S), dU=lambda S: np.exp(S), friction=None, **kw):
    return SimpleModel(
        1,
        lambda q, v, S: 0.5 * m * v[0] ** 2 - 0.5 * k * q[0] ** 2 - U(S),
        dL_dq=lambda q, v, S: -k * q,
        dL_dv=lambda q, v, S: m * v,
        dL_dS=lambda q, v, S: -dU(S),
        mass_matrix=lambda q, v, S: np.array([[m]]),
        separable=True,
        friction=friction or NoFriction(),
        **kw,
    )


# ---------------------------------------------------------------- temperature


@pytest.mark.parametrize("analytic", [True, False])
def test_mass_spring_temperature_against_fd_oracle(analytic):
    model = mass_spring_model(analytic=analytic)
    s = SimpleState([1.0], [0.0], 0.0)
    h = 1e-6
    L = lambda S: 0.5 * 0 - 0.5 * (1 + 2 * S) * 1.0 - np.exp(S)
    oracle = -(L(h) - L(-h)) / (2 * h)
    assert oracle == pytest.approx(2.0, rel=1e-8)
    assert temperature(model, s) == pytest.approx(oracle, rel=1e-8)


def test_perfect_gas_reference_temperature():
    gas = PerfectGas(c=1.5, R=2.0, U0=3.0, S0=0.7, N0=1.3, V0=0.8)
    A = 0.5
    model = SimpleModel(
        1,
        lambda q, v, S: 0.5 * v[0] ** 2 - gas.energy(S, A * q[0], gas.N0),
        dL_dS=lambda q, v, S: -gas.temperature(S, A * q[0], gas.N0),
    )
    s = SimpleState([gas.V0 / A], [0.0], gas.S0)
    expected = gas.U0 / (gas.c * gas.N0 * gas.R)
    assert temperature(model, s) == pytest.approx(expected, rel=1e-14)
    # the closed form agrees with differentiating U numerically
    fd_model = SimpleModel(1, model.lagrangian)
    assert temperature(fd_model, s) == pytest.approx(expected, rel=1e-8)


def test_lagrangian_without_entropy_dependence_has_no_temperature():
    model = SimpleModel(1, lambda q, v, S: 0.5 * v[0] ** 2 - q[0] ** 2)
    with pytest.raises(NonPositiveTemperature):
        temperature(model, SimpleState([1.0], [0.0], 0.3))


# ---------------------------------------------------------------- energy


def test_energy_kinetic_plus_potential():
    model = SimpleModel(1, lambda q, v, S: 0.5 * 2 * v[0] ** 2 - 5.0 - 0 * S, dL_dv=lambda q, v, S: 2 * v)
    assert energy(model, SimpleState([0.0], [3.0], 0.0)) == pytest.approx(14.0, abs=1e-12)


@given(finite, finite)
def test_energy_at_rest_is_minus_lagrangian(q, S):
    model = mass_spring_model()
    s = SimpleState([q], [0.0], S)
    assert energy(model, s) == pytest.approx(-model.L(s.q, s.v, S), abs=1e-12)


def test_linear_rlc_energy():
    Lind, C = 0.7, 2.0
    U = lambda S: 3 * np.exp(S / 3)
    model = SimpleModel(
        1,
        lambda q, v, S: 0.5 * Lind * v[0] ** 2 - q[0] ** 2 / (2 * C) - U(S),
        dL_dv=lambda q, v, S: Lind * v,
    )
    q, i, S = 0.4, -1.1, 0.2
    assert energy(model, SimpleState([q], [i], S)) == pytest.approx(0.5 * Lind * i**2 + q**2 / (2 * C) + U(S), rel=1e-9)


# ---------------------------------------------------------------- internal production


def test_coulomb_production():
    model = harmonic(friction=CoulombFriction(0.5, eps=1e-12), U=lambda S: np.exp(S), dU=lambda S: np.exp(S))
    assert internal_production(model, SimpleState([0.0], [2.0], 0.0)) == pytest.approx(1.0, rel=1e-12)


def test_zero_friction_production():
    assert internal_production(harmonic(), SimpleState([0.3], [2.0], 0.0)) == 0.0


def test_linear_friction_production():
    model = harmonic(friction=LinearFriction(3.0), U=lambda S: 4 * S, dU=lambda S: 4.0)
    assert internal_production(model, SimpleState([0.0], [2.0], 0.0)) == pytest.approx(3.0, rel=1e-14)


@settings(max_examples=50)
@given(st.floats(0, 5), finite, finite, st.floats(-1, 1))
def test_production_nonnegative_for_dissipative_laws(lam, q, v, S):
    for law in (LinearFriction(lam), CoulombFriction(lam, 1e-3)):
        assert internal_production(harmonic(friction=law), SimpleState([q], [v], S)) >= 0.0


# ---------------------------------------------------------------- vector field


def test_one_cylinder_equilibrium_fixed_point():
    gas = PerfectGas()
    A, m = 1.0, 1.0
    x0, S0 = 1.2, 0.1
    p0 = gas.pressure(S0, A * x0)
    model = SimpleModel(
        1,
        lambda q, v, S: 0.5 * m * v[0] ** 2 - gas.energy(S, A * q[0]),
        dL_dq=lambda q, v, S: np.array([gas.pressure(S, A * q[0]) * A]),
        dL_dv=lambda q, v, S: m * v,
        dL_dS=lambda q, v, S: -gas.temperature(S, A * q[0]),
        mass_matrix=lambda q, v, S: np.array([[m]]),
        separable=True,
        friction=LinearFriction(0.5),
        external_force=lambda q, v, S, t: np.array([-p0 * A]),
    )
    d = simple_rhs(model, SimpleState([x0], [0.0], S0))
    assert d.q[0] == 0.0 and d.v[0] == pytest.approx(0.0, abs=1e-15) and d.S == 0.0


@given(finite, finite, finite)
def test_reversible_motion_keeps_entropy(q, v, S):
    d = simple_rhs(harmonic(), SimpleState([q], [v], S))
    assert d.S == 0.0


def test_linear_oscillator_rhs():
    model = SimpleModel(1, lambda q, v, S: 0.5 * v[0] ** 2 - 0.5 * q[0] ** 2 - np.exp(S))
    d = simple_rhs(model, SimpleState([1.0], [0.0], 0.0))
    assert d.v[0] == pytest.approx(-1.0, rel=1e-8)
    assert d.S == 0.0


@settings(max_examples=40)
@given(st.floats(0.1, 3), finite, finite, st.floats(-1, 1), st.floats(0, 2))
def test_first_law_pointwise(m, q, v, S, lam):
    """dE/dt = <F_ext, v> + P_H along the vector field."""
    fext = lambda q, v, S, t: np.array([0.3 * np.cos(q[0])])
    heat = lambda q, v, S, t: 0.2
    model = harmonic(m=m, friction=LinearFriction(lam), external_force=fext, heat_power=heat)
    s = SimpleState([q], [v], S)
    d = simple_rhs(model, s)
    # chain rule dE = dE/dq qdot + dE/dv vdot + dE/dS Sdot, with E = 1/2 m v^2 + 1/2 q^2 + e^S
    dE = q * d.q[0] + m * v * d.v[0] + np.exp(S) * d.S
    assert dE == pytest.approx(fext(s.q, s.v, S, 0)[0] * v + 0.2, abs=1e-10)


def test_singular_mass_matrix():
    model = harmonic(m=0.0)
    with pytest.raises(SingularMassMatrix):
        simple_rhs(model, SimpleState([1.0], [0.0], 0.0))


def test_state_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        SimpleState([1.0, 2.0], [0.0], 0.0)
    with pytest.raises(DimensionMismatch):
        SimpleState.from_vector(np.zeros(4), 1)


def test_system_labels_and_diagnostics():
    sys_ = SimpleSystem(harmonic())
    assert sys_.labels == ["q1", "v1", "S1"]
    d = sys_.diagnostics(0.0, np.array([1.0, 0.0, 0.0]))
    assert d["E"] == pytest.approx(1.5) and d["T1"] == pytest.approx(1.0) and d["I_internal"] == 0.0
