import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lagtherm import catalog
from lagtherm.core import LinearFriction
from lagtherm.errors import AsymmetricConductivity, NegativeConductivity, SingularHeatCapacity
from lagtherm.integrate import IntegratorConfig, simulate
from lagtherm.network import (
    FreeEnergyModel,
    HeatSource,
    NetworkModel,
    NetworkState,
    NetworkSystem,
    entropy_rate,
    exterior_entropy_bound,
    free_energy_rhs,
    friction_matrix,
    heat_flows,
    network_rhs,
    reversibility_check,
    validate_conductivity,
)
from lagtherm.thermo import ThermalBody


def bodies_model(n, kappa=None, sources=(), frictions=(), C=1.0):
    """``n`` thermal bodies (``T = exp(S/C)``) plus one inert coordinate."""
    body = ThermalBody(C)
    return NetworkModel(
        n,
        1,
        lambda q, v, S: 0.5 * v[0] ** 2 - 0.5 * q[0] ** 2 - float(np.sum(body.energy(S))),
        dL_dq=lambda q, v, S: -q,
        dL_dv=lambda q, v, S: v,
        dL_dS=lambda q, v, S: -body.temperature(S),
        mass_matrix=lambda q, v, S: np.eye(1),
        separable=True,
        conductivities=kappa,
        sources=sources,
        frictions=frictions,
    )


def state_at(T, v=0.0, C=1.0):
    return NetworkState([0.0], [v], C * np.log(np.asarray(T, dtype=float)))


def sym_kappa(n, elements=st.floats(0, 5)):
    return arrays(np.float64, (n, n), elements=elements).map(lambda a: np.triu(a, 1) + np.triu(a, 1).T)


dyadic = st.integers(0, 4096).map(lambda k: k / 256)


# ---------------------------------------------------------------- friction_matrix


def test_friction_matrix_two_bodies():
    J = friction_matrix([[0, 3], [3, 0]])
    assert np.array_equal(J, [[3, -3], [-3, 3]])
    assert np.array_equal(J.sum(axis=0), [0, 0])


def test_friction_matrix_zero():
    assert not np.any(friction_matrix(np.zeros((3, 3))))


def test_friction_matrix_heat_identity():
    k = np.array([[0, 1, 2], [1, 0, 0], [2, 0, 0]], dtype=float)
    J = friction_matrix(k)
    assert np.array_equal(J[0], [3, -1, -2])
    T = np.array([1.0, 2.0, 3.0])
    assert -(J[0] @ T) == 5.0 == k[0, 1] * (T[1] - T[0]) + k[0, 2] * (T[2] - T[0])


@given(st.integers(2, 6).flatmap(lambda n: sym_kappa(n, dyadic)))
def test_friction_matrix_columns_sum_exactly_to_zero(k):
    # dyadic entries keep every partial sum representable, so the identity is exact
    assert np.all(friction_matrix(k).sum(axis=0) == 0.0)


@given(st.integers(2, 6).flatmap(sym_kappa))
def test_friction_matrix_columns_sum_to_rounding(k):
    n = k.shape[0]
    bound = 2 * n * np.finfo(float).eps * max(1.0, k.sum(axis=0).max())
    assert np.all(np.abs(friction_matrix(k).sum(axis=0)) <= bound)


@settings(max_examples=50)
@given(st.integers(2, 5).flatmap(lambda n: st.tuples(sym_kappa(n), arrays(np.float64, n, elements=st.floats(0.1, 10)))))
def test_friction_matrix_reproduces_heat_flows(args):
    k, T = args
    J = friction_matrix(k)
    direct = (k * (T[None, :] - T[:, None])).sum(axis=1)
    assert np.allclose(-(J @ T), direct, rtol=1e-12, atol=1e-12 * np.abs(k).sum() * T.max())


def test_conductivity_validation():
    with pytest.raises(AsymmetricConductivity) as exc:
        validate_conductivity([[0, 1], [2, 0]])
    assert exc.value.invariant == "conductivity symmetry"
    with pytest.raises(NegativeConductivity):
        validate_conductivity([[0, -1], [-1, 0]])


# ---------------------------------------------------------------- heat flows


def test_heat_flow_substitution():
    m = bodies_model(2, [[0, 2], [2, 0]])
    P, _ = heat_flows(m, state_at([280.0, 300.0]))
    assert P[0, 1] == pytest.approx(40.0, rel=1e-12) and P[1, 0] == pytest.approx(-40.0, rel=1e-12)


def test_uniform_temperature_no_flow():
    m = bodies_model(3, np.ones((3, 3)) - np.eye(3))
    P, _ = heat_flows(m, state_at([2.0, 2.0, 2.0]))
    assert not np.any(P)


def test_source_flow():
    src = HeatSource(coupling=[0.5], temperature=350.0)
    m = bodies_model(1, sources=[src])
    _, E = heat_flows(m, state_at([300.0]))
    assert E[0, 0] == pytest.approx(25.0, rel=1e-12)


@given(st.integers(2, 5).flatmap(lambda n: st.tuples(sym_kappa(n), arrays(np.float64, n, elements=st.floats(0.1, 10)))))
def test_heat_flows_antisymmetric(args):
    k, T = args
    P, _ = heat_flows(bodies_model(len(T), k), state_at(T))
    assert np.array_equal(P, -P.T)


# ---------------------------------------------------------------- network_rhs / entropy rate


def test_reversible_network_keeps_entropies():
    d = network_rhs(bodies_model(3), state_at([1.0, 2.0, 3.0], v=0.7))
    assert not np.any(d.S)


def test_two_bodies_entropy_rates():
    m = bodies_model(2, [[0, 1], [1, 0]])
    st_ = state_at([1.0, 2.0])
    d = network_rhs(m, st_)
    assert d.S == pytest.approx([1.0, -0.5], rel=1e-12)
    total, internal, external = entropy_rate(m, st_)
    assert total == pytest.approx(0.5, rel=1e-12)
    assert internal == pytest.approx(0.5, rel=1e-12)
    assert external == 0.0


def test_reversible_entropy_rate_zero():
    assert entropy_rate(bodies_model(2), state_at([1.0, 3.0])) == (0.0, 0.0, 0.0)


def test_hot_source_only_external():
    m = bodies_model(2, sources=[HeatSource([1.0, 2.0], temperature=5.0)])
    total, internal, external = entropy_rate(m, state_at([1.0, 2.0]))
    assert internal == 0.0 and external > 0.0 and total == pytest.approx(external)


def test_two_piston_stationary_point():
    p = catalog.resolve("two_piston")[0]
    ent, _, gases = catalog.two_piston_models(p)
    # equal temperatures and pressures: x = L/2 with equal gases
    x = p["gap_length"] / 2
    S = [gases[0].entropy(1.2, p["area1"] * x), gases[1].entropy(1.2, p["area2"] * (p["gap_length"] - x))]
    d = network_rhs(ent, NetworkState([x], [0.0], S))
    assert d.q[0] == 0.0
    assert d.v[0] == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(d.S, 0.0, atol=1e-15)


@settings(max_examples=50)
@given(
    st.integers(2, 4).flatmap(lambda n: st.tuples(sym_kappa(n), arrays(np.float64, n, elements=st.floats(0.2, 5)))),
    st.floats(-2, 2),
    st.floats(0, 3),
)
def test_internal_production_nonnegative(args, v, lam):
    k, T = args
    n = len(T)
    fr = [LinearFriction(lam)] + [None] * (n - 1)
    _, internal, _ = entropy_rate(bodies_model(n, k, frictions=fr), state_at(T, v))
    assert internal >= 0.0


# ---------------------------------------------------------------- exterior bound


def test_exterior_bound_isolated():
    assert exterior_entropy_bound(bodies_model(2), state_at([1.0, 2.0])) == (0.0, 0.0, 0.0)


def test_exterior_bound_internal_conduction():
    lhs, mid, rhs = exterior_entropy_bound(bodies_model(2, [[0, 1], [1, 0]]), state_at([1.0, 2.0]))
    assert lhs > 0.0 and mid == 0.0 and rhs == 0.0


@settings(max_examples=50)
@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.1, 3))
def test_exterior_bound_chain(TA, TR, kap):
    m = bodies_model(1, sources=[HeatSource([kap], temperature=TR)])
    lhs, mid, rhs = exterior_entropy_bound(m, state_at([TA]))
    assert mid == pytest.approx(kap * (TR - TA) / TA, rel=1e-12, abs=1e-14)
    assert rhs == pytest.approx(kap * (TR - TA) / TR, rel=1e-12, abs=1e-14)
    assert lhs >= mid - 1e-14 and mid >= rhs - 1e-14


# ---------------------------------------------------------------- reversibility check


def test_reversibility_check():
    assert reversibility_check(bodies_model(2))
    assert not reversibility_check(bodies_model(2, [[0, 1], [1, 0]]))
    hot = bodies_model(1, sources=[HeatSource([1.0], temperature=float(np.exp(1.0)))])
    assert not reversibility_check(hot, state_at([1.0]))
    assert reversibility_check(hot, NetworkState([0.0], [0.0], [1.0]))


# ---------------------------------------------------------------- free-energy formulation


def body_free_model(n, C, kappa=None, sources=(), cap=True):
    """Bodies with ``U = C T``; the free-energy Lagrangian is fixed up to an entropy constant."""
    C = np.asarray(C, dtype=float)
    F = lambda q, v, T: 0.5 * v[0] ** 2 - 0.5 * q[0] ** 2 + float(np.sum(C * T * np.log(T)))
    return FreeEnergyModel(
        n,
        1,
        F,
        d_dq=lambda q, v, T: -q,
        d_dv=lambda q, v, T: v,
        d_dT=lambda q, v, T: C * (np.log(T) + 1),
        mass_matrix=lambda q, v, T: np.eye(1),
        heat_capacity=(lambda q, v, T: np.diag(C / T)) if cap else None,
        dS_dq=lambda q, v, T: np.zeros((n, 1)),
        dLv_dT=lambda q, v, T: np.zeros((1, n)),
        dLv_dq=lambda q, v, T: np.zeros((1, 1)),
        conductivities=kappa,
        sources=sources,
    )


def test_free_energy_reversible_temperatures_frozen():
    _, _, Tdot = free_energy_rhs(body_free_model(2, [1.0, 2.0]), [0.3], [0.5], [1.0, 2.0])
    assert not np.any(Tdot)


@given(st.floats(0.2, 5), st.floats(0.2, 5), st.floats(0.1, 3))
def test_free_energy_pure_heating(T, c, kap):
    m = body_free_model(1, [c * T], sources=[HeatSource([kap], temperature=T + 1.0)])
    # capacity C_AA = c at this temperature (C/T with C = c T)
    _, _, Tdot = free_energy_rhs(m, [0.0], [0.0], [T])
    assert Tdot[0] == pytest.approx(kap / (c * T), rel=1e-12)


def test_free_energy_matches_fd_capacity():
    a = body_free_model(2, [1.0, 2.0], [[0, 0.5], [0.5, 0]])
    b = body_free_model(2, [1.0, 2.0], [[0, 0.5], [0.5, 0]], cap=False)
    ra = free_energy_rhs(a, [0.1], [0.2], [1.0, 3.0])[2]
    rb = free_energy_rhs(b, [0.1], [0.2], [1.0, 3.0])[2]
    assert np.allclose(ra, rb, rtol=1e-7)


def test_singular_heat_capacity():
    m = body_free_model(1, [0.0])
    with pytest.raises(SingularHeatCapacity):
        free_energy_rhs(m, [0.0], [0.0], [1.0])


def test_two_piston_formulations_agree():
    cfg = IntegratorConfig("rk4", dt=1e-2, t_end=5.0, record_every=10)
    ent = catalog.build("two_piston")
    fre = catalog.build("two_piston", {"formulation": "free_energy"})
    a = simulate(ent.system, ent.y0, cfg)
    b = simulate(fre.system, fre.y0, cfg)
    assert np.max(np.abs(a["T1"] - b["T1"])) <= 1e-6
    assert np.max(np.abs(a["T2"] - b["T2"])) <= 1e-6
    assert np.max(np.abs(a["q1"] - b["q1"])) <= 1e-6


def test_network_system_labels():
    sys_ = NetworkSystem(bodies_model(2, sources=[HeatSource([1.0, 1.0], body=ThermalBody())]))
    assert sys_.labels == ["q1", "v1", "S1", "S2", "S_R1"]


def test_finite_source_conserves_energy_and_entropy_grows():
    src = HeatSource([0.5, 0.2], body=ThermalBody(2.0, 3.0))
    sys_ = NetworkSystem(bodies_model(2, [[0, 0.3], [0.3, 0]], sources=[src]))
    y0 = np.array([0.0, 0.0, 0.0, np.log(2.0), 0.0])
    tr = simulate(sys_, y0, IntegratorConfig("rk4", dt=1e-2, t_end=3.0))
    body = ThermalBody(2.0, 3.0)
    total_E = tr["E"] + body.energy(tr["S_R1"])
    assert np.max(np.abs(total_E - total_E[0])) < 1e-9
    S_all = tr["S_total"] + tr["S_R1"]
    assert np.all(np.diff(S_all) >= -1e-14)
