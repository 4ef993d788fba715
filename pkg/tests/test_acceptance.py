"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

from __future__ import annotations

import numpy as np

from conftest import entropy_columns, record_acceptance, run_entry
from lagtherm import catalog
from lagtherm.chemistry import ReactionNetwork
from lagtherm.continuum1d import nsf_rhs, state_from_primitive
from lagtherm.diagnostics import energy_audit, entropy_monotone, gradient_check, mass_audit, second_law_audit
from lagtherm.errors import InvalidOnsager
from lagtherm.integrate import IntegratorConfig, simulate
from lagtherm.network import NetworkModel, NetworkState, friction_matrix, heat_flows
from lagtherm.numerics import check_onsager

ODE = [n for n in catalog.names() if catalog.get(n).kind == "ode"]
CONTINUUM = [n for n in catalog.names() if catalog.get(n).kind == "continuum"]
RK4_10 = dict(method="rk4", dt=1e-3, t_end=10.0)


def test_01_first_law_discrete():
    worst_iso, worst_src = {}, {}
    for name in ODE:
        _, iso = run_entry(name, {"isolated": True}, record_every=1, **RK4_10)
        _, src = run_entry(name, None, record_every=1, **RK4_10)
        worst_iso[name] = energy_audit(iso)
        worst_src[name] = energy_audit(src)
    a, b = max(worst_iso.values()), max(worst_src.values())
    ok = a <= 1e-6 and b <= 1e-6
    record_acceptance("1 first law", ok, f"max isolated residual {a:.2e}, max driven residual {b:.2e} (tol 1e-6)")
    assert ok, (worst_iso, worst_src)


def test_02_second_law_discrete():
    prod = {}
    for name in ODE:
        for flags in ({"isolated": True}, None):
            _, tr = run_entry(name, flags, record_every=1, **RK4_10)
            prod[(name, bool(flags))] = second_law_audit(tr)
    for name in CONTINUUM:
        _, tr = run_entry(name)
        prod[(name, False)] = second_law_audit(tr)
    drift = {}
    for name in catalog.reversible_capable():
        built, tr = run_entry(name, {"reversible": True}, record_every=10, **RK4_10)
        prod[(name, "rev")] = second_law_audit(tr)
        drift[name] = max(float(np.max(np.abs(S - S[0]))) for S in entropy_columns(tr).values())
    p, d = min(prod.values()), max(drift.values())
    ok = p >= -1e-12 and d <= 1e-10
    record_acceptance("2 second law", ok, f"min production {p:.2e} (>= -1e-12), max reversible S drift {d:.2e} (<= 1e-10)")
    assert ok, (prod, drift)


def test_03_two_piston_equilibration():
    built, dia = run_entry("two_piston", stop_hold=1.0)
    t_end = catalog.default_config("two_piston").t_end
    reached = dia.status == "stopped" and dia.t[-1] < t_end
    T1, T2 = dia["T1"][-1], dia["T2"][-1]
    dT = abs(T1 - T2) / (0.5 * (T1 + T2))
    xdot = abs(dia["v1"][-1])
    _, adi = run_entry("two_piston", {"kappa": 0.0}, stop_hold=1.0)
    A1, A2 = adi["T1"][-1], adi["T2"][-1]
    gap_T = abs(A1 - A2) / (0.5 * (A1 + A2))
    mech = max(abs(adi["v1"][-1]), abs(adi["gap_p"][-1]))
    ok = reached and dT <= 1e-4 and xdot <= 1e-4 and adi.status == "stopped" and mech <= 1e-4 and gap_T > 1e-2
    record_acceptance(
        "3 two-piston",
        ok,
        f"diathermic stop t={dia.t[-1]:.2f} |dT|/T={dT:.1e} |xdot|={xdot:.1e}; "
        f"adiabatic stop t={adi.t[-1]:.2f} mech gap {mech:.1e} |dT|/T={gap_T:.2e}",
    )
    assert ok


def test_04_chemical_formulations_agree():
    _, a = run_entry("reactor_psi", record_every=10, **RK4_10)
    _, b = run_entry("reactor_N", record_every=10, **RK4_10)
    diff = max(float(np.max(np.abs(a[f"N{i}"] - b[f"N{i}"]))) for i in (1, 2, 3))
    ok = np.array_equal(a.t, b.t) and diff <= 1e-8
    record_acceptance("4 psi vs N", ok, f"max |N_psi - N_N| = {diff:.2e} (tol 1e-8)")
    assert ok


def test_05_mass_conservation():
    res = {}
    for name in ("reactor_psi", "reactor_N", "chem_piston", "membrane", "membrane_reacting"):
        _, tr = run_entry(name, None, record_every=1, **RK4_10)
        res[name] = mass_audit(tr)
    _, tr = run_entry("multicomponent1d")
    res["multicomponent1d"] = mass_audit(tr)
    worst = max(res.values())
    ok = worst <= 1e-10
    record_acceptance("5 mass", ok, f"max mass residual {worst:.2e} (tol 1e-10)")
    assert ok, res


def test_06_membrane_isolation():
    out = {}
    for name in ("membrane", "membrane_reacting"):
        _, tr = run_entry(name, {"isolated": True})
        out[name] = (
            float(np.max(np.abs(tr["dU_dt_residual"]))),
            float(np.min(tr["S_dot"])),
            float(tr["gap_mu"][-1]),
        )
    r = max(v[0] for v in out.values())
    s = min(v[1] for v in out.values())
    g = max(v[2] for v in out.values())
    ok = r <= 1e-8 and s >= -1e-12 and g <= 1e-3
    record_acceptance("6 membrane", ok, f"dU/dt residual {r:.1e}, min Sdot {s:.1e}, final mu gap {g:.1e}")
    assert ok, out


def _decay(n_cells, dt):
    built = catalog.build("nsf1d", {"n_cells": n_cells, "isolated": True}, {"v_amp": 0.1, "T_amp": 0.05})
    tr = simulate(built.system, built.y0, IntegratorConfig("rk4", dt=dt, t_end=1.0, record_every=10))
    return built, tr


def test_07_nsf_continuum():
    built = catalog.build("nsf1d", {"n_cells": 128})
    y = state_from_primitive(built.model, 1.3, 0.0, 0.9)
    fixed = not np.any(nsf_rhs(built.model, y))
    b1, coarse = _decay(128, 1e-3)
    _, fine = _decay(256, 5e-4)
    e1, e2 = energy_audit(coarse), energy_audit(fine)
    mono = entropy_monotone(coarse, -1e-10) and entropy_monotone(fine, -1e-10)
    ok = fixed and e1 <= 1e-4 and e1 / e2 >= 4.0 and mono
    record_acceptance(
        "7 NSF",
        ok,
        f"uniform fixed point {fixed}, energy residual {e1:.2e} -> {e2:.2e} (x{e1 / e2:.1f}), entropy monotone {mono}",
    )
    assert ok


def test_08_multicomponent_continuum():
    _, tr = run_entry("multicomponent1d", {"isolated": True})
    m = mass_audit(tr)
    i_min = float(np.min(tr["i_min"]))
    ok = m <= 1e-12 and i_min >= -1e-12
    record_acceptance("8 multicomponent", ok, f"mass residual {m:.1e} (tol 1e-12), min cell production {i_min:.2e}")
    assert ok


def test_09_gradient_checks():
    errs = {name: gradient_check(model, 100, seed=7) for name, model in catalog.gradient_targets().items()}
    worst = max(errs.values())
    ok = worst <= 1e-6
    record_acceptance("9 gradients", ok, f"max relative error {worst:.1e} over {len(errs)} targets (tol 1e-6)")
    assert ok, errs


def test_10_structural_identities():
    rng = np.random.default_rng(3)
    cols_zero, antisym = True, True
    for n in range(2, 7):
        k = rng.integers(0, 512, (n, n)) / 256.0  # dyadic: float sums are exact
        k = np.triu(k, 1)
        k = k + k.T
        cols_zero &= bool(np.all(friction_matrix(k).sum(axis=0) == 0.0))
        model = NetworkModel(n, 1, lambda q, v, S: -np.sum(np.exp(S)), dL_dS=lambda q, v, S: -np.exp(S), conductivities=k)
        st = NetworkState([0.0], [0.0], rng.uniform(-1, 1, n))
        P, _ = heat_flows(model, st)
        antisym &= bool(np.array_equal(P, -P.T))
    rejected = []
    for bad in ([[1.0, 0.2], [0.1, 1.0]], [[1.0, 2.0], [2.0, 1.0]]):
        try:
            check_onsager(bad)
        except InvalidOnsager:
            rejected.append(True)
        else:
            rejected.append(False)
    try:
        ReactionNetwork([[1, 0]], [[0, 1]], rate_matrix=[[-1.0]])
        rejected.append(False)
    except InvalidOnsager:
        rejected.append(True)
    ok = cols_zero and antisym and all(rejected)
    record_acceptance("10 structure", ok, f"zero column sums {cols_zero}, antisymmetric flows {antisym}, rejections {rejected}")
    assert ok
