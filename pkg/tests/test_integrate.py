import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagtherm import catalog
from lagtherm.errors import DomainError, MaxStepsExceeded, StepRejected
from lagtherm.integrate import EquilibriumHook, IntegratorConfig, simulate, step_adaptive, step_fixed


class Toy:
    """Minimal system wrapper around a right-hand side."""

    def __init__(self, rhs, n, check=None, labels=None):
        self._rhs = rhs
        self._check = check
        self.labels = labels or [f"y{i + 1}" for i in range(n)]

    def rhs(self, t, y):
        return self._rhs(t, y)

    def check(self, y):
        if self._check:
            self._check(y)

    def diagnostics(self, t, y):
        return {"norm": float(np.linalg.norm(y))}


def positive(y):
    if np.any(y <= 0):
        raise DomainError("temperature must be positive")


# ---------------------------------------------------------------- fixed step


def test_zero_field_fixed_step():
    y = np.array([1.0, -2.0, 3.5])
    assert np.array_equal(step_fixed(lambda t, y: np.zeros_like(y), 0.0, y, 0.1), y)


def test_exponential_one_step():
    y = step_fixed(lambda t, y: y, 0.0, np.array([1.0]), 0.1)
    assert abs(y[0] - math.exp(0.1)) < 1e-7


def test_fourth_order_convergence():
    def err(n):
        y, dt = np.array([1.0]), 1.0 / n
        for k in range(n):
            y = step_fixed(lambda t, y: y, k * dt, y, dt)
        return abs(y[0] - math.e)

    errs = [err(n) for n in (10, 20, 40)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 3.9


def test_harmonic_period_energy_drift():
    omega = 2.0
    period = 2 * math.pi / omega
    dt = period / 1000
    f = lambda t, y: np.array([y[1], -(omega**2) * y[0]])
    y = np.array([1.0, 0.0])
    for k in range(1000):
        y = step_fixed(f, k * dt, y, dt)
    E = lambda y: 0.5 * y[1] ** 2 + 0.5 * omega**2 * y[0] ** 2
    assert abs(E(y) - E(np.array([1.0, 0.0]))) / E(np.array([1.0, 0.0])) <= 1e-9


def test_fixed_step_domain_violation_rejected():
    with pytest.raises(StepRejected):
        step_fixed(lambda t, y: -100.0 * np.ones_like(y), 0.0, np.array([1.0]), 0.1, positive)


# ---------------------------------------------------------------- adaptive


def test_adaptive_zero_field_grows_dt():
    cfg = IntegratorConfig("rk45", dt_max=1.0)
    step = step_adaptive(lambda t, y: np.zeros_like(y), 0.0, np.ones(2), 0.01, cfg)
    assert step.rejected == 0 and step.dt_next > step.dt_used
    step = step_adaptive(lambda t, y: np.zeros_like(y), 0.0, np.ones(2), 0.5, cfg)
    assert step.dt_next == 1.0


def test_adaptive_decay_error_control():
    cfg = IntegratorConfig("rk45", tol_rel=1e-6, tol_abs=1e-9)
    f = lambda t, y: -50.0 * y
    t, y, dt, prev = 0.0, np.array([1.0]), 0.1, None
    while t < 1.0:
        step = step_adaptive(f, t, y, min(dt, 1.0 - t), cfg, prev_err=prev)
        assert step.err <= 1.0
        # the accepted local error is consistent with the tolerance against the exact flow
        exact = y * math.exp(-50.0 * step.dt_used)
        assert abs(step.y[0] - exact[0]) <= 10 * (cfg.tol_abs + cfg.tol_rel * abs(y[0]))
        t, y, dt, prev = step.t, step.y, step.dt_next, step.err
    assert y[0] == pytest.approx(math.exp(-50.0), abs=1e-9)


def test_adaptive_domain_guard_halves_dt():
    f = lambda t, y: -np.ones_like(y)
    step = step_adaptive(f, 0.0, np.array([1.0]), 4.0, IntegratorConfig("rk45"), positive)
    assert step.rejected >= 2 and step.dt_used <= 1.0 and step.y[0] > 0


@settings(max_examples=25)
@given(st.floats(-2, 2), st.floats(1e-3, 0.5))
def test_adaptive_deterministic(y0, dt):
    f = lambda t, y: np.array([np.sin(y[0]) - 0.3 * y[0]])
    cfg = IntegratorConfig("rk45")
    a = step_adaptive(f, 0.0, np.array([y0]), dt, cfg)
    b = step_adaptive(f, 0.0, np.array([y0]), dt, cfg)
    assert a == b or (np.array_equal(a.y, b.y) and (a.dt_used, a.dt_next, a.rejected) == (b.dt_used, b.dt_next, b.rejected))


# ---------------------------------------------------------------- simulate


@pytest.mark.parametrize("method", ["rk4", "rk45"])
def test_simulate_zero_field(method):
    toy = Toy(lambda t, y: np.zeros_like(y), 2)
    tr = simulate(toy, [1.0, 2.0], IntegratorConfig(method, dt=0.1, t_end=1.0, record_every=2))
    assert np.all(tr.y == [1.0, 2.0])
    assert np.all(np.diff(tr.t) > 0) and tr.t[-1] == 1.0
    if method == "rk4":
        assert len(tr) == 6
    assert tr.status == "completed" and "norm" in tr.diagnostics


def test_simulate_exponential_adaptive_accuracy():
    toy = Toy(lambda t, y: y, 1)
    tr = simulate(toy, [1.0], IntegratorConfig("rk45", dt=0.01, t_end=1.0, tol_rel=1e-10, tol_abs=1e-12))
    assert tr.t[-1] == 1.0
    assert tr.y[-1, 0] == pytest.approx(math.e, rel=1e-8)


def test_simulate_failure_keeps_last_valid_sample():
    toy = Toy(lambda t, y: -np.ones_like(y), 1, check=positive)
    with pytest.raises(StepRejected) as exc:
        simulate(toy, [0.55], IntegratorConfig("rk4", dt=0.1, t_end=1.0, dt_min=1e-3))
    tr = exc.value.trajectory
    assert tr.status == "failed" and np.all(np.isfinite(tr.y)) and np.all(tr.y > 0)
    assert tr.t[-1] == pytest.approx(0.5)


def test_simulate_max_steps():
    toy = Toy(lambda t, y: np.zeros_like(y), 1)
    with pytest.raises(MaxStepsExceeded):
        simulate(toy, [1.0], IntegratorConfig("rk4", dt=1e-3, t_end=1.0, max_steps=10))


def test_hook_stops_run():
    toy = Toy(lambda t, y: -y, 1)
    hook = EquilibriumHook({"norm": 0.1}, hold=0.2)
    tr = simulate(toy, [1.0], IntegratorConfig("rk4", dt=0.01, t_end=10.0), [hook])
    assert tr.status == "stopped"
    # |y| = e^-t crosses 0.1 at ln 10, then the hold adds 0.2
    assert tr.t[-1] == pytest.approx(math.log(10) + 0.2, abs=0.011)


def test_two_piston_hook_terminates_early():
    built = catalog.build("two_piston")
    cfg = catalog.default_config("two_piston")
    hook = EquilibriumHook(built.equilibrium, hold=0.5)
    tr = simulate(built.system, built.y0, IntegratorConfig("rk4", dt=1e-3, t_end=cfg.t_end, record_every=10), [hook])
    assert tr.status == "stopped" and tr.t[-1] < cfg.t_end


def test_reversible_run_keeps_entropies():
    built = catalog.build("one_cylinder", {"reversible": True})
    tr = simulate(built.system, built.y0, IntegratorConfig("rk4", dt=1e-3, t_end=10.0, record_every=100))
    S = tr["S1"]
    assert np.max(np.abs(S - S[0])) <= 1e-10


def test_config_validation():
    for bad in (dict(dt=0.0), dict(t_end=0.0), dict(tol_rel=0.0), dict(method="euler"), dict(record_every=0)):
        with pytest.raises(ValueError):
            IntegratorConfig(**bad)
