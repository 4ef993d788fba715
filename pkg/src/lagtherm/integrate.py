"""Explicit time stepping with domain guards and diagnostics recording.

Systems handed to :func:`simulate` expose ``labels``, ``rhs(t, y)``,
``check(y)`` (raising :class:`DomainError` outside the physical domain) and
``diagnostics(t, y) -> dict`` of scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, MaxStepsExceeded, StepRejected

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

SAFETY = 0.9
PI_ALPHA = 0.7 / 5
PI_BETA = 0.4 / 5
FAC_MIN, FAC_MAX = 0.2, 5.0


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4"  # "rk4" or "rk45"
    dt: float = 1e-3
    t_end: float = 10.0
    t_start: float = 0.0
    tol_rel: float = 1e-8
    tol_abs: float = 1e-10
    dt_min: float = 1e-12
    dt_max: float = math.inf
    record_every: int = 1
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.method not in ("rk4", "rk45"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.dt > 0 or not self.t_end > self.t_start:
            raise ValueError("need dt > 0 and t_end > t_start")
        if not (self.tol_rel > 0 and self.tol_abs > 0):
            raise ValueError("tolerances must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    diagnostics: dict
    labels: list
    status: str = "completed"
    notes: list = field(default_factory=list)

    def __len__(self):
        return self.t.size

    def __getitem__(self, key):
        if key in self.diagnostics:
            return self.diagnostics[key]
        if key == "t":
            return self.t
        return self.y[:, self.labels.index(key)]


class _Recorder:
    def __init__(self, labels):
        self.labels = list(labels)
        self.t, self.y, self.diag = [], [], {}

    def add(self, t, y, d):
        n = len(self.t)
        for k, val in d.items():
            col = self.diag.setdefault(k, [math.nan] * n)
            col.append(float(val))
        for k, col in self.diag.items():
            if len(col) == n:
                col.append(math.nan)
        self.t.append(float(t))
        self.y.append(np.array(y, dtype=float))

    def build(self, status="completed", notes=()):
        return Trajectory(
            t=np.array(self.t),
            y=np.array(self.y) if self.y else np.zeros((0, len(self.labels))),
            diagnostics={k: np.array(v) for k, v in self.diag.items()},
            labels=self.labels,
            status=status,
            notes=list(notes),
        )


def _guarded(fn, *args):
    # overflow inside a stage surfaces as a non-finite state, which is rejected below
    try:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out = fn(*args)
    except (DomainError, FloatingPointError, ZeroDivisionError) as exc:
        raise StepRejected(str(exc)) from exc
    return out


def step_fixed(rhs: Callable, t: float, y, dt: float, check: Optional[Callable] = None) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step."""
    y = np.asarray(y, dtype=float)
    k1 = _guarded(rhs, t, y)
    k2 = _guarded(rhs, t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = _guarded(rhs, t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = _guarded(rhs, t + dt, y + dt * k3)
    y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y_new)):
        raise StepRejected("non-finite state after step")
    if check is not None:
        _guarded(check, y_new)
    return y_new


@dataclass(frozen=True)
class AdaptiveStep:
    y: np.ndarray
    t: float
    dt_used: float
    dt_next: float
    err: float
    rejected: int


def _dp_attempt(rhs, t, y, dt, check):
    k = []
    for i in range(7):
        yi = y
        for a, kj in zip(_A[i], k):
            if a != 0.0:
                yi = yi + dt * a * kj
        k.append(_guarded(rhs, t + _C[i] * dt, yi))
    K = np.array(k)
    y5 = y + dt * (_B5 @ K)
    if not np.all(np.isfinite(y5)):
        raise StepRejected("non-finite state after step")
    if check is not None:
        _guarded(check, y5)
    return y5, dt * (_E @ K)


def step_adaptive(
    rhs: Callable,
    t: float,
    y,
    dt_try: float,
    config: IntegratorConfig = IntegratorConfig(method="rk45"),
    check: Optional[Callable] = None,
    prev_err: Optional[float] = None,
) -> AdaptiveStep:
    """Dormand-Prince 5(4) step with a PI step-size controller.

    The step is retried until the weighted RMS error is at most one.  Domain
    violations halve the step.  Below ``dt_min`` the step is abandoned with
    :class:`StepRejected`.
    """
    y = np.asarray(y, dtype=float)
    dt = min(dt_try, config.dt_max)
    rejected = 0
    while True:
        if dt < config.dt_min:
            raise StepRejected(f"step size fell below dt_min={config.dt_min} at t={t}")
        try:
            y_new, err_vec = _dp_attempt(rhs, t, y, dt, check)
        except StepRejected:
            dt *= 0.5
            rejected += 1
            continue
        scale = config.tol_abs + config.tol_rel * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2))) if y.size else 0.0
        if err <= 1.0:
            if err == 0.0:
                fac = FAC_MAX
            else:
                fac = SAFETY * err ** (-PI_ALPHA)
                if prev_err is not None and prev_err > 0.0:
                    fac *= prev_err**PI_BETA
                fac = min(FAC_MAX, max(FAC_MIN, fac))
            return AdaptiveStep(y_new, t + dt, dt, min(dt * fac, config.dt_max), max(err, 1e-10), rejected)
        dt *= max(FAC_MIN, SAFETY * err ** (-1.0 / 5.0))
        rejected += 1


@dataclass
class EquilibriumHook:
    """Stop once every monitored gap stays below its threshold for ``hold`` time."""

    thresholds: dict
    hold: float = 0.0
    _since: Optional[float] = None

    def __call__(self, t, y, diag) -> bool:
        ok = all(abs(diag[k]) <= thr for k, thr in self.thresholds.items())
        if not ok:
            self._since = None
            return False
        if self._since is None:
            self._since = t
        return t - self._since >= self.hold


def simulate(system, y0, config: IntegratorConfig, hooks: Sequence[Callable] = ()) -> Trajectory:
    """Integrate ``system`` from ``y0`` and record diagnostics at output samples.

    Domain errors abort the run; the exception carries the trajectory up to
    the last valid sample in its ``trajectory`` attribute.
    """
    y = np.array(y0, dtype=float)
    system.check(y)
    rec = _Recorder(system.labels)
    t = config.t_start

    def record(t, y):
        d = system.diagnostics(t, y)
        rec.add(t, y, d)
        return any(h(t, y, d) for h in hooks)

    if record(t, y):
        return rec.build("stopped", ["stop requested at initial state"])

    try:
        if config.method == "rk4":
            n_steps = int(round((config.t_end - config.t_start) / config.dt))
            if n_steps > config.max_steps:
                raise MaxStepsExceeded(f"{n_steps} steps requested, limit {config.max_steps}")
            for k in range(1, n_steps + 1):
                t_prev = config.t_start + (k - 1) * config.dt
                t = config.t_start + k * config.dt
                y = _fixed_with_bisection(system, t_prev, y, t - t_prev, config.dt_min)
                if k % config.record_every == 0 or k == n_steps:
                    if record(t, y):
                        return rec.build("stopped", [f"stop requested at t={t}"])
        else:
            dt = min(config.dt, config.dt_max)
            prev_err = None
            n = 0
            while t < config.t_end:
                if n >= config.max_steps:
                    raise MaxStepsExceeded(f"exceeded {config.max_steps} steps at t={t}")
                remaining = config.t_end - t
                last = dt >= remaining
                step = step_adaptive(system.rhs, t, y, remaining if last else dt, config, system.check, prev_err)
                n += 1
                y, prev_err = step.y, step.err
                t = config.t_end if (last and step.dt_used == remaining) else step.t
                dt = step.dt_next
                if n % config.record_every == 0 or t >= config.t_end:
                    if record(t, y):
                        return rec.build("stopped", [f"stop requested at t={t}"])
    except (StepRejected, MaxStepsExceeded) as exc:
        exc.trajectory = rec.build("failed", [str(exc)])
        raise
    return rec.build()


def _fixed_with_bisection(system, t, y, dt, dt_min):
    try:
        return step_fixed(system.rhs, t, y, dt, system.check)
    except StepRejected as exc:
        rejected = exc
    # retry outside the handler so nested rejections do not chain
    half = 0.5 * dt
    if half < dt_min:
        raise StepRejected(f"domain violation at t={t} persists below dt_min: {rejected}") from None
    y_mid = _fixed_with_bisection(system, t, y, half, dt_min)
    return _fixed_with_bisection(system, t + half, y_mid, half, dt_min)
