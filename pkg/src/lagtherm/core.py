"""Simple closed systems: mechanics coupled to a single entropy variable.

A model is a Lagrangian ``L(q, v, S)`` plus a friction force, an external
force and an external heat power.  The evolution is

    d/dt dL/dv - dL/dq = F_ext + F_fr,
    dL/dS * Sdot = <F_fr, v> - P_H,

which we solve explicitly for ``(qdot, vdot, Sdot)`` with ``T = -dL/dS > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, DomainError, NegativeVolume, NonPositiveTemperature, SingularMassMatrix
from .numerics import fd_derivative, fd_gradient, fd_jacobian, fd_mixed, solve_spd


# --------------------------------------------------------------------------- friction laws


@dataclass(frozen=True)
class NoFriction:
    is_zero = True

    def __call__(self, q, v, S):
        return np.zeros_like(np.asarray(v, dtype=float))


@dataclass(frozen=True)
class LinearFriction:
    """``F = -lam(q, S) v``.

    ``coefficient`` is a scalar, an ``n x n`` PSD matrix, or a callable
    ``(q, S) -> scalar | matrix``.
    """

    coefficient: object = 0.0

    @property
    def is_zero(self) -> bool:
        c = self.coefficient
        return not callable(c) and not np.any(np.asarray(c) != 0.0)

    def __call__(self, q, v, S):
        c = self.coefficient(q, S) if callable(self.coefficient) else self.coefficient
        c = np.asarray(c, dtype=float)
        v = np.asarray(v, dtype=float)
        return -(c @ v) if c.ndim == 2 else -c * v


@dataclass(frozen=True)
class CoulombFriction:
    """Dry friction ``F = -lam v / sqrt(|v|^2 + eps^2)``.

    The regularization ``eps`` smooths the jump at ``v = 0``; the limit
    ``eps -> 0`` is the classical law ``-lam v/|v|``.
    """

    lam: float = 0.0
    eps: float = 1e-8

    @property
    def is_zero(self) -> bool:
        return self.lam == 0.0

    def __call__(self, q, v, S):
        v = np.asarray(v, dtype=float)
        return -self.lam * v / np.sqrt(v @ v + self.eps**2)


@dataclass(frozen=True)
class SumFriction:
    laws: tuple = ()

    @property
    def is_zero(self) -> bool:
        return all(getattr(law, "is_zero", False) for law in self.laws)

    def __call__(self, q, v, S):
        out = np.zeros_like(np.asarray(v, dtype=float))
        for law in self.laws:
            out = out + law(q, v, S)
        return out


def friction_is_zero(law) -> bool:
    return law is None or bool(getattr(law, "is_zero", False))


# --------------------------------------------------------------------------- model


@dataclass(frozen=True)
class SimpleState:
    q: np.ndarray
    v: np.ndarray
    S: float
    t: float = 0.0

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        v = np.atleast_1d(np.asarray(self.v, dtype=float))
        if q.shape != v.shape:
            raise DimensionMismatch(f"q has shape {q.shape} but v has shape {v.shape}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "S", float(self.S))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.v, [self.S]])

    @classmethod
    def from_vector(cls, y, dim: int, t: float = 0.0) -> "SimpleState":
        y = np.asarray(y, dtype=float)
        if y.size != 2 * dim + 1:
            raise DimensionMismatch(f"state vector of length {y.size} does not fit dim={dim}")
        return cls(y[:dim], y[dim : 2 * dim], y[2 * dim], t)


@dataclass(frozen=True)
class SimpleModel:
    """Lagrangian model of a simple system.

    Analytic partials are optional; missing ones fall back to central finite
    differences of ``lagrangian`` (or of ``dL_dv`` for second derivatives).
    ``dLv_dq`` is the matrix ``d^2L / dv dq`` (rows: v index) and ``dLv_dS``
    the vector ``d^2L / dv dS``; both vanish for the usual ``K(v) - U(q, S)``
    split, in which case ``separable=True`` skips them.
    """

    dim: int
    lagrangian: Callable
    dL_dq: Optional[Callable] = None
    dL_dv: Optional[Callable] = None
    dL_dS: Optional[Callable] = None
    mass_matrix: Optional[Callable] = None
    dLv_dq: Optional[Callable] = None
    dLv_dS: Optional[Callable] = None
    separable: bool = False
    friction: object = field(default_factory=NoFriction)
    external_force: Optional[Callable] = None
    heat_power: Optional[Callable] = None
    q_lower: Optional[np.ndarray] = None
    q_upper: Optional[np.ndarray] = None
    name: str = "simple"
    sampler: Optional[Callable] = None

    # -- partials with finite-difference fallback

    def L(self, q, v, S):
        return float(self.lagrangian(q, v, S))

    def grad_q(self, q, v, S):
        if self.dL_dq is not None:
            return np.atleast_1d(np.asarray(self.dL_dq(q, v, S), dtype=float))
        return fd_gradient(lambda x: self.lagrangian(x, v, S), q)

    def grad_v(self, q, v, S):
        if self.dL_dv is not None:
            return np.atleast_1d(np.asarray(self.dL_dv(q, v, S), dtype=float))
        return fd_gradient(lambda x: self.lagrangian(q, x, S), v)

    def grad_S(self, q, v, S):
        if self.dL_dS is not None:
            return float(self.dL_dS(q, v, S))
        return fd_derivative(lambda s: self.lagrangian(q, v, s), S)

    def mass(self, q, v, S):
        if self.mass_matrix is not None:
            return np.atleast_2d(np.asarray(self.mass_matrix(q, v, S), dtype=float))
        if self.dL_dv is None:
            return _sym(fd_mixed(lambda a, b: self.lagrangian(q, a + b - v, S), v, v))
        return _sym(fd_jacobian(lambda x: self.grad_v(q, x, S), v))

    def mixed_q(self, q, v, S):
        if self.separable:
            return np.zeros((self.dim, self.dim))
        if self.dLv_dq is not None:
            return np.atleast_2d(np.asarray(self.dLv_dq(q, v, S), dtype=float))
        if self.dL_dv is None:
            return fd_mixed(lambda a, b: self.lagrangian(b, a, S), v, q)
        return fd_jacobian(lambda x: self.grad_v(x, v, S), q)

    def mixed_S(self, q, v, S):
        if self.separable:
            return np.zeros(self.dim)
        if self.dLv_dS is not None:
            return np.atleast_1d(np.asarray(self.dLv_dS(q, v, S), dtype=float))
        if self.dL_dv is None:
            return fd_mixed(lambda a, b: self.lagrangian(q, a, b[0]), v, [S])[:, 0]
        return fd_jacobian(lambda s: self.grad_v(q, v, s[0]), np.array([S]))[:, 0]

    # -- forcing

    def friction_force(self, q, v, S):
        if self.friction is None:
            return np.zeros(self.dim)
        return np.atleast_1d(np.asarray(self.friction(q, v, S), dtype=float))

    def ext_force(self, q, v, S, t):
        if self.external_force is None:
            return np.zeros(self.dim)
        return np.atleast_1d(np.asarray(self.external_force(q, v, S, t), dtype=float))

    def heat(self, q, v, S, t):
        return 0.0 if self.heat_power is None else float(self.heat_power(q, v, S, t))

    def check(self, q):
        if self.q_lower is not None and np.any(q <= self.q_lower):
            raise NegativeVolume(f"{self.name}: q={q} below admissible bound {self.q_lower}")
        if self.q_upper is not None and np.any(q >= self.q_upper):
            raise NegativeVolume(f"{self.name}: q={q} above admissible bound {self.q_upper}")


def _sym(a):
    return 0.5 * (a + a.T)


def _unpack(model, state):
    if state.q.size != model.dim:
        raise DimensionMismatch(f"{model.name} expects dim {model.dim}, got {state.q.size}")
    model.check(state.q)
    return state.q, state.v, state.S


# --------------------------------------------------------------------------- operations


def temperature(model: SimpleModel, state: SimpleState) -> float:
    q, v, S = _unpack(model, state)
    T = -model.grad_S(q, v, S)
    if not T > 0.0:
        raise NonPositiveTemperature(f"{model.name}: temperature {float(T):.6g} is not positive")
    return T


def energy(model: SimpleModel, state: SimpleState) -> float:
    q, v, S = _unpack(model, state)
    return float(model.grad_v(q, v, S) @ v - model.L(q, v, S))


def internal_production(model: SimpleModel, state: SimpleState) -> float:
    T = temperature(model, state)
    q, v, S = state.q, state.v, state.S
    if friction_is_zero(model.friction):
        return 0.0
    return float(-(model.friction_force(q, v, S) @ v) / T)


def simple_rhs(model: SimpleModel, state: SimpleState) -> SimpleState:
    """Time derivative ``(qdot, vdot, Sdot)`` packed as a :class:`SimpleState`."""
    T = temperature(model, state)
    q, v, S, t = state.q, state.v, state.S, state.t
    f_fr = model.friction_force(q, v, S)
    f_ext = model.ext_force(q, v, S, t)
    S_dot = (model.heat(q, v, S, t) - f_fr @ v) / T
    rhs = model.grad_q(q, v, S) + f_ext + f_fr - model.mixed_q(q, v, S) @ v - model.mixed_S(q, v, S) * S_dot
    v_dot = solve_spd(model.mass(q, v, S), rhs, SingularMassMatrix, f"{model.name} mass matrix")
    return SimpleState(v.copy(), v_dot, S_dot, t)


class SimpleSystem:
    """Adaptor exposing a :class:`SimpleModel` to the integrators."""

    def __init__(self, model: SimpleModel):
        self.model = model
        n = model.dim
        self.labels = [f"q{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)] + ["S1"]

    def state(self, t, y) -> SimpleState:
        return SimpleState.from_vector(y, self.model.dim, t)

    def rhs(self, t, y):
        return simple_rhs(self.model, self.state(t, y)).to_vector()

    def check(self, y):
        st = self.state(0.0, y)
        if not np.all(np.isfinite(y)):
            raise DomainError("non-finite state")
        temperature(self.model, st)

    def diagnostics(self, t, y) -> dict:
        m = self.model
        st = self.state(t, y)
        q, v, S = st.q, st.v, st.S
        return {
            "T1": temperature(m, st),
            "E": energy(m, st),
            "P_W_ext": float(m.ext_force(q, v, S, t) @ v),
            "P_H_ext": m.heat(q, v, S, t),
            "I_internal": internal_production(m, st),
            "S_total": S,
        }
