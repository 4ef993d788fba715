"""Interconnected systems with one entropy per subsystem.

Subsystems exchange heat through a symmetric conductivity matrix
``kappa[A, B]`` and can be coupled to external heat sources.  Two equivalent
formulations are provided: an entropy-based one (:class:`NetworkModel`,
:func:`network_rhs`) and a temperature-based one built on the free-energy
Lagrangian ``L + sum_A T^A S_A`` (:class:`FreeEnergyModel`,
:func:`free_energy_rhs`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import friction_is_zero
from .errors import (
    AsymmetricConductivity,
    DimensionMismatch,
    DomainError,
    NegativeConductivity,
    NegativeVolume,
    NonPositiveTemperature,
    SingularHeatCapacity,
    SingularMassMatrix,
)
from .numerics import fd_gradient, fd_jacobian, fd_mixed, solve_general, solve_spd
from .thermo import ThermalBody


def validate_conductivity(kappa, n: Optional[int] = None) -> np.ndarray:
    k = np.atleast_2d(np.asarray(kappa, dtype=float))
    if k.shape[0] != k.shape[1] or (n is not None and k.shape[0] != n):
        raise DimensionMismatch(f"conductivity matrix has shape {k.shape}, expected ({n}, {n})")
    if not np.array_equal(k, k.T):
        raise AsymmetricConductivity("kappa[A, B] != kappa[B, A]")
    off = k[~np.eye(k.shape[0], dtype=bool)]
    if np.any(off < 0.0):
        raise NegativeConductivity(f"negative entry {float(off.min()):.6g}")
    if np.any(np.diag(k) != 0.0):
        raise NegativeConductivity("diagonal entries must be zero", "conductivity zero diagonal")
    return k


def friction_matrix(kappa) -> np.ndarray:
    """Heat exchange written as a friction: ``J[A, B] = -(kappa_AB - delta_AB sum_C kappa_AC)``."""
    k = validate_conductivity(kappa)
    J = -k.copy()
    J[np.diag_indices_from(J)] = k.sum(axis=1)
    return J


@dataclass(frozen=True)
class HeatSource:
    """External heat reservoir coupled to every subsystem.

    ``coupling`` holds ``kappa_AR`` per subsystem (array, or callable
    ``(q, S) -> array``).  An ideal source has fixed ``temperature``; a finite
    source carries its own entropy ``S_R`` with ``body`` giving ``T^R(S_R)``.
    """

    coupling: object
    temperature: Optional[float] = None
    body: Optional[ThermalBody] = None
    S_init: float = 0.0

    def __post_init__(self):
        if (self.temperature is None) == (self.body is None):
            raise ValueError("a heat source needs exactly one of temperature or body")
        if not callable(self.coupling) and np.any(np.asarray(self.coupling) < 0.0):
            raise NegativeConductivity("source coupling must be nonnegative")

    @property
    def finite(self) -> bool:
        return self.body is not None

    def kappa(self, q, S) -> np.ndarray:
        c = self.coupling(q, S) if callable(self.coupling) else self.coupling
        c = np.asarray(c, dtype=float)
        if np.any(c < 0.0):
            raise NegativeConductivity("source coupling must be nonnegative")
        return c

    def T(self, S_R: Optional[float] = None) -> float:
        return float(self.temperature) if self.body is None else float(self.body.temperature(S_R))


@dataclass(frozen=True)
class NetworkState:
    q: np.ndarray
    v: np.ndarray
    S: np.ndarray
    S_R: np.ndarray = field(default_factory=lambda: np.zeros(0))
    Gamma: Optional[np.ndarray] = None
    t: float = 0.0

    def __post_init__(self):
        for name in ("q", "v", "S", "S_R"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        if self.Gamma is not None:
            object.__setattr__(self, "Gamma", np.atleast_1d(np.asarray(self.Gamma, dtype=float)))
        if self.q.shape != self.v.shape:
            raise DimensionMismatch("q and v lengths differ")


@dataclass(frozen=True)
class NetworkModel:
    """Lagrangian ``L(q, v, S_1..S_N)`` of ``N`` coupled subsystems.

    Partials follow :class:`lagtherm.core.SimpleModel`; ``dL_dS`` returns the
    length-``N`` vector and ``dLv_dS`` the ``n x N`` matrix.
    """

    n_sub: int
    dim: int
    lagrangian: Callable
    dL_dq: Optional[Callable] = None
    dL_dv: Optional[Callable] = None
    dL_dS: Optional[Callable] = None
    mass_matrix: Optional[Callable] = None
    dLv_dq: Optional[Callable] = None
    dLv_dS: Optional[Callable] = None
    separable: bool = False
    frictions: Sequence = ()
    external_forces: Sequence = ()
    conductivities: object = None
    sources: Sequence[HeatSource] = ()
    track_displacements: bool = False
    q_lower: Optional[np.ndarray] = None
    q_upper: Optional[np.ndarray] = None
    name: str = "network"
    sampler: Optional[Callable] = None

    def __post_init__(self):
        if self.frictions and len(self.frictions) != self.n_sub:
            raise DimensionMismatch(f"need {self.n_sub} friction laws, got {len(self.frictions)}")
        if self.external_forces and len(self.external_forces) != self.n_sub:
            raise DimensionMismatch(f"need {self.n_sub} external forces, got {len(self.external_forces)}")
        if self.conductivities is not None and not callable(self.conductivities):
            object.__setattr__(self, "conductivities", validate_conductivity(self.conductivities, self.n_sub))

    # -- partials

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
            return np.atleast_1d(np.asarray(self.dL_dS(q, v, S), dtype=float))
        return fd_gradient(lambda x: self.lagrangian(q, v, x), S)

    def mass(self, q, v, S):
        if self.mass_matrix is not None:
            return np.atleast_2d(np.asarray(self.mass_matrix(q, v, S), dtype=float))
        if self.dL_dv is None:
            m = fd_mixed(lambda a, b: self.lagrangian(q, a + b - v, S), v, v)
        else:
            m = fd_jacobian(lambda x: self.grad_v(q, x, S), v)
        return 0.5 * (m + m.T)

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
            return np.zeros((self.dim, self.n_sub))
        if self.dLv_dS is not None:
            return np.atleast_2d(np.asarray(self.dLv_dS(q, v, S), dtype=float)).reshape(self.dim, self.n_sub)
        if self.dL_dv is None:
            return fd_mixed(lambda a, b: self.lagrangian(q, a, b), v, S)
        return fd_jacobian(lambda x: self.grad_v(q, v, x), S)

    # -- coefficients

    def kappa(self, q, S) -> np.ndarray:
        if self.conductivities is None:
            return np.zeros((self.n_sub, self.n_sub))
        if callable(self.conductivities):
            return validate_conductivity(self.conductivities(q, S), self.n_sub)
        return self.conductivities

    def friction_forces(self, q, v, S) -> np.ndarray:
        """Rows are the friction covectors of each subsystem."""
        out = np.zeros((self.n_sub, self.dim))
        for A, law in enumerate(self.frictions):
            if not friction_is_zero(law):
                out[A] = law(q, v, S)
        return out

    def ext_forces(self, q, v, S, t) -> np.ndarray:
        out = np.zeros((self.n_sub, self.dim))
        for A, f in enumerate(self.external_forces):
            if f is not None:
                out[A] = f(q, v, S, t)
        return out

    @property
    def n_finite_sources(self) -> int:
        return sum(1 for s in self.sources if s.finite)

    def check(self, q):
        if self.q_lower is not None and np.any(q <= self.q_lower):
            raise NegativeVolume(f"{self.name}: q={q} below admissible bound")
        if self.q_upper is not None and np.any(q >= self.q_upper):
            raise NegativeVolume(f"{self.name}: q={q} above admissible bound")


def _temps(model, state) -> np.ndarray:
    if state.S.size != model.n_sub or state.q.size != model.dim:
        raise DimensionMismatch(f"{model.name}: state does not match model dimensions")
    model.check(state.q)
    T = -model.grad_S(state.q, state.v, state.S)
    if np.any(~(T > 0.0)):
        raise NonPositiveTemperature(f"{model.name}: temperatures {T} not all positive")
    return T


def _source_temps(model, state) -> list:
    temps, j = [], 0
    for src in model.sources:
        if src.finite:
            temps.append(src.T(state.S_R[j]))
            j += 1
        else:
            temps.append(src.T())
    if any(not T > 0.0 for T in temps):
        raise NonPositiveTemperature("source temperature not positive")
    return temps


def temperatures(model: NetworkModel, state: NetworkState) -> np.ndarray:
    return _temps(model, state)


def energy(model: NetworkModel, state: NetworkState) -> float:
    q, v, S = state.q, state.v, state.S
    return float(model.grad_v(q, v, S) @ v - model.L(q, v, S))


def heat_flows(model: NetworkModel, state: NetworkState):
    """Internal flows ``P[A, B]`` (heat from ``B`` into ``A``) and source flows ``P[A, R]``."""
    T = _temps(model, state)
    k = model.kappa(state.q, state.S)
    internal = k * (T[None, :] - T[:, None])
    TR = _source_temps(model, state)
    external = np.zeros((model.n_sub, len(model.sources)))
    for r, (src, T_R) in enumerate(zip(model.sources, TR)):
        external[:, r] = src.kappa(state.q, state.S) * (T_R - T)
    return internal, external


def _rates(model, state):
    """Pieces shared by the vector field and the entropy bookkeeping."""
    T = _temps(model, state)
    q, v, S = state.q, state.v, state.S
    internal, external = heat_flows(model, state)
    f_fr = model.friction_forces(q, v, S)
    fric_power = -(f_fr @ v)  # per subsystem, >= 0 when dissipative
    P_ext = external.sum(axis=1)
    S_dot = (fric_power + internal.sum(axis=1) + P_ext) / T
    return T, f_fr, fric_power, internal, external, P_ext, S_dot


def network_rhs(model: NetworkModel, state: NetworkState) -> NetworkState:
    """Derivative of ``(q, v, S, S_R, Gamma)`` packed as a :class:`NetworkState`."""
    T, f_fr, _, _, external, _, S_dot = _rates(model, state)
    q, v, S, t = state.q, state.v, state.S, state.t
    force = model.grad_q(q, v, S) + f_fr.sum(axis=0) + model.ext_forces(q, v, S, t).sum(axis=0)
    force = force - model.mixed_q(q, v, S) @ v - model.mixed_S(q, v, S) @ S_dot
    v_dot = solve_spd(model.mass(q, v, S), force, SingularMassMatrix, f"{model.name} mass matrix")
    TR = _source_temps(model, state)
    S_R_dot = [-external[:, r].sum() / TR[r] for r, src in enumerate(model.sources) if src.finite]
    return NetworkState(v.copy(), v_dot, S_dot, np.array(S_R_dot), T.copy() if model.track_displacements else None, t)


def entropy_rate(model: NetworkModel, state: NetworkState):
    """``(total, internal, external)`` entropy rates of the subsystems."""
    T, _, fric_power, _, _, P_ext, S_dot = _rates(model, state)
    k = model.kappa(state.q, state.S)
    dT = T[None, :] - T[:, None]
    conduction = 0.5 * float(np.sum(k * dT**2 / np.outer(T, T)))
    internal = float(np.sum(fric_power / T)) + conduction
    external = float(np.sum(P_ext / T))
    return float(S_dot.sum()), internal, external


def exterior_entropy_bound(model: NetworkModel, state: NetworkState):
    """The chain ``Sdot >= sum_A P^{ext->A}/T^A >= sum_R P^{R->system}/T^R``."""
    T, _, _, _, external, P_ext, S_dot = _rates(model, state)
    TR = np.array(_source_temps(model, state))
    rhs = float(np.sum(external.sum(axis=0) / TR)) if TR.size else 0.0
    return float(S_dot.sum()), float(np.sum(P_ext / T)), rhs


def reversibility_check(model, state=None) -> bool:
    """True when no dissipation mechanism can act.

    Frictions must be identically zero and conductivities zero.  Heat sources
    with positive coupling are only allowed when ``state`` is given and every
    subsystem sits at the source temperature.
    """
    frictions = getattr(model, "frictions", None)
    if frictions is None:
        frictions = [getattr(model, "friction", None)]
    if not all(friction_is_zero(f) for f in frictions):
        return False
    kappa = getattr(model, "conductivities", None)
    if callable(kappa) or (kappa is not None and np.any(np.asarray(kappa) != 0.0)):
        return False
    if getattr(model, "heat_power", None) is not None:
        return False
    active = [
        r for r, s in enumerate(getattr(model, "sources", ())) if callable(s.coupling) or np.any(np.asarray(s.coupling) != 0)
    ]
    if not active:
        return True
    if state is None:
        return False
    T = temperatures(model, state)
    TR = _source_temps(model, state)
    return all(np.all(T == TR[r]) for r in active)


class NetworkSystem:
    """Integrator adaptor; state vector ``[q, v, S, S_R, Gamma]``."""

    def __init__(self, model: NetworkModel, gap_keys: Optional[Callable] = None):
        self.model = model
        self.gap_fn = gap_keys
        n, N = model.dim, model.n_sub
        self.labels = (
            [f"q{i + 1}" for i in range(n)]
            + [f"v{i + 1}" for i in range(n)]
            + [f"S{A + 1}" for A in range(N)]
            + [f"S_R{r + 1}" for r in range(model.n_finite_sources)]
            + ([f"Gamma{A + 1}" for A in range(N)] if model.track_displacements else [])
        )

    def state(self, t, y) -> NetworkState:
        m = self.model
        n, N, R = m.dim, m.n_sub, m.n_finite_sources
        i = 2 * n + N
        gamma = y[i + R : i + R + N] if m.track_displacements else None
        return NetworkState(y[:n], y[n : 2 * n], y[2 * n : i], y[i : i + R], gamma, t)

    def rhs(self, t, y):
        d = network_rhs(self.model, self.state(t, y))
        parts = [d.q, d.v, d.S, d.S_R]
        if d.Gamma is not None:
            parts.append(d.Gamma)
        return np.concatenate(parts)

    def check(self, y):
        if not np.all(np.isfinite(y)):
            raise DomainError("non-finite state")
        st = self.state(0.0, y)
        _temps(self.model, st)
        _source_temps(self.model, st)

    def diagnostics(self, t, y) -> dict:
        m = self.model
        st = self.state(t, y)
        T = _temps(m, st)
        total, internal, _ = entropy_rate(m, st)
        _, external = heat_flows(m, st)
        q, v, S = st.q, st.v, st.S
        d = {f"T{A + 1}": T[A] for A in range(m.n_sub)}
        d.update(
            E=energy(m, st),
            P_W_ext=float(m.ext_forces(q, v, S, t).sum(axis=0) @ v),
            P_H_ext=float(external.sum()),
            I_internal=internal,
            S_total=float(S.sum()),
            S_dot=total,
        )
        if self.gap_fn is not None:
            d.update(self.gap_fn(m, st, T))
        return d


# --------------------------------------------------------------------------- free-energy formulation


@dataclass(frozen=True)
class FreeEnergyModel:
    """Free-energy Lagrangian ``F(q, v, T_1..T_N)`` with ``S_A = dF/dT_A``.

    ``d_dT`` returns the entropies, ``heat_capacity`` the matrix
    ``d^2 F / dT dT``, ``dS_dq`` the ``N x n`` matrix ``d^2 F / dT dq`` and
    ``dLv_dT`` the ``n x N`` matrix ``d^2 F / dv dT``.
    """

    n_sub: int
    dim: int
    free_lagrangian: Callable
    d_dq: Optional[Callable] = None
    d_dv: Optional[Callable] = None
    d_dT: Optional[Callable] = None
    mass_matrix: Optional[Callable] = None
    heat_capacity: Optional[Callable] = None
    dS_dq: Optional[Callable] = None
    dLv_dT: Optional[Callable] = None
    dLv_dq: Optional[Callable] = None
    frictions: Sequence = ()
    external_forces: Sequence = ()
    conductivities: object = None
    sources: Sequence[HeatSource] = ()
    q_lower: Optional[np.ndarray] = None
    q_upper: Optional[np.ndarray] = None
    name: str = "free_energy"
    sampler: Optional[Callable] = None

    def __post_init__(self):
        if any(s.finite for s in self.sources):
            raise ValueError("finite sources are only supported in the entropy formulation")
        if self.conductivities is not None and not callable(self.conductivities):
            object.__setattr__(self, "conductivities", validate_conductivity(self.conductivities, self.n_sub))

    def F(self, q, v, T):
        return float(self.free_lagrangian(q, v, T))

    def grad_q(self, q, v, T):
        if self.d_dq is not None:
            return np.atleast_1d(np.asarray(self.d_dq(q, v, T), dtype=float))
        return fd_gradient(lambda x: self.free_lagrangian(x, v, T), q)

    def grad_v(self, q, v, T):
        if self.d_dv is not None:
            return np.atleast_1d(np.asarray(self.d_dv(q, v, T), dtype=float))
        return fd_gradient(lambda x: self.free_lagrangian(q, x, T), v)

    def entropy(self, q, v, T):
        if self.d_dT is not None:
            return np.atleast_1d(np.asarray(self.d_dT(q, v, T), dtype=float))
        return fd_gradient(lambda x: self.free_lagrangian(q, v, x), T)

    def mass(self, q, v, T):
        if self.mass_matrix is not None:
            return np.atleast_2d(np.asarray(self.mass_matrix(q, v, T), dtype=float))
        if self.d_dv is None:
            m = fd_mixed(lambda a, b: self.free_lagrangian(q, a + b - v, T), v, v)
        else:
            m = fd_jacobian(lambda x: self.grad_v(q, x, T), v)
        return 0.5 * (m + m.T)

    def capacity(self, q, v, T):
        if self.heat_capacity is not None:
            return np.atleast_2d(np.asarray(self.heat_capacity(q, v, T), dtype=float))
        if self.d_dT is None:
            c = fd_mixed(lambda a, b: self.free_lagrangian(q, v, a + b - T), T, T)
        else:
            c = fd_jacobian(lambda x: self.entropy(q, v, x), T)
        return 0.5 * (c + c.T)

    def entropy_q(self, q, v, T):
        if self.dS_dq is not None:
            return np.atleast_2d(np.asarray(self.dS_dq(q, v, T), dtype=float)).reshape(self.n_sub, self.dim)
        if self.d_dT is None:
            return fd_mixed(lambda a, b: self.free_lagrangian(b, v, a), T, q)
        return fd_jacobian(lambda x: self.entropy(x, v, T), q)

    def mixed_T(self, q, v, T):
        if self.dLv_dT is not None:
            return np.atleast_2d(np.asarray(self.dLv_dT(q, v, T), dtype=float)).reshape(self.dim, self.n_sub)
        if self.d_dv is None:
            return fd_mixed(lambda a, b: self.free_lagrangian(q, a, b), v, T)
        return fd_jacobian(lambda x: self.grad_v(q, v, x), T)

    def mixed_q(self, q, v, T):
        if self.dLv_dq is not None:
            return np.atleast_2d(np.asarray(self.dLv_dq(q, v, T), dtype=float))
        if self.d_dv is None:
            return fd_mixed(lambda a, b: self.free_lagrangian(b, a, T), v, q)
        return fd_jacobian(lambda x: self.grad_v(x, v, T), q)

    kappa = NetworkModel.kappa
    friction_forces = NetworkModel.friction_forces
    ext_forces = NetworkModel.ext_forces
    check = NetworkModel.check


def free_energy_rhs(model: FreeEnergyModel, q, v, T, t: float = 0.0):
    """Return ``(qdot, vdot, Tdot)`` of the temperature-based formulation.

    ``vdot`` and ``Tdot`` come from the block system
    ``[[M, G], [G^T, C]] [vdot, Tdot] = [f, sigma - (dS/dq) v]`` with
    ``G = d^2F/dv dT`` and ``C`` the heat-capacity matrix.
    """
    q, v, T = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (q, v, T))
    model.check(q)
    if np.any(~(T > 0.0)):
        raise NonPositiveTemperature(f"{model.name}: temperatures {T} not all positive")
    k = model.kappa(q, None)
    f_fr = model.friction_forces(q, v, None)
    internal = (k * (T[None, :] - T[:, None])).sum(axis=1)
    P_ext = np.zeros(model.n_sub)
    for src in model.sources:
        P_ext += src.kappa(q, None) * (src.T() - T)
    sigma = (-(f_fr @ v) + internal + P_ext) / T

    f = model.grad_q(q, v, T) + f_fr.sum(axis=0) + model.ext_forces(q, v, None, t).sum(axis=0)
    f = f - model.mixed_q(q, v, T) @ v
    g = sigma - model.entropy_q(q, v, T) @ v
    M = model.mass(q, v, T)
    G = model.mixed_T(q, v, T)
    C = model.capacity(q, v, T)
    # Schur complement on the mechanical block keeps the two failure modes apart
    Minv_f = solve_spd(M, f, SingularMassMatrix, f"{model.name} mass matrix")
    Minv_G = solve_spd(M, G, SingularMassMatrix, f"{model.name} mass matrix")
    schur = C - G.T @ Minv_G
    T_dot = solve_general(schur, g - G.T @ Minv_f, SingularHeatCapacity, f"{model.name} heat capacity")
    v_dot = Minv_f - Minv_G @ T_dot
    return v.copy(), v_dot, T_dot


class FreeEnergySystem:
    """Integrator adaptor; state vector ``[q, v, T]``."""

    def __init__(self, model: FreeEnergyModel):
        self.model = model
        n, N = model.dim, model.n_sub
        self.labels = [f"q{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)] + [f"T{A + 1}" for A in range(N)]

    def split(self, y):
        n = self.model.dim
        return y[:n], y[n : 2 * n], y[2 * n :]

    def rhs(self, t, y):
        return np.concatenate(free_energy_rhs(self.model, *self.split(y), t))

    def check(self, y):
        if not np.all(np.isfinite(y)):
            raise DomainError("non-finite state")
        q, v, T = self.split(y)
        self.model.check(q)
        if np.any(~(T > 0.0)):
            raise NonPositiveTemperature(f"temperatures {T} not all positive")

    def diagnostics(self, t, y) -> dict:
        m = self.model
        q, v, T = self.split(y)
        S = m.entropy(q, v, T)
        k = m.kappa(q, None)
        f_fr = m.friction_forces(q, v, None)
        P_ext = np.zeros(m.n_sub)
        for src in m.sources:
            P_ext += src.kappa(q, None) * (src.T() - T)
        conduction = 0.5 * float(np.sum(k * (T[None, :] - T[:, None]) ** 2 / np.outer(T, T)))
        d = {f"S{A + 1}": S[A] for A in range(m.n_sub)}
        d.update(
            E=float(m.grad_v(q, v, T) @ v - m.F(q, v, T) + T @ S),
            P_W_ext=float(m.ext_forces(q, v, None, t).sum(axis=0) @ v),
            P_H_ext=float(P_ext.sum()),
            I_internal=float(np.sum(-(f_fr @ v) / T)) + conduction,
            S_total=float(S.sum()),
        )
        return d
