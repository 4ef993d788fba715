"""Reaction networks, reactors, a reacting piston, and membrane transport.

Stoichiometric matrices are ``r x R`` (reactions by species) and
``nu = nu_bwd - nu_fwd``.  Affinities are ``A = -nu @ mu`` and, for a linear
rate law, reaction rates are ``J = Lmat @ A`` with ``Lmat`` symmetric PSD.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainError,
    NegativeMoles,
    NegativeVolume,
    NonPositiveTemperature,
    StoichiometryMassViolation,
)
from .numerics import check_onsager
from .thermo import IdealMixture

MOLE_FLOOR = -1e-12


def _check_moles(N):
    if np.any(N < MOLE_FLOOR) or not np.all(np.isfinite(N)):
        raise NegativeMoles(f"mole numbers went negative: min {float(np.min(N)):.6g}")


def _check_T(T):
    if np.any(~(np.asarray(T) > 0.0)):
        raise NonPositiveTemperature(f"temperature {float(np.min(T)):.6g} is not positive")


@dataclass(frozen=True)
class ReactionNetwork:
    """Stoichiometry plus a rate law.

    ``rate_matrix`` may be a constant PSD matrix or a callable
    ``(N, S) -> matrix``; alternatively ``rate_law(N, S, A) -> J`` gives an
    arbitrary (not necessarily dissipative) law, intended for diagnostics
    tests.
    """

    nu_fwd: np.ndarray
    nu_bwd: np.ndarray
    molar_mass: Optional[np.ndarray] = None
    rate_matrix: object = None
    rate_law: Optional[Callable] = None
    species: Optional[Sequence[str]] = None
    mass_rtol: float = 1e-12

    def __post_init__(self):
        fwd = np.atleast_2d(np.asarray(self.nu_fwd, dtype=float))
        bwd = np.atleast_2d(np.asarray(self.nu_bwd, dtype=float))
        if fwd.shape != bwd.shape:
            raise DimensionMismatch(f"forward {fwd.shape} and backward {bwd.shape} stoichiometry differ")
        if np.any(fwd < 0) or np.any(bwd < 0):
            raise ValueError("stoichiometric coefficients must be nonnegative")
        M = np.ones(fwd.shape[1]) if self.molar_mass is None else np.asarray(self.molar_mass, dtype=float)
        if M.shape != (fwd.shape[1],) or np.any(~(M > 0)):
            raise DimensionMismatch("molar masses must be positive, one per species")
        object.__setattr__(self, "nu_fwd", fwd)
        object.__setattr__(self, "nu_bwd", bwd)
        object.__setattr__(self, "molar_mass", M)
        nu = bwd - fwd
        imbalance = np.abs(nu @ M)
        scale = np.abs(nu) @ M
        if np.any(imbalance > self.mass_rtol * np.maximum(scale, 1.0)):
            bad = int(np.argmax(imbalance))
            raise StoichiometryMassViolation(f"reaction {bad} changes mass by {float((nu @ M)[bad]):g}")
        if self.rate_matrix is not None and not callable(self.rate_matrix):
            L = check_onsager(self.rate_matrix, "reaction rate matrix")
            if L.shape != (fwd.shape[0], fwd.shape[0]):
                raise DimensionMismatch(f"rate matrix must be {fwd.shape[0]}x{fwd.shape[0]}")
            object.__setattr__(self, "rate_matrix", L)

    @property
    def nu(self) -> np.ndarray:
        return self.nu_bwd - self.nu_fwd

    @property
    def n_reactions(self) -> int:
        return self.nu_fwd.shape[0]

    @property
    def n_species(self) -> int:
        return self.nu_fwd.shape[1]

    def rates(self, N, S, A) -> np.ndarray:
        if self.rate_law is not None:
            return np.atleast_1d(np.asarray(self.rate_law(N, S, A), dtype=float))
        if self.rate_matrix is None:
            return np.zeros_like(A)
        L = self.rate_matrix(N, S) if callable(self.rate_matrix) else self.rate_matrix
        return np.asarray(L, dtype=float) @ A


def affinity(net: ReactionNetwork, mu) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    if mu.shape[0] != net.n_species:
        raise DimensionMismatch(f"expected {net.n_species} chemical potentials, got {mu.shape[0]}")
    return -(net.nu @ mu)


def total_mass(net: ReactionNetwork, N) -> float:
    return float(net.molar_mass @ np.asarray(N, dtype=float))


# --------------------------------------------------------------------------- closed reactor


@dataclass(frozen=True)
class Reactor:
    """Well-mixed closed reactor at fixed volume.

    ``energy`` needs ``temperature(S, N, V)``, ``chemical_potential(S, N, V)``
    and ``energy(S, N, V)`` (e.g. :class:`IdealMixture`).  ``N_ref`` anchors
    the reaction extents.
    """

    network: ReactionNetwork
    energy: object
    N_ref: np.ndarray
    volume: float = 1.0
    heat_power: object = 0.0  # constant or callable(t)

    def P(self, t) -> float:
        return float(self.heat_power(t)) if callable(self.heat_power) else float(self.heat_power)

    def moles(self, psi) -> np.ndarray:
        return np.asarray(self.N_ref, dtype=float) + self.network.nu.T @ np.asarray(psi, dtype=float)


class ReactionRates(NamedTuple):
    T: float
    mu: np.ndarray
    A: np.ndarray
    J: np.ndarray
    P: float


def _reactor_rates(reactor: Reactor, N, S, t) -> ReactionRates:
    _check_moles(N)
    T = float(reactor.energy.temperature(S, N, reactor.volume))
    _check_T(T)
    mu = np.asarray(reactor.energy.chemical_potential(S, N, reactor.volume), dtype=float)
    A = affinity(reactor.network, mu)
    J = reactor.network.rates(N, S, A)
    return ReactionRates(T, mu, A, J, reactor.P(t))


def reactor_rhs_psi(reactor: Reactor, psi, S: float, t: float = 0.0):
    """``(psi_dot, S_dot)`` with ``psi_dot = J`` and ``T S_dot = J.A + P``."""
    N = reactor.moles(psi)
    r = _reactor_rates(reactor, N, S, t)
    return r.J, (r.J @ r.A + r.P) / r.T


def reactor_rhs_N(reactor: Reactor, N, S: float, t: float = 0.0):
    """``(N_dot, S_dot, W_dot)``; ``W_dot = mu`` is the chemical displacement rate."""
    N = np.asarray(N, dtype=float)
    r = _reactor_rates(reactor, N, S, t)
    return reactor.network.nu.T @ r.J, (r.J @ r.A + r.P) / r.T, r.mu


def _reaction_diag(reactor, N, S, t, r: ReactionRates) -> dict:
    d = {f"N{i + 1}": N[i] for i in range(N.size)}
    d.update(
        T1=r.T,
        E=float(reactor.energy.energy(S, N, reactor.volume)),
        P_W_ext=0.0,
        P_H_ext=r.P,
        I_internal=float(r.J @ r.A) / r.T,
        S_total=float(S),
        mass_total=total_mass(reactor.network, N),
        gap_A=float(np.max(np.abs(r.A))) if r.A.size else 0.0,
    )
    return d


class ReactorPsiSystem:
    """State ``[psi_1..psi_r, S]``."""

    def __init__(self, reactor: Reactor):
        self.reactor = reactor
        self.labels = [f"psi{a + 1}" for a in range(reactor.network.n_reactions)] + ["S1"]

    def rhs(self, t, y):
        psi_dot, S_dot = reactor_rhs_psi(self.reactor, y[:-1], y[-1], t)
        return np.append(psi_dot, S_dot)

    def check(self, y):
        _reactor_rates(self.reactor, self.reactor.moles(y[:-1]), y[-1], 0.0)

    def diagnostics(self, t, y):
        N = self.reactor.moles(y[:-1])
        return _reaction_diag(self.reactor, N, y[-1], t, _reactor_rates(self.reactor, N, y[-1], t))


class ReactorNSystem:
    """State ``[N_1..N_R, S]`` with optional ``W`` accumulators appended."""

    def __init__(self, reactor: Reactor, track_displacements: bool = False):
        self.reactor = reactor
        self.track = track_displacements
        R = reactor.network.n_species
        self.n = R
        self.labels = [f"N{i + 1}" for i in range(R)] + ["S1"] + ([f"W{i + 1}" for i in range(R)] if self.track else [])

    def rhs(self, t, y):
        R = self.n
        N_dot, S_dot, W_dot = reactor_rhs_N(self.reactor, y[:R], y[R], t)
        out = np.append(N_dot, S_dot)
        return np.concatenate([out, W_dot]) if self.track else out

    def check(self, y):
        _reactor_rates(self.reactor, y[: self.n], y[self.n], 0.0)

    def diagnostics(self, t, y):
        N, S = y[: self.n], y[self.n]
        return _reaction_diag(self.reactor, N, S, t, _reactor_rates(self.reactor, N, S, t))


# --------------------------------------------------------------------------- piston with reactions


@dataclass(frozen=True)
class ChemPiston:
    """Piston of mass ``mass`` and area ``area`` closing a reacting gas.

    The gas volume is ``area * x``; ``p_ext`` pushes on the outer face, so the
    external force is ``-p_ext * area``.
    """

    network: ReactionNetwork
    energy: object
    mass: float = 1.0
    area: float = 1.0
    friction: float = 0.0
    p_ext: float = 0.0
    heat_power: object = 0.0

    def P(self, t):
        return float(self.heat_power(t)) if callable(self.heat_power) else float(self.heat_power)


class ChemPistonRates(NamedTuple):
    x_dot: float
    v_dot: float
    N_dot: np.ndarray
    S_dot: float
    friction: float  # entropy production from piston friction
    chemical: float  # entropy production from reactions
    external: float  # entropy supplied by external heating


def _piston_thermo(p: ChemPiston, x, N, S):
    V = p.area * x
    if not V > 0.0:
        raise NegativeVolume(f"piston volume {float(V):.6g} is not positive")
    _check_moles(N)
    T = float(p.energy.temperature(S, N, V))
    _check_T(T)
    return V, T


def chemo_mechanical_rhs(p: ChemPiston, x: float, v: float, N, S: float, t: float = 0.0) -> ChemPistonRates:
    N = np.asarray(N, dtype=float)
    V, T = _piston_thermo(p, x, N, S)
    pressure = float(p.energy.pressure(S, N, V))
    mu = np.asarray(p.energy.chemical_potential(S, N, V), dtype=float)
    A = affinity(p.network, mu)
    J = p.network.rates(N, S, A)
    F_ext = -p.p_ext * p.area
    v_dot = (pressure * p.area - p.friction * v + F_ext) / p.mass
    fr, ch, ex = p.friction * v * v / T, float(J @ A) / T, p.P(t) / T
    return ChemPistonRates(v, v_dot, p.network.nu.T @ J, fr + ch + ex, fr, ch, ex)


class ChemPistonSystem:
    """State ``[x, v, N_1..N_R, S]``."""

    def __init__(self, piston: ChemPiston):
        self.p = piston
        R = piston.network.n_species
        self.n = R
        self.labels = ["q1", "v1"] + [f"N{i + 1}" for i in range(R)] + ["S1"]

    def _split(self, y):
        return y[0], y[1], y[2 : 2 + self.n], y[2 + self.n]

    def rhs(self, t, y):
        r = chemo_mechanical_rhs(self.p, *self._split(y), t)
        return np.concatenate([[r.x_dot, r.v_dot], r.N_dot, [r.S_dot]])

    def check(self, y):
        if not np.all(np.isfinite(y)):
            raise DomainError("non-finite state")
        x, _, N, S = self._split(y)
        _piston_thermo(self.p, x, N, S)

    def diagnostics(self, t, y):
        p = self.p
        x, v, N, S = self._split(y)
        V, T = _piston_thermo(p, x, N, S)
        r = chemo_mechanical_rhs(p, x, v, N, S, t)
        mu = p.energy.chemical_potential(S, N, V)
        pressure = float(p.energy.pressure(S, N, V))
        return {
            "T1": T,
            "E": 0.5 * p.mass * v * v + float(p.energy.energy(S, N, V)),
            "P_W_ext": -p.p_ext * p.area * v,
            "P_H_ext": p.P(t),
            "I_internal": r.friction + r.chemical,
            "S_total": float(S),
            "I_friction": r.friction,
            "I_chemical": r.chemical,
            "mass_total": total_mass(p.network, N),
            "gap_v": abs(v),
            "gap_p": abs(pressure - p.p_ext) / max(pressure, p.p_ext),
            "gap_A": float(np.max(np.abs(affinity(p.network, mu)))),
        }


# --------------------------------------------------------------------------- membranes


@dataclass(frozen=True)
class SharedTemperatureMixture:
    """Ideal mixture spread over compartments of fixed volume at one temperature.

    Mole numbers are passed as an ``(n_comp, K)`` array.
    """

    mixture: IdealMixture
    volumes: np.ndarray

    def __post_init__(self):
        vols = np.atleast_1d(np.asarray(self.volumes, dtype=float))
        if np.any(~(vols > 0)):
            raise NegativeVolume("compartment volumes must be positive")
        object.__setattr__(self, "volumes", vols)
        m = self.mixture
        n = vols.size
        flat = IdealMixture(np.tile(m.c, n), np.tile(m.u0, n), np.tile(m.s0, n), m.R, m.T0, m.n0)
        object.__setattr__(self, "_flat", flat)
        object.__setattr__(self, "_V", np.repeat(vols, m.n_species))

    def temperature(self, S, N):
        return float(self._flat.temperature(S, np.ravel(N), self._V))

    def chemical_potential(self, S, N):
        N = np.asarray(N, dtype=float)
        return self._flat.chemical_potential(S, N.ravel(), self._V).reshape(N.shape)

    def energy(self, S, N):
        return float(self._flat.energy(S, np.ravel(N), self._V))


@dataclass(frozen=True)
class CompartmentModel:
    """Chain of ``n_comp`` compartments exchanging ``K`` species.

    Interface ``k`` joins compartments ``k`` and ``k+1`` with per-species
    conductance ``g[k]``; the flux into compartment ``k`` is
    ``J_k = -g_k (mu_k - mu_{k+1})``.  ``networks[k]`` is the reaction network
    active in compartment ``k`` (or ``None``).
    """

    energy: object
    conductances: np.ndarray
    networks: Sequence = ()
    molar_mass: Optional[np.ndarray] = None
    heat_power: object = 0.0

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.conductances, dtype=float))
        if np.any(g < 0):
            raise ValueError("membrane conductances must be nonnegative")
        object.__setattr__(self, "conductances", g)
        nets = tuple(self.networks) if self.networks else (None,) * self.n_comp
        if len(nets) != self.n_comp:
            raise DimensionMismatch(f"need one network slot per compartment ({self.n_comp})")
        object.__setattr__(self, "networks", nets)
        M = self.molar_mass
        if M is None:
            M = next((n.molar_mass for n in nets if n is not None), np.ones(self.n_species))
        M = np.asarray(M, dtype=float)
        for net in nets:
            if net is not None and (net.n_species != self.n_species or not np.allclose(net.molar_mass, M)):
                raise DimensionMismatch("reaction network species do not match the compartments")
        object.__setattr__(self, "molar_mass", M)

    @property
    def n_comp(self) -> int:
        return self.conductances.shape[0] + 1

    @property
    def n_species(self) -> int:
        return self.conductances.shape[1]

    @property
    def reacting(self) -> bool:
        return any(n is not None for n in self.networks)

    def P(self, t):
        return float(self.heat_power(t)) if callable(self.heat_power) else float(self.heat_power)


class MembraneRates(NamedTuple):
    N_dot: np.ndarray
    S_dot: float
    T: float
    mu: np.ndarray
    diffusion: float  # entropy production by transport across interfaces
    chemical: float  # entropy production by reactions
    affinities: list


def _membrane_rates(model: CompartmentModel, N, S, t, with_reactions: bool) -> MembraneRates:
    N = np.asarray(N, dtype=float).reshape(model.n_comp, model.n_species)
    _check_moles(N)
    T = model.energy.temperature(S, N)
    _check_T(T)
    mu = np.asarray(model.energy.chemical_potential(S, N), dtype=float)
    dmu = mu[:-1] - mu[1:]
    J = -model.conductances * dmu  # into compartment k from k+1
    N_dot = np.zeros_like(N)
    N_dot[:-1] += J
    N_dot[1:] -= J
    diffusion = -float(np.sum(J * dmu))
    chemical = 0.0
    affinities = []
    if with_reactions:
        for k, net in enumerate(model.networks):
            if net is None:
                continue
            A = affinity(net, mu[k])
            Jr = net.rates(N[k], S, A)
            N_dot[k] += net.nu.T @ Jr
            chemical += float(Jr @ A)
            affinities.append(A)
    S_dot = (diffusion + chemical + model.P(t)) / T
    return MembraneRates(N_dot, S_dot, T, mu, diffusion / T, chemical / T, affinities)


def membrane_rhs(model: CompartmentModel, N, S: float, t: float = 0.0):
    """``(N_dot, S_dot)`` for diffusion through the membrane chain."""
    r = _membrane_rates(model, N, S, t, with_reactions=False)
    return r.N_dot, r.S_dot


def reacting_membrane_rhs(model: CompartmentModel, N, S: float, t: float = 0.0):
    """As :func:`membrane_rhs`, plus reactions inside each compartment."""
    r = _membrane_rates(model, N, S, t, with_reactions=True)
    return r.N_dot, r.S_dot


class MembraneSystem:
    """State ``[N^(1)_1..N^(1)_K, ..., N^(n)_K, S]``."""

    def __init__(self, model: CompartmentModel):
        self.model = model
        self.react = model.reacting
        self.labels = [f"N{k + 1}_{i + 1}" for k in range(model.n_comp) for i in range(model.n_species)] + ["S1"]

    def _rates(self, t, y):
        return _membrane_rates(self.model, y[:-1], y[-1], t, self.react)

    def rhs(self, t, y):
        r = self._rates(t, y)
        return np.append(r.N_dot.ravel(), r.S_dot)

    def check(self, y):
        if not np.all(np.isfinite(y)):
            raise DomainError("non-finite state")
        self._rates(0.0, y)

    def diagnostics(self, t, y):
        m = self.model
        r = self._rates(t, y)
        N = y[:-1].reshape(m.n_comp, m.n_species)
        P = m.P(t)
        # instantaneous first-law residual: dU/dt = T Sdot + mu . Ndot must equal P
        terms = np.concatenate([[r.T * r.S_dot, P], (r.mu * r.N_dot).ravel()])
        resid = abs(r.T * r.S_dot + float(np.sum(r.mu * r.N_dot)) - P)
        d = {
            "T1": r.T,
            "E": m.energy.energy(y[-1], N),
            "P_W_ext": 0.0,
            "P_H_ext": P,
            "I_internal": r.diffusion + r.chemical,
            "S_total": float(y[-1]),
            "S_dot": r.S_dot,
            "I_diffusion": r.diffusion,
            "I_chemical": r.chemical,
            "mass_total": float(np.sum(N @ m.molar_mass)),
            "dU_dt_residual": resid / max(float(np.sum(np.abs(terms))), 1e-300),
            "gap_mu": float(np.max(np.abs(r.mu[:-1] - r.mu[1:]))),
        }
        if r.affinities:
            d["gap_A"] = float(max(np.max(np.abs(A)) for A in r.affinities))
        return d
