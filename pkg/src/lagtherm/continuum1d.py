"""Finite-volume solver for 1-D heat-conducting, viscous, reacting fluids.

Unknowns per cell are mole densities ``n_A`` (``K`` species), momentum
density ``m = rho v`` and entropy density ``s``.  The advective part is built
from the two-point kinetic-energy-preserving flux (``{a}`` is a pair mean)

    F_n = {n}{v},  F_m = {rho}{v}{v} + {p},  F_s = {s}{v},

combined over neighbours at distance one and two into a fourth-order
conservative difference (``advection="central4"``, the default).  The plain
second-order version (``"central"``) and a local Lax-Friedrichs variant
(``"lf"``) are also available.  On walled grids the faces next to a wall
fall back to the two-point flux, which costs the fourth-order scheme its
energy accuracy there; ``"central"`` is the better choice for closed boxes.

Dissipative fluxes are compact: they use face gradients of ``v``, ``T`` and
``mu``, and each face carries the production
``pi = sigma g_v - j_S g_T - j_A g_mu``.  Half of ``pi`` is credited to each
neighbouring cell in the entropy equation, so the dissipative exchange
between kinetic, thermal and chemical energy cancels exactly in the discrete
total energy.  The residual energy error comes from advection alone.

Walls are no-slip, adiabatic and impermeable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .chemistry import ReactionNetwork
from .errors import DimensionMismatch, DomainError, InvalidOnsager, NonPositiveDensity
from .numerics import check_onsager
from .thermo import IdealMixture


@dataclass(frozen=True)
class Grid1D:
    n_cells: int
    length: float = 1.0
    boundary: str = "periodic"  # or "walls"

    def __post_init__(self):
        if self.n_cells < 4:
            raise ValueError("need at least 4 cells")
        if not self.length > 0:
            raise ValueError("domain length must be positive")
        if self.boundary not in ("periodic", "walls"):
            raise ValueError(f"unknown boundary {self.boundary!r}")

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass(frozen=True)
class DensityEOS:
    """Energy density ``eps(n_1..n_K, s)`` of an ideal mixture per unit volume."""

    mixture: IdealMixture
    molar_mass: np.ndarray = None

    def __post_init__(self):
        M = np.ones(self.mixture.n_species) if self.molar_mass is None else np.asarray(self.molar_mass, dtype=float)
        if M.shape != (self.mixture.n_species,) or np.any(~(M > 0)):
            raise DimensionMismatch("one positive molar mass per species required")
        object.__setattr__(self, "molar_mass", M)

    @property
    def n_species(self) -> int:
        return self.mixture.n_species

    def density(self, n):
        return self.molar_mass @ np.asarray(n, dtype=float)

    def temperature(self, n, s):
        return self.mixture.temperature(s, n, 1.0)

    def energy_density(self, n, s):
        return self.mixture.energy(s, n, 1.0)

    def chemical_potential(self, n, s):
        return self.mixture.chemical_potential(s, n, 1.0)

    def pressure(self, n, s):
        """Gibbs-Euler relation ``p = sum_A n_A mu_A + s T - eps``."""
        n = np.asarray(n, dtype=float)
        return np.sum(n * self.chemical_potential(n, s), axis=0) + s * self.temperature(n, s) - self.energy_density(n, s)

    def sound_speed(self, n, s, h: float = 1e-6):
        # isentropic compression at fixed composition: scale n and s together
        n = np.asarray(n, dtype=float)
        s = np.asarray(s, dtype=float)
        dp = self.pressure(n * (1 + h), s * (1 + h)) - self.pressure(n * (1 - h), s * (1 - h))
        return np.sqrt(np.maximum(dp / (2 * h * self.density(n)), 0.0))


def perfect_gas_eos(c=1.5, R=1.0, T0=1.0, n0=1.0, s0=0.0, molar_mass=1.0) -> DensityEOS:
    """Single-component perfect gas, ``T = T0 (n/n0)^(1/c) exp((s/n - s0)/(cR))``."""
    return DensityEOS(IdealMixture([c], [0.0], [s0], R, T0, n0), np.array([molar_mass], dtype=float))


@dataclass(frozen=True)
class Phenomenology:
    """Transport coefficients.

    ``onsager_vector`` is the ``(K+1)`` square matrix coupling ``(j_S, j_A)``
    to ``(dT/dx, dmu_B/dx)``; ``onsager_scalar`` the ``(r+1)`` square matrix
    coupling ``(trace of stress, j_a)`` to ``(dv/dx / 3, A^b)``.
    """

    mu_shear: float = 0.0
    zeta_bulk: float = 0.0
    kappa_fourier: float = 0.0
    onsager_vector: Optional[np.ndarray] = None
    onsager_scalar: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("mu_shear", "zeta_bulk", "kappa_fourier"):
            if getattr(self, name) < 0:
                raise InvalidOnsager(f"{name} must be nonnegative", "Onsager positivity")
        for name in ("onsager_vector", "onsager_scalar"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, check_onsager(val, name))

    def validated(self, molar_mass, n_reactions: int) -> "Phenomenology":
        K = len(molar_mass)
        Lv, Ls = self.onsager_vector, self.onsager_scalar
        if Lv is not None:
            if Lv.shape != (K + 1, K + 1):
                raise DimensionMismatch(f"onsager_vector must be {(K + 1, K + 1)}, got {Lv.shape}")
            rows = np.asarray(molar_mass) @ Lv[1:, :]
            if np.any(np.abs(rows) > 1e-12 * max(1.0, np.abs(Lv).max())):
                raise InvalidOnsager("diffusion fluxes must carry no net mass", "Onsager mass consistency")
        if Ls is not None and Ls.shape != (n_reactions + 1, n_reactions + 1):
            raise DimensionMismatch(f"onsager_scalar must be {(n_reactions + 1,) * 2}, got {Ls.shape}")
        return self


def friction_stress_3d(grad_v, mu: float, zeta: float) -> np.ndarray:
    """Newtonian stress ``2 mu Def v + (zeta - 2 mu / 3)(div v) I`` for a 3x3 velocity gradient."""
    g = np.asarray(grad_v, dtype=float)
    D = 0.5 * (g + g.T)
    return 2 * mu * D + (zeta - 2 * mu / 3) * np.trace(D) * np.eye(3)


@dataclass(frozen=True)
class ContinuumModel:
    grid: Grid1D
    eos: DensityEOS
    phen: Phenomenology = Phenomenology()
    network: Optional[ReactionNetwork] = None
    heating: object = 0.0  # specific heat supply r: scalar, per-cell array, or callable(t, x)
    advection: str = "central4"

    def __post_init__(self):
        if self.advection not in ("central4", "central", "lf"):
            raise ValueError(f"unknown advection scheme {self.advection!r}")
        r = 0
        if self.network is not None:
            if self.network.n_species != self.eos.n_species:
                raise DimensionMismatch("network and EOS disagree on the number of species")
            if not np.allclose(self.network.molar_mass, self.eos.molar_mass):
                raise DimensionMismatch("network and EOS disagree on molar masses")
            r = self.network.n_reactions
        self.phen.validated(self.eos.molar_mass, r)

    @property
    def K(self) -> int:
        return self.eos.n_species

    @property
    def n_reactions(self) -> int:
        return 0 if self.network is None else self.network.n_reactions

    def split(self, y):
        nc, K = self.grid.n_cells, self.K
        y = np.asarray(y, dtype=float)
        if y.size != (K + 2) * nc:
            raise DimensionMismatch(f"state length {y.size} != {(K + 2) * nc}")
        return y[: K * nc].reshape(K, nc), y[K * nc : (K + 1) * nc], y[(K + 1) * nc :]

    def pack(self, n, m, s) -> np.ndarray:
        return np.concatenate([np.asarray(n, dtype=float).ravel(), m, s])

    def heat_supply(self, t):
        h = self.heating(t, self.grid.x) if callable(self.heating) else self.heating
        return np.broadcast_to(np.asarray(h, dtype=float), (self.grid.n_cells,))


class Fields(NamedTuple):
    n: np.ndarray
    m: np.ndarray
    s: np.ndarray
    rho: np.ndarray
    v: np.ndarray
    T: np.ndarray
    mu: np.ndarray
    p: np.ndarray
    eps: np.ndarray
    A: np.ndarray  # affinities, (r, nc)


def fields(model: ContinuumModel, y) -> Fields:
    n, m, s = model.split(y)
    if not (np.all(np.isfinite(n)) and np.all(np.isfinite(m)) and np.all(np.isfinite(s))):
        raise DomainError("non-finite continuum state")
    rho = model.eos.density(n)
    if np.any(~(rho > 0)):
        raise NonPositiveDensity(f"density must be positive, min {float(rho.min()):.6g}")
    T = model.eos.temperature(n, s)
    mu = model.eos.chemical_potential(n, s)
    eps = model.eos.energy_density(n, s)
    p = np.sum(n * mu, axis=0) + s * T - eps
    A = -(model.network.nu @ mu) if model.network is not None else np.zeros((0, n.shape[1]))
    return Fields(n, m, s, rho, m / rho, T, mu, p, eps, A)


class FaceFluxes(NamedTuple):
    F_n: np.ndarray  # (K, nf)
    F_m: np.ndarray
    F_s: np.ndarray
    sigma: np.ndarray  # friction stress
    j_S: np.ndarray  # diffusive entropy flux
    j_A: np.ndarray  # diffusive species fluxes (K, nf)
    pi: np.ndarray  # production density at faces
    dvdx: np.ndarray  # cell-centred velocity gradient
    j_a: np.ndarray  # reaction rates (r, nc)


def _lr(a, periodic):
    return (a, np.roll(a, -1, axis=-1)) if periodic else (a[..., :-1], a[..., 1:])


def _two_point(f: Fields, k: int, periodic: bool):
    """Kinetic-energy-preserving flux between cells ``i`` and ``i + k``."""
    if periodic:
        sh = lambda a: np.roll(a, -k, axis=-1)
        a_ = lambda a: a
    else:
        sh = lambda a: a[..., k:]
        a_ = lambda a: a[..., :-k]
    v = 0.5 * (a_(f.v) + sh(f.v))
    rho = 0.5 * (a_(f.rho) + sh(f.rho))
    Fn = 0.5 * (a_(f.n) + sh(f.n)) * v
    Fm = rho * v * v + 0.5 * (a_(f.p) + sh(f.p))
    Fs = 0.5 * (a_(f.s) + sh(f.s)) * v
    return Fn, Fm, Fs


def _advective_fluxes(model, f: Fields, periodic: bool):
    """Advective fluxes on the compact faces (see :func:`face_fluxes` for layout)."""
    near = _two_point(f, 1, periodic)
    if model.advection == "lf":
        c = model.eos.sound_speed(f.n, f.s)
        cL, cR = _lr(np.abs(f.v) + c, periodic)
        a = 0.5 * np.maximum(cL, cR)
        jumps = [np.diff(u, axis=-1) if not periodic else np.roll(u, -1, axis=-1) - u for u in (f.n, f.m, f.s)]
        return tuple(F - a * du for F, du in zip(near, jumps))
    if model.advection == "central":
        return near
    # fourth order: F = T1 + (2 T1 - T2[i-1] - T2[i]) / 6, written so that a
    # uniform state gives T1 back bit for bit
    far = _two_point(f, 2, periodic)
    out = []
    for T1, T2 in zip(near, far):
        if periodic:
            out.append(T1 + ((T1 - np.roll(T2, 1, axis=-1)) + (T1 - T2)) / 6.0)
        else:
            F = T1.copy()
            # faces with a full stencil: pairs (j, j+1) for j = 1..nc-3
            F[..., 1:-1] = T1[..., 1:-1] + ((T1[..., 1:-1] - T2[..., :-1]) + (T1[..., 1:-1] - T2[..., 1:])) / 6.0
            out.append(F)
    return tuple(out)


def face_fluxes(model: ContinuumModel, f: Fields) -> FaceFluxes:
    """Fluxes on every face.

    Periodic grids have ``nc`` faces, face ``i`` sitting between cells ``i``
    and ``i+1``.  Walled grids have ``nc + 1`` faces, face ``i`` sitting
    between cells ``i-1`` and ``i`` (faces ``0`` and ``nc`` are the walls).
    """
    g, ph = model.grid, model.phen
    dx, periodic = g.dx, g.boundary == "periodic"
    K, r = model.K, model.n_reactions
    Lv = ph.onsager_vector
    Ls = ph.onsager_scalar
    visc = 4 * ph.mu_shear / 3 + ph.zeta_bulk + (Ls[0, 0] / 9 if Ls is not None else 0.0)

    vL, vR = _lr(f.v, periodic)
    TL, TR = _lr(f.T, periodic)
    muL, muR = _lr(f.mu, periodic)
    AL, AR = _lr(f.A, periodic)
    g_v = (vR - vL) / dx
    g_T = (TR - TL) / dx
    g_mu = (muR - muL) / dx
    T_f = 0.5 * (TL + TR)

    sigma = visc * g_v
    if Ls is not None and r:
        sigma = sigma + (Ls[0, 1:] @ (0.5 * (AL + AR))) / 3
    j_S = -ph.kappa_fourier * g_T / T_f
    j_A = np.zeros_like(g_mu)
    if Lv is not None:
        j_S = j_S - (Lv[0, 0] * g_T + Lv[0, 1:] @ g_mu)
        j_A = -(np.outer(Lv[1:, 0], g_T) + Lv[1:, 1:] @ g_mu)
    pi = sigma * g_v - j_S * g_T - np.sum(j_A * g_mu, axis=0)

    F_n, F_m, F_s = _advective_fluxes(model, f, periodic)
    F_n = F_n + j_A
    F_m = F_m - sigma
    F_s = F_s + j_S

    if not periodic:
        # wall faces: no mass, heat or species flux; no-slip viscous stress
        gw = np.array([f.v[0], -f.v[-1]]) / (0.5 * dx)
        sw = visc * gw
        if Ls is not None and r:
            sw = sw + (Ls[0, 1:] @ f.A[:, [0, -1]]) / 3
        pad = lambda a, lo, hi: np.concatenate([np.atleast_1d(lo), a, np.atleast_1d(hi)])
        F_n = np.concatenate([np.zeros((K, 1)), F_n, np.zeros((K, 1))], axis=1)
        F_m = pad(F_m, f.p[0] - sw[0], f.p[-1] - sw[1])
        F_s = pad(F_s, 0.0, 0.0)
        sigma = pad(sigma, sw[0], sw[1])
        j_S = pad(j_S, 0.0, 0.0)
        j_A = np.concatenate([np.zeros((K, 1)), j_A, np.zeros((K, 1))], axis=1)
        pi = pad(pi, sw[0] * gw[0], sw[1] * gw[1])
        face_gv = pad(g_v, gw[0], gw[1])
        dvdx = 0.5 * (face_gv[:-1] + face_gv[1:])
    else:
        dvdx = 0.5 * (g_v + np.roll(g_v, 1))

    j_a = np.zeros((r, g.n_cells))
    if r and Ls is not None:
        j_a = np.outer(Ls[1:, 0], dvdx) / 3 + Ls[1:, 1:] @ f.A
    return FaceFluxes(F_n, F_m, F_s, sigma, j_S, j_A, pi, dvdx, j_a)


def _div(F, periodic, dx):
    if periodic:
        return (F - np.roll(F, 1, axis=-1)) / dx
    return (F[..., 1:] - F[..., :-1]) / dx


def _cell_production(model, fl: FaceFluxes):
    if model.grid.boundary == "periodic":
        return 0.5 * (fl.pi + np.roll(fl.pi, 1))
    return 0.5 * (fl.pi[:-1] + fl.pi[1:])


def fluxes_nsf(model: ContinuumModel, y):
    """Face friction stress and entropy flux ``(sigma, j_S)``."""
    fl = face_fluxes(model, fields(model, y))
    return fl.sigma, fl.j_S


def clausius_duhem_field(model: ContinuumModel, y) -> np.ndarray:
    """Internal entropy production density per cell (before any heat supply)."""
    f = fields(model, y)
    fl = face_fluxes(model, f)
    chem = np.sum(fl.j_a * f.A, axis=0)
    return (_cell_production(model, fl) + chem) / f.T


def multicomponent_rhs(model: ContinuumModel, y, t: float = 0.0) -> np.ndarray:
    f = fields(model, y)
    fl = face_fluxes(model, f)
    periodic, dx = model.grid.boundary == "periodic", model.grid.dx
    n_dot = -_div(fl.F_n, periodic, dx)
    if model.n_reactions:
        n_dot = n_dot + model.network.nu.T @ fl.j_a
    m_dot = -_div(fl.F_m, periodic, dx)
    source = _cell_production(model, fl) + np.sum(fl.j_a * f.A, axis=0) + f.rho * model.heat_supply(t)
    s_dot = -_div(fl.F_s, periodic, dx) + source / f.T
    return model.pack(n_dot, m_dot, s_dot)


def nsf_rhs(model: ContinuumModel, y, t: float = 0.0) -> np.ndarray:
    """Single-component Navier-Stokes-Fourier right-hand side."""
    if model.K != 1 or model.n_reactions:
        raise DimensionMismatch("nsf_rhs expects a single non-reacting species")
    return multicomponent_rhs(model, y, t)


class Totals(NamedTuple):
    energy: float
    entropy: float
    mass: float
    moles: np.ndarray
    kinetic: float


def totals(model: ContinuumModel, y) -> Totals:
    """Midpoint-rule integrals over the domain."""
    f = fields(model, y)
    dx = model.grid.dx
    ke = 0.5 * f.m * f.m / f.rho
    return Totals(
        float(np.sum(ke + f.eps) * dx),
        float(np.sum(f.s) * dx),
        float(np.sum(f.rho) * dx),
        np.sum(f.n, axis=1) * dx,
        float(np.sum(ke) * dx),
    )


def cfl_limit(model: ContinuumModel, y, courant: float = 0.4) -> float:
    """Advisory explicit time-step bound (advective and diffusive)."""
    f = fields(model, y)
    dx = model.grid.dx
    c = model.eos.sound_speed(f.n, f.s)
    dt = courant * dx / float(np.max(np.abs(f.v) + c))
    ph = model.phen
    nu_visc = (4 * ph.mu_shear / 3 + ph.zeta_bulk) / float(np.min(f.rho))
    cv = model.eos.mixture.R * float(np.min((model.eos.mixture.c @ f.n) / f.rho))
    nu_heat = ph.kappa_fourier / (float(np.min(f.rho)) * cv)
    nu = max(nu_visc, nu_heat)
    if nu > 0:
        dt = min(dt, 0.25 * dx * dx / nu)
    return dt


def state_from_primitive(model: ContinuumModel, n, v, T) -> np.ndarray:
    """Build the conserved state from mole densities, velocity and temperature."""
    nc = model.grid.n_cells
    n = np.broadcast_to(np.asarray(n, dtype=float).reshape(model.K, -1), (model.K, nc)).copy()
    v = np.broadcast_to(np.asarray(v, dtype=float), (nc,))
    T = np.broadcast_to(np.asarray(T, dtype=float), (nc,))
    s = model.eos.mixture.entropy(T, n, 1.0)
    return model.pack(n, model.eos.density(n) * v, s)


class ContinuumSystem:
    """Integrator adaptor for :class:`ContinuumModel`."""

    def __init__(self, model: ContinuumModel):
        self.model = model
        K, nc = model.K, model.grid.n_cells
        self.labels = [f"n{a + 1}[{i}]" for a in range(K) for i in range(nc)]
        self.labels += [f"m[{i}]" for i in range(nc)] + [f"s[{i}]" for i in range(nc)]

    def rhs(self, t, y):
        return multicomponent_rhs(self.model, y, t)

    def check(self, y):
        n, _, _ = self.model.split(y)
        if np.any(n < -1e-12):
            raise DomainError(f"negative mole density {float(n.min()):.6g}")
        fields(self.model, y)

    def diagnostics(self, t, y) -> dict:
        m = self.model
        f = fields(m, y)
        tot = totals(m, y)
        i = clausius_duhem_field(m, y)
        dx = m.grid.dx
        d = {
            "E": tot.energy,
            "P_W_ext": 0.0,
            "P_H_ext": float(np.sum(f.rho * m.heat_supply(t)) * dx),
            "I_internal": float(np.sum(i) * dx),
            "S_total": tot.entropy,
            "mass_total": tot.mass,
            "kinetic": tot.kinetic,
            "i_min": float(np.min(i)),
            "gap_v": float(np.max(np.abs(f.v))),
            "gap_T": float((f.T.max() - f.T.min()) / f.T.mean()),
        }
        for a in range(m.K):
            d[f"moles{a + 1}"] = float(tot.moles[a])
        return d

    def field_table(self, y) -> dict:
        """Columns for a field snapshot: x, n_A, v, s, T, p, i."""
        m = self.model
        f = fields(m, y)
        cols = {"x": m.grid.x}
        for a in range(m.K):
            cols[f"n{a + 1}"] = f.n[a]
        cols.update(v=f.v, s=f.s, T=f.T, p=f.p, i=clausius_duhem_field(m, y))
        return cols
