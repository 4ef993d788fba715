"""Builtin example models.

Every entry takes a flat parameter dictionary (defaults in ``Entry.params``)
and an optional dictionary of initial values, and returns a :class:`Built`
bundle with an integrator-ready system and initial state vector.

Two switches are shared by all entries:

``isolated``
    drop external forces, voltage sources and heat supply.
``reversible``
    zero every friction, resistance, conductance and rate coefficient that
    the model can run without.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .chemistry import (
    ChemPiston,
    ChemPistonSystem,
    CompartmentModel,
    MembraneSystem,
    ReactionNetwork,
    Reactor,
    ReactorNSystem,
    ReactorPsiSystem,
    SharedTemperatureMixture,
)
from .continuum1d import ContinuumModel, ContinuumSystem, DensityEOS, Grid1D, Phenomenology, state_from_primitive
from .core import CoulombFriction, LinearFriction, NoFriction, SimpleModel, SimpleSystem
from .diagnostics import SampledEOS
from .errors import DomainError, NonPositiveTemperature, ParseError
from .integrate import IntegratorConfig
from .network import FreeEnergyModel, FreeEnergySystem, NetworkModel, NetworkSystem
from .thermo import IdealMixture, PerfectGas, ThermalBody


@dataclass
class Built:
    system: object
    y0: np.ndarray
    kind: str = "ode"  # or "continuum"
    model: object = None
    equilibrium: dict = field(default_factory=dict)  # gap thresholds for hooks and reports
    reversible: bool = False


@dataclass(frozen=True)
class Entry:
    name: str
    summary: str
    reproduces: str
    params: dict
    initial: dict
    integrator: dict
    builder: Callable
    kind: str = "ode"


def _merge(name, defaults, given, what):
    out = dict(defaults)
    for k, v in (given or {}).items():
        if k not in defaults:
            raise ParseError(f"{name}: unknown {what} {k!r}; expected one of {sorted(defaults)}")
        d = defaults[k]
        try:
            if isinstance(d, bool):
                if not isinstance(v, bool):
                    raise TypeError
                out[k] = v
            elif isinstance(d, str):
                out[k] = str(v)
            elif isinstance(d, (list, tuple)):
                out[k] = np.asarray(v, dtype=float).tolist()
            elif d is None:
                out[k] = None if v is None else (np.asarray(v, dtype=float).tolist() if isinstance(v, (list, tuple)) else float(v))
            elif isinstance(d, int) and not isinstance(d, bool):
                if float(v) != int(v):
                    raise TypeError
                out[k] = int(v)
            else:
                out[k] = float(v)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{name}: {what} {k!r} has invalid value {v!r}") from exc
    return out


def _uniform(rng, lo, hi, n=None):
    return rng.uniform(lo, hi, n)


def _bath_power(kappa, T_bath, temp_fn):
    if kappa == 0.0:
        return None
    return lambda q, v, S, t: kappa * (T_bath - temp_fn(q, S))


# --------------------------------------------------------------------------- one cylinder


def _one_cylinder(p, init):
    gas = PerfectGas(p["c"], p["R"], p["U0"], p["S0"], p["N0"], p["V0"])
    m, A = p["mass"], p["area"]
    lam = 0.0 if p["reversible"] else p["friction"]
    p_ext = 0.0 if p["isolated"] else p["p_ext"]
    kb = 0.0 if (p["isolated"] or p["reversible"]) else p["bath_kappa"]

    def U(x, S):
        return gas.energy(S, A * x[0])

    model = SimpleModel(
        dim=1,
        lagrangian=lambda q, v, S: 0.5 * m * v[0] ** 2 - U(q, S),
        dL_dq=lambda q, v, S: np.array([gas.pressure(S, A * q[0]) * A]),
        dL_dv=lambda q, v, S: m * v,
        dL_dS=lambda q, v, S: -gas.temperature(S, A * q[0]),
        mass_matrix=lambda q, v, S: np.array([[m]]),
        separable=True,
        friction=LinearFriction(lam) if lam else NoFriction(),
        external_force=(lambda q, v, S, t: np.array([-p_ext * A])) if p_ext else None,
        heat_power=_bath_power(kb, p["bath_T"], lambda q, S: gas.temperature(S, A * q[0])),
        q_lower=np.array([0.0]),
        name="one_cylinder",
        sampler=lambda rng: (_uniform(rng, 0.5, 2.0, 1), _uniform(rng, -1, 1, 1), float(_uniform(rng, -0.5, 0.5))),
    )
    S0 = gas.entropy(init["T"], A * init["x"]) if init["S"] is None else init["S"]
    return Built(SimpleSystem(model), np.array([init["x"], init["v"], S0]), model=model, reversible=p["reversible"])


# --------------------------------------------------------------------------- mass-spring


def _mass_spring(p, init):
    m, k0, alpha = p["mass"], p["k0"], p["alpha"]
    Cb, Tref = p["body_C"], p["body_T"]
    body = ThermalBody(Cb, Tref)
    lam = 0.0 if p["reversible"] else p["friction"]
    F0 = 0.0 if p["isolated"] else p["force_amp"]
    w = p["force_omega"]
    kb = 0.0 if (p["isolated"] or p["reversible"]) else p["bath_kappa"]

    def k(S):
        return k0 * (1.0 + alpha * S)

    def T(q, S):
        return 0.5 * k0 * alpha * q[0] ** 2 + body.temperature(S)

    model = SimpleModel(
        dim=1,
        lagrangian=lambda q, v, S: 0.5 * m * v[0] ** 2 - 0.5 * k(S) * q[0] ** 2 - body.energy(S),
        dL_dq=lambda q, v, S: np.array([-k(S) * q[0]]),
        dL_dv=lambda q, v, S: m * v,
        dL_dS=lambda q, v, S: -T(q, S),
        mass_matrix=lambda q, v, S: np.array([[m]]),
        separable=True,
        friction=CoulombFriction(lam, p["eps"]) if lam else NoFriction(),
        external_force=(lambda q, v, S, t: np.array([F0 * np.sin(w * t)])) if F0 else None,
        heat_power=_bath_power(kb, p["bath_T"], T),
        name="mass_spring",
        sampler=lambda rng: (_uniform(rng, -2, 2, 1), _uniform(rng, -1, 1, 1), float(_uniform(rng, -0.5, 0.5))),
    )
    return Built(SimpleSystem(model), np.array([init["x"], init["v"], init["S"]]), model=model, reversible=p["reversible"])


# --------------------------------------------------------------------------- series RLC


def _rlc_series(p, init):
    Lind, Cap, beta = p["inductance"], p["capacitance"], p["beta"]
    body = ThermalBody(p["body_C"], p["body_T"])
    R = 0.0 if p["reversible"] else p["resistance"]
    V0 = 0.0 if p["isolated"] else p["V_amp"]
    w = p["V_omega"]
    kb = 0.0 if (p["isolated"] or p["reversible"]) else p["bath_kappa"]

    def U_C(q):
        return q * q / (2 * Cap) + 0.25 * beta * q**4

    model = SimpleModel(
        dim=1,
        lagrangian=lambda q, v, S: 0.5 * Lind * v[0] ** 2 - U_C(q[0]) - body.energy(S),
        dL_dq=lambda q, v, S: np.array([-(q[0] / Cap + beta * q[0] ** 3)]),
        dL_dv=lambda q, v, S: Lind * v,
        dL_dS=lambda q, v, S: -body.temperature(S),
        mass_matrix=lambda q, v, S: np.array([[Lind]]),
        separable=True,
        friction=LinearFriction(R) if R else NoFriction(),
        external_force=(lambda q, v, S, t: np.array([V0 * np.sin(w * t)])) if V0 else None,
        heat_power=_bath_power(kb, p["bath_T"], lambda q, S: body.temperature(S)),
        name="rlc_series",
        sampler=lambda rng: (_uniform(rng, -2, 2, 1), _uniform(rng, -1, 1, 1), float(_uniform(rng, -0.5, 0.5))),
    )
    return Built(SimpleSystem(model), np.array([init["q"], init["I"], init["S"]]), model=model, reversible=p["reversible"])


# --------------------------------------------------------------------------- reactors


def _three_species(p):
    nu_fwd = [[1, 0, 0], [0, 2, 0]]
    nu_bwd = [[0, 1, 0], [0, 0, 1]]
    L = np.zeros((2, 2)) if p["reversible"] else np.asarray(p["rate_matrix"], dtype=float).reshape(2, 2)
    net = ReactionNetwork(nu_fwd, nu_bwd, p["molar_mass"], L, species=("A", "B", "C"))
    mix = IdealMixture(p["c"], p["u0"], p["s0"], p["R"], p["T0"], p["n0"])
    return net, mix


def _reactor_common(p, init):
    net, mix = _three_species(p)
    N0 = np.asarray(init["N"], dtype=float)
    P = 0.0 if (p["isolated"] or p["reversible"]) else p["heat_power"]
    reactor = Reactor(net, mix, N0, p["volume"], P)
    S0 = float(mix.entropy(init["T"], N0, p["volume"])) if init["S"] is None else init["S"]
    return reactor, S0


def _reactor_psi(p, init):
    reactor, S0 = _reactor_common(p, init)
    return Built(ReactorPsiSystem(reactor), np.append(np.zeros(reactor.network.n_reactions), S0), model=reactor,
                 equilibrium={"gap_A": 1e-6}, reversible=p["reversible"])


def _reactor_N(p, init):
    reactor, S0 = _reactor_common(p, init)
    return Built(ReactorNSystem(reactor), np.append(reactor.N_ref, S0), model=reactor,
                 equilibrium={"gap_A": 1e-6}, reversible=p["reversible"])


# --------------------------------------------------------------------------- piston with reactions


def _chem_piston(p, init):
    L = 0.0 if p["reversible"] else p["rate"]
    net = ReactionNetwork([[1, 0]], [[0, 2]], p["molar_mass"], [[L]], species=("A", "B"))
    mix = IdealMixture(p["c"], p["u0"], p["s0"], p["R"], p["T0"], p["n0"])
    piston = ChemPiston(
        net,
        mix,
        mass=p["mass"],
        area=p["area"],
        friction=0.0 if p["reversible"] else p["friction"],
        p_ext=0.0 if p["isolated"] else p["p_ext"],
        heat_power=0.0 if (p["isolated"] or p["reversible"]) else p["heat_power"],
    )
    N0 = np.asarray(init["N"], dtype=float)
    V = p["area"] * init["x"]
    S0 = float(mix.entropy(init["T"], N0, V)) if init["S"] is None else init["S"]
    y0 = np.concatenate([[init["x"], init["v"]], N0, [S0]])
    return Built(ChemPistonSystem(piston), y0, model=piston,
                 equilibrium={"gap_v": 1e-4, "gap_p": 1e-4, "gap_A": 1e-4}, reversible=p["reversible"])


# --------------------------------------------------------------------------- membranes


def _membrane(p, init, reacting):
    K = 2 if reacting else 1
    mix = IdealMixture(p["c"][:K], p["u0"][:K], p["s0"][:K], p["R"], p["T0"], p["n0"])
    vols = np.asarray(p["volumes"], dtype=float)
    energy = SharedTemperatureMixture(mix, vols)
    g = 0.0 if p["reversible"] else p["conductance"]
    G = np.full((vols.size - 1, K), g)
    nets = ()
    if reacting:
        L = 0.0 if p["reversible"] else p["rate"]
        net = ReactionNetwork([[1, 0]], [[0, 1]], p["molar_mass"][:K], [[L]], species=("A", "B"))
        nets = tuple(net if k == p["reacting_compartment"] else None for k in range(vols.size))
    P = 0.0 if (p["isolated"] or p["reversible"]) else p["heat_power"]
    model = CompartmentModel(energy, G, nets, molar_mass=p["molar_mass"][:K], heat_power=P)
    N0 = np.asarray(init["N"], dtype=float).reshape(vols.size, -1)[:, :K]
    S0 = float(np.sum(mix.entropy(init["T"], N0.T, vols))) if init["S"] is None else init["S"]
    thr = {"gap_mu": 1e-3}
    if reacting:
        thr["gap_A"] = 1e-3
    return Built(MembraneSystem(model), np.append(N0.ravel(), S0), model=model, equilibrium=thr, reversible=p["reversible"])


# --------------------------------------------------------------------------- two pistons


def two_piston_models(p):
    """Entropy-based and temperature-based models of the connected cylinders."""
    g1 = PerfectGas(p["c"], p["R"], p["c"] * p["N1"] * p["R"] * p["T_ref"], 0.0, p["N1"], 1.0)
    g2 = PerfectGas(p["c"], p["R"], p["c"] * p["N2"] * p["R"] * p["T_ref"], 0.0, p["N2"], 1.0)
    a1, a2, D, M = p["area1"], p["area2"], p["gap_length"], p["mass"]
    lam1, lam2 = (0.0, 0.0) if p["reversible"] else (p["friction1"], p["friction2"])
    kappa = 0.0 if p["reversible"] else p["kappa"]

    def vols(q):
        return a1 * q[0], a2 * (D - q[0])

    def sample_S(rng):
        q = _uniform(rng, 0.3 * D, 0.7 * D, 1)
        return q, _uniform(rng, -1, 1, 1), _uniform(rng, -0.5, 0.5, 2)

    def sample_T(rng):
        q = _uniform(rng, 0.3 * D, 0.7 * D, 1)
        return q, _uniform(rng, -1, 1, 1), _uniform(rng, 0.5, 2.0, 2)

    fr = [LinearFriction(lam1) if lam1 else NoFriction(), LinearFriction(lam2) if lam2 else NoFriction()]
    K = np.array([[0.0, kappa], [kappa, 0.0]])
    common = dict(frictions=fr, conductivities=K, q_lower=np.array([0.0]), q_upper=np.array([D]))

    def L(q, v, S):
        V1, V2 = vols(q)
        return 0.5 * M * v[0] ** 2 - g1.energy(S[0], V1) - g2.energy(S[1], V2)

    def dL_dq(q, v, S):
        V1, V2 = vols(q)
        return np.array([g1.pressure(S[0], V1) * a1 - g2.pressure(S[1], V2) * a2])

    def dL_dS(q, v, S):
        V1, V2 = vols(q)
        return -np.array([g1.temperature(S[0], V1), g2.temperature(S[1], V2)])

    entropy_model = NetworkModel(
        n_sub=2, dim=1, lagrangian=L, dL_dq=dL_dq, dL_dv=lambda q, v, S: M * v, dL_dS=dL_dS,
        mass_matrix=lambda q, v, S: np.array([[M]]), separable=True, name="two_piston",
        sampler=sample_S, **common,
    )

    def F(q, v, T):
        V1, V2 = vols(q)
        return 0.5 * M * v[0] ** 2 - g1.free_energy(T[0], V1) - g2.free_energy(T[1], V2)

    def F_q(q, v, T):
        V1, V2 = vols(q)
        return np.array([p["N1"] * p["R"] * T[0] / V1 * a1 - p["N2"] * p["R"] * T[1] / V2 * a2])

    def F_T(q, v, T):
        V1, V2 = vols(q)
        return np.array([g1.entropy(T[0], V1), g2.entropy(T[1], V2)])

    def F_TT(q, v, T):
        return np.diag([g1.heat_capacity(T[0]), g2.heat_capacity(T[1])])

    def F_Tq(q, v, T):
        V1, V2 = vols(q)
        return np.array([[g1.dS_dV(T[0], V1) * a1], [-g2.dS_dV(T[1], V2) * a2]])

    free_model = FreeEnergyModel(
        n_sub=2, dim=1, free_lagrangian=F, d_dq=F_q, d_dv=lambda q, v, T: M * v, d_dT=F_T,
        mass_matrix=lambda q, v, T: np.array([[M]]), heat_capacity=F_TT, dS_dq=F_Tq,
        dLv_dT=lambda q, v, T: np.zeros((1, 2)), dLv_dq=lambda q, v, T: np.zeros((1, 1)),
        name="two_piston_free", sampler=sample_T, **common,
    )
    return entropy_model, free_model, (g1, g2)


def _two_piston_gaps(gases, p):
    g1, g2 = gases
    a1, a2, D = p["area1"], p["area2"], p["gap_length"]

    def gaps(model, st, T):
        V1, V2 = a1 * st.q[0], a2 * (D - st.q[0])
        f1, f2 = g1.pressure(st.S[0], V1) * a1, g2.pressure(st.S[1], V2) * a2
        return {
            "gap_T": abs(T[0] - T[1]) / (0.5 * (T[0] + T[1])),
            "gap_v": abs(st.v[0]),
            "gap_p": abs(f1 - f2) / max(f1, f2),
        }

    return gaps


class _FreeEnergyTwoPiston(FreeEnergySystem):
    def __init__(self, model, gases, p):
        super().__init__(model)
        self._gases, self._p = gases, p

    def diagnostics(self, t, y):
        d = super().diagnostics(t, y)
        q, v, T = self.split(y)
        d["T1"], d["T2"] = T[0], T[1]
        a1, a2, D = self._p["area1"], self._p["area2"], self._p["gap_length"]
        g1, g2 = self._gases
        f1 = g1.N0 * g1.R * T[0] / (a1 * q[0]) * a1
        f2 = g2.N0 * g2.R * T[1] / (a2 * (D - q[0])) * a2
        d.update(gap_T=abs(T[0] - T[1]) / (0.5 * (T[0] + T[1])), gap_v=abs(v[0]), gap_p=abs(f1 - f2) / max(f1, f2))
        return d


def _two_piston(p, init):
    ent, free, gases = two_piston_models(p)
    x0, v0 = init["x"], init["v"]
    T0 = np.asarray(init["T"], dtype=float)
    thr = {"gap_T": 1e-4, "gap_v": 1e-4, "gap_p": 1e-4}
    if p["kappa"] == 0.0 or p["reversible"]:
        thr = {"gap_v": 1e-4, "gap_p": 1e-4}
    if p["formulation"] == "free_energy":
        y0 = np.concatenate([[x0, v0], T0])
        return Built(_FreeEnergyTwoPiston(free, gases, p), y0, model=free, equilibrium=thr, reversible=p["reversible"])
    if p["formulation"] != "entropy":
        raise ParseError(f"two_piston: formulation must be 'entropy' or 'free_energy', got {p['formulation']!r}")
    a1, a2, D = p["area1"], p["area2"], p["gap_length"]
    S0 = [gases[0].entropy(T0[0], a1 * x0), gases[1].entropy(T0[1], a2 * (D - x0))]
    y0 = np.concatenate([[x0, v0], S0])
    return Built(NetworkSystem(ent, _two_piston_gaps(gases, p)), y0, model=ent, equilibrium=thr, reversible=p["reversible"])


# --------------------------------------------------------------------------- interconnected circuit


@dataclass(frozen=True)
class CircuitNetwork:
    """Source, inductor and resistor R1 in series, feeding R2 in parallel with (C, R3).

    After eliminating the branch charge of R2 through Kirchhoff's current law,
    the state is ``(q3, I, S1, S2, S3)`` with ``I`` the inductor current and
    ``q3`` the capacitor charge.  Each resistor is its own thermal body.
    """

    inductance: float
    capacitance: float
    beta: float
    resistances: tuple
    bodies: tuple
    kappa: np.ndarray
    V_amp: float = 0.0
    V_omega: float = 1.0

    def __post_init__(self):
        from .network import validate_conductivity

        object.__setattr__(self, "kappa", validate_conductivity(self.kappa, 3))
        R = np.asarray(self.resistances, dtype=float)
        if np.any(R < 0) or R[1] + R[2] <= 0:
            raise ValueError("resistances must be nonnegative with R2 + R3 > 0")

    def V(self, t):
        return self.V_amp * np.sin(self.V_omega * t)

    def V_C(self, q):
        return q / self.capacitance + self.beta * q**3

    def U_C(self, q):
        return q * q / (2 * self.capacitance) + 0.25 * self.beta * q**4

    def temperatures(self, S):
        return np.array([b.temperature(s) for b, s in zip(self.bodies, S)])

    def currents(self, q3, I):
        R1, R2, R3 = self.resistances
        i3 = (R2 * I - self.V_C(q3)) / (R2 + R3)
        return I, I - i3, i3

    def rhs(self, t, y):
        q3, I, S = y[0], y[1], y[2:]
        T = self.temperatures(S)
        if np.any(~(T > 0)):
            raise NonPositiveTemperature(f"resistor temperatures {T}")
        R1, R2, R3 = self.resistances
        i1, i2, i3 = self.currents(q3, I)
        I_dot = (self.V(t) - R1 * i1 - R2 * i2) / self.inductance
        heat = np.array([R1 * i1 * i1, R2 * i2 * i2, R3 * i3 * i3])
        cond = (self.kappa * (T[None, :] - T[:, None])).sum(axis=1)
        return np.concatenate([[i3, I_dot], (heat + cond) / T])


class CircuitSystem:
    labels = ["q3", "I", "S1", "S2", "S3"]

    def __init__(self, circuit: CircuitNetwork):
        self.circuit = circuit

    def rhs(self, t, y):
        return self.circuit.rhs(t, y)

    def check(self, y):
        if not np.all(np.isfinite(y)):
            raise DomainError("non-finite state")
        if np.any(~(self.circuit.temperatures(y[2:]) > 0)):
            raise NonPositiveTemperature("resistor temperature not positive")

    def diagnostics(self, t, y):
        c = self.circuit
        q3, I, S = y[0], y[1], y[2:]
        T = c.temperatures(S)
        i1, i2, i3 = c.currents(q3, I)
        R1, R2, R3 = c.resistances
        dT = T[None, :] - T[:, None]
        cond = 0.5 * float(np.sum(c.kappa * dT**2 / np.outer(T, T)))
        d = {f"T{A + 1}": T[A] for A in range(3)}
        d.update(
            E=0.5 * c.inductance * I * I + c.U_C(q3) + float(sum(b.energy(s) for b, s in zip(c.bodies, S))),
            P_W_ext=float(c.V(t) * I),
            P_H_ext=0.0,
            I_internal=R1 * i1 * i1 / T[0] + R2 * i2 * i2 / T[1] + R3 * i3 * i3 / T[2] + cond,
            S_total=float(S.sum()),
            i2=i2,
            i3=i3,
        )
        return d


def _rlc_network(p, init):
    if p["reversible"]:
        raise ParseError("rlc_network: resistors R2 and R3 cannot be removed without a degenerate circuit")
    bodies = tuple(ThermalBody(C, p["body_T"]) for C in p["body_C"])
    K = np.asarray(p["kappa"], dtype=float)
    if K.shape == (3,):
        k12, k13, k23 = K
        K = np.array([[0.0, k12, k13], [k12, 0.0, k23], [k13, k23, 0.0]])
    elif K.shape != (3, 3):
        raise ParseError("rlc_network: kappa must be (k12, k13, k23) or a 3x3 matrix")
    circ = CircuitNetwork(
        p["inductance"], p["capacitance"], p["beta"], tuple(p["resistances"]), bodies, K,
        0.0 if p["isolated"] else p["V_amp"], p["V_omega"],
    )
    S0 = np.asarray(init["S"], dtype=float)
    return Built(CircuitSystem(circ), np.concatenate([[init["q3"], init["I"]], S0]), model=circ)


# --------------------------------------------------------------------------- continuum


def _continuum(p, init, multicomponent):
    grid = Grid1D(int(p["n_cells"]), p["length"], p["boundary"])
    rev = p["reversible"]
    if multicomponent:
        K = 2
        mix = IdealMixture(p["c"], p["u0"], p["s0"], p["R"], p["T0"], p["n0"])
        eos = DensityEOS(mix, np.asarray(p["molar_mass"], dtype=float))
        L = 0.0 if rev else p["rate"]
        net = ReactionNetwork([[1, 0]], [[0, 1]], p["molar_mass"], [[L]], species=("A", "B"))
        kS, a, d = (0.0, 0.0, 0.0) if rev else (p["L_SS"], p["L_SA"], p["diffusion"])
        M1, M2 = p["molar_mass"]
        # rows weighted by molar masses must vanish so diffusion carries no net mass
        Lv = np.array([[kS, a, -a * M1 / M2], [a, d, -d * M1 / M2], [-a * M1 / M2, -d * M1 / M2, d * (M1 / M2) ** 2]])
        Ls = np.zeros((2, 2))
        Ls[1, 1] = L
        phen = Phenomenology(
            0.0 if rev else p["mu_shear"], 0.0 if rev else p["zeta_bulk"], 0.0 if rev else p["kappa_fourier"], Lv, Ls
        )
    else:
        K = 1
        mix = IdealMixture([p["c"]], [0.0], [p["s0"]], p["R"], p["T0"], p["n0"])
        eos = DensityEOS(mix, np.array([p["molar_mass"]]))
        net = None
        phen = Phenomenology(
            0.0 if rev else p["mu_shear"], 0.0 if rev else p["zeta_bulk"], 0.0 if rev else p["kappa_fourier"]
        )
    heating = 0.0 if (p["isolated"] or rev) else p["heating"]
    model = ContinuumModel(grid, eos, phen, net, heating, p["advection"])
    x, Lx = grid.x, grid.length
    shape = np.cos(np.pi * x / Lx) if grid.boundary == "walls" else np.cos(2 * np.pi * x / Lx)
    vshape = np.sin(np.pi * x / Lx) ** 2 if grid.boundary == "walls" else np.sin(2 * np.pi * x / Lx)
    if multicomponent:
        n = np.vstack([init["nA"] + init["nA_amp"] * shape, init["nB"] + 0.0 * shape])
    else:
        n = init["n"] + init["n_amp"] * shape
    T = init["T"] + init["T_amp"] * shape
    v = init["v_amp"] * vshape
    y0 = state_from_primitive(model, n, v, T)
    thr = {"gap_v": 1e-4, "gap_T": 1e-4}
    return Built(ContinuumSystem(model), y0, kind="continuum", model=model, equilibrium=thr, reversible=rev)


# --------------------------------------------------------------------------- registry

_FLAGS = {"isolated": False, "reversible": False}
_MIX3 = {
    "c": [1.5, 1.5, 2.5],
    "u0": [0.0, -0.3, -0.4],
    "s0": [0.0, 0.0, 0.0],
    "R": 1.0,
    "T0": 1.0,
    "n0": 1.0,
    "molar_mass": [1.0, 1.0, 2.0],
}

ENTRIES = {
    e.name: e
    for e in [
        Entry(
            "one_cylinder",
            "gas under a piston with viscous friction, outer pressure and optional heat bath",
            "one-cylinder gas-piston problem",
            {**_FLAGS, "c": 1.5, "R": 1.0, "U0": 1.5, "S0": 0.0, "N0": 1.0, "V0": 1.0, "mass": 1.0, "area": 1.0,
             "friction": 0.5, "p_ext": 0.5, "bath_kappa": 0.0, "bath_T": 1.0},
            {"x": 1.0, "v": 0.0, "T": 1.0, "S": None},
            {"method": "rk4", "dt": 1e-3, "t_end": 10.0},
            _one_cylinder,
        ),
        Entry(
            "mass_spring",
            "mass on a temperature-dependent spring with regularized Coulomb friction",
            "mass-spring system with dry friction",
            {**_FLAGS, "mass": 1.0, "k0": 1.0, "alpha": 0.5, "body_C": 1.0, "body_T": 1.0, "friction": 0.05,
             "eps": 1e-3, "force_amp": 0.2, "force_omega": 1.1, "bath_kappa": 0.0, "bath_T": 1.0},
            {"x": 1.0, "v": 0.0, "S": 0.0},
            {"method": "rk4", "dt": 1e-3, "t_end": 10.0},
            _mass_spring,
        ),
        Entry(
            "rlc_series",
            "series circuit with nonlinear capacitor, resistor heating a body, AC source, heat leak",
            "nonlinear series RLC circuit with entropy production",
            {**_FLAGS, "inductance": 1.0, "capacitance": 1.0, "beta": 0.1, "resistance": 0.2, "body_C": 1.0,
             "body_T": 1.0, "V_amp": 0.5, "V_omega": 1.3, "bath_kappa": 0.1, "bath_T": 1.0},
            {"q": 1.0, "I": 0.0, "S": 0.0},
            {"method": "rk4", "dt": 1e-3, "t_end": 10.0},
            _rlc_series,
        ),
        Entry(
            "reactor_psi",
            "closed reactor A <-> B, 2B <-> C integrated in reaction extents",
            "chemical reactions, extent-of-reaction formulation",
            {**_FLAGS, **_MIX3, "rate_matrix": [0.5, 0.1, 0.1, 0.3], "volume": 1.0, "heat_power": 0.0},
            {"N": [1.0, 0.5, 0.2], "T": 1.0, "S": None},
            {"method": "rk4", "dt": 1e-3, "t_end": 10.0},
            _reactor_psi,
        ),
        Entry(
            "reactor_N",
            "closed reactor A <-> B, 2B <-> C integrated in mole numbers",
            "chemical reactions, mole-number formulation",
            {**_FLAGS, **_MIX3, "rate_matrix": [0.5, 0.1, 0.1, 0.3], "volume": 1.0, "heat_power": 0.0},
            {"N": [1.0, 0.5, 0.2], "T": 1.0, "S": None},
            {"method": "rk4", "dt": 1e-3, "t_end": 10.0},
            _reactor_N,
        ),
        Entry(
            "chem_piston",
            "piston closing a gas that dissociates A <-> 2B",
            "piston-cylinder with chemical reactions",
            {**_FLAGS, "c": [2.5, 1.5], "u0": [0.0, 0.2], "s0": [0.0, 0.5], "R": 1.0, "T0": 1.0, "n0": 1.0,
             "molar_mass": [2.0, 1.0], "rate": 0.4, "mass": 1.0, "area": 1.0, "friction": 0.5, "p_ext": 1.0,
             "heat_power": 0.0},
            {"x": 1.0, "v": 0.0, "N": [1.0, 0.2], "T": 1.0, "S": None},
            {"method": "rk4", "dt": 1e-3, "t_end": 10.0},
            _chem_piston,
        ),
        Entry(
            "membrane",
            "one species diffusing between two reservoirs through a membrane compartment",
            "nonelectrolyte diffusion through a membrane",
            {**_FLAGS, "c": [1.5, 1.5], "u0": [0.0, -0.2], "s0": [0.0, 0.0], "R": 1.0, "T0": 1.0, "n0": 1.0,
             "molar_mass": [1.0, 1.0], "volumes": [1.0, 0.5, 1.0], "conductance": 0.5, "rate": 0.3,
             "reacting_compartment": 1, "heat_power": 0.0},
            {"N": [1.0, 0.3, 0.2], "T": 1.0, "S": None},
            {"method": "rk4", "dt": 1e-3, "t_end": 20.0},
            lambda p, i: _membrane(p, i, False),
        ),
        Entry(
            "membrane_reacting",
            "two species diffusing through a membrane, with A <-> B inside the membrane",
            "membrane diffusion coupled to chemical reactions",
            {**_FLAGS, "c": [1.5, 1.5], "u0": [0.0, -0.2], "s0": [0.0, 0.0], "R": 1.0, "T0": 1.0, "n0": 1.0,
             "molar_mass": [1.0, 1.0], "volumes": [1.0, 0.5, 1.0], "conductance": 0.5, "rate": 0.3,
             "reacting_compartment": 1, "heat_power": 0.0},
            {"N": [1.0, 0.1, 0.3, 0.3, 0.2, 0.6], "T": 1.0, "S": None},
            {"method": "rk4", "dt": 1e-3, "t_end": 20.0},
            lambda p, i: _membrane(p, i, True),
        ),
        Entry(
            "two_piston",
            "two gas cylinders joined by a rigid double piston with friction and heat conduction",
            "two-cylinder (diathermic or adiabatic piston) problem",
            {**_FLAGS, "c": 1.5, "R": 1.0, "N1": 1.0, "N2": 1.0, "T_ref": 1.0, "area1": 1.0, "area2": 1.0,
             "gap_length": 2.0, "mass": 1.0, "friction1": 0.5, "friction2": 0.5, "kappa": 0.5,
             "formulation": "entropy"},
            {"x": 0.7, "v": 0.0, "T": [1.0, 1.5]},
            {"method": "rk4", "dt": 1e-3, "t_end": 60.0, "record_every": 10},
            _two_piston,
        ),
        Entry(
            "rlc_network",
            "AC source, inductor and R1 feeding R2 in parallel with a capacitor in series with R3",
            "interconnected circuit with three resistors exchanging heat",
            {**_FLAGS, "inductance": 1.0, "capacitance": 1.0, "beta": 0.1, "resistances": [0.2, 0.5, 0.3],
             "body_C": [1.0, 1.0, 1.0], "body_T": 1.0, "kappa": [0.1, 0.05, 0.2], "V_amp": 0.5,
             "V_omega": 1.3},
            {"q3": 0.5, "I": 0.0, "S": [0.0, 0.1, -0.1]},
            {"method": "rk4", "dt": 1e-3, "t_end": 10.0},
            _rlc_network,
        ),
        Entry(
            "nsf1d",
            "1-D viscous heat-conducting perfect gas",
            "Navier-Stokes-Fourier equations in spatial form",
            {**_FLAGS, "n_cells": 64, "length": 1.0, "boundary": "periodic", "c": 1.5, "R": 1.0, "T0": 1.0,
             "n0": 1.0, "s0": 0.0, "molar_mass": 1.0, "mu_shear": 0.01, "zeta_bulk": 0.0, "kappa_fourier": 0.01,
             "heating": 0.0, "advection": "central4"},
            {"n": 1.0, "n_amp": 0.0, "T": 1.0, "T_amp": 0.05, "v_amp": 0.1},
            {"method": "rk4", "dt": 1e-3, "t_end": 1.0, "record_every": 10},
            lambda p, i: _continuum(p, i, False),
            kind="continuum",
        ),
        Entry(
            "multicomponent1d",
            "1-D two-species reacting viscous fluid in a closed box",
            "multicomponent reacting viscous fluid in spatial form",
            {**_FLAGS, "n_cells": 32, "length": 1.0, "boundary": "walls", "c": [1.5, 1.5], "u0": [0.0, -0.2],
             "s0": [0.0, 0.0], "R": 1.0, "T0": 1.0, "n0": 1.0, "molar_mass": [1.0, 1.0], "mu_shear": 0.01,
             "zeta_bulk": 0.0, "kappa_fourier": 0.01, "L_SS": 0.005, "L_SA": 0.002, "diffusion": 0.01,
             "rate": 0.5, "heating": 0.0, "advection": "central"},
            {"nA": 0.6, "nA_amp": 0.2, "nB": 0.4, "T": 1.0, "T_amp": 0.1, "v_amp": 0.05},
            {"method": "rk4", "dt": 1e-3, "t_end": 1.0, "record_every": 10},
            lambda p, i: _continuum(p, i, True),
            kind="continuum",
        ),
    ]
}


def names(filter: Optional[str] = None) -> list:
    return [n for n in ENTRIES if filter is None or filter.lower() in n.lower()]


def get(name: str) -> Entry:
    try:
        return ENTRIES[name]
    except KeyError:
        raise ParseError(f"unknown model {name!r}; available: {', '.join(ENTRIES)}") from None


def resolve(name: str, params: Optional[dict] = None, initial: Optional[dict] = None) -> tuple:
    """Fill in defaults and validate value types; returns ``(params, initial)``."""
    e = get(name)
    return _merge(name, e.params, params, "parameter"), _merge(name, e.initial, initial, "initial value")


def build(name: str, params: Optional[dict] = None, initial: Optional[dict] = None) -> Built:
    """Resolve parameters and initial values against the defaults and build the model."""
    p, i = resolve(name, params, initial)
    return get(name).builder(p, i)


def default_config(name: str, **overrides) -> IntegratorConfig:
    cfg = dict(get(name).integrator)
    cfg.update(overrides)
    return IntegratorConfig(**cfg)


def listing(filter: Optional[str] = None) -> list:
    """Structured catalog description (names, summaries, parameter schemas)."""
    out = []
    for n in names(filter):
        e = ENTRIES[n]
        out.append(
            {
                "name": n,
                "kind": e.kind,
                "summary": e.summary,
                "reproduces": e.reproduces,
                "params": {k: _schema(v) for k, v in e.params.items()},
                "initial": {k: _schema(v) for k, v in e.initial.items()},
                "integrator": dict(e.integrator),
            }
        )
    return out


def _schema(v):
    if isinstance(v, bool):
        return {"type": "bool", "default": v}
    if isinstance(v, str):
        return {"type": "str", "default": v}
    if isinstance(v, (list, tuple)):
        return {"type": f"float[{len(v)}]", "default": list(v)}
    if v is None:
        return {"type": "float (derived when omitted)", "default": None}
    if isinstance(v, int):
        return {"type": "int", "default": v}
    return {"type": "float", "default": v}


def gradient_targets() -> dict:
    """Every builtin object with analytic partials, paired with a state sampler."""
    out = {}
    for n in ("one_cylinder", "mass_spring", "rlc_series"):
        out[n] = build(n).model
    ent, free, _ = two_piston_models(_merge("two_piston", ENTRIES["two_piston"].params, None, "parameter"))
    out["two_piston"] = ent
    out["two_piston_free"] = free
    gas = PerfectGas()
    out["perfect_gas"] = SampledEOS(
        gas,
        lambda rng: ("gas", (float(rng.uniform(-1, 1)), float(rng.uniform(0.3, 3)), float(rng.uniform(0.5, 2)))),
    )
    mix = IdealMixture(_MIX3["c"], _MIX3["u0"], _MIX3["s0"])
    out["ideal_mixture"] = SampledEOS(
        mix, lambda rng: ("mix", (float(rng.uniform(-1, 1)), rng.uniform(0.2, 2.0, 3), float(rng.uniform(0.5, 2))))
    )
    return out


def reversible_capable() -> list:
    """Entries that admit a run with every dissipation mechanism switched off."""
    return [n for n in ENTRIES if n != "rlc_network"]


__all__ = [
    "Built",
    "CircuitNetwork",
    "CircuitSystem",
    "ENTRIES",
    "Entry",
    "resolve",
    "build",
    "default_config",
    "get",
    "gradient_targets",
    "listing",
    "names",
    "reversible_capable",
    "two_piston_models",
]
