"""Audits of recorded trajectories and of model partial derivatives."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import InsufficientSamples
from .network import reversibility_check  # re-exported: audits live here
from .numerics import fd_gradient, fd_jacobian, relative_error

DEFAULT_THRESHOLDS = {"energy": 1e-6, "production": -1e-12, "equilibrium": 1e-4, "mass": 1e-10}

__all__ = [
    "AuditReport",
    "audit",
    "energy_audit",
    "equilibrium_report",
    "gradient_check",
    "mass_audit",
    "reversibility_check",
    "second_law_audit",
]


def _need(traj, *keys):
    if len(traj.t) < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {len(traj.t)}")
    missing = [k for k in keys if k not in traj.diagnostics]
    if missing:
        raise InsufficientSamples(f"trajectory lacks {missing}")


def _cumtrapz(t, f):
    out = np.zeros_like(t)
    out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(t))
    return out


def energy_audit(traj) -> float:
    """``max_t |E(t) - E(0) - int (P_W + P_H) dt| / max(1, |E(0)|)`` (trapezoid)."""
    _need(traj, "E", "P_W_ext", "P_H_ext")
    d = traj.diagnostics
    E = d["E"]
    work = _cumtrapz(traj.t, d["P_W_ext"] + d["P_H_ext"])
    return float(np.max(np.abs(E - E[0] - work)) / max(1.0, abs(E[0])))


def second_law_audit(traj) -> float:
    """Smallest recorded internal production (per cell for continuum runs)."""
    _need(traj, "I_internal")
    d = traj.diagnostics
    vals = [np.min(d["I_internal"])]
    if "i_min" in d:
        vals.append(np.min(d["i_min"]))
    return float(min(vals))


def mass_audit(traj) -> Optional[float]:
    """``max_t |m(t) - m(0)|`` when total mass is recorded, else ``None``."""
    if "mass_total" not in traj.diagnostics:
        return None
    m = traj.diagnostics["mass_total"]
    return float(np.max(np.abs(m - m[0])))


def entropy_monotone(traj, tol: float = -1e-10) -> bool:
    """Whether total entropy never drops by more than ``|tol|`` between samples.

    Only meaningful without external heat supply.
    """
    S = traj.diagnostics["S_total"]
    return bool(np.all(np.diff(S) >= tol))


def equilibrium_report(traj, thresholds=None, keys=None):
    """First sample time after which every monitored gap stays below threshold.

    Gaps are the ``gap_*`` diagnostics (already normalized by the recording
    system).  ``thresholds`` maps gap names to bounds (a float applies to all).
    Returns ``(t_star, gaps_at_t_star)`` or ``None`` when equilibrium is not
    reached.
    """
    d = traj.diagnostics
    names = keys if keys is not None else sorted(k for k in d if k.startswith("gap_"))
    if not names:
        return None
    if thresholds is None or np.isscalar(thresholds):
        thr = DEFAULT_THRESHOLDS["equilibrium"] if thresholds is None else float(thresholds)
        thresholds = {k: thr for k in names}
    ok = np.ones(len(traj.t), dtype=bool)
    for k in names:
        ok &= np.abs(d[k]) <= thresholds[k]
    if not ok[-1]:
        return None
    bad = np.flatnonzero(~ok)
    i = 0 if bad.size == 0 else bad[-1] + 1
    return float(traj.t[i]), {k: float(d[k][i]) for k in names}


@dataclass
class AuditReport:
    max_energy_residual: Optional[float]
    min_internal_production: Optional[float]
    entropy_monotone: Optional[bool]
    mass_residual: Optional[float]
    equilibrium: Optional[dict]
    passed: bool
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def audit(traj, checks=("energy", "second_law", "mass"), thresholds=None, gaps=None) -> AuditReport:
    """Run the enabled checks and collect pass/fail against thresholds.

    ``checks`` may contain ``energy``, ``second_law``, ``mass``,
    ``entropy_monotone`` and ``equilibrium``.  ``gaps`` maps the monitored
    ``gap_*`` diagnostics to their thresholds; by default every recorded gap
    is monitored at the ``equilibrium`` threshold.  The equilibrium time is
    always reported when gaps are recorded, but only fails the audit when
    ``equilibrium`` is among the checks.
    """
    unknown = set(checks) - {"energy", "second_law", "mass", "entropy_monotone", "equilibrium"}
    if unknown:
        raise ValueError(f"unknown audit checks {sorted(unknown)}")
    thr = dict(DEFAULT_THRESHOLDS)
    thr.update(thresholds or {})
    failures, notes = [], list(traj.notes)
    e = p = mass = mono = eq = None
    if "energy" in checks:
        e = energy_audit(traj)
        if not e <= thr["energy"]:
            failures.append(f"energy residual {e:.3e} > {thr['energy']:.1e}")
    if "second_law" in checks:
        p = second_law_audit(traj)
        if not p >= thr["production"]:
            failures.append(f"internal production {p:.3e} < {thr['production']:.1e}")
    if "mass" in checks:
        mass = mass_audit(traj)
        if mass is not None and not mass <= thr["mass"]:
            failures.append(f"mass residual {mass:.3e} > {thr['mass']:.1e}")
    if "entropy_monotone" in checks:
        mono = entropy_monotone(traj)
        if not mono:
            failures.append("total entropy decreased")
    monitored = gaps if gaps else None
    if monitored is None and any(k.startswith("gap_") for k in traj.diagnostics):
        monitored = thr["equilibrium"]
    if monitored is not None:
        keys = list(monitored) if isinstance(monitored, dict) else None
        res = equilibrium_report(traj, monitored, keys)
        if res is not None:
            eq = {"time": res[0], "gaps": res[1]}
        elif "equilibrium" in checks:
            failures.append("equilibrium not reached")
        else:
            notes.append("equilibrium not reached")
    elif "equilibrium" in checks:
        failures.append("no equilibrium gaps recorded")
    if traj.status == "failed":
        failures.append("simulation did not complete")
    return AuditReport(e, p, mono, mass, eq, not failures, failures, notes)


# --------------------------------------------------------------------------- gradient checks


def _check_lagrangian(model, rng, n_states):
    """Compare analytic partials of a Lagrangian model with central differences."""
    worst = 0.0
    second = model.dim <= 6
    for _ in range(n_states):
        q, v, S = model.sampler(rng)
        L = lambda a, b, c: model.lagrangian(a, b, c)
        scale = abs(L(q, v, S))
        pairs = []
        if model.dL_dq is not None:
            pairs.append((model.grad_q(q, v, S), fd_gradient(lambda x: L(x, v, S), q)))
        if model.dL_dv is not None:
            pairs.append((model.grad_v(q, v, S), fd_gradient(lambda x: L(q, x, S), v)))
        if model.dL_dS is not None:
            S_arr = np.atleast_1d(np.asarray(S, dtype=float))
            num = fd_gradient(lambda x: L(q, v, x if np.ndim(S) else x[0]), S_arr)
            pairs.append((np.atleast_1d(model.grad_S(q, v, S)), num))
        if second and model.mass_matrix is not None:
            pairs.append((model.mass(q, v, S), fd_jacobian(lambda x: model.grad_v(q, x, S), v)))
        for a, n in pairs:
            worst = max(worst, relative_error(a, n, scale))
    return worst


def _check_free_energy(model, rng, n_states):
    worst = 0.0
    for _ in range(n_states):
        q, v, T = model.sampler(rng)
        F = model.free_lagrangian
        scale = abs(F(q, v, T))
        pairs = []
        if model.d_dq is not None:
            pairs.append((model.grad_q(q, v, T), fd_gradient(lambda x: F(x, v, T), q)))
        if model.d_dv is not None:
            pairs.append((model.grad_v(q, v, T), fd_gradient(lambda x: F(q, x, T), v)))
        if model.d_dT is not None:
            pairs.append((model.entropy(q, v, T), fd_gradient(lambda x: F(q, v, x), T)))
        if model.heat_capacity is not None:
            C = model.capacity(q, v, T)
            pairs.append((C, fd_jacobian(lambda x: model.entropy(q, v, x), T)))
            worst = max(worst, float(np.linalg.norm(C - C.T)))
        if model.dS_dq is not None:
            pairs.append((model.entropy_q(q, v, T), fd_jacobian(lambda x: model.entropy(x, v, T), q)))
        for a, n in pairs:
            worst = max(worst, relative_error(a, n, scale))
    return worst


def _check_eos(eos, rng, n_states):
    """State functions ``U(S, V, N)`` / ``U(S, N, V)`` with T, p, mu partials."""
    worst = 0.0
    for _ in range(n_states):
        kind, args = eos.sampler(rng)
        if kind == "gas":
            S, V, N = args
            U = eos.energy(S, V, N)
            pairs = [
                (eos.temperature(S, V, N), fd_gradient(lambda x: eos.energy(x[0], V, N), np.array([S]))),
                (eos.pressure(S, V, N), -fd_gradient(lambda x: eos.energy(S, x[0], N), np.array([V]))),
                (eos.chemical_potential(S, V, N), fd_gradient(lambda x: eos.energy(S, V, x[0]), np.array([N]))),
            ]
        else:
            S, N, V = args
            U = eos.energy(S, N, V)
            pairs = [
                (eos.temperature(S, N, V), fd_gradient(lambda x: eos.energy(x[0], N, V), np.array([S]))),
                (eos.pressure(S, N, V), -fd_gradient(lambda x: eos.energy(S, N, x[0]), np.array([V]))),
                (eos.chemical_potential(S, N, V), fd_gradient(lambda x: eos.energy(S, x, V), N)),
            ]
        for a, n in pairs:
            worst = max(worst, relative_error(a, n, U))
    return worst


def gradient_check(model, n_states: int = 100, seed: int = 0) -> float:
    """Largest relative error between analytic partials and central differences.

    ``model`` must carry a ``sampler(rng)`` returning random admissible
    states.  Works for simple, network and free-energy models and for
    equations of state wrapped with :class:`SampledEOS`.
    """
    if getattr(model, "sampler", None) is None:
        raise ValueError("model has no sampler for random admissible states")
    rng = np.random.default_rng(seed)
    if hasattr(model, "free_lagrangian"):
        return _check_free_energy(model, rng, n_states)
    if hasattr(model, "lagrangian"):
        return _check_lagrangian(model, rng, n_states)
    return _check_eos(model, rng, n_states)


@dataclass(frozen=True)
class SampledEOS:
    """Pairs a state-function object with a sampler for :func:`gradient_check`."""

    eos: object
    sampler: object

    def __getattr__(self, name):
        return getattr(self.eos, name)
