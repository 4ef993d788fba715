"""Equations of state used by the builtin models.

Three families are provided:

* :class:`PerfectGas` -- single-component perfect gas written as an internal
  energy ``U(S, V, N)`` anchored at a reference state ``(S0, N0, V0, U0)``.
* :class:`IdealMixture` -- multicomponent ideal mixture ``U(S, N_1..N_K, V)``.
  ``V`` may be an array broadcastable against ``N`` so the same object can
  describe several compartments that share one temperature, or (with
  ``V = 1``) energy densities for the continuum solver.
* :class:`ThermalBody` -- incompressible body with constant heat capacity,
  ``U(S) = C T_ref exp(S / C)``.

All functions accept numpy arrays and broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import NegativeMoles, NegativeVolume, NonPositiveTemperature


def _positive(x, err, what):
    if isinstance(x, (float, int)):
        if not x > 0.0:
            raise err(f"{what} must be positive, got {float(x):.6g}")
        return float(x)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0.0)):
        raise err(f"{what} must be positive, got min {float(np.min(x)):.6g}")
    return x


@dataclass(frozen=True)
class PerfectGas:
    """Perfect gas ``U = U0 exp((S/N - S0/N0)/(cR)) (N/N0)^(1/c+1) (V0/V)^(1/c)``.

    ``c`` is the dimensionless heat capacity at constant volume (3/2 for a
    monatomic gas).
    """

    c: float = 1.5
    R: float = 1.0
    U0: float = 1.5
    S0: float = 0.0
    N0: float = 1.0
    V0: float = 1.0

    @property
    def T0(self) -> float:
        return self.U0 / (self.c * self.N0 * self.R)

    def energy(self, S, V, N=None):
        N = self.N0 if N is None else N
        V = _positive(V, NegativeVolume, "volume")
        N = _positive(N, NegativeMoles, "mole number")
        c, R = self.c, self.R
        return (
            self.U0
            * np.exp((S / N - self.S0 / self.N0) / (c * R))
            * (N / self.N0) ** (1.0 / c + 1.0)
            * (self.V0 / V) ** (1.0 / c)
        )

    def temperature(self, S, V, N=None):
        N = self.N0 if N is None else N
        return self.energy(S, V, N) / (self.c * N * self.R)

    def pressure(self, S, V, N=None):
        return self.energy(S, V, N) / (self.c * V)

    def chemical_potential(self, S, V, N=None):
        N = self.N0 if N is None else N
        U = self.energy(S, V, N)
        return (U / N) * (1.0 / self.c + 1.0 - S / (self.c * self.R * N))

    # temperature-primitive side
    def entropy(self, T, V, N=None):
        """Inverse of :meth:`temperature` in ``S``."""
        N = self.N0 if N is None else N
        T = _positive(T, NonPositiveTemperature, "temperature")
        V = _positive(V, NegativeVolume, "volume")
        c, R = self.c, self.R
        return N * (
            self.S0 / self.N0
            + c * R * np.log(T / self.T0)
            + R * np.log((V / self.V0) * (self.N0 / N))
        )

    def free_energy(self, T, V, N=None):
        """Helmholtz free energy ``F = U - TS`` as a function of ``(T, V, N)``."""
        N = self.N0 if N is None else N
        return self.c * N * self.R * T - T * self.entropy(T, V, N)

    def heat_capacity(self, T, V=None, N=None):
        """``dS/dT`` at fixed volume."""
        N = self.N0 if N is None else N
        return self.c * N * self.R / T

    def dS_dV(self, T, V, N=None):
        N = self.N0 if N is None else N
        return N * self.R / V


@dataclass(frozen=True)
class IdealMixture:
    """Ideal mixture of ``K`` species sharing one temperature.

    Molar entropy of species ``i`` is
    ``s0_i + c_i R ln(T/T0) - R ln(n_i/n0)`` with ``n_i = N_i/V``, and the molar
    energy is ``u0_i + c_i R T``.  Species live on axis 0 of ``N``; any further
    axes broadcast (cells, compartments).
    """

    c: np.ndarray
    u0: np.ndarray = None
    s0: np.ndarray = None
    R: float = 1.0
    T0: float = 1.0
    n0: float = 1.0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        object.__setattr__(self, "c", c)
        for name in ("u0", "s0"):
            val = getattr(self, name)
            arr = np.zeros_like(c) if val is None else np.atleast_1d(np.asarray(val, dtype=float))
            if arr.shape != c.shape:
                raise ValueError(f"{name} must have shape {c.shape}")
            object.__setattr__(self, name, arr)

    @property
    def n_species(self) -> int:
        return self.c.size

    @staticmethod
    def _shape(arr, nd):
        # species coefficients reshaped to broadcast over trailing axes of N
        return arr.reshape(arr.shape + (1,) * (nd - 1))

    def _prep(self, N, V):
        N = np.asarray(N, dtype=float)
        if N.shape[0] != self.c.size:
            raise ValueError(f"expected {self.c.size} species on axis 0, got {N.shape}")
        if np.any(N < 0.0):
            raise NegativeMoles(f"mole numbers must be nonnegative, got min {float(N.min()):.6g}")
        V = _positive(V, NegativeVolume, "volume")
        return N, V

    def _config_entropy(self, N, V):
        # sum_i N_i (s0_i - R ln(N_i / (V n0))) with 0 ln 0 = 0
        s0 = self._shape(self.s0, N.ndim)
        return np.sum(N * s0 - self.R * xlogy(N, N / (V * self.n0)), axis=0)

    def _heat_cap(self, N):
        return np.sum(N * self._shape(self.c, N.ndim), axis=0) * self.R

    def temperature(self, S, N, V=1.0):
        N, V = self._prep(N, V)
        cap = self._heat_cap(N)
        if np.any(~(cap > 0.0)):
            raise NonPositiveTemperature("empty mixture has no temperature")
        return self.T0 * np.exp((S - self._config_entropy(N, V)) / cap)

    def entropy(self, T, N, V=1.0):
        N, V = self._prep(N, V)
        T = _positive(T, NonPositiveTemperature, "temperature")
        return self._config_entropy(N, V) + self._heat_cap(N) * np.log(T / self.T0)

    def energy(self, S, N, V=1.0):
        T = self.temperature(S, N, V)
        N = np.asarray(N, dtype=float)
        nd = N.ndim
        return np.sum(N * (self._shape(self.u0, nd) + self._shape(self.c, nd) * self.R * T), axis=0)

    def chemical_potential(self, S, N, V=1.0):
        """``dU/dN_i`` at fixed ``S`` and ``V``; shape matches ``N``."""
        T = self.temperature(S, N, V)
        N = np.asarray(N, dtype=float)
        if np.any(~(N > 0.0)):
            raise NegativeMoles("chemical potential needs strictly positive mole numbers")
        nd = N.ndim
        c, u0, s0 = (self._shape(a, nd) for a in (self.c, self.u0, self.s0))
        R = self.R
        s_i = s0 + c * R * np.log(T / self.T0) - R * np.log(N / (V * self.n0))
        return u0 + c * R * T + R * T - T * s_i

    def pressure(self, S, N, V=1.0):
        T = self.temperature(S, N, V)
        return np.sum(np.asarray(N, dtype=float), axis=0) * self.R * T / V


@dataclass(frozen=True)
class ThermalBody:
    """Body with constant heat capacity ``C``: ``T(S) = T_ref exp(S/C)``."""

    C: float = 1.0
    T_ref: float = 1.0

    def energy(self, S):
        return self.C * self.T_ref * np.exp(np.asarray(S, dtype=float) / self.C)

    def temperature(self, S):
        return self.T_ref * np.exp(np.asarray(S, dtype=float) / self.C)

    def dT_dS(self, S):
        return self.temperature(S) / self.C

    def entropy(self, T):
        T = _positive(T, NonPositiveTemperature, "temperature")
        return self.C * np.log(T / self.T_ref)
