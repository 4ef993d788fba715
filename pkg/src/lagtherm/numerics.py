"""Finite differences and small dense solves shared by the model modules."""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg

from .errors import InvalidOnsager

EPS = np.finfo(float).eps
FD_SCALE = np.cbrt(EPS)
FD2_SCALE = EPS**0.25
PIVOT_RTOL = 1e-12


def fd_step(x: float) -> float:
    return FD_SCALE * max(1.0, abs(x))


def fd_gradient(f: Callable[[np.ndarray], float], x) -> np.ndarray:
    """Central-difference gradient of a scalar function of a vector."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = fd_step(x[i])
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (xp[i] - xm[i])
    return g


def fd_derivative(f: Callable[[float], float], x: float) -> float:
    h = fd_step(x)
    xp, xm = x + h, x - h
    return (f(xp) - f(xm)) / (xp - xm)


def fd_jacobian(f: Callable[[np.ndarray], np.ndarray], x) -> np.ndarray:
    """Central-difference Jacobian; rows index outputs, columns inputs."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        h = fd_step(x[i])
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((np.atleast_1d(f(xp)) - np.atleast_1d(f(xm))) / (xp[i] - xm[i]))
    return np.column_stack(cols) if cols else np.zeros((0, 0))


def fd_mixed(f: Callable[[np.ndarray, np.ndarray], float], x, y) -> np.ndarray:
    """Central second difference ``d^2 f / dx_i dy_j`` straight from function values.

    Uses a step of ``eps**(1/4)`` so truncation and rounding errors balance,
    which beats differencing a finite-difference gradient a second time.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty((x.size, y.size))
    for i in range(x.size):
        hi = FD2_SCALE * max(1.0, abs(x[i]))
        for j in range(y.size):
            hj = FD2_SCALE * max(1.0, abs(y[j]))
            acc = 0.0
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    xs, ys = x.copy(), y.copy()
                    xs[i] += si * hi
                    ys[j] += sj * hj
                    acc += si * sj * f(xs, ys)
            out[i, j] = acc / (4.0 * hi * hj)
    return out


def relative_error(analytic, numeric, scale: float = 1.0) -> float:
    """Norm-wise relative error, floored so exact zeros do not blow up."""
    a = np.atleast_1d(np.asarray(analytic, dtype=float))
    n = np.atleast_1d(np.asarray(numeric, dtype=float))
    floor = 1e-6 * max(1.0, abs(scale))
    den = max(np.linalg.norm(a), np.linalg.norm(n), floor)
    return float(np.linalg.norm(a - n) / den)


def solve_spd(a: np.ndarray, b: np.ndarray, err_cls, what: str) -> np.ndarray:
    """Cholesky solve with a relative pivot tolerance."""
    if a.shape == (1, 1):
        d = a[0, 0]
        if not d > 0.0:
            raise err_cls(f"{what} is not positive definite ({float(d):.6g})")
        return b / d
    try:
        c, low = scipy.linalg.cho_factor(a, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise err_cls(f"{what} is not positive definite") from exc
    piv = np.abs(np.diag(c)) ** 2
    if piv.min() <= PIVOT_RTOL * piv.max():
        raise err_cls(f"{what} is numerically singular")
    return scipy.linalg.cho_solve((c, low), b)


def solve_general(a: np.ndarray, b: np.ndarray, err_cls, what: str) -> np.ndarray:
    """Partially pivoted LU solve with a relative pivot tolerance."""
    if a.shape == (1, 1):
        d = a[0, 0]
        if d == 0.0 or not np.isfinite(d):
            raise err_cls(f"{what} is singular")
        return b / d
    lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    diag = np.abs(np.diag(lu))
    if diag.max() == 0.0 or diag.min() <= PIVOT_RTOL * diag.max():
        raise err_cls(f"{what} is numerically singular")
    return scipy.linalg.lu_solve((lu, piv), b)


def check_onsager(mat, name: str = "Onsager matrix", atol: float = 1e-12) -> np.ndarray:
    """Validate a symmetric positive-semidefinite coefficient matrix."""
    m = np.atleast_2d(np.asarray(mat, dtype=float))
    if m.shape[0] != m.shape[1]:
        raise InvalidOnsager(f"{name} is not square: {m.shape}", "Onsager symmetry")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if not np.allclose(m, m.T, rtol=0.0, atol=atol * scale):
        raise InvalidOnsager(f"{name} is not symmetric", "Onsager symmetry")
    if m.size and np.linalg.eigvalsh(m).min() < -atol * scale:
        raise InvalidOnsager(f"{name} is not positive semidefinite", "Onsager positivity")
    return m
