"""Zero-width limits: dressed states of a single mode and a three-mode discretization.

In the one-mode limit the sector with ``n`` excitations is spanned by the
atomic state ``|1> x |k0>^(n-1)`` (energy ``n + delta``) and the photonic
state ``|0> x |k0>^n`` (energy ``n``), coupled by ``kappa sqrt(n)``; all
energies are in units of the mode energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateError, DomainError

MAX_EXCITATION = 1000


@dataclass(frozen=True)
class DressedPair:
    """Dressed energies of the ``n``-excitation sector.

    ``weight_mixing`` holds the normalised (atomic, photonic) amplitudes of
    the lower and upper states, or ``None`` when they are undefined.
    """

    n: int
    zeta_minus: float
    zeta_plus: float
    weight_mixing: tuple | None = None

    @property
    def splitting(self) -> float:
        return self.zeta_plus - self.zeta_minus


def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"excitation number must be an integer >= 1, got {n}")
    if n > MAX_EXCITATION:
        raise DomainError(f"excitation number capped at {MAX_EXCITATION}, got {n}")
    return int(n)


def _sector(n: int, kappa: float, delta: float) -> tuple[float, float]:
    root = math.hypot(delta, 2 * math.sqrt(n) * kappa)
    return n + 0.5 * (delta - root), n + 0.5 * (delta + root)


def dressed_eigenvalues(n: int, kappa: float, delta: float) -> DressedPair:
    """Closed-form dressed energies ``n + (delta -/+ sqrt(delta^2 + 4 n kappa^2)) / 2``.

    Examples
    --------
    >>> p = dressed_eigenvalues(1, 0.1, 0.0)
    >>> round(p.zeta_minus, 12), round(p.zeta_plus, 12)
    (0.9, 1.1)
    """
    n = _check_n(n)
    lo, hi = _sector(n, float(kappa), float(delta))
    try:
        mixing = dressed_eigenvectors(n, kappa, delta)
    except DegenerateError:
        mixing = None
    return DressedPair(n, lo, hi, mixing)


def dressed_eigenvectors(n: int, kappa: float, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Normalised (atomic, photonic) amplitudes of the lower and upper dressed states.

    The photonic-to-atomic amplitude ratio of the state with energy zeta is
    ``kappa sqrt(n) / (zeta - n)``. When that denominator vanishes (zero
    coupling) the reciprocal ratio ``kappa sqrt(n) / (zeta - n - delta)``
    is used instead.

    Raises
    ------
    DegenerateError
        At ``kappa = delta = 0``, where both levels coincide and every
        vector of the sector is an eigenvector.
    """
    n = _check_n(n)
    kappa, delta = float(kappa), float(delta)
    if kappa == 0 and delta == 0:
        raise DegenerateError("dressed states are undefined for degenerate uncoupled levels")
    c = kappa * math.sqrt(n)
    root = math.hypot(delta, 2 * c)
    out = []
    for sign in (-1.0, 1.0):
        # zeta - n and zeta - n - delta, each free of cancellation
        below = 0.5 * (delta + sign * root)
        above = 0.5 * (sign * root - delta)
        # pick the better-conditioned of the two equivalent ratios
        if abs(below) >= abs(above):
            vec = np.array([1.0, c / below])
        else:
            vec = np.array([c / above, 1.0])
        out.append(vec / np.linalg.norm(vec))
    return out[0], out[1]


def sector_matrix(n: int, kappa: float, delta: float) -> np.ndarray:
    """The 2x2 Hamiltonian of the ``n``-excitation sector in the (atomic, photonic) basis."""
    n = _check_n(n)
    c = kappa * math.sqrt(n)
    return np.array([[n + delta, c], [c, float(n)]])


def discretized_matrix(kappa: float, mu: float, delta: float) -> np.ndarray:
    """One-excitation Hamiltonian with the continuum replaced by three modes.

    Basis: the excited atom with no photon, then one photon of energy
    ``1 - mu``, ``1`` and ``1 + mu``, coupled with strengths ``kappa / 2``,
    ``kappa`` and ``kappa / 2``.
    """
    k = float(kappa)
    return np.array(
        [
            [1.0 + delta, k / 2, k, k / 2],
            [k / 2, 1.0 - mu, 0.0, 0.0],
            [k, 0.0, 1.0, 0.0],
            [k / 2, 0.0, 0.0, 1.0 + mu],
        ]
    )


def matrix_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a real symmetric matrix."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError("expected a square matrix")
    if not np.array_equal(m, m.T):
        raise DomainError("matrix is not symmetric")
    return np.linalg.eigvalsh(m)


def characteristic_residuals(m: np.ndarray, eigenvalues: Sequence[float]) -> np.ndarray:
    """``|det(M - lambda I)|`` at each eigenvalue, an independent check on the solver."""
    m = np.asarray(m, dtype=float)
    eye = np.eye(m.shape[0])
    # an exact eigenvalue makes the LU factorisation hit a zero pivot
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.array([abs(np.linalg.det(m - lam * eye)) for lam in eigenvalues])


def eigenvalue_curves(kappa: float, mu: float, deltas: Sequence[float]) -> np.ndarray:
    """Rows of sorted eigenvalues of the discretized matrix, one per detuning."""
    return np.array([matrix_eigenvalues(discretized_matrix(kappa, mu, d)) for d in deltas])


def min_gap(kappa: float, mu: float, delta_range: tuple[float, float], steps: int) -> float:
    """Smallest gap between adjacent eigenvalues over a uniform detuning grid."""
    if steps < 2:
        raise DomainError("steps must be >= 2")
    deltas = np.linspace(delta_range[0], delta_range[1], int(steps))
    curves = eigenvalue_curves(kappa, mu, deltas)
    return float(np.min(np.diff(curves, axis=1)))
