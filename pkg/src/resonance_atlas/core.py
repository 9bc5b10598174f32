"""Domain types, parameter validation and the built-in coupling families.

Every section-2 family (Lorentzian squared, simple pole, user rational) is
described by a real-axis weight ``w(y)`` entering the resolvent as

    f(zeta) = zeta - (1 + delta) - (2 kappa^2 / (pi mu)) * int_R w(y) / (zeta - |y|) dy

and normalised so that ``(2 / (pi mu)) * int_R w(y) dy = 1`` (unit L2 norm of
the coupling function). The hydrogen family instead carries the squared
circular-transition profile ``G_n(y)**2``, normalised with the weighted norm
``2 * int_0^inf G(y)^2 dy / y = 1``.
"""
from __future__ import annotations

import cmath
import enum
import functools
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, PoleError

# Relative radius (in units of mu) of the disk around each pole of a
# continued weight inside which evaluation is refused.
POLE_EXCLUSION = 1e-6


def _horner(coeffs, z):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


@dataclass(frozen=True)
class RationalFunction:
    """``numerator(t) / base(t) ** power`` in the shifted variable ``t = z - center``.

    Coefficients are real and ascending. Centring the polynomials on a narrow
    peak keeps ``(y - 1)^2 + mu^2`` free of cancellation when mu is tiny. All
    weights used here have this shape, which keeps derivatives closed:
    ``(N / B^p)' = (N' B - p N B') / B^(p+1)``.
    """

    numerator: tuple
    base: tuple
    power: int
    center: float = 0.0

    def __call__(self, z):
        t = z - self.center if self.center else z
        if abs(t) <= 1.0:
            return _horner(self.numerator, t) / _horner(self.base, t) ** self.power
        # evaluate in 1/t so that high-degree profiles do not overflow
        u = 1.0 / t
        dn = len(self.numerator) - 1
        db = len(self.base) - 1
        num = _horner(self.numerator[::-1], u)
        den = _horner(self.base[::-1], u) ** self.power
        exponent = dn - self.power * db
        return num / den * t**exponent if exponent else num / den

    def derivative(self) -> "RationalFunction":
        n = np.polynomial.Polynomial(self.numerator)
        b = np.polynomial.Polynomial(self.base)
        new = n.deriv() * b - self.power * n * b.deriv()
        coeffs = tuple(float(c) for c in np.trim_zeros(new.coef, "b")) or (0.0,)
        return RationalFunction(coeffs, self.base, self.power + 1, self.center)

    def lower_poles(self) -> list[tuple[complex, int]]:
        """Poles in the open lower half-plane with their orders."""
        roots = np.polynomial.polynomial.polyroots(self.base) + self.center
        clusters: list[list[complex]] = []
        for r in roots:
            for cl in clusters:
                if abs(cl[0] - r) < 1e-6 * max(1.0, abs(r)):
                    cl.append(r)
                    break
            else:
                clusters.append([r])
        poles = []
        for cl in clusters:
            centre = complex(np.mean(cl))
            if centre.imag < 0:
                poles.append((centre, len(cl) * self.power))
        return sorted(poles, key=lambda p: (p[0].real, p[0].imag))


class FamilyKind(str, enum.Enum):
    LORENTZIAN_SQUARED = "lorentzian_squared"
    SIMPLE_POLE = "simple_pole"
    HYDROGEN_CIRCULAR = "hydrogen_circular"
    USER_RATIONAL = "user_rational"


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless knobs of the two-level resolvent.

    ``energy_scale`` (hbar c k0 in eV) is carried only for unit conversion.
    """

    kappa: float
    mu: float
    delta: float
    energy_scale: Optional[float] = None

    def __post_init__(self):
        for name in ("kappa", "mu", "delta"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite real number, got {v!r}")
        if self.mu <= 0:
            raise DomainError(f"mu must be > 0, got {self.mu}")
        if self.kappa < 0:
            raise DomainError(f"kappa must be >= 0, got {self.kappa}")
        if self.delta <= -1:
            raise DomainError(f"delta must be > -1, got {self.delta}")

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def get(self, name: str) -> float:
        return getattr(self, name)


def make_params(kappa, mu, delta, energy_scale=None) -> ModelParams:
    """Validated constructor; raises :class:`DomainError` on bad input."""
    return ModelParams(float(kappa), float(mu), float(delta), energy_scale)


@dataclass(frozen=True)
class CouplingFamily:
    """A spectral-density family.

    Use the module-level constructors (:func:`lorentzian_squared`,
    :func:`simple_pole`, :func:`hydrogen_circular`, :func:`user_rational`)
    rather than building instances by hand.
    """

    kind: FamilyKind
    n: Optional[int] = None
    numerator: tuple = ()
    denominator: tuple = ()

    @property
    def norm(self) -> str:
        return "weighted" if self.kind is FamilyKind.HYDROGEN_CIRCULAR else "L2"

    @property
    def is_two_level(self) -> bool:
        """True for families that plug into the folded-axis resolvent f."""
        return self.kind is not FamilyKind.HYDROGEN_CIRCULAR

    def rational_weight(self, mu: float) -> RationalFunction:
        return _rational_weight(self, float(mu))

    def pole_list(self, params: ModelParams) -> list[tuple[complex, int]]:
        """Lower-half-plane poles of the continued weight, with orders."""
        poles = self.rational_weight(params.mu).lower_poles()
        if self.is_two_level:
            # w(-y) contributes the mirrored poles
            mirrored = [(-p.conjugate(), k) for p, k in poles]
            poles = sorted(set(poles) | set(mirrored), key=lambda p: (p[0].real, p[0].imag))
        return poles

    def exclusion_radius(self, params: ModelParams) -> float:
        if self.kind is FamilyKind.HYDROGEN_CIRCULAR:
            return POLE_EXCLUSION
        return POLE_EXCLUSION * params.mu


def lorentzian_squared() -> CouplingFamily:
    return CouplingFamily(FamilyKind.LORENTZIAN_SQUARED)


def simple_pole() -> CouplingFamily:
    """``g(p)^2 ~ p^2 / (1 + p^2)^2`` dilated by mu; vanishes at p = 0."""
    return CouplingFamily(FamilyKind.SIMPLE_POLE)


def hydrogen_circular(n: int) -> CouplingFamily:
    if int(n) != n or n < 2:
        raise DomainError(f"hydrogen circular transitions need n >= 2, got {n}")
    return CouplingFamily(FamilyKind.HYDROGEN_CIRCULAR, n=int(n))


def user_rational(numerator: Sequence[float], denominator: Sequence[float]) -> CouplingFamily:
    """Coupling profile ``N(y) / D(y)`` (ascending real coefficients).

    The weight is ``c * (N/D)^2`` with ``c`` fixed by the L2 normalisation.
    ``D`` must have no real zeros and ``deg N < deg D``.
    """
    num = tuple(float(c) for c in np.trim_zeros(np.asarray(numerator, float), "b"))
    den = tuple(float(c) for c in np.trim_zeros(np.asarray(denominator, float), "b"))
    if not num or not den:
        raise DomainError("numerator and denominator must be non-zero polynomials")
    if len(num) >= len(den):
        raise DomainError("need deg N < deg D for a square-integrable weight")
    if any(not math.isfinite(c) for c in num + den):
        raise DomainError("coefficients must be finite")
    roots = np.polynomial.polynomial.polyroots(den)
    scale = max(1.0, float(np.max(np.abs(roots)))) if len(roots) else 1.0
    if any(abs(r.imag) <= 1e-9 * scale for r in np.atleast_1d(roots)):
        raise DomainError("denominator has a real zero")
    return CouplingFamily(FamilyKind.USER_RATIONAL, numerator=num, denominator=den)


@functools.lru_cache(maxsize=None)
def _user_profile_l2(num: tuple, den: tuple) -> float:
    def h2(y):
        return (_horner(num, y) / _horner(den, y)) ** 2

    val, _ = integrate.quad(h2, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-12, limit=500)
    return val


@functools.lru_cache(maxsize=256)
def _rational_weight(family: CouplingFamily, mu: float) -> RationalFunction:
    kind = family.kind
    if kind is FamilyKind.LORENTZIAN_SQUARED:
        # mu^4 / (mu^2 + t^2)^2 with t = y - 1
        return RationalFunction((mu**4,), (mu * mu, 0.0, 1.0), 2, 1.0)
    if kind is FamilyKind.SIMPLE_POLE:
        # (y/mu)^2 / (1 + (y/mu)^2)^2 = mu^2 y^2 / (mu^2 + y^2)^2
        return RationalFunction((0.0, 0.0, mu * mu), (mu * mu, 0.0, 1.0), 2)
    if kind is FamilyKind.USER_RATIONAL:
        c = math.pi * mu / (2.0 * _user_profile_l2(family.numerator, family.denominator))
        num = np.polynomial.Polynomial(family.numerator) ** 2 * c
        return RationalFunction(tuple(num.coef), family.denominator, 2)
    if kind is FamilyKind.HYDROGEN_CIRCULAR:
        from .hydrogen import squared_profile

        return squared_profile(family.n)
    raise DomainError(f"unknown family {kind}")


def _check_finite(z, what="zeta"):
    if not (cmath.isfinite(z)):
        raise DomainError(f"{what} must be finite, got {z!r}")


def weight(family: CouplingFamily, params: ModelParams, y: float) -> float:
    """Real-axis spectral weight w(y) >= 0 (no kernel, no prefactor)."""
    return float(family.rational_weight(params.mu)(float(y)))


def coupling_function(family: CouplingFamily, params: ModelParams, k: float) -> float:
    """The normalised coupling profile g at wave number ``k`` (units of k0).

    For the two-level families ``g(k)^2 = 2 w(k) / (pi mu)`` so that the
    L2 norm is one; g is taken non-negative since only its square enters the
    resolvent. The hydrogen family returns the signed profile ``G_n(k)``.

    Examples
    --------
    >>> round(coupling_function(lorentzian_squared(), make_params(0.1, 0.01, 0), 1.0), 3)
    7.979
    """
    if family.kind is FamilyKind.HYDROGEN_CIRCULAR:
        from .hydrogen import phi_profile

        return float(phi_profile(family.n).normalized(float(k)))
    return math.sqrt(2.0 * weight(family, params, k) / (math.pi * params.mu))


def weight_continuation(family: CouplingFamily, params: ModelParams, zeta) -> complex:
    """Analytic continuation of :func:`weight` to complex argument."""
    zeta = complex(zeta)
    _check_finite(zeta)
    rf = family.rational_weight(params.mu)
    radius = family.exclusion_radius(params)
    for pole, order in rf.lower_poles():
        if abs(zeta - pole) < radius:
            raise PoleError(f"zeta={zeta} within {radius:g} of pole {pole} (order {order})", pole)
        if abs(zeta - pole.conjugate()) < radius:
            raise PoleError(f"zeta={zeta} within {radius:g} of pole {pole.conjugate()}", pole.conjugate())
    return complex(rf(zeta))


class Sheet(str, enum.Enum):
    PHYSICAL = "physical"
    SECOND = "second"


class Label(str, enum.Enum):
    STANDARD = "standard"
    NONSTANDARD = "nonstandard"
    UNCLASSIFIED = "unclassified"


@dataclass
class RootResult:
    zeta: complex
    residual: float
    iterations: int
    sheet: Sheet
    label: Optional[Label] = None

    def as_dict(self) -> dict:
        return {
            "re": self.zeta.real,
            "im": self.zeta.imag,
            "residual": self.residual,
            "iterations": self.iterations,
            "sheet": self.sheet.value,
            "label": self.label.value if self.label else None,
        }


@dataclass
class Trajectory:
    """Ordered zeros along a one-parameter path."""

    param_name: str
    samples: list = field(default_factory=list)  # (param value, RootResult)
    continuity_ok: bool = True

    @property
    def params(self) -> np.ndarray:
        return np.array([p for p, _ in self.samples])

    @property
    def zetas(self) -> np.ndarray:
        return np.array([r.zeta for _, r in self.samples], dtype=complex)

    @property
    def end(self) -> RootResult:
        return self.samples[-1][1]

    def __len__(self):
        return len(self.samples)
