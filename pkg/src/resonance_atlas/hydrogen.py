"""Circular-state hydrogen transitions |n, n-1, 0> -> |n-1, n-2, 0>.

The coupling profile of such a transition is an exact rational function of
the scaled photon momentum ``y``; its coefficients are generated here in
integer arithmetic and only turned into floats at evaluation time.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath
import numpy as np

from .core import RationalFunction, RootResult, Sheet
from .errors import DomainError, NoConvergence

# Pinned physical constants.
E_I = 13.6057  # eV, ionisation energy
HBAR_C = 197.327  # eV nm
BOHR_RADIUS = 0.0529177  # nm
ALPHA = 1 / 137.036
HBAR = 6.58212e-16  # eV s

MU_LOWER_BOUND = HBAR_C / BOHR_RADIUS / E_I


# --- exact polynomial helpers (ascending integer coefficients) ---------------

def _trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _padd(a, b):
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


@functools.lru_cache(maxsize=None)
def _arctan_derivative(p: int) -> tuple:
    """Numerator P of d^p/dx^p [x arctan(1/x)] = P(x) / (1 + x^2)^p, p >= 2."""
    if p < 2:
        raise DomainError(f"need p >= 2, got {p}")
    if p == 2:
        return (-2,)
    prev = list(_arctan_derivative(p - 1))
    m = p - 1
    dprev = [i * c for i, c in enumerate(prev)][1:] or [0]
    # (P' (1 + x^2) - 2 m x P) / (1 + x^2)^(m + 1)
    out = _padd(_pmul(dprev, [1, 0, 1]), _pmul([0, -2 * m], prev))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def q_polynomial(degree: int) -> tuple:
    """Integer coefficients (ascending) of Q_degree in A_p = (-1)^(p+1) y Q_{p-2} / (1+y^2)^p."""
    if degree < 0:
        raise DomainError(f"Q is defined for degree >= 0, got {degree}")
    coeffs = list(_arctan_derivative(degree + 2))
    coeffs += [0] * (degree + 1 - len(coeffs))
    # x^(p+1) P(x) / (1+x^2)^p at x = 1/y reduces to y * reversed(P)(y) / (1+y^2)^p
    return tuple(reversed(coeffs))


def _moment(k: int, power: int) -> tuple[Fraction, Fraction]:
    """int_0^inf y^k / (1+y^2)^power dy, returned as (a, b) meaning a + pi*b."""
    twice_a = k + 1  # 2a, with a + b = power
    if twice_a >= 2 * power:
        raise DomainError("divergent moment")
    if twice_a % 2 == 0:
        a = twice_a // 2
        b = power - a
        val = Fraction(math.factorial(a - 1) * math.factorial(b - 1), 2 * math.factorial(power - 1))
        return val, Fraction(0)

    def half(j):  # Gamma(j + 1/2) / sqrt(pi)
        return Fraction(math.factorial(2 * j), 4**j * math.factorial(j))

    ja = (twice_a - 1) // 2
    jb = power - ja - 1
    return Fraction(0), half(ja) * half(jb) / (2 * math.factorial(power - 1))


def _weighted_norm_sq_exact(numerator, power) -> tuple[Fraction, Fraction]:
    """2 * int_0^inf phi(y)^2 dy / y for phi = numerator(y) / (1+y^2)^power, as a + pi*b."""
    if numerator[0] != 0:
        raise DomainError("profile must vanish at y = 0")
    sq = _pmul(list(numerator), list(numerator))
    a = b = Fraction(0)
    for j, c in enumerate(sq):
        if c == 0:
            continue
        # y^j / y = y^(j-1); j >= 2 because numerator(0) = 0
        ma, mb = _moment(j - 1, 2 * power)
        a += c * ma
        b += c * mb
    return 2 * a, 2 * b


def _to_mpf(a: Fraction, b: Fraction):
    """a + pi*b in mpmath, raising precision until cancellation is resolved."""
    dps = 50
    while True:
        with mpmath.workdps(dps):
            fa = mpmath.mpf(a.numerator) / a.denominator
            fb = mpmath.pi * mpmath.mpf(b.numerator) / b.denominator
            val = fa + fb
            big = max(abs(fa), abs(fb))
            if val != 0 and (big == 0 or mpmath.log10(big / abs(val)) < dps - 25):
                return +val
        dps *= 2
        if dps > 5000:
            raise DomainError("weighted norm cancellation could not be resolved")


@dataclass(frozen=True)
class RationalProfile:
    """``numerator(y) / (1 + y^2)^denominator_power`` with exact coefficients.

    ``norm`` is the weighted norm ``(2 int_0^inf phi^2 dy / y)^(1/2)``.
    """

    numerator: tuple
    denominator_power: int
    norm: float
    log_norm: float

    def _evaluate(self, coeffs, y):
        return RationalFunction(coeffs, (1.0, 0.0, 1.0), self.denominator_power)(y)

    def __call__(self, y):
        # scale the integer coefficients into float range first
        scale = max(abs(c) for c in self.numerator)
        coeffs = tuple(float(Fraction(c, scale)) for c in self.numerator)
        factor = float(scale) if scale < 10**300 else math.exp(math.log(scale))
        return self._evaluate(coeffs, y) * factor

    def normalized(self, y):
        """Value of ``phi / norm`` at ``y``."""
        return self._evaluate(self.normalized_coefficients(), y)

    def normalized_coefficients(self) -> tuple:
        """Float numerator coefficients of ``phi / norm``."""
        scale = max(abs(c) for c in self.numerator)
        with mpmath.workdps(50):
            factor = mpmath.mpf(scale) / mpmath.exp(mpmath.mpf(self.log_norm))
            return tuple(float(mpmath.mpf(c) / scale * factor) for c in self.numerator)


def _profile(numerator, power) -> RationalProfile:
    numerator = tuple(int(c) for c in numerator)
    a, b = _weighted_norm_sq_exact(numerator, power)
    norm_sq = _to_mpf(a, b)
    with mpmath.workdps(50):
        log_norm = float(mpmath.log(norm_sq) / 2)
    norm = math.exp(log_norm) if log_norm < 700 else math.inf
    return RationalProfile(numerator, power, norm, log_norm)


def ap_profile(p: int) -> RationalProfile:
    """A_p(y) = int_0^inf j_1(y x) x^p e^-x dx as an exact rational profile."""
    if int(p) != p or p < 2:
        raise DomainError(f"A_p is rational only for integer p >= 2, got {p}")
    p = int(p)
    sign = 1 if (p + 1) % 2 == 0 else -1
    num = [0] + [sign * c for c in q_polynomial(p - 2)]
    return _profile(num, p)


def circular_coefficients(n: int) -> tuple[int, int]:
    """(alpha_n, beta_n) of the circular-transition profile."""
    return 2 * n * n - 3 * n + 2, (2 * n - 1) ** 2 * (n - 2)


@functools.lru_cache(maxsize=None)
def phi_profile(n: int) -> RationalProfile:
    """Unnormalised profile phi_n(y) of the transition n -> n-1."""
    if int(n) != n or n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    n = int(n)
    alpha_n, beta_n = circular_coefficients(n)
    inner = [alpha_n * c for c in q_polynomial(2 * n - 4)]
    if beta_n:
        inner = _padd(inner, [beta_n * c for c in _pmul([1, 0, 1], list(q_polynomial(2 * n - 5)))])
    return _profile([0] + list(inner), 2 * n - 2)


@functools.lru_cache(maxsize=None)
def squared_profile(n: int) -> RationalFunction:
    """G_n(y)^2 = (phi_n / ||phi_n||)^2 as a float rational function."""
    prof = phi_profile(n)
    g = np.polynomial.Polynomial(prof.normalized_coefficients())
    return RationalFunction(tuple(float(c) for c in (g * g).coef), (1.0, 0.0, 1.0), 2 * prof.denominator_power)


def g2_profile(y: float) -> float:
    """Normalised 2p -> 1s profile, -sqrt(3) y / (1 + y^2)^2."""
    return -math.sqrt(3.0) * y / (1.0 + y * y) ** 2


@dataclass(frozen=True)
class HydrogenTransition:
    n: int
    D_n: float
    alpha_n: int
    beta_n: int
    mu_n: float
    kappa_n: float
    level_spacing_eV: float
    log_D_n: float
    phi_norm: float


def _log_k(n: int) -> float:
    # K_n = (2/n)^(n+1/2) ((2n)!)^(-1/2)
    return (n + 0.5) * math.log(2.0 / n) - 0.5 * math.lgamma(2 * n + 1)


@functools.lru_cache(maxsize=None)
def transition(n: int) -> HydrogenTransition:
    if int(n) != n or n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    n = int(n)
    alpha_n, beta_n = circular_coefficients(n)
    log_d = _log_k(n) + _log_k(n - 1) - math.log(n) - 0.5 * math.log((2 * n - 1) * (2 * n - 3))
    prof = phi_profile(n)
    log_kappa = (
        0.5 * math.log(3.0 / math.pi)
        + 0.5 * math.log(ALPHA)
        + (2 * n + 1) * math.log(n * (n - 1))
        - 2 * n * math.log(2 * n - 1)
        + log_d
        + prof.log_norm
    )
    if log_kappa > 700:
        raise OverflowError(f"kappa_n overflows for n={n}")
    return HydrogenTransition(
        n=n,
        D_n=math.exp(log_d),
        alpha_n=alpha_n,
        beta_n=beta_n,
        mu_n=n * (n - 1) * MU_LOWER_BOUND,
        kappa_n=math.exp(log_kappa),
        level_spacing_eV=E_I * (1.0 / (n - 1) ** 2 - 1.0 / n**2),
        log_D_n=log_d,
        phi_norm=prof.norm,
    )


def pole_seeds(n: int, kappa: float, mu: float) -> list[complex]:
    """Small-kappa estimates of the zeros clustered around the pole -i mu.

    Near y = -i the squared profile behaves like c / (y + i)^P; balancing the
    jump term against zeta - 1 gives P zeros on a circle of radius ~ sqrt(kappa mu).
    """
    h = squared_profile(n)
    order = h.power // 2  # (1+y^2)^P = (y-i)^P (y+i)^P
    y0 = -1j
    c = h.numerator
    num = sum(cc * y0**k for k, cc in enumerate(c))
    c_p = num / (y0 - 1j) ** order
    zeta0 = -1j * mu
    rhs = 4j * math.pi * kappa**2 * c_p / (zeta0 * (1.0 - zeta0))
    base = complex(rhs) ** (1.0 / order)
    roots = [base * np.exp(2j * math.pi * j / order) for j in range(order)]
    return [zeta0 + mu * r for r in roots]


def hydrogen_resonances(n: int = 2, opts=None, kappa: Optional[float] = None, tol: float = 1e-12):
    """Standard and nonstandard zeros of the continued hydrogen resolvent.

    Returns ``(standard, nonstandard)``; with ``kappa=0`` the standard zero is
    exactly 1 and ``nonstandard`` is ``None``. The nonstandard zero reported is
    the pole-anchored zero closest to the real axis.
    """
    from .resolvent import EvalOptions, hydrogen_selector
    from .rootfind import newton

    tr = transition(n)
    k = tr.kappa_n if kappa is None else float(kappa)
    if k == 0:
        return RootResult(1.0 + 0j, 0.0, 0, Sheet.PHYSICAL), None
    opts = opts or EvalOptions()
    fn = hydrogen_selector(n, k, tr.mu_n, opts)
    standard = newton(fn, 1.0 - 1e-8j, tol=tol)
    found = []
    for seed in pole_seeds(n, k, tr.mu_n):
        try:
            r = newton(fn, seed, tol=tol)
        except NoConvergence:
            continue
        if r.zeta.imag < -1.0 and all(abs(r.zeta - f.zeta) > 1e-6 for f in found):
            found.append(r)
    if not found:
        raise NoConvergence(f"no pole-anchored zero found for n={n}")
    nonstandard = max(found, key=lambda r: r.zeta.imag)
    return standard, nonstandard


def lifetime_seconds(zeta, transition: HydrogenTransition, polarization_channels: int = 1) -> float:
    """Lifetime hbar / Gamma with Gamma = channels * |Im zeta| * level spacing."""
    zeta = complex(zeta)
    if zeta.imag >= 0:
        raise DomainError(f"a decaying resonance needs Im zeta < 0, got {zeta}")
    if polarization_channels < 1:
        raise DomainError("need at least one polarization channel")
    width = polarization_channels * abs(zeta.imag) * transition.level_spacing_eV
    return HBAR / width
