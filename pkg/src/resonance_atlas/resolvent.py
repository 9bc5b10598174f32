"""Resolvent functions f, f_plus and the hydrogen form F.

All three share one shape,

    R(zeta) = zeta - E0 - C * int_0^inf s(y) / (zeta - y) dy,

with a real density ``s`` on the half line and a prefactor ``C``. Continuing
across the positive real axis adds ``2 pi i C s(zeta)`` with ``s`` continued
analytically; alternatively the integration path can be pushed below zeta.
Both routes are implemented and can be cross-checked.
"""
from __future__ import annotations

import cmath
import enum
import functools
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import integrate

from .core import (
    CouplingFamily,
    FamilyKind,
    ModelParams,
    POLE_EXCLUSION,
    RationalFunction,
    _check_finite,
    hydrogen_circular,
    lorentzian_squared,
)
from .errors import (
    ContinuationMismatch,
    CutError,
    DomainError,
    PoleError,
    QuadratureError,
    StripError,
)


class ContinuationMethod(str, enum.Enum):
    CLOSED_FORM_JUMP = "closed_form_jump"
    DEFORMED_CONTOUR = "deformed_contour"
    CROSS_CHECKED = "cross_checked"


@dataclass(frozen=True)
class EvalOptions:
    """Numerical knobs shared by every resolvent evaluation.

    Attributes
    ----------
    quad_rel_tol, quad_abs_tol : float
        Targets handed to the adaptive quadrature.
    continuation_method : ContinuationMethod
        How the second sheet is reached.
    cut_guard : float
        First-sheet quadrature is refused for ``|Im zeta| < cut_guard`` on
        the positive real axis.
    cross_check_tol : float
        Allowed disagreement between the two continuation routes.
    """

    quad_rel_tol: float = 1e-10
    quad_abs_tol: float = 1e-13
    continuation_method: ContinuationMethod = ContinuationMethod.CLOSED_FORM_JUMP
    cut_guard: float = 1e-9
    cross_check_tol: float = 1e-8

    def __post_init__(self):
        for name in ("quad_rel_tol", "quad_abs_tol", "cut_guard", "cross_check_tol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        object.__setattr__(self, "continuation_method", ContinuationMethod(self.continuation_method))


DEFAULT_OPTIONS = EvalOptions()


@functools.lru_cache(maxsize=256)
def _derivatives(rf: RationalFunction) -> tuple:
    d1 = rf.derivative()
    d2 = d1.derivative()
    return rf, d1, d2, d2.derivative()


@dataclass(frozen=True)
class _Kernel:
    """Density, prefactor and pole data of one resolvent (zeta units)."""

    prefactor: complex
    offset: float
    rf: RationalFunction
    folded: bool  # s(y) = rf(y) + rf(-y); otherwise s(y) = rf(y / scale)
    scale: float
    poles: tuple
    features: tuple  # (centre, width) pairs on the half line
    radius: float

    @property
    def strip_depth(self) -> float:
        return min(abs(p.imag) for p in self.poles)

    def density(self, z, order: int = 0):
        rf = _derivatives(self.rf)[order]
        if self.folded:
            sign = -1 if order % 2 else 1
            return rf(z) + sign * rf(-z)
        return rf(z / self.scale) / self.scale**order

    def check_poles(self, z: complex):
        for p in self.poles:
            if abs(z - p) < self.radius:
                raise PoleError(f"zeta={z} within {self.radius:g} of pole {p}", p)


@functools.lru_cache(maxsize=512)
def _kernel_cached(family: CouplingFamily, mu: float, delta: float, kappa: complex) -> _Kernel:
    rf = family.rational_weight(mu)
    lower = [p for p, _ in rf.lower_poles()]
    radius = POLE_EXCLUSION * mu
    k2 = kappa * kappa
    if family.is_two_level:
        poles = set()
        for p in lower:
            poles.update({p, p.conjugate(), -p, -p.conjugate()})
        feats = tuple(sorted({(abs(p.real), abs(p.imag)) for p in lower}))
        return _Kernel(2 * k2 / (math.pi * mu), 1.0 + delta, rf, True, 1.0,
                       tuple(sorted(poles, key=lambda c: (c.real, c.imag))), feats, radius)
    # hydrogen: s(t) = q(t / mu) with q(y) = G(y)^2 / y
    q = RationalFunction(rf.numerator[1:], rf.base, rf.power, rf.center)
    poles = tuple(sorted({p * mu for p in lower} | {p.conjugate() * mu for p in lower},
                         key=lambda c: (c.real, c.imag)))
    return _Kernel(2 * k2 / mu, 1.0, q, False, mu, poles, ((0.0, mu),), radius)


def _kernel(family: CouplingFamily, params: ModelParams, kappa=None) -> _Kernel:
    k = params.kappa if kappa is None else kappa
    k = complex(k) if isinstance(k, complex) and k.imag != 0 else float(np.real(k))
    delta = 0.0 if not family.is_two_level else params.delta
    return _kernel_cached(family, float(params.mu), float(delta), k)


# --- quadrature -------------------------------------------------------------

def _quad(func, a, b, opts: EvalOptions, points=None, complex_func=True):
    kw = dict(
        epsabs=opts.quad_abs_tol / 10,
        epsrel=opts.quad_rel_tol / 10,
        limit=2000,
        full_output=1,
    )
    if points is not None and np.isfinite(b):
        pts = []
        for p in sorted(p for p in points if a < p < b):
            # near-coincident breakpoints create slivers that wreck the error estimate
            if not pts or p - pts[-1] > 1e-9 * max(1.0, abs(p)):
                pts.append(p)
        if pts:
            kw["points"] = pts
    out = integrate.quad(func, a, b, complex_func=complex_func, **kw)
    val, err = out[0], abs(out[1])
    if not (cmath.isfinite(val) and math.isfinite(err)):
        raise QuadratureError(f"non-finite quadrature result on [{a}, {b}]")
    if err > 1e3 * max(opts.quad_abs_tol, opts.quad_rel_tol * abs(val)):
        raise QuadratureError(f"quadrature error estimate {err:.3g} exceeds tolerance on [{a}, {b}]")
    return val


def _feature_points(kern: _Kernel, centre: float, width: float):
    pts = []
    for c, w in kern.features:
        pts += [c + t * w for t in (-10, -3, -1, -0.3, 0, 0.3, 1, 3, 10)]
    for t in (0, 1, 10, 100):
        pts += [centre - t * width, centre + t * width]
    return [p for p in pts if p > 0]


def _half_line_integral(kern: _Kernel, zeta: complex, order: int, opts: EvalOptions):
    """int_0^inf s^(order)(y) / (zeta - y) dy along the real axis."""
    pts = _feature_points(kern, zeta.real, abs(zeta.imag))
    top = max([2.0, 2 * abs(zeta)] + [c + 50 * w for c, w in kern.features])
    real_path = zeta.imag == 0 and zeta.real < 0
    if real_path:
        z = zeta.real

        def g(y):
            return float(kern.density(y, order)) / (z - y)

        head = _quad(g, 0.0, top, opts, pts, complex_func=False)
    elif 0 < zeta.real < top:
        # subtract the linear Taylor part of the density at Re zeta so the head
        # integrand stays smooth however close zeta sits to the axis; the
        # subtracted pieces integrate in closed form
        x0 = zeta.real
        s0 = kern.density(x0, order)
        s1 = kern.density(x0, order + 1)

        def h(y):
            return (kern.density(y, order) - s0 - s1 * (y - x0)) / (zeta - y)

        def g(y):
            return kern.density(y, order) / (zeta - y)

        log_term = cmath.log(zeta) - cmath.log(zeta - top)
        exact = s0 * log_term + s1 * ((zeta - x0) * log_term - top)
        head = _quad(h, 0.0, top, opts, pts) + exact
    else:

        def g(y):
            return kern.density(y, order) / (zeta - y)

        head = _quad(g, 0.0, top, opts, pts)
    tail = _quad(g, top, np.inf, opts, complex_func=not real_path)
    return complex(head + tail)


def _contour_integral(kern: _Kernel, zeta: complex, order: int, opts: EvalOptions):
    """Same integral with the path dipped below zeta (and above every pole).

    The path runs 0 -> x_l -> x_l - i d -> x_r - i d -> x_r -> infinity, so
    the rectangle it sweeps out contains zeta but none of the poles.
    """
    depth_max = kern.strip_depth
    margin = 0.1 * depth_max
    if zeta.imag <= -depth_max + margin:
        raise StripError(
            f"Im zeta={zeta.imag:g} too deep: the contour must stay above Im = {-depth_max:g}"
        )
    d = (abs(min(zeta.imag, 0.0)) + depth_max) / 2
    centres = [c for c, _ in kern.features] + [1.0]
    x_l = min(0.0, zeta.real) - depth_max
    x_r = max([zeta.real] + centres) + 5 * depth_max

    def seg(a, b):
        def g(t):
            y = a + (b - a) * t
            return kern.density(y, order) / (zeta - y) * (b - a)

        return _quad(g, 0.0, 1.0, opts)

    # leave along the negative axis first so that the swept rectangle also
    # holds points with Re zeta < 0
    total = seg(0j, complex(x_l)) + seg(complex(x_l), x_l - 1j * d)

    def flat(x):
        y = x - 1j * d
        return kern.density(y, order) / (zeta - y)

    pts = [zeta.real] + [c + t * w for c, w in kern.features for t in (-3, -1, 0, 1, 3)]
    pts += [-c for c, _ in kern.features]
    total += _quad(flat, x_l, x_r, opts, pts)
    total += seg(x_r - 1j * d, complex(x_r))

    def g(y):
        return kern.density(y, order) / (zeta - y)

    total += _quad(g, x_r, np.inf, opts)
    return complex(total)


def _integral_part(kern: _Kernel, zeta: complex, order: int, path, opts) -> complex:
    """d^order/dzeta^order of ``-C * int_0^inf s(y) / (zeta - y) dy`` along ``path``.

    Integrating by parts moves each zeta-derivative onto the density,
    ``I'(zeta) = s(0) / zeta + int s'(y) / (zeta - y) dy``, so the kernel keeps
    its first-order singularity even for zeta just below the axis.
    """
    if kern.prefactor == 0:
        return 0j
    total = path(kern, zeta, order, opts)
    if order == 1:
        total += kern.density(0.0, 0) / zeta
    elif order == 2:
        total += -kern.density(0.0, 0) / zeta**2 + kern.density(0.0, 1) / zeta
    return -kern.prefactor * total


def _linear_part(kern: _Kernel, zeta: complex, order: int) -> complex:
    if order == 0:
        return zeta - kern.offset
    return 1.0 + 0j if order == 1 else 0j


def _jump(kern: _Kernel, zeta: complex, order: int = 0) -> complex:
    if kern.prefactor == 0:
        return 0j
    kern.check_poles(zeta)
    return 2j * math.pi * kern.prefactor * kern.density(zeta, order)


def _on_cut(zeta: complex, opts: EvalOptions) -> bool:
    return zeta.real >= 0 and abs(zeta.imag) < opts.cut_guard


def _first_sheet(kern, zeta, order, opts):
    if _on_cut(zeta, opts):
        raise CutError(f"zeta={zeta} lies within cut_guard={opts.cut_guard:g} of the cut")
    return _linear_part(kern, zeta, order) + _integral_part(kern, zeta, order, _half_line_integral, opts)


def _by_contour(kern, zeta, order, opts):
    return _linear_part(kern, zeta, order) + _integral_part(kern, zeta, order, _contour_integral, opts)


def _second_sheet(kern, zeta, order, opts):
    if zeta.imag >= opts.cut_guard or (zeta.real < 0 and zeta.imag >= 0):
        return _first_sheet(kern, zeta, order, opts)
    if _on_cut(zeta, opts):
        # the jump route would need first-sheet quadrature on the cut itself
        return _by_contour(kern, zeta, order, opts)
    method = opts.continuation_method
    if method is ContinuationMethod.DEFORMED_CONTOUR:
        return _by_contour(kern, zeta, order, opts)
    value = _first_sheet(kern, zeta, order, opts) + _jump(kern, zeta, order)
    if method is ContinuationMethod.CROSS_CHECKED:
        try:
            other = _by_contour(kern, zeta, order, opts)
        except StripError:
            return value
        if abs(value - other) > opts.cross_check_tol * max(1.0, abs(value)):
            raise ContinuationMismatch(
                f"jump and contour continuations differ by {abs(value - other):.3g} at zeta={zeta}"
            )
    return value


# --- public evaluation API -------------------------------------------------

def _prepare(zeta):
    zeta = complex(zeta)
    _check_finite(zeta)
    return zeta


def eval_f(params: ModelParams, family: CouplingFamily, zeta, opts: EvalOptions = DEFAULT_OPTIONS) -> complex:
    """First-sheet resolvent function f (analytic off the positive real axis)."""
    zeta = _prepare(zeta)
    return _first_sheet(_kernel(family, params), zeta, 0, opts)


def eval_f_plus(params: ModelParams, family: CouplingFamily, zeta, opts: EvalOptions = DEFAULT_OPTIONS) -> complex:
    """Continuation of f across the positive real axis into the lower half-plane.

    In the upper half-plane this is ``eval_f`` itself.
    """
    zeta = _prepare(zeta)
    return _second_sheet(_kernel(family, params), zeta, 0, opts)


def eval_f_plus_contour(params: ModelParams, family: CouplingFamily, zeta, opts: EvalOptions = DEFAULT_OPTIONS) -> complex:
    """Continuation by contour deformation; raises :class:`StripError` below the strip."""
    zeta = _prepare(zeta)
    kern = _kernel(family, params)
    if kern.prefactor == 0:
        return zeta - kern.offset
    return _by_contour(kern, zeta, 0, opts)


def eval_F_hydrogen(n: int, kappa_n: float, mu_n: float, zeta, opts: EvalOptions = DEFAULT_OPTIONS) -> complex:
    """Hydrogen resolvent F in units of the level spacing; continued below the cut."""
    zeta = _prepare(zeta)
    params = ModelParams(float(kappa_n), float(mu_n), 0.0)
    return _second_sheet(_kernel(hydrogen_circular(n), params), zeta, 0, opts)


class FunctionKind(str, enum.Enum):
    F = "f"
    F_PLUS = "f_plus"
    JUMP = "jump"


def deriv_zeta(fn_kind, params: ModelParams, family: CouplingFamily, zeta,
               opts: EvalOptions = DEFAULT_OPTIONS, order: int = 1) -> complex:
    """zeta-derivative (order 1 or 2) by differentiating under the integral."""
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    zeta = _prepare(zeta)
    kern = _kernel(family, params)
    kind = FunctionKind(fn_kind)
    if kind is FunctionKind.F:
        return _first_sheet(kern, zeta, order, opts)
    if kind is FunctionKind.F_PLUS:
        return _second_sheet(kern, zeta, order, opts)
    return _jump(kern, zeta, order)


def jump_term(params: ModelParams, family: CouplingFamily, zeta) -> complex:
    """The added term ``f_plus - f`` in the lower half-plane."""
    return _jump(_kernel(family, params), _prepare(zeta), 0)


def antisymmetric_jump(params: ModelParams, zeta) -> complex:
    """The Lorentzian-squared jump with the relative minus sign between the two poles.

    Kept only for comparison with :func:`jump_term`; see the README notes.
    """
    z = _prepare(zeta)
    k, mu = params.kappa, params.mu
    return -4j * k * k * mu**3 * (1 / (mu**2 + (z + 1) ** 2) ** 2 - 1 / (mu**2 + (z - 1) ** 2) ** 2)


def residue_closed_form(params: ModelParams, zeta, family: Optional[CouplingFamily] = None) -> complex:
    """f for the Lorentzian-squared family by partial fractions, no quadrature.

    Each peak contributes ``mu^4 / ((y - a)^2 (y - conj a)^2)``; integrating the
    partial-fraction expansion of ``s(y) / (zeta - y)`` over the half line gives
    logarithms and reciprocals of the pole positions.
    """
    if family is not None and family.kind is not FamilyKind.LORENTZIAN_SQUARED:
        raise DomainError("the closed form exists only for the Lorentzian-squared family")
    z = _prepare(zeta)
    if z.imag <= 0:
        raise DomainError("residue_closed_form needs Im zeta > 0")
    k, mu, delta = params.kappa, params.mu, params.delta
    if k == 0:
        return z - (1 + delta)
    m4 = mu**4
    total = 0j
    for centre in (1.0, -1.0):
        a = complex(centre, mu)
        pair = (a, a.conjugate())
        if min(abs(z - p) for p in pair) < 1e-8:
            raise DomainError("zeta coincides with a weight pole; use eval_f")
        for p, other in (pair, pair[::-1]):
            b = m4 / ((p - other) ** 2 * (z - p))  # coefficient of 1/(y-p)^2
            a1 = b * (-2 / (p - other) + 1 / (z - p))  # coefficient of 1/(y-p)
            total += -a1 * cmath.log(-p) - b / p
        c = -m4 / ((z - a) ** 2 * (z - a.conjugate()) ** 2)  # coefficient of 1/(y-zeta)
        total += -c * cmath.log(-z)
    return z - (1 + delta) - 2 * k * k / (math.pi * mu) * total


@dataclass(frozen=True)
class Resolvent:
    """A resolvent bound to its parameters, used by the solvers.

    Calling it evaluates the function on the sheet chosen by ``sheet``:
    ``"auto"`` (f in the upper half-plane, f_plus below), ``"first"`` or
    ``"second"`` (the same as ``"auto"``). ``kappa`` may be complex to follow
    complex coupling paths.
    """

    family: CouplingFamily
    params: ModelParams
    opts: EvalOptions = DEFAULT_OPTIONS
    kappa: Optional[complex] = None
    sheet: str = "auto"
    _kern: _Kernel = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_kern", _kernel(self.family, self.params, self.kappa))

    @property
    def coupling(self):
        return self.params.kappa if self.kappa is None else self.kappa

    def __call__(self, zeta) -> complex:
        return self.derivative(zeta, 0)

    def derivative(self, zeta, order: int = 1) -> complex:
        zeta = _prepare(zeta)
        if self.sheet == "first":
            return _first_sheet(self._kern, zeta, order, self.opts)
        return _second_sheet(self._kern, zeta, order, self.opts)

    @property
    def poles(self) -> tuple:
        return self._kern.poles

    @property
    def exclusion_radius(self) -> float:
        return self._kern.radius

    @property
    def offset(self) -> float:
        return self._kern.offset

    def with_param(self, name: str, value) -> "Resolvent":
        if name == "kappa":
            if isinstance(value, complex) and value.imag != 0:
                return replace(self, kappa=value)
            return replace(self, kappa=None, params=self.params.replace(kappa=float(np.real(value))))
        return replace(self, params=self.params.replace(**{name: float(value)}))

    def d_kappa(self, zeta) -> complex:
        """Partial derivative in kappa at fixed zeta (the coupling enters as kappa^2)."""
        k = self.coupling
        if k == 0:
            return 0j
        return 2 * (self(zeta) - (complex(zeta) - self.offset)) / k

    def d_param(self, name: str, zeta) -> complex:
        """Partial derivative in a named parameter at fixed zeta."""
        if name == "kappa":
            return self.d_kappa(zeta)
        if name == "delta" and self.family.is_two_level:
            return -1.0 + 0j
        h = 1e-6 * max(abs(self.params.get(name)), 1e-3)
        return (self.with_param(name, self.params.get(name) + h)(zeta)
                - self.with_param(name, self.params.get(name) - h)(zeta)) / (2 * h)


def selector(params: ModelParams, family: Optional[CouplingFamily] = None,
             opts: EvalOptions = DEFAULT_OPTIONS) -> Resolvent:
    return Resolvent(family or lorentzian_squared(), params, opts)


def hydrogen_selector(n: int, kappa, mu: float, opts: EvalOptions = DEFAULT_OPTIONS) -> Resolvent:
    return Resolvent(hydrogen_circular(n), ModelParams(abs(kappa), float(mu), 0.0), opts)
