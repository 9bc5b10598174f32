"""Zeros of f, f_plus and F: damped Newton with a Muller fallback, seeded searches
and the negative real eigenvalue of the first sheet."""
from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .core import CouplingFamily, FamilyKind, ModelParams, RootResult, Sheet, lorentzian_squared
from .errors import NoConvergence, PoleCapture, PoleError
from .resolvent import DEFAULT_OPTIONS, EvalOptions, Resolvent

DEFAULT_TOL = 1e-12
MAX_ITER = 60
STAGNATION_LIMIT = 8
DEDUP_RADIUS = 1e-8


def _sheet(z: complex) -> Sheet:
    return Sheet.PHYSICAL if z.imag >= 0 else Sheet.SECOND


EPS = np.finfo(float).eps


def _accept(residual: float, z: complex, tol: float, slope: float = 0.0) -> bool:
    """Residual test relative to |zeta|, plus the floor set by rounding zeta itself.

    Next to a pole |f'| can be so large that moving zeta by one ulp changes f
    by more than ``tol``; the term ``8 eps |zeta| |f'|`` admits such zeros.
    """
    return residual <= tol * max(1.0, abs(z)) + 8 * EPS * abs(z) * slope


class _Counted:
    """Evaluates fn, translating pole hits into :class:`PoleCapture`."""

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, z):
        try:
            return self.fn(z)
        except PoleError as exc:
            raise PoleCapture(f"iterate {z} captured by a pole: {exc}", last=z) from exc

    def derivative(self, z):
        try:
            return self.fn.derivative(z)
        except PoleError as exc:
            raise PoleCapture(f"iterate {z} captured by a pole: {exc}", last=z) from exc


def muller(fn: Callable, z0: complex, z1: complex, z2: complex, tol: float = DEFAULT_TOL,
           max_iter: int = MAX_ITER) -> RootResult:
    """Muller's three-point parabolic iteration."""
    f0, f1, f2 = fn(z0), fn(z1), fn(z2)
    for it in range(1, max_iter + 1):
        h1, h2 = z1 - z0, z2 - z1
        if h1 == 0 or h2 == 0 or h1 + h2 == 0:
            break
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = np.sqrt(complex(b * b - 4 * a * f2))
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        if den == 0:
            break
        z3 = z2 - 2 * f2 / den
        f3 = fn(z3)
        slope = abs((f3 - f2) / (z3 - z2)) if z3 != z2 else 0.0
        z0, z1, z2, f0, f1, f2 = z1, z2, z3, f1, f2, f3
        if _accept(abs(f3), z3, tol, slope):
            return RootResult(complex(z3), abs(f3), it, _sheet(z3))
    raise NoConvergence(f"Muller iteration did not converge (last {z2}, |f|={abs(f2):.3g})",
                        last=z2, residual=abs(f2))


def newton(fn: Resolvent, seed, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> RootResult:
    """Damped Newton on a resolvent selector.

    Steps are halved until the residual decreases; after
    ``STAGNATION_LIMIT`` steps that fail to halve the residual the search
    switches to Muller's method seeded with the last three iterates.

    Raises
    ------
    NoConvergence
        After ``max_iter`` iterations.
    PoleCapture
        If an iterate lands inside a pole-exclusion disk.
    """
    f = _Counted(fn)
    z = complex(seed)
    v = f(z)
    history = [z]
    stagnant = 0
    for it in range(max_iter):
        r = abs(v)
        if _accept(r, z, tol):
            return RootResult(z, r, it, _sheet(z))
        d = f.derivative(z)
        if np.isfinite(d) and _accept(r, z, tol, abs(d)):
            return RootResult(z, r, it, _sheet(z))
        if d == 0 or not np.isfinite(d):
            stagnant = STAGNATION_LIMIT
        else:
            step = v / d
            lam = 1.0
            for _ in range(30):
                z_new = z - lam * step
                try:
                    v_new = f(z_new)
                except PoleCapture:
                    v_new = None
                if v_new is not None and abs(v_new) < r:
                    break
                lam /= 2
            else:
                z_new, v_new = z - step, None
            if v_new is None:
                stagnant = STAGNATION_LIMIT
            else:
                stagnant = stagnant + 1 if abs(v_new) > 0.5 * r else 0
                z, v = z_new, v_new
                history.append(z)
        if stagnant >= STAGNATION_LIMIT:
            pts = history[-3:]
            while len(pts) < 3:
                pts = [pts[0] - 1e-4 * max(1.0, abs(pts[0]))] + pts
            if len(set(pts)) < 3:
                h = 1e-6 * max(1.0, abs(z))
                pts = [z - h, z + 1j * h, z]
            res = muller(f, *pts, tol=tol, max_iter=max(max_iter - it, 10))
            res.iterations += it
            return res
    raise NoConvergence(f"Newton did not converge from {seed} (last {z}, |f|={abs(v):.3g})",
                        last=z, residual=abs(v))


def cubic_model_seeds(params: ModelParams) -> list[complex]:
    """Zeros of the narrow-peak model of f_plus around the Lorentzian peak.

    With ``v = zeta - 1 + i mu`` the continued function near the peak is
    approximated by ``v^3 - (i mu + delta) v^2 - kappa^2 v - i kappa^2 mu = 0``.
    """
    k, mu, delta = params.kappa, params.mu, params.delta
    roots = np.roots([1.0, -(1j * mu + delta), -(k * k), -1j * k * k * mu])
    return [complex(1 - 1j * mu + v) for v in roots]


def _default_seeds(params: ModelParams, family: CouplingFamily, fn: Resolvent) -> list[complex]:
    k, mu, delta = params.kappa, params.mu, params.delta
    e_at = 1 + delta
    seeds = [e_at - 1e-3j * mu, 1 - 0.1j * mu]
    half = 0.5 * (delta - math.sqrt(delta * delta + 4 * k * k))
    seeds += [1 + half - 0.1j * mu, 1 + delta - half - 0.1j * mu]
    if family.kind is FamilyKind.LORENTZIAN_SQUARED:
        seeds += cubic_model_seeds(params)
        seeds += [1 - 1j * mu * s for s in (0.5, 0.95, 1.05)]
    else:
        for p in fn.poles:
            if p.imag < 0 and p.real >= 0:
                seeds += [p + 0.05j * abs(p.imag), p - 0.05j * abs(p.imag)]
    return seeds


def _dedup(results: list[RootResult], radius: float = DEDUP_RADIUS) -> list[RootResult]:
    out: list[RootResult] = []
    for r in results:
        for i, o in enumerate(out):
            if abs(r.zeta - o.zeta) < radius * max(1.0, abs(r.zeta)):
                if r.residual < o.residual:
                    out[i] = r
                break
        else:
            out.append(r)
    return out


def find_all(params: ModelParams, family: Optional[CouplingFamily] = None, seed_strategy="default",
             opts: EvalOptions = DEFAULT_OPTIONS, tol: float = DEFAULT_TOL) -> list[RootResult]:
    """Zeros reachable from a set of physically motivated seeds.

    ``seed_strategy`` is ``"default"`` or an explicit iterable of complex
    seeds. Zeros closer than the deduplication radius are merged; the list
    is sorted by real part and includes the negative real eigenvalue when
    it exists. At zero coupling the only zero is ``1 + delta`` on the first sheet.
    """
    family = family or lorentzian_squared()
    if params.kappa == 0:
        return [RootResult(complex(1 + params.delta), 0.0, 0, Sheet.PHYSICAL)]
    fn = Resolvent(family, params, opts)
    seeds = _default_seeds(params, family, fn) if seed_strategy == "default" else list(seed_strategy)
    found = []
    for s in seeds:
        try:
            r = newton(fn, s, tol=tol)
        except NoConvergence:
            continue
        if r.zeta.imag > 0 and abs(r.zeta.imag) > opts.cut_guard:
            continue
        found.append(r)
    neg = negative_real_eigenvalue(params, family, opts)
    if neg is not None:
        found.append(RootResult(complex(neg), abs(fn(complex(neg))), 0, Sheet.PHYSICAL))
    return sorted(_dedup(found), key=lambda r: (r.zeta.real, r.zeta.imag))


NEG_BRACKET = (-1e3, -1e-12)


def negative_real_eigenvalue(params: ModelParams, family: Optional[CouplingFamily] = None,
                             opts: EvalOptions = DEFAULT_OPTIONS) -> Optional[float]:
    """The zero of f on the negative real axis, if any.

    On ``zeta < 0`` the integral is real and f is increasing, so a zero
    exists exactly when f changes sign over the bracket. Since the density
    is nonzero at the origin, f grows like ``-C s(0) log|zeta|`` as
    zeta -> 0-; with a coefficient of order 1e-6 that growth only wins at
    ``|zeta|`` far below the bracket end, so such zeros are reported as absent.
    """
    family = family or lorentzian_squared()
    if params.kappa == 0:
        return None
    fn = Resolvent(family, params, opts, sheet="first")

    def g(x):
        return fn(complex(x, 0.0)).real

    lo, hi = NEG_BRACKET
    g_lo, g_hi = g(lo), g(hi)
    if not (g_lo < 0 < g_hi):
        return None
    return float(optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
