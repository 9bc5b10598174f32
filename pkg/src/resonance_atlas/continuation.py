"""Parameter continuation of zeros, classification and the weak/strong regime boundary.

Zeros are followed with a predictor-corrector march: the predictor
extrapolates the last two zeros (or the implicit-function tangent on the
first step), the corrector is :func:`rootfind.newton`. A step is accepted
only if the zero moved by less than the continuity bound; otherwise the step
is halved, and :class:`TrackingLost` is raised once it underflows.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    CouplingFamily,
    Label,
    ModelParams,
    RootResult,
    Trajectory,
    lorentzian_squared,
)
from .errors import (
    DegenerateRegime,
    DomainError,
    NoConvergence,
    ResonanceError,
    TrackingLost,
)
from .resolvent import DEFAULT_OPTIONS, EvalOptions, Resolvent
from .rootfind import DEDUP_RADIUS, DEFAULT_TOL, find_all, newton

CONTINUITY_FACTOR = 50.0
CONTINUITY_CAP = 0.2
CLASSIFY_RATIO = 0.7
CLASSIFY_KAPPA_MIN = 1e-5
STANDARD_RADIUS = 1e-4
VARIABLES = ("kappa", "mu", "delta")


# --- parameter paths --------------------------------------------------------

@dataclass(frozen=True)
class _Path:
    """Map from an internal coordinate ``u`` to the parameter value.

    ``kind`` is ``"linear"`` (u = p), ``"log"`` (u = log p) or ``"polyline"``
    (u = arclength along complex vertices).
    """

    kind: str
    nodes: tuple  # values of u at the planned samples
    vertices: tuple = ()

    def value(self, u):
        if self.kind == "linear":
            return u
        if self.kind == "log":
            return math.exp(u)
        lengths = np.cumsum([0.0] + [abs(b - a) for a, b in zip(self.vertices, self.vertices[1:])])
        i = int(np.clip(np.searchsorted(lengths, u, side="right") - 1, 0, len(self.vertices) - 2))
        a, b = self.vertices[i], self.vertices[i + 1]
        seg = lengths[i + 1] - lengths[i]
        return a + (b - a) * (u - lengths[i]) / seg

    def dvalue(self, u):
        if self.kind == "linear":
            return 1.0
        if self.kind == "log":
            return math.exp(u)
        h = 1e-9 * max(1.0, abs(self.nodes[-1]))
        lo, hi = max(u - h, self.nodes[0]), min(u + h, self.nodes[-1])
        return (self.value(hi) - self.value(lo)) / (hi - lo)


def _make_path(start, stop, steps: int, spacing: str) -> _Path:
    if steps < 1:
        raise DomainError("steps must be >= 1")
    if start == stop:
        raise DomainError("start and stop coincide")
    if spacing == "log":
        if start <= 0 or stop <= 0:
            raise DomainError("log spacing needs positive endpoints")
        return _Path("log", tuple(np.linspace(math.log(start), math.log(stop), steps + 1)))
    if spacing != "linear":
        raise DomainError(f"unknown spacing {spacing!r}")
    return _Path("linear", tuple(np.linspace(start, stop, steps + 1)))


def _polyline_path(vertices: Sequence[complex], steps: int) -> _Path:
    vertices = tuple(complex(v) for v in vertices)
    if len(vertices) < 2:
        raise DomainError("a polyline needs at least two vertices")
    total = sum(abs(b - a) for a, b in zip(vertices, vertices[1:]))
    return _Path("polyline", tuple(np.linspace(0.0, total, steps + 1)), vertices)


# --- the march --------------------------------------------------------------

def _slope(fn: Resolvent, name: str, z: complex) -> complex:
    """dzeta/dparam at a zero by implicit differentiation."""
    if name == "kappa":
        k = fn.coupling
        # at a zero f = 0, so df/dkappa = 2 (f - (zeta - E0)) / kappa = -2 (zeta - E0) / kappa
        dp = -2 * (z - fn.offset) / k if k != 0 else 0j
    else:
        dp = fn.d_param(name, z)
    dz = fn.derivative(z)
    return -dp / dz if dz != 0 else complex(math.inf)


def _continuity_bound(h: float, slopes: Sequence[complex], z: complex) -> float:
    s = max(abs(x) for x in slopes)
    floor = 1e-9 * max(1.0, abs(z))
    return min(CONTINUITY_CAP, CONTINUITY_FACTOR * abs(h) * s) + floor


def _march(
    make_fn: Callable[[object], Resolvent],
    path: _Path,
    name: str,
    starts: Sequence[RootResult],
    tol: float,
    pair_guard: bool = False,
) -> list[Trajectory]:
    """Advance one or more zeros together along ``path``."""
    nodes = path.nodes
    span = abs(nodes[-1] - nodes[0])
    min_step = 1e-10 * span
    sign = 1.0 if nodes[-1] > nodes[0] else -1.0
    u = nodes[0]
    zs = [r.zeta for r in starts]
    prev: Optional[tuple] = None
    trajs = [Trajectory(name, [(path.value(u), r)]) for r in starts]
    fn = make_fn(path.value(u))
    slopes = [_slope(fn, name, z) * path.dvalue(u) for z in zs]

    def lost(msg):
        for t in trajs:
            t.continuity_ok = False
        raise TrackingLost(msg, param=path.value(u), partial=trajs[0] if len(trajs) == 1 else trajs)

    h = nodes[1] - nodes[0]
    for target in nodes[1:]:
        node_h = target - u
        h = sign * min(abs(h), abs(node_h))
        while sign * (target - u) > 1e-14 * max(1.0, span):
            h = sign * min(abs(h), abs(target - u))
            if abs(target - u - h) < 1e-3 * abs(h):
                h = target - u
            u_new = u + h
            fn_new = make_fn(path.value(u_new))
            if prev is not None:
                u_prev, z_prev = prev
                preds = [z + (z - zp) * (h / (u - u_prev)) for z, zp in zip(zs, z_prev)]
            else:
                preds = [z + s * h for z, s in zip(zs, slopes)]
            ok = True
            new = []
            new_slopes = []
            try:
                for p in preds:
                    new.append(newton(fn_new, p, tol=tol))
                for r in new:
                    new_slopes.append(_slope(fn_new, name, r.zeta) * path.dvalue(u_new))
            except ResonanceError:
                ok = False
            if ok:
                for z, r, s0, s1 in zip(zs, new, slopes, new_slopes):
                    if abs(r.zeta - z) > _continuity_bound(h, (s0, s1), z):
                        ok = False
            if ok and pair_guard:
                sep = abs(preds[0] - preds[1])
                moved = max(abs(r.zeta - p) for r, p in zip(new, preds))
                if abs(new[0].zeta - new[1].zeta) < DEDUP_RADIUS:
                    raise DegenerateRegime(
                        f"tracked zeros merged at {name}={path.value(u_new)!r}: {new[0].zeta}, {new[1].zeta}"
                    )
                if moved > 0.25 * sep:
                    ok = False
            if not ok:
                h /= 2
                if abs(h) < min_step:
                    lost(f"step underflow while tracking {name} near {path.value(u)!r}")
                continue
            prev = (u, list(zs))
            u = u_new
            zs = [r.zeta for r in new]
            slopes = new_slopes
            for t, r in zip(trajs, new):
                t.samples.append((path.value(u), r))
            h *= 2
    return trajs


def _verify_start(fn: Resolvent, zero0, tol: float) -> RootResult:
    zero0 = zero0.zeta if isinstance(zero0, RootResult) else complex(zero0)
    r = newton(fn, zero0, tol=tol)
    if abs(r.zeta - zero0) > 1e-3 * max(1.0, abs(zero0)):
        raise DomainError(f"start {zero0} is not a zero (nearest zero {r.zeta})")
    return r


def track(
    params0: ModelParams,
    family: Optional[CouplingFamily],
    vary: str,
    stop: float,
    steps: int,
    zero0,
    opts: EvalOptions = DEFAULT_OPTIONS,
    spacing: str = "linear",
    tol: float = DEFAULT_TOL,
) -> Trajectory:
    """Follow a zero while one parameter moves from its value in ``params0`` to ``stop``.

    Parameters
    ----------
    vary : {"kappa", "mu", "delta"}
    steps : int
        Number of planned samples; more are inserted where the zero moves fast.
    zero0 : complex or RootResult
        A zero at ``params0``; it is re-polished before the march.
    spacing : {"linear", "log"}

    Raises
    ------
    TrackingLost
        When the step underflows; ``partial`` carries the trajectory so far.
    """
    if vary not in VARIABLES:
        raise DomainError(f"vary must be one of {VARIABLES}, got {vary!r}")
    family = family or lorentzian_squared()
    fn0 = Resolvent(family, params0, opts)
    start = _verify_start(fn0, zero0, tol)
    path = _make_path(params0.get(vary), float(stop), steps, spacing)
    return _march(lambda p: fn0.with_param(vary, p), path, vary, [start], tol)[0]


def track_kappa_path(
    params0: ModelParams,
    family: Optional[CouplingFamily],
    vertices: Sequence[complex],
    steps: int,
    zero0,
    opts: EvalOptions = DEFAULT_OPTIONS,
    tol: float = DEFAULT_TOL,
) -> Trajectory:
    """Follow a zero along a polyline of complex coupling values.

    Complex detours let a path go around branch points of the zeros.
    The first vertex must equal ``params0.kappa``.
    """
    family = family or lorentzian_squared()
    if abs(complex(vertices[0]) - params0.kappa) > 1e-12:
        raise DomainError("the first vertex must be params0.kappa")
    fn0 = Resolvent(family, params0, opts)
    start = _verify_start(fn0, zero0, tol)
    path = _polyline_path(vertices, steps)
    return _march(lambda k: fn0.with_param("kappa", k), path, "kappa", [start], tol)[0]


def track_pair(
    params0: ModelParams,
    family: Optional[CouplingFamily],
    vary: str,
    stop: float,
    steps: int,
    zeros: Sequence,
    opts: EvalOptions = DEFAULT_OPTIONS,
    tol: float = DEFAULT_TOL,
) -> tuple[Trajectory, Trajectory]:
    """Track two zeros on a shared step sequence, refusing steps that could swap them."""
    family = family or lorentzian_squared()
    fn0 = Resolvent(family, params0, opts)
    starts = [_verify_start(fn0, z, tol) for z in zeros]
    path = _make_path(params0.get(vary), float(stop), steps, "linear")
    a, b = _march(lambda p: fn0.with_param(vary, p), path, vary, starts, tol, pair_guard=True)
    return a, b


# --- classification ---------------------------------------------------------

def classify(
    params: ModelParams,
    family: Optional[CouplingFamily],
    zero,
    steps: Optional[int] = None,
    opts: EvalOptions = DEFAULT_OPTIONS,
    return_limit: bool = False,
):
    """Standard if the zero tends to the bare level as the coupling goes to 0.

    The coupling is lowered geometrically (ratio 0.7 per planned step) down
    to 1e-5; the zero is Standard if it then lies within 1e-4 of the bare
    level ``1 + delta``. Lost tracking yields ``Label.UNCLASSIFIED``.
    """
    family = family or lorentzian_squared()
    fn = Resolvent(family, params, opts)
    level = complex(fn.offset)
    z0 = zero.zeta if isinstance(zero, RootResult) else complex(zero)
    if params.kappa <= CLASSIFY_KAPPA_MIN:
        limit = z0
    else:
        n = steps or max(1, math.ceil(math.log(CLASSIFY_KAPPA_MIN / params.kappa) / math.log(CLASSIFY_RATIO)))
        try:
            traj = track(params, family, "kappa", CLASSIFY_KAPPA_MIN, n, z0, opts, spacing="log")
        except (TrackingLost, NoConvergence):
            return (Label.UNCLASSIFIED, None) if return_limit else Label.UNCLASSIFIED
        limit = traj.end.zeta
    label = Label.STANDARD if abs(limit - level) <= STANDARD_RADIUS else Label.NONSTANDARD
    return (label, limit) if return_limit else label


# --- exceptional point ------------------------------------------------------

@dataclass
class ExceptionalPoint:
    kappa_c: float
    delta_c: float
    zeta_c: complex
    mu: float
    condition_residuals: tuple
    iterations: int = 0

    def as_dict(self) -> dict:
        return {
            "kappa_c": self.kappa_c,
            "delta_c": self.delta_c,
            "zeta_c": [self.zeta_c.real, self.zeta_c.imag],
            "mu": self.mu,
            "kappa_c_over_mu": self.kappa_c / self.mu,
            "residual_f": self.condition_residuals[0],
            "residual_df": self.condition_residuals[1],
            "iterations": self.iterations,
        }


# Narrow-peak model at zero detuning: the coalescing pair sits at
# zeta = 1 - 0.382 i mu when kappa / mu = 0.3003.
EP_MODEL_RATIO = 0.3003
EP_MODEL_DEPTH = 0.382


def critical_coupling(
    mu: float,
    family: Optional[CouplingFamily] = None,
    init: Optional[tuple] = None,
    opts: EvalOptions = DEFAULT_OPTIONS,
    tol: float = 1e-10,
    max_iter: int = 60,
) -> ExceptionalPoint:
    """Solve ``f_plus = 0`` and ``d f_plus / d zeta = 0`` for (zeta, kappa, delta) at fixed mu.

    Damped Newton on four real unknowns. ``init`` is ``(zeta, kappa, delta)``;
    the default comes from the narrow-peak model. The detuning is left free.
    """
    if not mu > 0:
        raise DomainError(f"mu must be > 0, got {mu}")
    family = family or lorentzian_squared()
    if init is None:
        init = (1 - 1j * EP_MODEL_DEPTH * mu, EP_MODEL_RATIO * mu, 0.0)
    z, k, d = complex(init[0]), float(init[1]), float(init[2])

    def system(z, k, d):
        fn = Resolvent(family, ModelParams(k, mu, d), opts)
        f0 = fn(z)
        f1 = fn.derivative(z, 1)
        return fn, f0, f1

    fn, f0, f1 = system(z, k, d)
    norm = math.hypot(abs(f0), abs(f1))
    for it in range(1, max_iter + 1):
        if abs(f0) <= tol and abs(f1) <= tol:
            return ExceptionalPoint(float(k), float(d), complex(z), mu, (abs(f0), abs(f1)), it - 1)
        f2 = fn.derivative(z, 2)
        col_k0 = 2 * (f0 - (z - fn.offset)) / k
        col_k1 = 2 * (f1 - 1) / k
        cols = [(f1, f2), (1j * f1, 1j * f2), (col_k0, col_k1), (-1.0 + 0j, 0j)]
        jac = np.array([[c[0].real for c in cols], [c[0].imag for c in cols],
                        [c[1].real for c in cols], [c[1].imag for c in cols]])
        rhs = -np.array([f0.real, f0.imag, f1.real, f1.imag])
        try:
            step = np.linalg.solve(jac, rhs)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("singular Jacobian in the exceptional-point solve", last=z) from exc
        lam = 1.0
        for _ in range(30):
            zt = z + lam * complex(step[0], step[1])
            kt, dt = k + lam * step[2], d + lam * step[3]
            if kt > 0 and dt > -1:
                try:
                    fnt, g0, g1 = system(zt, kt, dt)
                    if math.hypot(abs(g0), abs(g1)) < norm or lam < 1e-3:
                        break
                except ResonanceError:
                    pass
            lam /= 2
        else:
            raise NoConvergence("line search failed in the exceptional-point solve", last=z)
        z, k, d, fn, f0, f1 = zt, kt, dt, fnt, g0, g1
        norm = math.hypot(abs(f0), abs(f1))
    if abs(f0) <= tol and abs(f1) <= tol:
        return ExceptionalPoint(k, d, z, mu, (abs(f0), abs(f1)), max_iter)
    raise NoConvergence(f"exceptional-point solve stalled at |f|={abs(f0):.3g}, |f'|={abs(f1):.3g}",
                        last=z, residual=norm)


# --- regime diagnosis -------------------------------------------------------

class Regime(str, enum.Enum):
    STRONG = "strong_coupling"
    WEAK = "weak_coupling"


@dataclass
class RegimeReport:
    regime: Regime
    trajectories: tuple
    min_real_gap: float
    min_separation: float
    crossing_delta: Optional[float] = None


def resonance_pair(params: ModelParams, family: Optional[CouplingFamily] = None,
                   opts: EvalOptions = DEFAULT_OPTIONS) -> list[RootResult]:
    """The two second-sheet zeros closest to the real axis (atom- and photon-like)."""
    zeros = [r for r in find_all(params, family, opts=opts) if r.zeta.real > 0 and r.zeta.imag < 0]
    if len(zeros) < 2:
        raise NoConvergence(f"fewer than two resonances found at {params}")
    return sorted(zeros, key=lambda r: -r.zeta.imag)[:2]


def regime_diagnose(
    params: ModelParams,
    family: Optional[CouplingFamily] = None,
    delta_range: Optional[tuple] = None,
    steps: int = 80,
    opts: EvalOptions = DEFAULT_OPTIONS,
) -> RegimeReport:
    """Weak or strong coupling from a detuning sweep of the resonance pair.

    Both resonances are tracked over ``delta_range`` (default ``+-2 mu``,
    ``params.delta`` is ignored). Strong coupling: the real parts keep a
    strictly positive gap. Weak coupling: the real-part curves cross.
    """
    family = family or lorentzian_squared()
    lo, hi = delta_range or (-2 * params.mu, 2 * params.mu)
    start = params.replace(delta=lo)
    pair = resonance_pair(start, family, opts)
    a, b = track_pair(start, family, "delta", hi, steps, [r.zeta for r in pair], opts)
    za, zb = a.zetas, b.zetas
    gap = za.real - zb.real
    sep = np.abs(za - zb)
    signs = np.sign(gap[gap != 0])
    crossing = None
    if len(signs) and np.any(signs != signs[0]):
        i = int(np.argmax(signs != signs[0]))
        idx = np.flatnonzero(gap != 0)
        crossing = float(a.params[idx[i]])
        regime = Regime.WEAK
    else:
        regime = Regime.STRONG
    return RegimeReport(regime, (a, b), float(np.min(np.abs(gap))), float(np.min(sep)), crossing)
