import cmath
import math

import pytest

from resonance_atlas.core import RootResult, Sheet, lorentzian_squared, make_params, simple_pole
from resonance_atlas.errors import NoConvergence
from resonance_atlas.resolvent import Resolvent, eval_f, eval_f_plus_contour
from resonance_atlas.rootfind import (
    DEDUP_RADIUS,
    _dedup,
    cubic_model_seeds,
    find_all,
    muller,
    negative_real_eigenvalue,
    newton,
)

LOR = lorentzian_squared()
BASE = make_params(0.1, 0.01, 0.25)


class _Poly:
    """A polynomial with the selector interface that newton expects."""

    def __init__(self, coeffs):
        self.coeffs = coeffs

    def __call__(self, z):
        return sum(c * z**k for k, c in enumerate(self.coeffs))

    def derivative(self, z, order=1):
        return sum(k * c * z ** (k - 1) for k, c in enumerate(self.coeffs) if k)


def _near(zeros, target, tol):
    return [r for r in zeros if abs(r.zeta.real - target.real) <= tol and abs(r.zeta.imag - target.imag) <= tol]


def test_free_theory_root_is_exact():
    fn = Resolvent(LOR, make_params(0.0, 0.01, 0.25))
    assert newton(fn, 1.2).zeta == 1.25


@pytest.mark.parametrize("seed,expected,imag_tol", [
    (1.28, 1.285 - 2.7e-6j, 5e-8),
    (0.97 - 1e-3j, 0.963 - 9.8e-4j, 5e-6),
])
def test_newton_reference_zeros(seed, expected, imag_tol):
    r = newton(Resolvent(LOR, BASE), seed)
    assert r.zeta.real == pytest.approx(expected.real, abs=5e-4)
    assert r.zeta.imag == pytest.approx(expected.imag, abs=imag_tol)
    assert r.sheet is Sheet.SECOND
    # independent re-evaluation through the deformed contour
    assert abs(eval_f_plus_contour(BASE, LOR, r.zeta)) < 1e-10


def test_newton_converges_quadratically():
    fn = Resolvent(LOR, BASE)
    residuals = []
    for k in range(1, 4):
        with pytest.raises(NoConvergence) as info:
            newton(fn, 1.2 - 1e-4j, max_iter=k)
        residuals.append(info.value.residual)
    for a, b in zip(residuals, residuals[1:]):
        assert b < 10 * a * a


def test_newton_reports_exhaustion():
    with pytest.raises(NoConvergence) as info:
        newton(_Poly([1.0, 0.0, 1.0]), 0.5, max_iter=3)  # z^2 + 1 from a real seed
    assert info.value.last is not None


def test_newton_on_polynomial():
    r = newton(_Poly([-2.0, 0.0, 1.0]), 1.0 + 0.1j)
    assert abs(r.zeta - math.sqrt(2)) < 1e-12


def test_muller_finds_complex_root_from_real_points():
    r = muller(lambda z: z * z + 1, 0.1, 0.2, 0.3)
    assert min(abs(r.zeta - 1j), abs(r.zeta + 1j)) < 1e-12


def test_muller_exhaustion():
    with pytest.raises(NoConvergence):
        muller(lambda z: cmath.exp(z), 0.0, 0.5, 1.0, max_iter=5)


def test_cubic_seeds_sit_near_the_zeros():
    zeros = [r.zeta for r in find_all(BASE)]
    for s in cubic_model_seeds(BASE):
        assert min(abs(s - z) for z in zeros) < 1e-6


def test_find_all_base_point():
    zeros = find_all(BASE)
    assert len([r for r in zeros if r.sheet is Sheet.SECOND]) >= 2
    assert _near(zeros, 1.285 - 2.7e-6j, 5e-4)
    assert _near(zeros, 0.963 - 9.8e-4j, 5e-4)
    for r in zeros:
        assert abs(Resolvent(LOR, BASE)(r.zeta)) <= 1e-12 * max(1.0, abs(r.zeta))
    assert [r.zeta.real for r in zeros] == sorted(r.zeta.real for r in zeros)


def test_find_all_third_zero_at_wide_peak():
    zeros = find_all(make_params(0.1, 2.0, 0.25))
    u = _near(zeros, 1.005 - 2.095j, 5e-3)
    ph = _near(zeros, 0.993 - 1.895j, 5e-3)
    assert len(u) == 1 and len(ph) == 1
    assert abs(u[0].zeta - ph[0].zeta) > 0.1


def test_find_all_at_zero_coupling():
    zeros = find_all(make_params(0.0, 0.01, 0.25))
    assert len(zeros) == 1
    assert zeros[0].zeta == 1.25 and zeros[0].sheet is Sheet.PHYSICAL


def test_find_all_with_explicit_seeds():
    zeros = find_all(BASE, seed_strategy=[1.28, 1.281, 1.29])
    assert len(zeros) == 1


def test_find_all_other_family():
    p = make_params(0.2, 0.5, 0.1)
    for r in find_all(p, simple_pole()):
        assert abs(Resolvent(simple_pole(), p)(r.zeta)) < 1e-10


def test_dedup_keeps_best_residual():
    a = RootResult(1 + 0j, 1e-13, 3, Sheet.SECOND)
    b = RootResult(1 + 0.1 * DEDUP_RADIUS * 1j, 1e-15, 3, Sheet.SECOND)
    c = RootResult(2 + 0j, 1e-15, 3, Sheet.SECOND)
    out = _dedup([a, b, c])
    assert out == [b, c]


def test_no_negative_eigenvalue_at_weak_coupling():
    assert negative_real_eigenvalue(BASE) is None
    assert negative_real_eigenvalue(make_params(1.0, 0.01, 0.25)) is None
    assert negative_real_eigenvalue(make_params(0.0, 0.01, 0.25)) is None


def test_negative_eigenvalue_at_strong_coupling():
    p = make_params(1.2, 0.01, 0.25)
    x = negative_real_eigenvalue(p)
    assert x is not None and x < 0
    val = eval_f(p, LOR, complex(x, 0.0))
    assert val.imag == 0.0 and abs(val.real) < 1e-12


def test_negative_eigenvalue_climbs_to_zero():
    values = [negative_real_eigenvalue(make_params(k, 0.01, 0.25)) for k in (1.2, 1.16, 1.13, 1.12, 1.1185)]
    assert all(v is not None for v in values)
    assert all(a < b for a, b in zip(values, values[1:]))
    assert abs(values[-1]) < 1e-3
    assert negative_real_eigenvalue(make_params(1.117, 0.01, 0.25)) is None
