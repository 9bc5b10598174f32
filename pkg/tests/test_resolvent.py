import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resonance_atlas.core import hydrogen_circular, lorentzian_squared, make_params, simple_pole, user_rational
from resonance_atlas.errors import ContinuationMismatch, CutError, DomainError, PoleError, StripError
from resonance_atlas.resolvent import (
    ContinuationMethod,
    EvalOptions,
    Resolvent,
    deriv_zeta,
    eval_F_hydrogen,
    eval_f,
    eval_f_plus,
    eval_f_plus_contour,
    jump_term,
    antisymmetric_jump,
    residue_closed_form,
)

LOR = lorentzian_squared()
BASE = make_params(0.1, 0.01, 0.25)
WIDE = make_params(1.0, 0.5, 0.0)


def _grid(xs, ys):
    return [complex(x, y) for x in xs for y in ys]


@pytest.mark.parametrize("params,zs", [
    (BASE, _grid((0.2, 0.9, 1.05, 1.4, 3.0), (1e-3, 0.02, 0.1, 0.6, 3.0))),
    (WIDE, _grid((-1.0, 0.3, 1.0, 2.0, 5.0), (1e-3, 0.05, 0.3, 1.0, 4.0))),
])
def test_quadrature_matches_residue_closed_form(params, zs):
    for z in zs:
        ref = residue_closed_form(params, z)
        assert abs(eval_f(params, LOR, z) - ref) <= 1e-10 * abs(ref), z


def test_residue_closed_form_rejects_lower_half_plane():
    with pytest.raises(DomainError):
        residue_closed_form(BASE, 1 - 0.1j)


def test_free_resolvent():
    p = make_params(0.0, 0.01, 0.25)
    assert eval_f(p, LOR, 0.3 + 0.2j) == pytest.approx(0.3 + 0.2j - 1.25, abs=1e-15)
    assert eval_f_plus(p, LOR, 0.3 - 0.2j) == pytest.approx(0.3 - 0.2j - 1.25, abs=1e-15)


def test_real_axis_left_of_cut_is_real():
    val = eval_f(BASE, LOR, -0.5)
    assert val.imag == 0.0
    # -C int s(y) / (zeta - y) dy is positive for zeta < 0
    assert val.real > -0.5 - 1.25
    assert val == pytest.approx(residue_closed_form(BASE, -0.5 + 1e-13j).real, abs=1e-10)


def test_first_sheet_refuses_the_cut():
    with pytest.raises(CutError):
        eval_f(BASE, LOR, 1.0 + 1e-12j)
    with pytest.raises(CutError):
        eval_f(BASE, LOR, 0.5)


def test_pole_error_on_second_sheet():
    with pytest.raises(PoleError):
        eval_f_plus(BASE, LOR, 1 - 0.01j)


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-0.5, 3.0), depth=st.floats(1e-5, 0.0085))
def test_jump_and_contour_agree_in_strip(x, depth):
    z = complex(x, -depth)
    if abs(z - (1 - 0.01j)) < 1e-3:
        return
    a = eval_f_plus(BASE, LOR, z)
    b = eval_f_plus_contour(BASE, LOR, z)
    assert abs(a - b) <= 1e-8 * max(1.0, abs(a))


def test_contour_refuses_points_below_strip():
    with pytest.raises(StripError):
        eval_f_plus_contour(BASE, LOR, 1.2 - 0.0095j)


def test_cross_checked_mode_and_mismatch():
    opts = EvalOptions(continuation_method=ContinuationMethod.CROSS_CHECKED)
    z = 0.97 - 0.003j
    assert eval_f_plus(BASE, LOR, z, opts) == pytest.approx(eval_f_plus(BASE, LOR, z), abs=1e-12)
    # an absurdly tight cross-check tolerance must trip
    strict = EvalOptions(continuation_method=ContinuationMethod.CROSS_CHECKED, cross_check_tol=1e-300)
    with pytest.raises(ContinuationMismatch):
        eval_f_plus(BASE, LOR, z, strict)


def test_contour_method_selectable():
    opts = EvalOptions(continuation_method="deformed_contour")
    z = 1.2 - 0.004j
    assert eval_f_plus(BASE, LOR, z, opts) == pytest.approx(eval_f_plus(BASE, LOR, z), abs=1e-10)


@pytest.mark.parametrize("x", np.linspace(0.5, 1.5, 12)[1:-1])
def test_cut_continuity(x):
    eps = 1e-7
    above, below = complex(x, eps), complex(x, -eps)
    # one-sided limits, each corrected to first order in eps
    upper = eval_f(BASE, LOR, above) - 1j * eps * deriv_zeta("f", BASE, LOR, above)
    lower = eval_f_plus(BASE, LOR, below) + 1j * eps * deriv_zeta("f_plus", BASE, LOR, below)
    assert abs(upper - lower) < 1e-6
    # the raw values differ by the expected 2 i eps f'
    raw = eval_f(BASE, LOR, above) - eval_f_plus(BASE, LOR, below)
    assert abs(raw - 2j * eps * deriv_zeta("f", BASE, LOR, above)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-2.0, 4.0), y=st.floats(1e-4, 3.0), kappa=st.floats(0.0, 1.0), mu=st.floats(1e-3, 2.0))
def test_schwarz_symmetry(x, y, kappa, mu):
    p = make_params(kappa, mu, 0.1)
    z = complex(x, y)
    assert abs(eval_f(p, LOR, z.conjugate()) - eval_f(p, LOR, z).conjugate()) <= 1e-12 * max(1.0, abs(z))


@pytest.mark.parametrize("kind,z", [("f", 0.7 + 0.05j), ("f", -0.3 + 0.2j), ("f", 1.3 + 1e-3j),
                                    ("f_plus", 0.97 - 1e-3j), ("f_plus", 1.285 - 3e-6j),
                                    ("f_plus", 2.0 - 0.5j), ("jump", 0.9 - 0.02j)])
def test_derivatives_against_central_differences(kind, z):
    fn = {"f": eval_f, "f_plus": eval_f_plus, "jump": jump_term}[kind]
    h = 1e-6 * max(1e-2, abs(z.imag))
    fd1 = (fn(BASE, LOR, z + h) - fn(BASE, LOR, z - h)) / (2 * h)
    d1 = deriv_zeta(kind, BASE, LOR, z)
    assert abs(d1 - fd1) <= 1e-6 * abs(d1)
    fd2 = (deriv_zeta(kind, BASE, LOR, z + h) - deriv_zeta(kind, BASE, LOR, z - h)) / (2 * h)
    d2 = deriv_zeta(kind, BASE, LOR, z, order=2)
    assert abs(d2 - fd2) <= 1e-5 * abs(d2)


def test_second_derivative_with_nonzero_density_at_origin():
    fam = user_rational([1.0], [1.0, 0.0, 1.0])
    p = make_params(0.3, 0.5, 0.1)
    z = 0.4 + 0.3j
    h = 1e-5
    fd = (deriv_zeta("f", p, fam, z + h) - deriv_zeta("f", p, fam, z - h)) / (2 * h)
    assert abs(deriv_zeta("f", p, fam, z, order=2) - fd) <= 1e-7 * abs(fd)


def test_derivative_order_validated():
    with pytest.raises(DomainError):
        deriv_zeta("f", BASE, LOR, 0.5 + 0.5j, order=3)


def test_jump_sign_convention():
    # the continuation adds +2 pi i C s(zeta) with both peaks entering alike;
    # flipping the sign of the mirrored peak changes only that term
    z = 0.95 - 0.002j
    jump = jump_term(BASE, LOR, z)
    anti = antisymmetric_jump(BASE, z)
    c = 2 * BASE.kappa**2 / (math.pi * BASE.mu)
    s = BASE.mu**4 / ((z - 1) ** 2 + BASE.mu**2) ** 2 + BASE.mu**4 / ((z + 1) ** 2 + BASE.mu**2) ** 2
    assert jump == pytest.approx(2j * math.pi * c * s, rel=1e-13)
    mirrored = 4j * BASE.kappa**2 * BASE.mu**3 / ((z + 1) ** 2 + BASE.mu**2) ** 2
    assert anti - jump == pytest.approx(-2 * mirrored, rel=1e-10)


def test_simple_pole_family_continuation():
    p = make_params(0.2, 0.5, 0.0)
    fam = simple_pole()
    for z in (0.3 - 0.1j, 0.8 - 0.2j, 1.5 - 0.05j):
        a = eval_f_plus(p, fam, z)
        b = eval_f_plus_contour(p, fam, z)
        assert abs(a - b) < 1e-9


def test_hydrogen_resolvent_routes_agree():
    mu, kappa = 548.0, 0.018
    for z in (0.5 - 1e-3j, 1.0 - 2e-8j, 3.0 - 10.0j):
        a = eval_F_hydrogen(2, kappa, mu, z)
        b = Resolvent(hydrogen_circular(2), make_params(kappa, mu, 0.0),
                      EvalOptions(continuation_method="deformed_contour"))(z)
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


def test_resolvent_object_and_kappa_derivative():
    r = Resolvent(LOR, BASE)
    z = 1.1 + 0.05j
    assert r(z) == pytest.approx(eval_f(BASE, LOR, z), abs=1e-15)
    h = 1e-6
    fd = (r.with_param("kappa", 0.1 + h)(z) - r.with_param("kappa", 0.1 - h)(z)) / (2 * h)
    assert r.d_kappa(z) == pytest.approx(fd, rel=1e-6)
    assert r.d_param("delta", z) == -1.0
    assert len(r.poles) == 4
