import numpy as np
import pytest

from resonance_atlas import continuation
from resonance_atlas.core import Label, lorentzian_squared, make_params
from resonance_atlas.discrete import dressed_eigenvalues
from resonance_atlas.errors import DomainError, NoConvergence, TrackingLost
from resonance_atlas.continuation import (
    Regime,
    classify,
    critical_coupling,
    regime_diagnose,
    resonance_pair,
    track,
    track_kappa_path,
    track_pair,
)
from resonance_atlas.resolvent import Resolvent
from resonance_atlas.rootfind import newton

LOR = lorentzian_squared()
BASE = make_params(0.1, 0.01, 0.25)
Z_AT = 1.2851163839076352 - 2.6879378295277172e-06j
Z_PH = 0.9630167809361904 - 0.0009806394839552977j


@pytest.fixture(scope="module")
def ep():
    return critical_coupling(0.01)


def test_narrow_peak_limit_matches_dressed_states():
    pair = dressed_eigenvalues(1, 0.1, 0.25)
    for z0, expected in ((Z_AT, pair.zeta_plus), (Z_PH, pair.zeta_minus)):
        traj = track(BASE, None, "mu", 1e-4, 40, z0, spacing="log")
        assert traj.params[-1] == pytest.approx(1e-4, rel=1e-12)
        assert abs(traj.end.zeta - expected) < 1e-3
        assert traj.continuity_ok


def test_reversal_returns_to_start():
    there = track(BASE, None, "delta", 0.3, 20, Z_AT)
    back = track(BASE.replace(delta=0.3), None, "delta", 0.25, 20, there.end)
    assert abs(back.end.zeta - Z_AT) < 1e-8


def test_trajectory_samples_are_ordered():
    traj = track(BASE, None, "delta", 0.2, 10, Z_PH)
    assert len(traj) >= 11
    assert np.all(np.diff(traj.params) < 0)
    for p, r in traj.samples:
        assert abs(Resolvent(LOR, BASE.replace(delta=p))(r.zeta)) < 1e-11


def test_start_must_be_a_zero():
    with pytest.raises(DomainError):
        track(BASE, None, "delta", 0.3, 10, 1.1 - 0.05j)


def test_unknown_variable_rejected():
    with pytest.raises(DomainError):
        track(BASE, None, "omega", 0.3, 10, Z_AT)


def test_bad_spacing_rejected():
    with pytest.raises(DomainError):
        track(BASE, None, "delta", -0.1, 10, Z_AT, spacing="log")


def test_lost_tracking_keeps_the_partial_trajectory(monkeypatch):
    def refusing(fn, seed, **kw):
        if fn.coupling > 0.15:
            raise NoConvergence("refused")
        return newton(fn, seed, **kw)

    monkeypatch.setattr(continuation, "newton", refusing)
    with pytest.raises(TrackingLost) as info:
        track(BASE, None, "kappa", 0.3, 10, Z_AT)
    partial = info.value.partial
    assert 0.14 < info.value.param <= 0.15
    assert partial.params[0] == 0.1 and not partial.continuity_ok
    assert len(partial) >= 3


def test_complex_detour_without_branch_point_agrees_with_real_path():
    direct = track(BASE, None, "kappa", 0.2, 20, Z_AT)
    detour = track_kappa_path(BASE, None, [0.1, 0.15 + 0.02j, 0.2], 40, Z_AT)
    assert abs(detour.end.zeta - direct.end.zeta) < 1e-9


def test_detour_must_start_at_params():
    with pytest.raises(DomainError):
        track_kappa_path(BASE, None, [0.2, 0.3], 10, Z_AT)


def test_track_pair_keeps_zeros_apart():
    a, b = track_pair(BASE, None, "delta", 0.1, 20, [Z_AT, Z_PH])
    assert len(a) == len(b)
    assert np.all(np.abs(a.zetas - b.zetas) > 1e-3)


def test_resonance_pair_at_base_point():
    pair = resonance_pair(BASE)
    assert {round(r.zeta.real, 3) for r in pair} == {1.285, 0.963}


def test_classification_at_base_point():
    assert classify(BASE, None, Z_AT) is Label.STANDARD
    label, limit = classify(BASE, None, Z_PH, return_limit=True)
    assert label is Label.NONSTANDARD
    # the photon-like zero ends up at the weight pole 1 - i mu
    assert abs(limit - (1 - 0.01j)) < 1e-3


def test_classification_below_ladder_floor():
    p = make_params(1e-6, 0.01, 0.25)
    z = newton(Resolvent(LOR, p), 1.25 - 1e-12j).zeta
    assert classify(p, None, z) is Label.STANDARD


def test_exceptional_point_conditions(ep):
    assert 2e-3 <= ep.kappa_c <= 4e-3
    assert abs(ep.delta_c) < 1e-3
    assert max(ep.condition_residuals) < 1e-10
    fn = Resolvent(LOR, make_params(ep.kappa_c, 0.01, ep.delta_c))
    assert abs(fn(ep.zeta_c)) < 1e-10
    assert abs(fn.derivative(ep.zeta_c)) < 1e-10


def test_zeros_merge_at_exceptional_point(ep):
    fn = Resolvent(LOR, make_params(ep.kappa_c, 0.01, ep.delta_c))
    found = [newton(fn, ep.zeta_c + s).zeta for s in (1e-3, -1e-3)]
    assert abs(found[0] - found[1]) < 1e-6


def test_critical_coupling_domain():
    with pytest.raises(DomainError):
        critical_coupling(0.0)


def test_regime_well_away_from_the_boundary():
    strong = regime_diagnose(make_params(0.01, 0.01, 0.0), steps=60)
    assert strong.regime is Regime.STRONG and strong.min_real_gap > 0
    weak = regime_diagnose(make_params(0.001, 0.01, 0.0), steps=60)
    assert weak.regime is Regime.WEAK and weak.crossing_delta is not None
