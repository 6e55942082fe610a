import numpy as np
import pytest

from dicke2.exceptional import find_exceptional_g
from dicke2.oracle import oracle_spectrum
from dicke2.params import EPS_POLE, ModelParams, Parity
from dicke2.roots import (find_zeros, level_crossings, pole_grid, scan_zeros, singlet_levels,
                          sweep_spectrum)
from dicke2.series import g_function

P = ModelParams(0.5, 0.6)


def _locs(poles, kind):
    return [p.location for p in poles if p.kind == kind]


def test_pole_grid_even():
    poles = pole_grid(P, "even", (-0.36, 3.0))
    np.testing.assert_allclose(_locs(poles, "displaced"), [-0.36, 0.64, 1.64, 2.64], atol=1e-15)
    assert _locs(poles, "singlet") == [0.0, 2.0]


def test_pole_grid_odd():
    poles = pole_grid(P, "odd", (-0.36, 3.0))
    np.testing.assert_allclose(_locs(poles, "displaced"), [-0.36, 0.64, 1.64, 2.64], atol=1e-15)
    assert _locs(poles, "singlet") == [1.0, 3.0]


def test_pole_grid_keeps_coincident_kinds():
    poles = pole_grid(ModelParams(0.5, 1.0), "odd", (0.0, 1.0))
    at_one = [p.kind for p in poles if p.location == 1.0]
    assert sorted(at_one) == ["displaced", "singlet"]
    assert _locs(poles, "displaced") == [0.0, 1.0]


def test_empty_window_rejected():
    with pytest.raises(ValueError):
        pole_grid(P, "even", (1.0, 1.0))


def test_singlet_levels():
    assert singlet_levels(n_max=5) == [0, 1, 2, 3, 4, 5]
    assert singlet_levels((-0.3, 4.0)) == [0, 1, 2, 3, 4]


@pytest.mark.parametrize("parity", list(Parity))
def test_zeros_match_oracle(parity):
    zeros = find_zeros(P, parity, (-0.3, 4.0))
    oracle = oracle_spectrum(P, 100, (-0.3, 4.0), check_convergence=False).energies(parity)
    assert len(zeros) == len(oracle)
    np.testing.assert_allclose(zeros, oracle, atol=5e-7)


def test_zero_properties():
    scan = scan_zeros(P, "even", (-0.3, 4.0))
    poles = [p.location for p in pole_grid(P, "even", (-1.0, 5.0))]
    for root in scan.roots:
        E = root.energy
        assert min(abs(E - x) for x in poles) > EPS_POLE
        lo = g_function(P, "even", E - 1e-9).value
        hi = g_function(P, "even", E + 1e-9).value
        assert lo * hi < 0
    assert not scan.failures


@pytest.mark.parametrize("g", [0.2, 0.6])
@pytest.mark.parametrize("parity", list(Parity))
def test_refined_grid_adds_no_zeros(g, parity):
    params = ModelParams(0.5, g)
    window = (-g * g + 0.02, 5.0)
    coarse = find_zeros(params, parity, window, grid_step=0.01)
    fine = find_zeros(params, parity, window, grid_step=0.005)
    assert len(fine) == len(coarse)
    np.testing.assert_allclose(fine, coarse, atol=1e-9)


def test_window_bottom_is_raised():
    zeros = find_zeros(P, "even", (-5.0, 0.5))
    assert all(z > -P.g2 for z in zeros)


def test_single_point_sweep_equals_find_zeros():
    result = sweep_spectrum(0.5, [0.6], "odd", (-0.3, 4.0))
    assert result.points[0].energies == find_zeros(P, "odd", (-0.3, 4.0))
    assert result.singlets == [0, 1, 2, 3, 4]
    assert not result.failed


def test_sweep_labels_follow_levels():
    result = sweep_spectrum(0.5, [0.40, 0.41, 0.42], "even", (-0.3, 2.0))
    for label in result.labels():
        track = result.level(label)
        assert all(abs(e1 - e0) < 0.1 for (_, e0), (_, e1) in zip(track[:-1], track[1:]))


def test_sweep_records_point_errors():
    result = sweep_spectrum(0.5, [0.6, 0.7], "even", (3.0, 1.0))
    assert result.failed
    assert all(p.error for p in result.points)


def test_no_crossings_for_high_parabola():
    result = sweep_spectrum(0.5, [0.3, 0.4], "even", (-0.1, 1.5))
    assert level_crossings(result, 5) == []


def test_no_crossings_when_level_stays_above():
    result = sweep_spectrum(0.5, [0.3, 0.35, 0.4], "even", (1.5, 2.5))
    assert level_crossings(result, 1) == []


@pytest.mark.slow
def test_crossing_agrees_with_exceptional_point():
    result = sweep_spectrum(0.5, [0.90, 0.95, 1.00, 1.05], "even", (0.6, 1.5))
    crossings = level_crossings(result, 2)
    g_star = find_exceptional_g(0.5, "even", 2)[0].g_star
    assert len(crossings) == 1
    assert abs(crossings[0][0] - g_star) < 1e-5
