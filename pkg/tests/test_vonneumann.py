"""Generating-pattern symbol analysis of the block Jacobi iteration."""

import numpy as np
import pytest

from polydg.vonneumann import (PatternSymbol, SweepConfig, SymbolError,
                               check_admissible, closed_form_p0_eigs,
                               max_spectral_radius, paper_wave_coords,
                               ratio_table, timestep_family)

AREA = np.sqrt(3.0) / 4.0  # element area for h_E = 1


def test_admissibility_cones():
    check_admissible("square", 1.0, 1.0)
    check_admissible("hexagon", 1.0, 1.0)
    check_admissible("rtri", 1.0, 0.5)
    with pytest.raises(SymbolError):
        check_admissible("square", -0.1, 1.0)
    with pytest.raises(SymbolError):
        check_admissible("rtri", 0.5, 1.0)          # needs alpha >= beta
    with pytest.raises(SymbolError):
        check_admissible("hexagon", 0.2, 1.0)       # needs sqrt(3) a >= b


def test_timestep_family():
    assert timestep_family(AREA, "k1") == pytest.approx(3.0)
    assert timestep_family(AREA, "k2") == pytest.approx(6.0)
    assert timestep_family(AREA, "k3") == pytest.approx(12.0)


@pytest.mark.parametrize("kind,vel", [
    ("square", (1.0, 0.7)), ("hexagon", (1.0, 0.9)),
    ("rtri", (1.0, 0.4)), ("etri", (1.0, 0.8))])
def test_symbol_conjugate_symmetry(kind, vel):
    # L_hat(-phi) = conj(L_hat(phi)); the spectral radius is even in phase
    sym = PatternSymbol(kind, 1, AREA, vel)
    L1 = sym.l_hat_phases(0.8, -1.3)
    L2 = sym.l_hat_phases(-0.8, 1.3)
    assert np.max(np.abs(L1 - np.conj(L2))) < 1e-12
    r1 = sym.spectral_radius_phases(2.0, 0.8, -1.3)
    r2 = sym.spectral_radius_phases(2.0, -0.8, 1.3)
    assert r1 == pytest.approx(r2, rel=1e-10)


def test_zero_wavenumber_jacobi_symbol_matches_periodic_limit():
    sym = PatternSymbol("square", 0, AREA, (1.0, 0.5))
    R = sym.jacobi_symbol(2.0, 0.0, 0.0)
    lam = closed_form_p0_eigs("square", np.sqrt(AREA), 1.0, 0.5, 2.0, 0.0, 0.0)
    assert abs(R[0, 0] - lam[0]) < 1e-12


@pytest.mark.parametrize("kind", ["square", "hexagon", "rtri", "etri"])
def test_p0_closed_form_matches_symbol(kind):
    rng = np.random.default_rng(0)
    from polydg.mesh import h_E_from_area, pattern_side_length
    h = pattern_side_length(kind, h_E_from_area(AREA))
    for _ in range(5):
        th0, th1 = 0.05, {"square": 1.4, "hexagon": 0.9,
                          "rtri": 0.7, "etri": 0.9}[kind]
        th = rng.uniform(th0, th1)
        a, b = np.cos(th), np.sin(th)
        k = rng.uniform(0.5, 4.0)
        nx, ny = rng.uniform(-3.0, 3.0, 2)
        sym = PatternSymbol(kind, 0, AREA, (a, b))
        R = sym.jacobi_symbol(k, nx, ny)
        eigs = np.linalg.eigvals(R)
        wx, wy = paper_wave_coords(kind, AREA, nx, ny)
        closed = closed_form_p0_eigs(kind, h, a, b, k, wx, wy)
        for lam in closed:
            assert np.min(np.abs(eigs - lam)) < 1e-10


def test_single_pattern_ratio_is_one():
    cfg = SweepConfig(theta_samples=4, wave_samples=8, refine=False)
    tab = ratio_table([0], ["k1"], cfg, kinds=("square",))
    (lam, ratio), = tab.values()
    assert ratio == pytest.approx(1.0)
    assert 0.0 < lam < 1.0


def test_sweep_config_guards():
    with pytest.raises(SymbolError):
        max_spectral_radius("square", 0, 3.0, AREA,
                            SweepConfig(theta_samples=0))
    with pytest.raises(SymbolError):
        ratio_table([], ["k1"])


def test_quarter_pi_range_square_matches_per_pattern():
    # the square cone is [0, pi/2] but the peak is symmetric about pi/4,
    # so sweeping only [0, pi/4] must find the same maximum
    cfg_a = SweepConfig(theta_samples=9, wave_samples=16, refine=False)
    cfg_b = SweepConfig(theta_samples=9, wave_samples=16, refine=False,
                        theta_range="quarter-pi")
    ra = max_spectral_radius("square", 0, 3.0, AREA, cfg_a)
    rb = max_spectral_radius("square", 0, 3.0, AREA, cfg_b)
    assert rb <= ra + 1e-12
