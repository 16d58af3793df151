import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heisenberg_wave.littlewood_paley import (DyadicProfile, LPKernel, OperatorTag, bernstein_check, build_profile,
                                              l1_norm, lp_symbol, overlap_window, project, symbol_overlap)
from heisenberg_wave.spectral_core import GroupParams, SpectralSymbol, evaluate, plancherel_norm


def partition_sum(profile, tau):
    return sum(profile(2.0 ** (-2 * j) * tau) for j in range(-40, 41))


# --- the profile -------------------------------------------------------------

def test_profile_support(profile):
    assert profile(0.2) == 0.0
    assert profile(4.1) == 0.0
    assert profile(0.25) == 0.0 and profile(4.0) == 0.0


@pytest.mark.parametrize("tau", [1e-3, 1.0, 7.0, 1e3])
def test_partition_of_unity_spot_values(profile, tau):
    assert abs(partition_sum(profile, tau) - 1.0) <= 1e-12


@given(u=st.floats(-10.0, 10.0), sharpness=st.floats(0.3, 3.0))
def test_partition_of_unity_and_positivity(u, sharpness):
    prof = build_profile(sharpness)
    tau = 10.0**u
    assert abs(partition_sum(prof, tau) - 1.0) <= 1e-12
    assert prof(tau) >= 0.0


def test_two_translates_at_one(profile):
    # only j = 0 and j = -1 can be nonzero at tau = 1, and R(4) sits on the support edge
    assert profile(1.0) + profile(4.0) == pytest.approx(1.0, abs=1e-15)


@given(tau=st.floats(0.26, 3.9))
def test_profile_derivative_matches_differences(tau):
    prof = DyadicProfile()
    h = 1e-6 * tau
    fd = (prof(tau + h) - prof(tau - h)) / (2 * h)
    assert prof.derivative(tau) == pytest.approx(fd, abs=1e-6)


def test_profile_rejects_bad_sharpness():
    with pytest.raises(ValueError):
        build_profile(0.0)


# --- symbol supports ---------------------------------------------------------

@pytest.mark.parametrize("m", [0, 1, 5, 40])
def test_kohn_band_at_scale_zero(params, profile, m):
    M = 2 * m + 1
    sym = lp_symbol(OperatorTag.KOHN, 0, profile, params)
    lo, hi = sym.lambda_support(m)
    assert lo == pytest.approx(1 / (16 * M), rel=1e-15)
    assert hi == pytest.approx(1 / M, rel=1e-15)
    inside = np.linspace(lo, hi, 50)[1:-1]
    outside = np.concatenate([np.linspace(0.1 * lo, lo, 10), np.linspace(hi, 3 * hi, 10)])
    assert np.all(sym.value(np.full(inside.size, m), inside).real > 0)
    assert np.all(sym.value(np.full(outside.size, m), outside) == 0)


def test_full_band_lowest_mode(params, profile):
    sym = lp_symbol(OperatorTag.FULL, 0, profile, params)
    lo, hi = sym.lambda_support(0)
    assert lo == pytest.approx(0.0615528128088303, rel=1e-13)  # sqrt(4 + 1/4) - 2
    assert hi == pytest.approx(0.8284271247461903, rel=1e-13)  # sqrt(8) - 2


@given(j=st.integers(-4, 4), m=st.integers(0, 50), lam=st.floats(-300, 300).filter(lambda x: x != 0))
def test_full_symbol_vanishes_off_band(j, m, lam):
    prof = DyadicProfile()
    params = GroupParams(1)
    xi = 4 * (2 * m + 1) * abs(lam) + lam * lam
    val = lp_symbol(OperatorTag.FULL, j, prof, params).value(m, lam)
    if not 2.0 ** (2 * j - 2) <= xi <= 2.0 ** (2 * j + 2):
        assert val == 0
    assert 0 <= val.real <= 1


# --- homogeneity -------------------------------------------------------------

@pytest.mark.parametrize("j", [-2, -1, 1, 2])
def test_kohn_kernel_dilation(params, profile, j):
    r0 = np.array([0.0, 0.4, 1.1, 2.0])
    s0 = np.array([0.0, 0.9, -3.0, 7.5])
    phi0 = lp_symbol(OperatorTag.KOHN, 0, profile, params)
    phij = lp_symbol(OperatorTag.KOHN, j, profile, params)
    base = evaluate(phi0, r0, s0, dlam=phi0.lam_max / 8000)
    scaled = evaluate(phij, r0 * 2.0**-j, s0 * 4.0**-j, dlam=phij.lam_max / 8000)
    assert np.max(np.abs(scaled - 2.0 ** (params.N * j) * base)) <= 1e-6 * 2.0 ** (params.N * j) * np.max(np.abs(base))


def test_full_kernel_is_real(params, profile):
    sym = lp_symbol(OperatorTag.FULL, 1, profile, params)
    vals = evaluate(sym, np.array([0.0, 0.3, 1.0]), np.array([0.0, 0.5, -2.0]))
    assert np.max(np.abs(vals.imag)) < 1e-9 * np.max(np.abs(vals))


# --- projections and overlaps --------------------------------------------------

def _mode_lam_grid(sym_max, count=400, modes=60):
    lam = np.linspace(-sym_max, sym_max, count)
    lam = lam[lam != 0]
    m = np.arange(modes)
    return np.meshgrid(m, lam, indexing="ij")


@pytest.mark.parametrize("j,k", [(0, 2), (0, -2), (1, 4), (-3, 0)])
def test_distant_full_blocks_annihilate(params, profile, j, k):
    prod = project(lp_symbol(OperatorTag.FULL, j, profile, params), OperatorTag.FULL, k, profile)
    m, lam = _mode_lam_grid(max(2.0 ** (j + 2), 2.0 ** (k + 2)))
    assert np.all(prod.value(m, lam) == 0)


def test_projection_of_zero(params, profile):
    z = project(SpectralSymbol.zero(params), OperatorTag.FULL, 0, profile)
    assert plancherel_norm(z) == 0.0


def test_blocks_reconstruct(params, profile):
    u = lp_symbol(OperatorTag.FULL, 0, profile, params).add(lp_symbol(OperatorTag.FULL, 3, profile, params))
    # pointwise on the spectrum, which is stronger than the Plancherel statement
    m, lam = _mode_lam_grid(40.0, count=1201, modes=80)
    target = u.value(m, lam)
    pieces = [project(u, OperatorTag.FULL, k, profile).value(m, lam) for k in range(-3, 7)]
    assert np.max(np.abs(sum(pieces) - target)) <= 1e-12
    live = np.abs(target) > 1e-3
    energy = sum(np.abs(p) ** 2 for p in pieces)[live] / np.abs(target[live]) ** 2
    assert energy.min() >= 0.5 - 1e-12 and energy.max() <= 1.0 + 1e-12


@pytest.mark.parametrize("j", range(-5, 6))
def test_overlap_window_lower_end(params, j):
    # the k = j - 2 band only touches phi_j at an endpoint where the profile vanishes
    assert min(overlap_window(j, params)) == j - 1


def test_overlap_window_at_zero(params):
    # 2^{2k-2} < 4 + 16/16 stops the window at k = 2
    assert overlap_window(0, params) == [-1, 0, 1, 2]
    assert overlap_window(3, params) == [2, 3, 4, 5, 6, 7]
    assert overlap_window(3, GroupParams(2)) == [2, 3, 4, 5, 6]


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("j", [-4, -1, 0, 2, 5])
def test_symbol_overlap_matches_window(n, j):
    params = GroupParams(n)
    found = [k for k in range(j - 6, 2 * j + 10) if symbol_overlap(j, k, params)]
    assert found == overlap_window(j, params)


@pytest.mark.parametrize("j", [0, 2])
def test_kohn_full_products_vanish_below_window(params, profile, j):
    prod = lp_symbol(OperatorTag.KOHN, j, profile, params).multiply(lp_symbol(OperatorTag.FULL, j - 3, profile, params))
    assert plancherel_norm(prod) <= 1e-9


# --- Bernstein ratios and L1 -----------------------------------------------------

def test_bernstein_trivial_exponent(params, profile):
    u = lp_symbol(OperatorTag.FULL, 1, profile, params)
    assert bernstein_check(u, OperatorTag.FULL, 1, 0.0, profile) == 1.0


@pytest.mark.parametrize("j", range(-3, 4))
@pytest.mark.parametrize("sigma", [1.0, -1.0])
def test_bernstein_ratio_full_scale(params, profile, j, sigma):
    u = lp_symbol(OperatorTag.FULL, j, profile, params)
    ratio = bernstein_check(u, OperatorTag.FULL, j, sigma, profile)
    assert 0.5 <= ratio <= 2.0


def test_l1_norm_of_zero_kernel(params, profile):
    r = np.linspace(0, 4, 33)
    s = np.linspace(-8, 8, 65)
    k = LPKernel(OperatorTag.FULL, 0, SpectralSymbol.zero(params), profile, r, s,
                 np.full(r.size, r[1] - r[0]), np.full(s.size, s[1] - s[0]))
    assert l1_norm(k) == 0.0


def test_operator_tag_parse():
    assert OperatorTag.parse("KOHN") is OperatorTag.KOHN
    with pytest.raises(ValueError):
        OperatorTag.parse("laplace")
    assert math.isclose(DyadicProfile().support[1], 4.0)
