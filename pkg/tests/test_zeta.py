"""Zeta continuation: residues, Mellin values, shifted values/derivatives,
their oracles, and the convergent K-series corrections."""

from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from conetorsion.crosssection import build_cross_section, coclosed_spectrum
from conetorsion.errors import CutoffInsufficientError, ZetaPoleError
from conetorsion.firstorder import first_order_shifted
from conetorsion import zeta


def test_residues_unit_t2(t2_slices):
    res = zeta.zeta_residues(t2_slices[0])
    assert set(res) == {1}
    assert res[1] == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-14)
    # residues at odd s vanish identically on even-dimensional N
    ms = zeta.mellin_split(t2_slices[0])
    assert ms.residue_s(1) == 0.0
    assert ms.residue_s(3) == 0.0


def test_residue_volume_scaling():
    big = build_cross_section(
        {
            "family": "flat_torus",
            "dim_n": 2,
            "lattice_basis": [[2 * math.pi, 0], [0, 2 * math.pi]],
        }
    )
    sl = coclosed_spectrum(big, 0, zeta.cutoff_for_tolerance(big, 0, 1e-10))
    assert zeta.zeta_residues(sl)[1] == pytest.approx(2.0 * math.pi, rel=1e-14)


def test_zeta_mellin_large_s_vs_direct(unit_t2):
    sl = coclosed_spectrum(unit_t2, 0, 500000.0)
    nu = sl.nu()
    for s in (6.0, 8.0, 9.5):
        direct = float(np.sum(sl.mult * nu**-s))
        assert zeta.zeta_mellin(sl, s) == pytest.approx(direct, abs=1e-10)


def _epstein_z(s: float) -> float:
    """Z(s) = sum_{m != 0} |m|^{-s} over Z^2, via 4 zeta(s/2) beta(s/2)."""
    mpmath.mp.dps = 30
    half = mpmath.mpf(s) / 2
    beta = 4**-half * (mpmath.zeta(half, mpmath.mpf(1) / 4) - mpmath.zeta(half, mpmath.mpf(3) / 4))
    return float(4 * mpmath.zeta(half) * beta)


def test_zeta_mellin_s1_vs_epstein_acceleration(t2_slices):
    """Independent acceleration oracle at the odd non-pole point s = 1:
    subtract the large-|m| expansion of nu^{-1} term by term and restore the
    subtracted pieces from the Epstein zeta closed form 4 zeta beta."""
    r_max = 60
    grid = np.arange(-r_max, r_max + 1)
    mx, my = np.meshgrid(grid, grid, indexing="ij")
    q = (mx**2 + my**2).astype(float).ravel()
    q = q[q > 0]
    q = q[q <= r_max**2]  # complete ball
    c1 = 1.0 / (2.0 * math.pi)
    c2 = -1.0 / (64.0 * math.pi**3)
    c3 = 3.0 / (4096.0 * math.pi**5)
    c4 = -5.0 / (131072.0 * math.pi**7)
    f = (4.0 * math.pi**2 * q + 0.25) ** -0.5
    model = c1 * q**-0.5 + c2 * q**-1.5 + c3 * q**-2.5 + c4 * q**-3.5
    accelerated = float(np.sum(f - model))
    accelerated += c1 * _epstein_z(1.0) + c2 * _epstein_z(3.0)
    accelerated += c3 * _epstein_z(5.0) + c4 * _epstein_z(7.0)
    assert zeta.zeta_mellin(t2_slices[0], 1.0) == pytest.approx(accelerated, abs=1e-9)


def test_pole_behavior(t2_slices):
    sl = t2_slices[0]
    with pytest.raises(ZetaPoleError):
        zeta.zeta_mellin(sl, 2.0)
    pp = zeta.zeta_mellin(sl, 2.0, pp=True)
    assert math.isfinite(pp)
    # (s - 2) zeta(s) -> residue: two-sided evaluation at s = 2 +- 1e-4
    res = zeta.zeta_residues(sl)[1]
    h = 1e-4
    left = zeta.zeta_mellin(sl, 2.0 - h)
    right = zeta.zeta_mellin(sl, 2.0 + h)
    approx = 0.5 * (h * right + (-h) * left)
    assert abs(approx - res) / res <= 1e-6


def test_zeta0_values(t2_slices):
    z0_expected = -1.0 / (16.0 * math.pi) - 1.0
    for k in (0, 1):
        z0, _ = zeta.zeta0_and_prime0(t2_slices[k])
        # identical slices by duality: the same value in both degrees (the
        # harmonic subtraction is the per-point multiplicity, not b_k)
        assert z0 == pytest.approx(z0_expected, rel=1e-13)


def test_zeta_prime0_vs_finite_difference(t2_slices):
    """Richardson-extrapolated central differences of zeta_mellin at s = +-h
    reproduce zeta'(0) to <= 1e-7."""
    sl = t2_slices[0]
    _, zp = zeta.zeta0_and_prime0(sl)

    def central(h):
        return (zeta.zeta_mellin(sl, h) - zeta.zeta_mellin(sl, -h)) / (2.0 * h)

    h = 1e-3
    d1 = central(h)
    d2 = central(h / 2.0)
    richardson = (4.0 * d2 - d1) / 3.0
    assert abs(richardson - zp) <= 1e-7


def test_zeta_mellin_small_negative_s(t2_slices):
    """Just left of zero the continuation follows zeta(0) + zeta'(0) s, which
    is what legitimizes the central-difference oracle."""
    sl = t2_slices[0]
    z0, zp = zeta.zeta0_and_prime0(sl)
    for s in (-1e-3, -1e-4):
        assert zeta.zeta_mellin(sl, s) == pytest.approx(z0 + zp * s, abs=5e-7)
    from conetorsion.errors import DomainError

    with pytest.raises(DomainError):
        zeta.zeta_mellin(sl, -1.5)


def test_k_series_basics(t2_slices):
    sl = t2_slices[0]
    # alpha = 0: every term vanishes
    sl0 = sl.with_alpha(0.0)
    assert zeta.k_series(sl0, +1) == 0.0
    # sign symmetry: K(0, +a) on the alpha -> -alpha slice equals K(0, -a)
    flipped = sl.with_alpha(-sl.alpha)
    assert zeta.k_series(flipped, +1) == zeta.k_series(sl, -1)
    assert zeta.k_series(flipped, -1) == zeta.k_series(sl, +1)


def test_k_series_cutoff_doubling(unit_t2):
    base = zeta.cutoff_for_tolerance(unit_t2, 0, 1e-12)
    values = []
    for mult in (1, 4):
        sl = coclosed_spectrum(unit_t2, 0, base * mult)
        values.append(zeta.k_series(sl, +1))
    assert abs(values[0] - values[1]) <= 1e-9  # stabilizes to 9 digits


def test_k_series_cutoff_insufficient(unit_t2):
    sl = coclosed_spectrum(unit_t2, 0, 90.0)
    with pytest.raises(CutoffInsufficientError) as exc:
        zeta.k_series(sl, +1, order=2, tol=1e-10)
    assert exc.value.required_cutoff > sl.cutoff


def test_shifted_zeta0(t2_slices):
    sl = t2_slices[0]
    assert zeta.shifted_zeta0(sl, +1) == pytest.approx(-1.0, abs=1e-12)
    assert zeta.shifted_zeta0(sl, -1) == pytest.approx(-1.0, abs=1e-12)
    # alpha = 0 reduces to zeta(0)
    sl0 = sl.with_alpha(0.0)
    z0, _ = zeta.zeta0_and_prime0(sl0)
    assert zeta.shifted_zeta0(sl0, +1) == z0
    # sign difference vanishes on even-dimensional N (odd residues are zero)
    assert zeta.shifted_zeta0(sl, +1) - zeta.shifted_zeta0(sl, -1) == 0.0


def test_shifted_prime0_order_independence(t2_slices):
    sl = t2_slices[0]
    for sign in (+1, -1):
        v_n, _ = zeta.shifted_zeta_prime0(sl, sign, order=2)
        v_n2, _ = zeta.shifted_zeta_prime0(sl, sign, order=4)
        assert abs(v_n - v_n2) <= 1e-8
        # genuinely different numerical routes: direct K at different orders
        v8, _ = zeta.shifted_zeta_prime0(sl, sign, order=8)
        v10, _ = zeta.shifted_zeta_prime0(sl, sign, order=10)
        assert abs(v8 - v10) <= 1e-8
        assert abs(v_n - v8) <= 1e-8


def test_shifted_prime0_alpha_zero(t2_slices):
    sl0 = t2_slices[0].with_alpha(0.0)
    z0, zp = zeta.zeta0_and_prime0(sl0)
    v, _ = zeta.shifted_zeta_prime0(sl0, +1)
    assert v == zp


def test_first_order_oracle_theta_identity(t2_slices):
    """The subordinated small-time model plus remainder reproduces the direct
    first-order theta sum to machine precision."""
    fo = first_order_shifted(t2_slices[0], +1)
    for t in (0.4, 0.8, 1.0):
        sub = fo.theta(t)
        direct = fo.theta_direct(t)
        assert abs(sub - direct) <= 1e-12 * max(1.0, abs(direct))


def test_shifted_values_against_first_order_oracle(t2_slices):
    """Acceptance-grade check: zeta(0, +-a) and zeta'(0, +-a) from the
    production route agree with the independent first-order Mellin oracle."""
    for k in (0, 1):
        sl = t2_slices[k]
        for sign in (+1, -1):
            oracle = first_order_shifted(sl, sign)
            assert zeta.shifted_zeta0(sl, sign) == pytest.approx(oracle.zeta0(), abs=1e-9)
            v, _ = zeta.shifted_zeta_prime0(sl, sign)
            assert v == pytest.approx(oracle.zeta_prime0(), abs=1e-7)


def test_shifted_values_against_first_order_oracle_t4(unit_t4):
    """The dimension-generic oracle also seals the n = 4 layer, where the
    production route involves residues at s = 2 and s = 4 and PP values up to
    the subtraction order."""
    for k in (0, 1):
        sl = coclosed_spectrum(unit_t4, k, zeta.cutoff_for_tolerance(unit_t4, k, 1e-12))
        for sign in (+1, -1):
            oracle = first_order_shifted(sl, sign)
            assert zeta.shifted_zeta0(sl, sign) == pytest.approx(oracle.zeta0(), abs=1e-10)
            v, _ = zeta.shifted_zeta_prime0(sl, sign)
            assert v == pytest.approx(oracle.zeta_prime0(), abs=1e-9)


def test_shifted_values_oracle_shear_torus():
    """Non-rectangular lattice: nothing in the pipeline may assume a square
    Gram matrix."""
    shear = build_cross_section(
        {"family": "flat_torus", "dim_n": 2, "lattice_basis": [[1, 0.5], [0, 1]]}
    )
    sl = coclosed_spectrum(shear, 0, zeta.cutoff_for_tolerance(shear, 0, 1e-12))
    for sign in (+1, -1):
        oracle = first_order_shifted(sl, sign)
        assert zeta.shifted_zeta0(sl, sign) == pytest.approx(oracle.zeta0(), abs=1e-10)
        v, _ = zeta.shifted_zeta_prime0(sl, sign)
        assert v == pytest.approx(oracle.zeta_prime0(), abs=1e-10)


def test_zeta_eval_duality(t2_slices):
    """ZetaEval of slice k equals ZetaEval of slice n-1-k with the shifted
    fields swapped in sign, exactly on tori."""
    ev0 = zeta.build_zeta_eval(t2_slices[0])
    ev1 = zeta.build_zeta_eval(t2_slices[1])
    assert ev0.residues == ev1.residues
    assert ev0.zeta0 == ev1.zeta0
    assert ev0.zeta_prime0 == ev1.zeta_prime0
    assert ev0.pp_values == ev1.pp_values
    assert ev0.shifted0[+1] == ev1.shifted0[-1]
    assert ev0.shifted0[-1] == ev1.shifted0[+1]
    assert ev0.shifted_prime0[+1] == ev1.shifted_prime0[-1]
    assert ev0.shifted_prime0[-1] == ev1.shifted_prime0[+1]


def test_error_estimates_monotone(unit_t2):
    base = zeta.cutoff_for_tolerance(unit_t2, 0, 1e-10)
    ev1 = zeta.build_zeta_eval(coclosed_spectrum(unit_t2, 0, base))
    ev2 = zeta.build_zeta_eval(coclosed_spectrum(unit_t2, 0, 2 * base))
    for key in ev1.err:
        assert ev2.err[key] <= ev1.err[key] * (1 + 1e-12)


def test_residue_two_routes_agree(t2_slices, unit_t2):
    """Residues extracted from the Mellin A-series equal the closed heat-model
    formula used by the torsion assembly (internal consistency of the routes)."""
    from conetorsion.torsion import _residue_even_s

    ms = zeta.mellin_split(t2_slices[0])
    assert ms.residue_s(2) == pytest.approx(_residue_even_s(unit_t2, 0, 1), rel=1e-14)


def test_pp_values_match_plain_values_off_poles(t2_slices):
    sl = t2_slices[0]
    ms = zeta.mellin_split(sl)
    assert ms.pp_s(1)[0] == pytest.approx(zeta.zeta_mellin(sl, 1.0), rel=1e-12)
    for r in (3, 5):
        near = zeta.zeta_mellin(sl, r + 1e-7)
        assert ms.pp_s(r)[0] == pytest.approx(near, rel=1e-5)
