"""Root finding, counting oracles, divisor pairings, log-norm integrals."""

import math

import numpy as np
import pytest
import scipy.integrate

import secgeom.ensembles as ens
import secgeom.hilbert as hil
import secgeom.models as geo
import secgeom.zeros as zr

TWO_PI = 2.0 * math.pi


def section_with_monomials(basis, mono):
    """Section whose frame polynomial has the given ascending coeffs."""
    a = np.zeros(basis.max_exponent + 1, dtype=complex)
    a[:len(mono)] = mono
    if np.any(np.abs(a[np.setdiff1d(np.arange(len(a)), basis.exponents)])
              > 0):
        raise ValueError("monomial outside the basis exponent range")
    coeffs = a[basis.exponents] * np.exp(0.5 * basis.log_sq_norms)
    return hil.RandomSection(basis=basis, coeffs=coeffs)


def random_sections(basis, ensemble, seed, n, p=None):
    block = ens.sample_block(ensemble, basis.d_p, seed, p or basis.p,
                             range(n))
    return [hil.RandomSection(basis=basis, coeffs=block[i])
            for i in range(n)]


# ---------------------------------------------------------------------------
# root recovery on engineered polynomials

def test_origin_factor_and_simple_root(sphere_basis_p8):
    s = section_with_monomials(sphere_basis_p8, [0, 0, -0.5, 1.0])
    zs = zr.find_zeros(s)
    assert zs.roots == ((0j, 2), ((0.5 - 0j), 1))
    assert zs.degree == 8
    assert zs.order_at_infinity == 5
    assert zs.degree_accounted == 8
    assert zs.residual < 1e-12


def test_roots_of_unity_shell(sphere_basis_p8):
    a = 0.7 + 0.2j
    mono = np.zeros(9, dtype=complex)
    mono[0] = -a
    mono[8] = 1.0
    zs = zr.find_zeros(section_with_monomials(sphere_basis_p8, mono))
    assert zs.total_multiplicity == 8
    expected = a ** 0.125 * np.exp(2j * math.pi * np.arange(8) / 8.0)
    got = zs.locations[np.argsort(np.angle(zs.locations))]
    expected = expected[np.argsort(np.angle(expected))]
    assert np.max(np.abs(got - expected)) < 1e-10


def test_perturbed_multiple_root_counts(sphere_basis_p8):
    # an inexact triple root splits into a tight cluster of simple
    # roots; both counting oracles still see total multiplicity 3
    mono = np.polynomial.polynomial.polyfromroots([0.4, 0.4, 0.4])
    s = section_with_monomials(sphere_basis_p8, mono)
    zs = zr.find_zeros(s)
    disk = geo.ChartDisk(0.4 + 0j, 0.01)
    assert zr.count_zeros_in(zs, disk) == 3
    assert zr.argument_principle_count(s, disk) == 3
    assert np.max(np.abs(zs.locations - 0.4)) < 1e-4


def test_degree_bookkeeping_random(sphere_basis_p8, gaussian, seed):
    for s in random_sections(sphere_basis_p8, gaussian, seed, 50):
        zs = zr.find_zeros(s)
        assert zs.degree_accounted == 8
        assert zs.residual < 1e-7


def test_coefficient_scaling_invariance(sphere_basis_p8, gaussian, seed):
    (s,) = random_sections(sphere_basis_p8, gaussian, seed, 1)
    zs = zr.find_zeros(s)
    scaled = hil.RandomSection(basis=sphere_basis_p8,
                               coeffs=1e6j * s.coeffs)
    zs2 = zr.find_zeros(scaled)
    assert np.array_equal(zs.multiplicities, zs2.multiplicities)
    assert np.max(np.abs(zs.locations - zs2.locations)) < 1e-12


def test_degenerate_sections_rejected(sphere_basis_p8):
    zero = np.zeros(sphere_basis_p8.d_p, dtype=complex)
    with pytest.raises(zr.DegenerateSectionError):
        zr.find_zeros(hil.RandomSection(basis=sphere_basis_p8, coeffs=zero))


# ---------------------------------------------------------------------------
# counting

def test_count_regions(sphere_basis_p8):
    a = 0.7 + 0.2j
    mono = np.zeros(9, dtype=complex)
    mono[0] = -a
    mono[8] = 1.0
    zs = zr.find_zeros(section_with_monomials(sphere_basis_p8, mono))
    shell = abs(a) ** 0.125
    assert zr.count_zeros_in(zs, geo.ChartAnnulus(2.0, 3.0)) == 0
    assert zr.count_zeros_in(zs, geo.ChartDisk(0j, 2.0)) == 8
    inner = zr.count_zeros_in(zs, geo.ChartAnnulus(0.5, shell * 1.001))
    outer = zr.count_zeros_in(zs, geo.ChartAnnulus(shell * 1.001, 1.5))
    both = zr.count_zeros_in(zs, geo.ChartAnnulus(0.5, 1.5))
    assert inner + outer == both == 8


def test_boundary_guard_warns(sphere_basis_p8):
    s = section_with_monomials(sphere_basis_p8, [-0.5, 1.0])
    zs = zr.find_zeros(s)
    with pytest.warns(zr.BoundaryRootWarning):
        zr.count_zeros_in(zs, geo.ChartDisk(0j, 0.5))


def test_argument_principle_basics(sphere_basis_p8):
    cubic = section_with_monomials(sphere_basis_p8, [0, 0, 0, 1.0])
    assert zr.argument_principle_count(cubic,
                                       geo.ChartDisk(0j, 1.0)) == 3
    affine = section_with_monomials(sphere_basis_p8, [-2.0, 1.0])
    assert zr.argument_principle_count(affine,
                                       geo.ChartDisk(0j, 1.0)) == 0
    assert zr.argument_principle_count(affine,
                                       geo.ChartDisk(2j, 0.5)) == 0


def test_argument_principle_needs_clear_contour(sphere_basis_p8):
    s = section_with_monomials(sphere_basis_p8, [-1.0, 0.0, 1.0])
    with pytest.raises(zr.ContourError):
        zr.argument_principle_count(s, geo.ChartDisk(0j, 1.0),
                                    n_points=64)


def test_counting_oracles_agree(sphere_basis_p8, gaussian, seed):
    regions = [geo.ChartDisk(0j, 0.8), geo.ChartAnnulus(0.3, 1.7),
               geo.ChartDisk(0.5 + 0.5j, 0.6)]
    for s in random_sections(sphere_basis_p8, gaussian, seed, 20):
        zs = zr.find_zeros(s)
        for region in regions:
            assert (zr.count_zeros_in(zs, region)
                    == zr.argument_principle_count(s, region))


def test_winding_counts_batch():
    theta = np.arange(512) * (TWO_PI / 512)
    z = np.exp(1j * theta)
    values = np.stack([z ** 3, (z - 2.0), (z - 0.5) * (z + 0.3j)])
    counts, ok = zr.winding_counts_batch(values)
    assert counts.tolist() == [3, 0, 2]
    assert ok.all()
    # 250 phase turns over 512 samples is under-resolved: flagged, not
    # silently miscounted
    _, ok_coarse = zr.winding_counts_batch(np.stack([z ** 250]))
    assert not ok_coarse[0]


# ---------------------------------------------------------------------------
# vanishing order at the puncture

def test_vanishing_order_generic(disk_basis_p4, cusped_basis_p6, gaussian,
                                 seed):
    k0 = int(disk_basis_p4.exponents[0])
    for s in random_sections(disk_basis_p4, gaussian, seed, 30):
        assert zr.vanishing_order(s) == k0
    k0c = int(cusped_basis_p6.exponents[0])
    for s in random_sections(cusped_basis_p6, gaussian, seed, 30, p=6):
        assert zr.vanishing_order(s) == k0c


def test_vanishing_order_engineered(sphere_basis_p8):
    s = section_with_monomials(sphere_basis_p8, [0, 0, 0, 2.0, 1.0])
    assert zr.vanishing_order(s) == 3
    with pytest.raises(ValueError):
        zr.vanishing_order(s, puncture=0.5 + 0j)


# ---------------------------------------------------------------------------
# radial test functions

def test_test_function_shape():
    phi = zr.RadialTestFunction(0.2, 1.0, 0.15, amplitude=2.0)
    r = np.linspace(0.0, 1.2, 400)
    vals = phi.profile(r)
    assert np.all(vals >= 0.0)
    assert np.all(vals <= 2.0)
    plateau = (r > 0.36) & (r < 0.84)
    assert np.allclose(vals[plateau], 2.0)
    assert np.all(vals[(r < 0.2) | (r > 1.0)] == 0.0)
    assert phi.compact_support and phi.locally_constant_near_punctures
    assert not zr.RadialTestFunction(0.0, 1.0,
                                     0.1).locally_constant_near_punctures


def test_test_function_validation():
    with pytest.raises(ValueError):
        zr.RadialTestFunction(0.2, 0.5, 0.2)
    with pytest.raises(ValueError):
        zr.RadialTestFunction(-0.1, 1.0, 0.1)


def test_laplacian_matches_finite_differences():
    phi = zr.RadialTestFunction(0.2, 1.0, 0.15, amplitude=1.3)
    h = 1e-5
    for r in (0.26, 0.31, 0.5, 0.9, 0.97):
        lap_fd = ((phi.profile(r + h) - 2 * phi.profile(r)
                   + phi.profile(r - h)) / h ** 2
                  + (phi.profile(r + h) - phi.profile(r - h)) / (2 * h * r))
        assert zr.RadialTestFunction.laplacian(phi, r + 0j) == pytest.approx(
            lap_fd, abs=1e-4)


def test_laplacian_integrates_to_zero():
    # int Lap(phi) dA = 0 for compact support: int (r phi')' dr = 0
    phi = zr.RadialTestFunction(0.1, 0.8, 0.12)
    val, err = scipy.integrate.quad(
        lambda r: float(phi.laplacian(r + 0j)) * r, 0.05, 0.9, limit=200)
    assert abs(val) < 1e-10 + 10 * err


def test_constant_one_flags():
    one = zr.constant_one()
    assert one.locally_constant_near_punctures
    assert not one.compact_support
    assert np.all(one(np.array([0.1j, 5.0 + 0j])) == 1.0)
    assert np.all(one.laplacian(np.array([0.3 + 0j])) == 0.0)


# ---------------------------------------------------------------------------
# pairings

def test_pair_divisor_exact(sphere_basis_p8):
    a = 0.7 + 0.2j
    mono = np.zeros(9, dtype=complex)
    mono[0] = -a
    mono[8] = 1.0
    zs = zr.find_zeros(section_with_monomials(sphere_basis_p8, mono))
    phi = zr.RadialTestFunction(0.2, 2.0, 0.3, amplitude=1.7)
    shell = abs(a) ** 0.125
    expected = 8 * phi.profile(shell) / 8.0
    assert zr.pair_divisor(zs, phi, 8) == pytest.approx(expected, rel=1e-12)
    assert zr.pair_divisor(zs, phi.scaled(3.0), 8) == pytest.approx(
        3.0 * expected, rel=1e-12)
    assert zr.pair_divisor(zs, zr.constant_one(), 8) == pytest.approx(
        1.0, rel=1e-12)
    empty = zr.ZeroSet(locations=np.array([], dtype=complex),
                       multiplicities=np.array([], dtype=int),
                       residuals=np.array([]), degree=4,
                       order_at_infinity=4)
    assert zr.pair_divisor(empty, phi, 8) == 0.0


def test_poincare_lelong_identity(sphere_basis_p8, disk_basis_p4, gaussian,
                                  seed):
    phi = zr.RadialTestFunction(0.2, 1.2, 0.2)
    for s in random_sections(sphere_basis_p8, gaussian, seed, 3):
        assert zr.poincare_lelong_residual(s, phi) < 2e-3
    phi_d = zr.RadialTestFunction(0.1, 0.55, 0.1)
    for s in random_sections(disk_basis_p4, gaussian, seed, 3, p=4):
        assert zr.poincare_lelong_residual(s, phi_d) < 2e-3


def test_poincare_lelong_rootfree_support(sphere_basis_p8):
    # one-hot basis element: roots only at 0 and infinity, so the
    # root term vanishes and the two integrals must cancel
    coeffs = np.zeros(sphere_basis_p8.d_p, dtype=complex)
    coeffs[4] = 2.0
    s = hil.RandomSection(basis=sphere_basis_p8, coeffs=coeffs)
    phi = zr.RadialTestFunction(0.3, 1.0, 0.15)
    assert zr.poincare_lelong_residual(s, phi) < 1e-4


def test_poincare_lelong_guards(sphere_basis_p8, disk_basis_p4):
    s = section_with_monomials(sphere_basis_p8, [1.0])
    with pytest.raises(ValueError):
        zr.poincare_lelong_residual(s, zr.constant_one())
    coeffs = np.zeros(disk_basis_p4.d_p, dtype=complex)
    coeffs[0] = 1.0
    sd = hil.RandomSection(basis=disk_basis_p4, coeffs=coeffs)
    with pytest.raises(geo.DomainError):
        zr.poincare_lelong_residual(sd, zr.RadialTestFunction(0.0, 0.4,
                                                              0.05))


# ---------------------------------------------------------------------------
# log-norm integrals

def _one_hot(basis, j, amp=1.0):
    coeffs = np.zeros(basis.d_p, dtype=complex)
    coeffs[j] = amp
    return hil.RandomSection(basis=basis, coeffs=coeffs)


def test_log_norm_integral_radial_oracle(sphere_basis_p8):
    s = _one_hot(sphere_basis_p8, 0, amp=2.0)
    region = geo.ChartAnnulus(0.3, 1.1)
    val = zr.log_norm_integral(s, region, abs_tol=1e-8)
    c0 = math.log(2.0) - 0.5 * float(sphere_basis_p8.log_sq_norms[0])

    def f(r):
        logn = c0 - 4.0 * math.log1p(r * r)
        return abs(logn) * 2.0 / (1.0 + r * r) ** 2 * r

    oracle, err = scipy.integrate.quad(f, 0.3, 1.1, limit=200)
    assert val == pytest.approx(TWO_PI * oracle, rel=1e-6)


def test_log_norm_integral_cusp_zone_oracle(disk_basis_p4):
    s = _one_hot(disk_basis_p4, 2)
    region = geo.ChartAnnulus(0.01, 0.2)
    val = zr.log_norm_integral(s, region, abs_tol=1e-8)
    k = int(disk_basis_p4.exponents[2])
    c0 = -0.5 * float(disk_basis_p4.log_sq_norms[2])

    def f(r):
        logw = float(geo.log_frame_weight(disk_basis_p4.model, r + 0j))
        logn = c0 + k * math.log(r) + 2.0 * logw
        dens = float(geo.volume_density(disk_basis_p4.model, r + 0j))
        return abs(logn) * dens * r

    oracle, err = scipy.integrate.quad(f, 0.01, 0.2, limit=400)
    assert val == pytest.approx(TWO_PI * oracle, rel=1e-5)


def test_log_norm_integral_scaling_shift(sphere_basis_p8, gaussian, seed):
    (s,) = random_sections(sphere_basis_p8, gaussian, seed, 1)
    region = geo.ChartAnnulus(0.4, 0.9)
    area, _ = scipy.integrate.quad(
        lambda r: 2.0 / (1.0 + r * r) ** 2 * r * TWO_PI, 0.4, 0.9)
    base = zr.log_norm_integral(s, region, abs_tol=1e-4)
    alpha = 1e9
    big = hil.RandomSection(basis=sphere_basis_p8, coeffs=alpha * s.coeffs)
    shifted = zr.log_norm_integral(big, region, abs_tol=1e-4)
    assert abs(shifted - base) <= math.log(alpha) * area + 1e-3
    # for alpha large enough that log|s| > 0 across the region the
    # triangle inequality is tight
    assert shifted == pytest.approx(
        zr.log_norm_integral(hil.RandomSection(basis=sphere_basis_p8,
                                               coeffs=alpha ** 2
                                               * s.coeffs),
                             region, abs_tol=1e-4)
        - math.log(alpha) * area, rel=1e-3)


def test_log_norm_integral_rejects_puncture(disk_basis_p4):
    s = _one_hot(disk_basis_p4, 0)
    with pytest.raises(geo.DomainError):
        zr.log_norm_integral(s, geo.ChartDisk(0j, 0.3))
    with pytest.raises(geo.DomainError):
        zr.log_norm_integral(s, geo.ChartAnnulus(0.0, 0.3))
    with pytest.raises(geo.DomainError):
        zr.log_norm_integral(s, geo.ChartRectangle(0.1, 0.3, 0.1, 0.3))


def test_log_norm_integral_offcenter_disk(sphere_basis_p8, gaussian, seed):
    (s,) = random_sections(sphere_basis_p8, gaussian, seed, 1)
    v = zr.log_norm_integral(s, geo.ChartDisk(0.6 + 0.2j, 0.15),
                             abs_tol=1e-6)
    assert v >= 0.0 and np.isfinite(v)


# ---------------------------------------------------------------------------
# serialization

def test_zeroset_csv(sphere_basis_p8):
    zs = zr.find_zeros(section_with_monomials(sphere_basis_p8,
                                              [0, 0, -0.5, 1.0]))
    text = zs.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "re,im,multiplicity,residual"
    assert len(lines) == 1 + len(zs.locations)
    re0, im0, m0, res0 = lines[1].split(",")
    assert float(re0) == zs.locations[0].real
    assert float(im0) == zs.locations[0].imag
    assert int(m0) == zs.multiplicities[0]
    assert float(res0) == zs.residuals[0]
