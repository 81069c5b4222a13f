"""Basis construction, kernels, and serialization.

Norm oracles are scipy.integrate.quad runs of the defining radial
integral, written out independently of the package quadrature:

    disk    ||z^k||^2 = 2*pi * int_0^1 2 r^(2k-1) u(r)^(p-2) dr,
            u(r) = -log r^2  (closed form 2*pi*(p-2)!/k^(p-1))
    sphere  ||z^k||^2 = 2*pi * int_0^inf 2 r^(2k+1) (1+r^2)^(-np-2) dr
            (closed form 2*pi / ((np+1) * C(np, k)))
"""

import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as hst
from scipy.integrate import quad

import secgeom.ensembles as ens
import secgeom.hilbert as hil
import secgeom.models as geo

TWO_PI = 2.0 * math.pi


def disk_norm_quad(p, k):
    val, err = quad(lambda r: 2.0 * r ** (2 * k - 1)
                    * (-math.log(r * r)) ** (p - 2), 0.0, 1.0, limit=200)
    return TWO_PI * val


def sphere_norm_quad(n, p, k):
    val, err = quad(lambda r: 2.0 * r ** (2 * k + 1)
                    * (1.0 + r * r) ** (-n * p - 2), 0.0, np.inf, limit=200)
    return TWO_PI * val


# ---------------------------------------------------------------------------
# norms and construction


def test_disk_norms_closed_form_examples(disk):
    b2 = hil.build_basis(disk, 2, truncation=10, working_radius=0.6)
    b3 = hil.build_basis(disk, 3, truncation=10, working_radius=0.6)
    norms2 = np.exp(b2.log_sq_norms)
    norms3 = np.exp(b3.log_sq_norms)
    assert norms2[0] == pytest.approx(TWO_PI, rel=1e-12)      # ||z^1||, p=2
    assert norms3[1] == pytest.approx(math.pi / 2, rel=1e-12)  # ||z^2||, p=3
    for k in (1, 4, 9):
        assert norms2[k - 1] == pytest.approx(disk_norm_quad(2, k), rel=1e-9)
        assert norms3[k - 1] == pytest.approx(disk_norm_quad(3, k), rel=1e-9)


def test_sphere_norms_scipy_oracle(sphere_basis_p6):
    b = sphere_basis_p6
    for k in (0, 2, 6):
        assert math.exp(b.log_sq_norms[k]) == pytest.approx(
            sphere_norm_quad(1, 6, k), rel=1e-10)


def test_cusped_norms_scipy_oracle(cusped_basis_p6, cusped):
    def integrand(r, p, k):
        lw = float(geo.log_frame_weight(cusped, np.array([complex(r)]))[0])
        dens = float(geo.volume_density(cusped, np.array([complex(r)]))[0])
        return r ** (2 * k) * math.exp(p * lw) * dens * r

    b = cusped_basis_p6
    rin, rout = cusped.blend_radii
    for j, k in ((0, 1), (2, 3), (5, 6)):
        inner, _ = quad(integrand, 0.0, rout, args=(6, k),
                        points=[rin], limit=400)
        outer, _ = quad(integrand, rout, np.inf, args=(6, k), limit=400)
        assert math.exp(b.log_sq_norms[j]) == pytest.approx(
            TWO_PI * (inner + outer), rel=1e-8)


def test_exponent_ranges(disk_basis_p4, sphere_basis_p6, cusped_basis_p6):
    assert disk_basis_p4.exponents[0] == 1 and disk_basis_p4.truncated
    assert list(sphere_basis_p6.exponents) == list(range(0, 7))
    assert list(cusped_basis_p6.exponents) == list(range(1, 7))


def test_build_rejects_small_p():
    with pytest.raises(ValueError):
        hil.build_basis(geo.punctured_disk(), 1, truncation=10)


def test_disk_requires_truncation(disk):
    with pytest.raises(ValueError):
        hil.build_basis(disk, 4)


def test_compact_models_reject_truncation(sphere):
    with pytest.raises(ValueError):
        hil.build_basis(sphere, 4, truncation=10)


def test_gram_identity(sphere_basis_p6, cusped_basis_p6, disk_basis_p4):
    for basis in (sphere_basis_p6, cusped_basis_p6, disk_basis_p4):
        assert hil.verify_gram(basis) < 1e-8


def test_dimension_check_sphere(sphere):
    b = hil.build_basis(sphere, 5)
    assert b.d_p == 6
    report = hil.dimension_check(hil.build_basis(sphere, 7))
    # compact control case: d_p = p+1 while the punctured-surface count
    # p*deg + chi would give p+2; the mismatch is real and reported
    assert report["d_p"] == 8
    assert not report["match"]


def test_dimension_check_cusped_slope(cusped):
    reports = [hil.dimension_check(hil.build_basis(cusped, p))
               for p in (4, 5)]
    slope = reports[1]["d_p"] - reports[0]["d_p"]
    assert abs(slope - reports[0]["deg_h"]) < 0.5


def test_dimension_check_rejects_truncated(disk_basis_p4):
    with pytest.raises(ValueError):
        hil.dimension_check(disk_basis_p4)


# ---------------------------------------------------------------------------
# evaluation


def test_evaluate_zero_section(sphere_basis_p6):
    value, h_norm = hil.evaluate_section(sphere_basis_p6,
                                         np.zeros(7, dtype=complex),
                                         0.3 + 0.1j)
    assert complex(value) == 0.0
    assert float(h_norm) == 0.0


def test_evaluate_one_hot(sphere_basis_p6):
    b = sphere_basis_p6
    c = np.zeros(b.d_p, dtype=complex)
    c[3] = 1.0
    z = 0.7 - 0.2j
    _, h_norm = hil.evaluate_section(b, c, z)
    t_jj = b.transform[3, 3]
    expected = abs(t_jj) * abs(z) ** 3 * geo.bundle_weight(b.model, z,
                                                           b.p) ** 0.5
    assert float(h_norm) == pytest.approx(expected, rel=1e-12)


@given(hst.complex_numbers(max_magnitude=5.0, allow_nan=False,
                           allow_infinity=False))
def test_evaluate_linearity(alpha):
    b = hil.build_basis(geo.fubini_study_sphere(1), 4)
    c = np.array([0.3, -1.2j, 0.5 + 0.1j, 0.0, 2.0], dtype=complex)
    z = 0.4 + 0.6j
    v1 = complex(hil.evaluate_section(b, c, z)[0])
    v2 = complex(hil.evaluate_section(b, alpha * c, z)[0])
    assert abs(v2 - alpha * v1) <= 1e-9 * max(1.0, abs(alpha * v1))


def test_evaluate_dimension_mismatch(sphere_basis_p6):
    with pytest.raises(ValueError):
        hil.evaluate_section(sphere_basis_p6, np.zeros(3, dtype=complex),
                             0.1 + 0.0j)


# ---------------------------------------------------------------------------
# kernels


def test_sphere_kernel_diagonal_exact(sphere_basis_p8):
    # rotation-invariant compact model: B_p(x,x) = (np+1)/(2*pi)
    b = sphere_basis_p8
    expected = (b.p + 1) / TWO_PI
    for z in (0.0 + 0.0j, 0.5 + 0.2j, 2.0 - 1.0j):
        assert float(hil.bergman_density(b, z)) == pytest.approx(
            expected, rel=1e-11)


def test_kernel_extremal_property(sphere_basis_p8, gaussian, seed):
    b = sphere_basis_p8
    c = ens.sample_block(gaussian, b.d_p, seed, b.p, range(20))
    x = 0.6 + 0.3j
    bx = float(hil.bergman_density(b, x))
    for i in range(20):
        h = float(hil.evaluate_section(b, c[i], x)[1])
        assert h * h <= bx * float(np.sum(np.abs(c[i]) ** 2)) * (1 + 1e-12)


def test_kernel_hermitian_symmetry(sphere_basis_p8):
    x, y = 0.4 + 0.2j, -0.7 + 0.9j
    kxy = hil.bergman_kernel(sphere_basis_p8, x, y).raw
    kyx = hil.bergman_kernel(sphere_basis_p8, y, x).raw
    assert abs(kxy - np.conj(kyx)) <= 1e-14 * abs(kxy)


def test_normalized_kernel_range(sphere_basis_p8):
    b = sphere_basis_p8
    assert hil.normalized_kernel(b, 0.3 + 0.1j, 0.3 + 0.1j) == pytest.approx(
        1.0, abs=1e-12)
    for y in (0.1 + 0.0j, 0.8 - 0.5j, 3.0 + 0.0j):
        v = hil.normalized_kernel(b, 0.3 + 0.1j, y)
        w = hil.normalized_kernel(b, y, 0.3 + 0.1j)
        assert 0.0 <= v <= 1.0 + 1e-10
        assert v == pytest.approx(w, rel=1e-11)


def test_kernel_monotone_under_truncation_growth(disk):
    x = 0.4
    b_small = hil.build_basis(disk, 4, truncation=40, working_radius=0.6)
    b_big = hil.build_basis(disk, 4, truncation=41, working_radius=0.6)
    assert float(hil.bergman_density(b_big, x)) >= float(
        hil.bergman_density(b_small, x))


def test_truncation_tail_guard(disk):
    b = hil.build_basis(disk, 4, truncation=30, working_radius=0.7)
    with pytest.raises(hil.TruncationError):
        hil.bergman_density(b, 0.9)  # outside the working radius


def test_near_diagonal_gaussian_regime(sphere):
    # at fixed scaled distance the kernel ratio approaches the Gaussian
    # falloff as p doubles
    devs = []
    for p in (16, 32, 64):
        b = hil.build_basis(sphere, p)
        t = 0.6 * math.sqrt(math.log(p) / p)
        rep = hil.near_diagonal_report(b, 0.0j, 0.0, [t], b=2.0)
        row = rep["rows"][0]
        assert row["in_regime"]
        devs.append(abs(row["ratio"] - 1.0))
    assert devs[2] < devs[0]
    assert devs[2] < 0.05


def test_near_diagonal_zero_distance(sphere_basis_p8):
    rep = hil.near_diagonal_report(sphere_basis_p8, 0.2 + 0.1j, 0.3,
                                   [0.0], b=3.0)
    assert rep["rows"][0]["ratio"] == pytest.approx(1.0, abs=1e-12)


def test_off_diagonal_decay_with_p(sphere):
    far = [1.2 + 0.0j, 0.0 + 2.0j, -1.5 + 1.5j]
    b32 = hil.build_basis(sphere, 32)
    b64 = hil.build_basis(sphere, 64)
    x = 0.0 + 0.0j
    for y in far:
        assert (hil.normalized_kernel(b64, x, y)
                < hil.normalized_kernel(b32, x, y))


def test_reproducing_property(sphere_basis_p6, gaussian, seed):
    b = sphere_basis_p6
    c = np.zeros(b.d_p, dtype=complex)
    c[2] = 1.0
    assert hil.reproducing_check(b, c, 0.4 + 0.2j) < 1e-6
    blocks = ens.sample_block(gaussian, b.d_p, seed, b.p, range(5))
    for i in range(5):
        res = hil.reproducing_check(b, blocks[i], -0.3 + 0.7j)
        assert res < 1e-6 * float(np.linalg.norm(blocks[i]))


# ---------------------------------------------------------------------------
# serialization


def test_json_round_trip_bit_exact(cusped_basis_p6):
    text = hil.basis_to_json(cusped_basis_p6)
    back = hil.basis_from_json(text)
    assert np.array_equal(back.log_sq_norms, cusped_basis_p6.log_sq_norms)
    assert np.array_equal(back.transform, cusped_basis_p6.transform)
    assert np.array_equal(back.exponents, cusped_basis_p6.exponents)
    assert hil.basis_to_json(back) == text


def test_json_complex_encoding(sphere_basis_p6):
    doc = json.loads(hil.basis_to_json(sphere_basis_p6))
    entry = doc["transform"][0][0]
    assert isinstance(entry, list) and len(entry) == 2


def test_json_round_trip_disk(disk_basis_p4):
    back = hil.basis_from_json(hil.basis_to_json(disk_basis_p4))
    assert back.truncated
    assert back.truncation_tail == disk_basis_p4.truncation_tail
    z = 0.33 - 0.21j
    c = np.linspace(0.1, 1.0, back.d_p).astype(complex)
    v1, h1 = hil.evaluate_section(back, c, z)
    v2, h2 = hil.evaluate_section(disk_basis_p4, c, z)
    assert complex(v1) == complex(v2)
    assert float(h1) == float(h2)
