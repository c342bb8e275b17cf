"""Sampler, heat kernel, and diffusion-operator checks.

Statistical assertions run at fixed seeds with 3-sigma tolerances; frozen
kernel values come from the independent composite Gauss-Legendre oracle in
this file (different substitution and node placement than the library).
"""

import math

import numpy as np
import pytest

from hyplyap.diffusion import (
    CheckReport,
    DiffusionError,
    LeafPath,
    RngStream,
    ScalarField,
    check_circle_vs_diffusion,
    check_dynkin,
    check_semigroup,
    circle_average,
    constant_field,
    diffuse,
    dist_field,
    dist_squared_field,
    exp_neg_dist_field,
    heat_kernel,
    heat_kernel_mass,
    real_part_field,
    sample_path,
    sample_polar_endpoints,
    smoothed_dist_field,
)
from hyplyap.hypgeo import DiscPoint, dist_P


# ----------------------------------------------------------------- oracle


def heat_kernel_oracle(rho, t, panels=400, order=24):
    """Second quadrature route: substitution v = sqrt(cosh s - cosh rho)
    on Gauss-Legendre panels with edges uniform in s."""
    cr = math.cosh(rho)
    s_max = math.sqrt(rho * rho + 400.0 * t + 400.0)
    s_edges = np.linspace(rho, s_max, panels + 1)
    v_edges = np.sqrt(np.maximum(np.cosh(s_edges) - cr, 0.0))
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for a, b in zip(v_edges[:-1], v_edges[1:]):
        if b <= a:
            continue
        v = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        w = 0.5 * (b - a) * weights
        s = np.arccosh(cr + v * v)
        jac = 2.0 / np.sqrt((cr + v * v) ** 2 - 1.0)
        total += np.sum(w * s * np.exp(-s * s / (4.0 * t)) * jac)
    pref = math.sqrt(2.0) * math.exp(-t / 4.0) / (8.0 * math.pi ** 1.5 * t ** 1.5)
    return pref * total


# ----------------------------------------------------------------- paths


def test_sample_path_reproducible():
    p1 = sample_path(DiscPoint.origin(), 2.0, 0.05, RngStream(42, 3))
    p2 = sample_path(DiscPoint.origin(), 2.0, 0.05, RngStream(42, 3))
    assert all(a.z == b.z for a, b in zip(p1.points, p2.points))
    p3 = sample_path(DiscPoint.origin(), 2.0, 0.05, RngStream(42, 4))
    assert any(a.z != b.z for a, b in zip(p1.points, p3.points))


def test_sample_path_zero_horizon():
    p = sample_path(DiscPoint(0.2, 0.1), 0.0, 0.05, RngStream(1))
    assert len(p.points) == 1
    assert p.points[0].z == 0.2 + 0.1j


def test_sample_path_rejects_bad_params():
    with pytest.raises(DiffusionError):
        sample_path(DiscPoint.origin(), 1.0, 0.06, RngStream(1))
    with pytest.raises(DiffusionError):
        sample_path(DiscPoint.origin(), math.inf, 0.05, RngStream(1))
    with pytest.raises(DiffusionError):
        sample_path(DiscPoint.origin(), 1.0, 0.0, RngStream(1))


def test_leafpath_invariants():
    pts = (DiscPoint.origin(), DiscPoint(0.1, 0.0))
    with pytest.raises(DiffusionError):
        LeafPath((0.0, 0.0), pts, 0.05)            # non-increasing times
    with pytest.raises(DiffusionError):
        LeafPath((0.5, 1.0), pts, 0.05)            # must start at 0
    with pytest.raises(DiffusionError):
        LeafPath((0.0,), pts, 0.05)                # length mismatch
    path = LeafPath((0.0, 0.05), pts, 0.05)
    assert path.end.z == 0.1


def test_subpath_shift():
    p = sample_path(DiscPoint.origin(), 1.0, 0.05, RngStream(9))
    tail = p.subpath(10, len(p.points) - 1)
    assert tail.times[0] == 0.0
    assert tail.points[0].z == p.points[10].z


def test_small_time_second_moment():
    # E[rho^2] = 4t for the generator Delta (not Delta/2)
    rho, _ = sample_polar_endpoints(10000, 0.01, 0.01, RngStream(5).generator())
    m = float(np.mean(rho[-1] ** 2))
    assert 0.038 <= m <= 0.042


def test_unit_drift_at_t20():
    rho, _ = sample_polar_endpoints(10000, 20.0, 0.05, RngStream(6).generator())
    ratio = float(np.mean(rho[-1]) / 20.0)
    assert 0.9 <= ratio <= 1.1


def test_drift_law_multi_horizon():
    # per-path ratio spread band (the mean carries an O(1)/t overshoot from
    # the early coth drift, far above the standard error of the mean)
    rho, _ = sample_polar_endpoints(
        10000, 40.0, 0.05, RngStream(7).generator(), checkpoints=[10.0, 20.0, 40.0]
    )
    for i, t in enumerate([10.0, 20.0, 40.0]):
        ratios = rho[i] / t
        spread = float(np.std(ratios, ddof=1))
        assert 1.0 - 3.0 * spread <= float(np.mean(ratios)) <= 1.0 + 3.0 * spread


def test_sample_path_agrees_with_polar_walker_in_law():
    # endpoint distance-squared of the scalar path builder vs the ensemble
    d2 = []
    for i in range(200):
        p = sample_path(DiscPoint.origin(), 2.0, 0.05, RngStream(30, i))
        d2.append(dist_P(DiscPoint.origin(), p.end) ** 2)
    rho, _ = sample_polar_endpoints(2000, 2.0, 0.05, RngStream(31).generator())
    a, b = np.mean(d2), np.mean(rho[-1] ** 2)
    se = math.hypot(np.std(d2, ddof=1) / math.sqrt(len(d2)),
                    np.std(rho[-1] ** 2, ddof=1) / math.sqrt(rho.shape[1]))
    assert abs(a - b) <= 3.0 * se


def test_polar_and_raw_walkers_agree_in_law():
    f = exp_neg_dist_field()
    rho, psi = sample_polar_endpoints(4000, 1.0, 0.01, RngStream(8).generator())
    polar_vals = f.values_polar(rho[-1], psi[-1])
    g = RngStream(9).generator()
    from hyplyap.diffusion import _disc_walk_endpoints

    zs = _disc_walk_endpoints(4000, 1.0, 0.01, g)
    raw_vals = f.values_disc(zs)
    se = math.hypot(
        np.std(polar_vals, ddof=1) / 63.2, np.std(raw_vals, ddof=1) / 63.2
    )
    assert abs(np.mean(polar_vals) - np.mean(raw_vals)) <= 3.0 * se


# ------------------------------------------------------------ heat kernel


def test_kernel_mass_conservation():
    for t in (0.25, 1.0, 4.0):
        assert 0.999 <= heat_kernel_mass(t) <= 1.001


def test_kernel_monotone_in_rho():
    vals = [heat_kernel(r, 1.0) for r in np.linspace(0.0, 6.0, 25)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert all(v > 0 for v in vals)


def test_kernel_frozen_oracle_values():
    # frozen from heat_kernel_oracle before the main build
    assert heat_kernel(1.0, 1.0) == pytest.approx(0.041491183957822204, rel=1e-9)
    assert heat_kernel(0.5, 0.25) == pytest.approx(0.22363030933026712, rel=1e-9)
    assert heat_kernel(2.0, 4.0) == pytest.approx(0.0034467600529776536, rel=1e-9)


def test_kernel_matches_oracle_fresh():
    for rho, t in [(0.0, 0.5), (1.5, 1.0), (3.0, 2.0)]:
        assert heat_kernel(rho, t) == pytest.approx(
            heat_kernel_oracle(rho, t), rel=1e-8
        )


def test_kernel_near_diagonal_branch():
    # distances below 1e-6 collapse onto the exact rho = 0 evaluation
    assert heat_kernel(1e-9, 1.0) == heat_kernel(0.0, 1.0)


def test_kernel_rejects_bad_t():
    with pytest.raises(DiffusionError):
        heat_kernel(1.0, 0.0)
    with pytest.raises(DiffusionError):
        heat_kernel(1.0, -1.0)
    with pytest.raises(DiffusionError):
        heat_kernel(-0.5, 1.0)


# ---------------------------------------------------------------- diffuse


def test_diffuse_constant_exact():
    est, se = diffuse(constant_field(1.0), 2.0, 200, RngStream(10).generator())
    assert est == 1.0
    assert se == 0.0
    est0, _ = diffuse(constant_field(0.0), 1.0, 200, RngStream(10).generator())
    assert est0 == 0.0


def test_diffuse_odd_harmonic_vanishes():
    est, se = diffuse(real_part_field(), 1.0, 4000, RngStream(11).generator())
    assert abs(est) <= 3.0 * se


def test_diffuse_needs_samples():
    with pytest.raises(DiffusionError):
        diffuse(constant_field(1.0), 1.0, 50, RngStream(1).generator())


def test_diffuse_from_offset_start():
    # rotational symmetry: diffusion of dist from a point at radius 1 equals
    # the same run restarted at the rotated point
    f = smoothed_dist_field()
    a, _ = diffuse(f, 0.5, 2000, RngStream(12).generator(), start=(1.0, 0.0))
    b, _ = diffuse(f, 0.5, 2000, RngStream(12).generator(), start=(1.0, 2.0))
    assert a == pytest.approx(b, abs=1e-12)


# ------------------------------------------------------------- semigroup


def test_semigroup_constant():
    rep = check_semigroup(constant_field(2.5), 0.5, 0.5, 200, RngStream(13))
    assert rep.lhs == pytest.approx(2.5, abs=1e-12)
    assert rep.rhs == pytest.approx(2.5, abs=1e-12)
    assert rep.passed


def test_semigroup_exp_dist():
    rep = check_semigroup(exp_neg_dist_field(), 0.5, 0.5, 800, RngStream(14))
    assert rep.passed, str(rep)


def test_semigroup_odd_harmonic():
    rep = check_semigroup(real_part_field(), 1.0, 1.0, 800, RngStream(15))
    assert rep.passed, str(rep)
    assert abs(rep.lhs) <= 3.0 * rep.lhs_se + 1e-12


def test_semigroup_without_polar_form():
    # exercise the raw-coordinate nested walker
    base = exp_neg_dist_field()
    raw_only = ScalarField(fn=base.fn, name="exp(-dist)_raw")
    rep = check_semigroup(raw_only, 0.5, 0.5, 600, RngStream(15))
    assert rep.passed, str(rep)


# ----------------------------------------------------------------- dynkin


def test_dynkin_constant():
    rep = check_dynkin(constant_field(3.0), 1.0, 200, RngStream(16))
    assert rep.lhs == pytest.approx(0.0, abs=1e-12)
    assert rep.rhs == pytest.approx(0.0, abs=1e-12)
    assert rep.passed


def test_dynkin_harmonic_bounded():
    rep = check_dynkin(real_part_field(), 1.0, 800, RngStream(17))
    assert rep.passed, str(rep)


def test_dynkin_dist_squared_analytic():
    rep = check_dynkin(dist_squared_field(), 1.0, 1500, RngStream(18))
    assert rep.passed, str(rep)


def test_dynkin_with_finite_difference_laplacian():
    # drop the analytic Laplacian: the 5-point stencil must carry the check
    base = dist_squared_field()
    fd_only = ScalarField(fn=base.fn, polar_fn=base.polar_fn, name="dist^2_fd")
    rep = check_dynkin(fd_only, 1.0, 1200, RngStream(19))
    assert rep.passed, str(rep)


def test_dynkin_requires_laplacian_when_fd_disabled():
    f = ScalarField(fn=lambda p: p.re * p.im)
    with pytest.raises(DiffusionError):
        check_dynkin(f, 1.0, 200, RngStream(20), allow_fd=False)


def test_fd_laplacian_matches_analytic():
    rng = np.random.default_rng(21)
    fields = [dist_squared_field(), smoothed_dist_field()]
    for f in fields:
        for _ in range(100):
            r = 0.8 * math.sqrt(rng.random())
            phi = 2.0 * math.pi * rng.random()
            p = DiscPoint(r * math.cos(phi), r * math.sin(phi))
            exact = f.laplacian(p)
            approx = f.fd_laplacian(p)
            assert approx == pytest.approx(exact, rel=1e-4, abs=1e-6)


# --------------------------------------------------------- circle average


def test_circle_average_constant():
    assert circle_average(constant_field(4.2), 2.0, 64) == pytest.approx(4.2, abs=1e-14)


def test_circle_average_odd_harmonic_exact_zero():
    assert circle_average(real_part_field(), 1.5, 64) == pytest.approx(0.0, abs=1e-14)


def test_circle_average_radial_field():
    assert circle_average(dist_field(), 3.0, 64) == pytest.approx(3.0, abs=1e-9)


def test_circle_average_needs_dirs():
    with pytest.raises(DiffusionError):
        circle_average(constant_field(1.0), 1.0, 4)


# ------------------------------------------------- circle vs diffusion fit


def test_circle_vs_diffusion_constant():
    rep = check_circle_vs_diffusion(
        constant_field(1.0), [4.0, 8.0, 16.0, 32.0], 400, RngStream(22)
    )
    assert max(rep.errors) <= 1e-12
    assert rep.passed


def test_circle_vs_diffusion_needs_radii():
    with pytest.raises(DiffusionError):
        check_circle_vs_diffusion(constant_field(1.0), [4.0, 8.0], 400, RngStream(23))


def oracle_slope(xs, ys):
    # independent least-squares slope (normal equations, no polyfit)
    lx, ly = np.log(xs), np.log(np.maximum(ys, 1e-15))
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))


def test_circle_vs_diffusion_smoothed_dist():
    rep = check_circle_vs_diffusion(
        smoothed_dist_field(), [4.0, 8.0, 16.0, 32.0], 3000, RngStream(24)
    )
    assert rep.passed, str(rep)
    assert rep.slope == pytest.approx(
        oracle_slope(np.array(rep.abscissae), np.array(rep.errors)), abs=1e-9
    )
