import math

import numpy as np
import pytest

from softplex import (
    ConfigurationError,
    InputError,
    RegionSpec,
    UniformBox,
    estimate_mu,
    estimate_nu,
    estimate_phi,
    estimate_theta,
    predicted_moments,
    regime_check,
    retention_exponent,
    unit_ball_volume,
)
from softplex.constants import log_growth_quantity

UNIT_1D = UniformBox(lo=[0.0], hi=[1.0])
UNIT_2D = UniformBox(lo=[0.0, 0.0], hi=[1.0, 1.0])


def test_retention_exponent_examples():
    assert retention_exponent(k=1, l=1, j=1, i=1) == 2
    assert retention_exponent(k=2, l=2, j=2, i=1) == 5
    assert retention_exponent(k=2, l=2, j=2, i=2) == 2
    for i in (1, 2):
        # disjoint faces share no subfaces: exponents simply add
        assert retention_exponent(k=2, l=2, j=0, i=i) == 2 * math.comb(3, i + 1)


def test_retention_exponent_symmetry_and_sign():
    for k in range(5):
        for l in range(5):
            for j in range(min(k, l) + 2):
                for i in range(1, max(k, l) + 1):
                    value = retention_exponent(k, l, j, i)
                    assert value == retention_exponent(l, k, j, i)
                    assert value >= 0


def test_retention_exponent_validation():
    with pytest.raises(InputError):
        retention_exponent(k=-1, l=1, j=0, i=1)
    with pytest.raises(InputError):
        retention_exponent(k=1, l=1, j=3, i=1)
    with pytest.raises(InputError):
        retention_exponent(k=1, l=1, j=1, i=2)


def test_mu_k0_is_exact_region_mass():
    est = estimate_mu(0, 1, UNIT_1D, samples=100, seed=1)
    assert est.value == 1.0
    assert est.stderr == 0.0


def test_mu_k1_d1_uniform():
    # closed form: (1/2!) * int f^2 * len{|x| <= 1} = (1/2) * 1 * 2 = 1
    est = estimate_mu(1, 1, UNIT_1D, samples=100_000, seed=2)
    assert abs(est.value - 1.0) <= max(3.0 * est.stderr, 1e-12)


def test_mu_k1_d2_uniform_is_half_disk_area():
    # closed form: (1/2) * 1 * area of the unit disk = pi/2
    est = estimate_mu(1, 2, UNIT_2D, samples=100_000, seed=3)
    assert abs(est.value - math.pi / 2.0) <= max(3.0 * est.stderr, 1e-12)


def test_mu_k2_d1_uniform():
    # length of {(x1, x2) in [-1,1]^2 : |x1 - x2| <= 1} is 3, so mu = 3/6
    est = estimate_mu(2, 1, UNIT_1D, samples=400_000, seed=4)
    assert est.stderr > 0.0
    assert abs(est.value - 0.5) <= 3.0 * est.stderr


def test_nu_equals_mu_for_edges():
    a = estimate_mu(1, 2, UNIT_2D, samples=50_000, seed=5)
    b = estimate_nu(1, 2, UNIT_2D, samples=50_000, seed=6)
    assert a.value == pytest.approx(b.value, abs=1e-12)


def test_nu_strictly_below_mu_in_d2():
    mu = estimate_mu(2, 2, UNIT_2D, samples=400_000, seed=7)
    nu = estimate_nu(2, 2, UNIT_2D, samples=400_000, seed=8)
    joint = math.hypot(mu.stderr, nu.stderr)
    assert mu.value - nu.value > 3.0 * joint


def test_nu_equals_mu_in_d1():
    mu = estimate_mu(2, 1, UNIT_1D, samples=400_000, seed=9)
    nu = estimate_nu(2, 1, UNIT_1D, samples=400_000, seed=10)
    joint = math.hypot(mu.stderr, nu.stderr)
    assert abs(mu.value - nu.value) <= 3.0 * joint


def test_gaussian_density_outer_weighting():
    # mu_2 = (1/2) int f^2 * 2; for N(0, sigma^2) in d=1, int f^2 = 1/(2 sigma sqrt(pi))
    from softplex import GaussianIsotropic

    sigma = 0.7
    dens = GaussianIsotropic(mean=[0.0], sigma=sigma)
    est = estimate_mu(1, 1, dens, samples=400_000, seed=11)
    expect = 1.0 / (2.0 * sigma * math.sqrt(math.pi))
    assert abs(est.value - expect) <= 3.0 * est.stderr


def test_phi_single_shared_vertex_of_two_vertices():
    est = estimate_phi(0, 0, 1, 1, UNIT_1D, samples=100, seed=12)
    assert est.value == 1.0  # region mass; the inner integral is empty
    assert est.stderr == 0.0
    twin = estimate_theta(0, 0, 1, 1, UNIT_1D, samples=100, seed=12)
    assert twin.value == 1.0 and twin.stderr == 0.0


def test_phi_full_overlap_identity_with_mu():
    # a pair with all vertices shared is a single face
    mu = estimate_mu(2, 2, UNIT_2D, samples=300_000, seed=13)
    phi = estimate_phi(2, 2, 3, 2, UNIT_2D, samples=300_000, seed=14)
    joint = math.hypot(mu.stderr, phi.stderr)
    assert abs(mu.value - phi.value) <= 3.0 * joint


def test_theta_full_overlap_identity_with_nu():
    nu = estimate_nu(2, 2, UNIT_2D, samples=300_000, seed=15)
    theta = estimate_theta(2, 2, 3, 2, UNIT_2D, samples=300_000, seed=16)
    joint = math.hypot(nu.stderr, theta.stderr)
    assert abs(nu.value - theta.value) <= 3.0 * joint


def _phi_quadrature_oracle_d1(k, l, j, cells=801):
    """Dense midpoint quadrature for the two-clique indicator in d=1."""
    m = k + l + 1 - j
    grid = np.linspace(-1.0, 1.0, cells + 1)
    mid = 0.5 * (grid[1:] + grid[:-1])
    step = grid[1] - grid[0]
    meshes = np.meshgrid(*([mid] * m), indexing="ij")
    coords = np.stack([mesh.ravel() for mesh in meshes], axis=1)
    full = np.concatenate([np.zeros((coords.shape[0], 1)), coords], axis=1)
    first = full[:, : k + 1]
    second = np.concatenate([full[:, :j], full[:, k + 1:]], axis=1)

    def clique(block):
        ok = np.ones(block.shape[0], dtype=bool)
        for a in range(block.shape[1]):
            for b in range(a + 1, block.shape[1]):
                ok &= np.abs(block[:, a] - block[:, b]) <= 1.0
        return ok

    integral = float((clique(first) & clique(second)).sum()) * step**m
    return integral / (
        math.factorial(j) * math.factorial(k + 1 - j) * math.factorial(l + 1 - j)
    )


def test_phi_111_matches_quadrature_oracle():
    oracle = _phi_quadrature_oracle_d1(1, 1, 1)
    est = estimate_phi(1, 1, 1, 1, UNIT_1D, samples=200_000, seed=17)
    assert abs(est.value - oracle) <= 0.01 * oracle


def test_phi_212_matches_quadrature_oracle():
    oracle = _phi_quadrature_oracle_d1(2, 1, 2, cells=1201)
    est = estimate_phi(2, 1, 2, 1, UNIT_1D, samples=400_000, seed=18)
    assert abs(est.value - oracle) <= max(0.01 * oracle, 3.0 * est.stderr)


def test_theta_111_matches_quadrature_oracle():
    # pairs only: the ball condition coincides with the pairwise condition
    oracle = _phi_quadrature_oracle_d1(1, 1, 1)
    est = estimate_theta(1, 1, 1, 1, UNIT_1D, samples=200_000, seed=19)
    assert abs(est.value - oracle) <= 0.01 * oracle


def test_phi_validates_overlap():
    with pytest.raises(InputError):
        estimate_phi(1, 1, 0, 1, UNIT_1D, samples=10, seed=1)
    with pytest.raises(InputError):
        estimate_phi(1, 1, 3, 1, UNIT_1D, samples=10, seed=1)


def test_predicted_moments_examples():
    n, d = 10_000.0, 1
    r = n ** (-1.1)
    mu2 = estimate_mu(1, 1, UNIT_1D, samples=1000, seed=20)
    mu0 = estimate_mu(0, 1, UNIT_1D, samples=1000, seed=21)
    pred = predicted_moments(n, r, d, (1.0,), k=1, constants=[mu2])
    assert pred.mean == pytest.approx(n * n * r, rel=1e-9)
    zero = predicted_moments(n, r, d, (0.0,), k=1, constants=[mu2])
    assert zero.mean == 0.0 and zero.variance == 0.0
    vertex = predicted_moments(n, r, d, (1.0,), k=0, constants=[mu0])
    assert vertex.variance == pytest.approx(n)  # Poisson vertex count


def test_predicted_moments_covariance_term():
    n, d, r = 1000.0, 1, 1e-4
    mu2 = estimate_mu(1, 1, UNIT_1D, samples=1000, seed=22)
    phi1 = estimate_phi(1, 1, 1, 1, UNIT_1D, samples=1000, seed=23)
    phi2 = estimate_phi(1, 1, 2, 1, UNIT_1D, samples=1000, seed=24)
    pred = predicted_moments(n, r, d, (0.5,), k=1, l=1, constants=[mu2, phi1, phi2])
    expect = 0.5**2 * n**3 * r**2 * phi1.value + 0.5 * n**2 * r * phi2.value
    assert pred.covariance == pytest.approx(expect, rel=1e-9)
    with pytest.raises(ConfigurationError):
        predicted_moments(n, r, d, (0.5,), k=1, l=1, constants=[mu2, phi1])


def test_regime_check_fail_when_dense():
    report = regime_check(1e4, 1e4 ** (-0.8), 1, (1.0,), ("fk", 1))
    assert report.quantities["nr^d"] == pytest.approx(10.0**0.8, rel=1e-9)
    assert not report.flags["sparse_ok"]


def test_regime_check_sparse_growth():
    report = regime_check(1e6, 1e6 ** (-1.1), 1, (1.0,), ("fk", 1),
                          sparse_threshold=0.3, growth_threshold=1e3)
    assert report.quantities["nr^d"] == pytest.approx(10.0 ** (-0.6), rel=1e-9)
    assert report.quantities["growth_k1"] == pytest.approx(10.0**5.4, rel=1e-9)
    assert report.flags["sparse_ok"] and report.flags["growth_ok"]
    assert report.ok


def test_regime_check_chi_mode():
    report = regime_check(1e5, 1e5 ** (-1.7), 1, (1.0, 1.0), ("chi", 1),
                          sparse_threshold=0.3, growth_threshold=10.0)
    assert report.flags["vanish_ok"] and report.flags["growth_ok"] and report.flags["sparse_ok"]


def test_log_space_handles_tiny_probabilities():
    value = log_growth_quantity(1e6, 1e-3, 2, (1e-12, 1e-12), 2)
    assert math.isfinite(value)
    report = regime_check(1e6, 1e-3, 2, (1e-12, 1e-12), ("fk", 2))
    assert all(math.isfinite(v) for v in report.quantities.values())


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0)


def test_estimates_independent_of_worker_count():
    # shards are fixed by the sample count, so the pool size cannot matter
    kwargs = dict(samples=3_000_000, seed=44)  # spans several shards
    serial = estimate_mu(2, 2, UNIT_2D, threads=1, **kwargs)
    pooled = estimate_mu(2, 2, UNIT_2D, threads=4, **kwargs)
    assert serial.value == pooled.value
    assert serial.stderr == pooled.stderr
    serial_pair = estimate_theta(2, 1, 1, 2, UNIT_2D, threads=1, **kwargs)
    pooled_pair = estimate_theta(2, 1, 1, 2, UNIT_2D, threads=3, **kwargs)
    assert serial_pair.value == pooled_pair.value
