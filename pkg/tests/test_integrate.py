import math

import numpy as np
import pytest

from szegolab.basis import enumerate_multiindices, monomial_values, sphere_monomial_norm_sq
from szegolab.errors import SamplingError
from szegolab.integrate import (
    compliant_density,
    integrate_surface,
    sample_hypersurface,
    sample_sphere,
    sphere_area,
    stratified_points,
    surface_samples,
)


def test_sphere_weights_sum_to_area():
    S = sample_sphere(2, 1000, seed=0)
    assert abs(S.weights.sum() - 2 * math.pi**2) < 1e-9


def test_sphere_mean_coordinate_power():
    # E |z_1|^2 = 1/n on the unit sphere
    S = sample_sphere(3, 1_000_000, seed=1)
    est, stderr = integrate_surface(lambda Z: np.abs(Z[:, 0]) ** 2, S)
    target = sphere_area(3) / 3
    assert abs(est - target) < 3 * stderr + 1e-12


def test_sampling_deterministic_per_seed():
    A = sample_sphere(2, 500, seed=42)
    B = sample_sphere(2, 500, seed=42)
    assert A.points.tobytes() == B.points.tobytes()
    assert A.weights.tobytes() == B.weights.tobytes()
    C = sample_sphere(2, 500, seed=43)
    assert A.points.tobytes() != C.points.tobytes()


def test_hypersurface_route_on_sphere_reduces_to_uniform(sphere2):
    S = sample_hypersurface(sphere2, 2000, seed=5)
    assert np.allclose(np.abs(np.linalg.norm(S.points, axis=1)) - 1, 0, atol=1e-12)
    assert np.allclose(S.weights, sphere_area(2) / 2000, atol=1e-12)


def test_cross_backend_monomial_integrals(sphere2):
    rng = np.random.default_rng(7)
    S1 = sample_sphere(2, 120_000, seed=11)
    S2 = sample_hypersurface(sphere2, 120_000, seed=12)
    for _ in range(20):
        a = rng.integers(0, 4, size=2)
        b = rng.integers(0, 4, size=2)

        def f(Z):
            return (Z[:, 0] ** a[0] * Z[:, 1] ** a[1]) * np.conj(
                Z[:, 0] ** b[0] * Z[:, 1] ** b[1]
            )

        e1, s1 = integrate_surface(f, S1)
        e2, s2 = integrate_surface(f, S2)
        assert abs(e1 - e2) < 5 * math.hypot(s1, s2) + 1e-12


def test_example2_area_stable_across_seeds(example2):
    areas = []
    for seed in (1, 2):
        S = sample_hypersurface(example2, 200_000, seed=seed)
        areas.append(S.weights.sum())
        assert np.max(np.abs(example2.rho.value(S.points))) < 1e-10
    assert abs(areas[0] - areas[1]) / areas[0] < 0.01


def test_constant_integrates_to_weight_sum(example2):
    S = sample_hypersurface(example2, 5000, seed=3)
    est, _ = integrate_surface(lambda Z: np.ones(Z.shape[0]), S)
    assert abs(est - S.weights.sum()) < 1e-9


def test_monomial_norms_against_exact(sphere2):
    S = sample_sphere(2, 200_000, seed=21)
    for exps in ((0, 0), (1, 0), (2, 1), (0, 3)):
        mi = enumerate_multiindices(sphere2.weights, sum(exps))
        alpha = [m for m in mi if m.exponents == exps][0]

        def f(Z):
            return np.abs(monomial_values(Z, [alpha])[:, 0]) ** 2

        est, stderr = integrate_surface(f, S)
        exact = sphere_monomial_norm_sq(alpha, 2).value()
        assert abs(est - exact) < 5 * stderr + 1e-12


def test_density_hook_identity_on_standard_sphere(sphere2):
    S = sample_sphere(2, 50_000, seed=2)

    def f(Z):
        return np.abs(Z[:, 1]) ** 4

    plain, _ = integrate_surface(f, S)
    weighted, _ = integrate_surface(f, S, density=lambda Z: compliant_density(sphere2, Z))
    assert abs(plain - weighted) < 1e-10


def test_action_invariance_of_estimates(wsphere126):
    S = surface_samples(wsphere126, 100_000, seed=8)

    def f(Z):
        return np.abs(Z[:, 0] + Z[:, 2] ** 2) ** 2

    def f_rot(Z):
        return f(wsphere126.act_coordinates(0.7, Z))

    e1, s1 = integrate_surface(f, S, density=lambda Z: compliant_density(wsphere126, Z))
    e2, s2 = integrate_surface(f_rot, S, density=lambda Z: compliant_density(wsphere126, Z))
    assert abs(e1 - e2) < 5 * math.hypot(s1, s2)


def test_stderr_scales_with_sample_count(sphere2):
    def f(Z):
        return np.abs(Z[:, 0]) ** 6

    _, s_small = integrate_surface(f, sample_sphere(2, 50_000, seed=14))
    _, s_large = integrate_surface(f, sample_sphere(2, 200_000, seed=15))
    assert 1.8 <= s_small / s_large <= 2.2


def test_star_shape_violation_detected():
    from fractions import Fraction

    from szegolab.geometry import DefiningPolynomial, Manifold

    # rho(0) = +1 > 0: no ray from the origin can bracket a root
    terms = {
        ((1, 0), (1, 0)): Fraction(1),
        ((0, 1), (0, 1)): Fraction(1),
        ((0, 0), (0, 0)): Fraction(1),
    }
    M = Manifold(2, (1, 1), DefiningPolynomial(2, terms))
    with pytest.raises(SamplingError):
        sample_hypersurface(M, 10, seed=0)


def test_stratified_points_cover_patterns(wsphere126):
    pts = stratified_points(wsphere126, 50, seed=6)
    labels = {label for _, label, _ in pts}
    assert labels == {"regular", "stratum", "near-stratum"}
    orders = {k for _, label, k in pts if label == "stratum"}
    assert {2, 6} <= orders
    for x, label, k in pts:
        assert x.residual <= wsphere126.surface_tolerance


def test_stratified_points_free_action(sphere3):
    pts = stratified_points(sphere3, 20, seed=1)
    assert all(label == "regular" for _, label, _ in pts)
