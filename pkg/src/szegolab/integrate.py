"""Surface sampling and Monte-Carlo integration backends.

Uniform sphere sampling is exact (normalized Gaussians, equal weights).
General invariant hypersurfaces are sampled by radial projection: draw a
direction uniformly on the unit sphere, solve rho(t u) = 0 along the ray, and
weight by the angular co-area Jacobian t^{2n} |grad rho| / (x . grad rho) so
that weighted sums estimate Euclidean surface integrals.  A pointwise density
hook carries measure reweightings such as the compliant volume density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SamplingError
from .geometry import Manifold, SurfacePoint

_BISECT_ITERS = 46
_NEWTON_ITERS = 4


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere in C^n: 2 pi^n / (n-1)!."""
    return 2.0 * math.pi**n / math.factorial(n - 1)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Quadrature points on X with surface-measure weights (sum ~ area)."""

    points: np.ndarray  # (N, n) complex
    weights: np.ndarray  # (N,) positive
    seed: int
    method: str

    @property
    def count(self) -> int:
        return self.points.shape[0]


def _rng(seed: int) -> np.random.Generator:
    # Philox is counter-based: streams derived from the seed are reproducible
    # independently of how draws are chunked.
    return np.random.Generator(np.random.Philox(seed))


def _uniform_directions(n: int, count: int, rng) -> np.ndarray:
    g = rng.normal(size=(count, 2 * n))
    u = g[:, :n] + 1j * g[:, n:]
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def sample_sphere(n: int, count: int, seed: int = 0) -> SampleSet:
    """Uniform points on the unit sphere S^{2n-1} with equal weights."""
    if count < 1:
        raise ValueError("count must be >= 1")
    u = _uniform_directions(n, count, _rng(seed))
    w = np.full(count, sphere_area(n) / count)
    return SampleSet(u, w, seed, "sphere-uniform")


def radial_roots(M: Manifold, U: np.ndarray, t_max: float = 8.0) -> np.ndarray:
    """First positive root of rho(t u) per row of U (star-shaped assumption).

    Bisection brackets the first sign change on a coarse scan; a few Newton
    steps polish to ~1e-13.  A sign change after the accepted root would
    violate the single-intersection assumption and raises SamplingError.
    """
    U = np.asarray(U, dtype=complex)
    count = U.shape[0]
    if float(M.rho.value(np.zeros(M.n))) >= 0:
        raise SamplingError("rho(0) >= 0: surface is not star-shaped about 0")
    hi = np.ones(count)
    val = M.rho.value(U * hi[:, None])
    for _ in range(16):
        neg = val < 0
        if not np.any(neg):
            break
        hi[neg] *= 2.0
        if np.max(hi) > t_max:
            raise SamplingError("ray root not bracketed in (0, t_max]")
        val[neg] = M.rho.value(U[neg] * hi[neg, None])
    if np.any(val < 0):
        raise SamplingError("ray root not bracketed in (0, t_max]")
    lo = np.zeros(count)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        neg = M.rho.value(U * mid[:, None]) < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    t = 0.5 * (lo + hi)
    for _ in range(_NEWTON_ITERS):
        X = U * t[:, None]
        f = M.rho.value(X)
        # d/dt rho(t u) = 2 Re sum z_j rho_j / t
        df = 2.0 * np.sum(X * M.rho.z_gradient(X), axis=1).real / t
        df = np.where(np.abs(df) < 1e-30, 1e-30, df)
        step = np.clip(f / df, -0.25, 0.25)
        t = np.clip(t - step, lo, hi)
    return t


def sample_hypersurface(M: Manifold, count: int, seed: int = 0) -> SampleSet:
    """Radial-projection sampling of {rho = 0} with co-area weights.

    On a sphere the weights reduce to the equal sphere-uniform weights.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    U = _uniform_directions(M.n, count, _rng(seed))
    t = radial_roots(M, U)
    X = U * t[:, None]
    rho_z = M.rho.z_gradient(X)
    grad_norm = 2.0 * np.linalg.norm(rho_z, axis=1)
    radial = 2.0 * np.sum(X * rho_z, axis=1).real  # x . grad rho
    if np.any(radial <= 0):
        raise SamplingError("ray meets the surface non-transversally")
    area = sphere_area(M.n)
    w = (area / count) * t ** (2 * M.n) * grad_norm / radial
    return SampleSet(X, w, seed, "implicit-projection")


def surface_samples(M: Manifold, count: int, seed: int = 0) -> SampleSet:
    """Sampling backend dispatch: exact sphere sampling when available."""
    if M.kind == "sphere":
        return sample_sphere(M.n, count, seed)
    return sample_hypersurface(M, count, seed)


def compliant_density(M: Manifold, Z: np.ndarray) -> np.ndarray:
    """Compliant-metric volume density at raw coordinates, vectorized.

    Equals |d_z rho| divided by the transversal pairing; agrees with the
    Gram-determinant construction in geometry (covered by tests).
    """
    rho_z = M.rho.z_gradient(Z)
    denom = np.sum(M.weights.array * np.asarray(Z, dtype=complex) * rho_z, axis=-1).real
    return np.linalg.norm(rho_z, axis=-1) / denom


def integrate_surface(f, S: SampleSet, density=None) -> tuple[complex, float]:
    """Weighted Monte-Carlo mean of f over X; returns (estimate, stderr).

    f maps an (N, n) coordinate array to an (N,) array.  The optional density
    reweights the surface measure pointwise.
    """
    vals = np.asarray(f(S.points))
    c = S.weights if density is None else S.weights * np.asarray(density(S.points))
    contrib = c * vals
    estimate = np.sum(contrib)
    per_draw = contrib * S.count  # single-draw unbiased estimates
    stderr = float(np.std(per_draw) / math.sqrt(S.count))
    return estimate, stderr


# -- structured point generators ------------------------------------------


def project_radially(M: Manifold, Z: np.ndarray) -> np.ndarray:
    """Map ambient points to X along rays from the origin."""
    Z = np.asarray(Z, dtype=complex)
    norms = np.linalg.norm(Z, axis=-1, keepdims=True)
    U = Z / norms
    if M.kind == "sphere":
        return U
    single = U.ndim == 1
    Ub = U[None, :] if single else U
    t = radial_roots(M, Ub)
    X = Ub * t[:, None]
    return X[0] if single else X


def random_surface_points(M: Manifold, count: int, seed: int = 0) -> list[SurfacePoint]:
    S = surface_samples(M, count, seed)
    return [M.point(z) for z in S.points]


def support_pattern_points(
    M: Manifold, support: tuple[int, ...], count: int, seed: int = 0
) -> list[SurfacePoint]:
    """Points of X supported exactly on the given coordinate subset."""
    rng = _rng(seed)
    out: list[SurfacePoint] = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 50 * count + 50:
            raise SamplingError(f"could not realize support pattern {support}")
        u = np.zeros(M.n, dtype=complex)
        g = rng.normal(size=(len(support), 2))
        u[list(support)] = g[:, 0] + 1j * g[:, 1]
        if np.min(np.abs(u[list(support)])) < 1e-3:
            continue
        try:
            x = project_radially(M, u)
        except SamplingError:
            continue
        out.append(M.point(x))
    return out


def ball_points(
    M: Manifold,
    x0: SurfacePoint,
    radius: float,
    count: int,
    seed: int = 0,
    align_orbit: bool = False,
) -> list[SurfacePoint]:
    """Points of X within ambient distance `radius` of x0.

    With align_orbit=True each point is rotated to the orbit representative
    closest to x0, probing the transverse neighborhood of the orbit.
    """
    rng = _rng(seed)
    z0 = x0.coordinates
    out: list[SurfacePoint] = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 200 * count + 200:
            raise SamplingError("ball sampling failed; radius too small?")
        g = rng.normal(size=(M.n, 2))
        step = (g[:, 0] + 1j * g[:, 1]) * radius / math.sqrt(2 * M.n)
        z = project_radially(M, z0 + step)
        if np.linalg.norm(z - z0) > radius:
            continue
        if align_orbit:
            _, theta = M.orbit_distance_batch(z0[None, :], z[None, :])
            z = M.act_coordinates(float(theta[0]), z[None, :])[0]
            if np.linalg.norm(z - z0) > radius:
                continue
        out.append(M.point(z))
    return out


def stratified_points(
    M: Manifold,
    count: int,
    seed: int = 0,
    near_distance: float = 0.05,
    strata=None,
) -> list[tuple[SurfacePoint, str, int]]:
    """Sample mix: 40% regular, 40% on singular strata, 20% near them.

    Returns (point, label, stratum_order) triples.  On manifolds with a free
    action everything is regular.
    """
    if strata is None:
        strata = M.strata_orders(seed=seed)
    singular = strata.singular_patterns()
    rng = _rng(seed)
    out: list[tuple[SurfacePoint, str, int]] = []
    if not singular:
        for x in random_surface_points(M, count, seed):
            out.append((x, "regular", M.stratum_order(x)))
        return out
    n_regular = max(1, int(round(0.4 * count)))
    n_singular = max(len(singular), int(round(0.4 * count)))
    n_near = max(1, count - n_regular - n_singular)
    for x in random_surface_points(M, n_regular, seed):
        out.append((x, "regular", M.stratum_order(x)))
    for i in range(n_singular):
        support, k = singular[i % len(singular)]
        x = support_pattern_points(M, support, 1, seed + 1000 + i)[0]
        out.append((x, "stratum", k))
    for i in range(n_near):
        support, k = singular[i % len(singular)]
        x = support_pattern_points(M, support, 1, seed + 5000 + i)[0]
        g = rng.normal(size=(M.n, 2))
        delta = (g[:, 0] + 1j * g[:, 1])
        off = [j for j in range(M.n) if j not in support]
        if off:
            # perturb only off-support coordinates so the distance to the
            # stratum locus is controlled by the perturbation size
            mask = np.zeros(M.n)
            mask[off] = 1.0
            delta = delta * mask
        delta *= (0.2 + 0.8 * rng.random()) * near_distance * 0.9 / max(
            np.linalg.norm(delta), 1e-12
        )
        z = project_radially(M, x.coordinates + delta)
        out.append((M.point(z), "near-stratum", M.stratum_order(M.point(z))))
    return out
