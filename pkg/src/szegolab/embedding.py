"""Equivariant maps into C^N built from blocks of Fourier components.

For base level m the block set takes levels k*m and k*(m+1) for every
k = 1, ..., l where l is the largest stabilizer order on X (optionally
augmented by extra levels).  Each coordinate carries its level as a rotation
weight, so the map intertwines the manifold action with a diagonal action on
C^N.  Immersion and point separation are certified empirically: smallest
singular values of the real Jacobian over stratified samples, and image
distances over stratified point pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import (
    COMPLIANT,
    ROUND_EXACT,
    FourierBasis,
    eval_basis,
    eval_basis_batch,
    eval_basis_jacobian,
    fourier_basis,
)
from .geometry import Manifold, StrataOrders, SurfacePoint
from .integrate import (
    SampleSet,
    random_surface_points,
    stratified_points,
    support_pattern_points,
    surface_samples,
    _rng,
)


@dataclass(frozen=True, eq=False)
class EmbeddingMap:
    """Concatenation of Fourier-component blocks with per-coordinate weights."""

    manifold: Manifold
    blocks: tuple[tuple[int, FourierBasis], ...]
    coordinate_weights: np.ndarray  # (N,) int, the level of each coordinate
    base_level: int
    warnings: tuple[str, ...] = ()

    @property
    def total_dim(self) -> int:
        return int(self.coordinate_weights.shape[0])

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(level for level, _ in self.blocks)

    @property
    def min_weight(self) -> int:
        return int(self.coordinate_weights.min())


def _default_measure(M: Manifold, measure: str) -> str:
    if measure != "auto":
        return measure
    # any orthonormalization of the same span gives the same image geometry up
    # to a linear change of target coordinates, so the exact sphere measure is
    # preferred whenever available
    return ROUND_EXACT if M.kind == "sphere" else COMPLIANT


def embedding_from_levels(
    M: Manifold,
    levels,
    base_level: int = 0,
    measure: str = "auto",
    samples: int = 50_000,
    seed: int = 0,
    sample_set: SampleSet | None = None,
) -> EmbeddingMap:
    measure = _default_measure(M, measure)
    if measure == COMPLIANT and sample_set is None:
        sample_set = surface_samples(M, samples, seed)
    blocks = []
    warnings = []
    weights: list[int] = []
    for level in sorted(set(int(m) for m in levels)):
        B = fourier_basis(M, level, measure=measure, samples=samples, seed=seed, sample_set=sample_set)
        if B.d == 0:
            warnings.append(f"level {level} has no representation (empty block)")
        blocks.append((level, B))
        weights.extend([level] * B.d)
    return EmbeddingMap(
        M,
        tuple(blocks),
        np.asarray(weights, dtype=np.int64),
        base_level,
        tuple(warnings),
    )


def build_embedding(
    M: Manifold,
    m: int,
    extra_levels=(),
    measure: str = "auto",
    samples: int = 50_000,
    seed: int = 0,
    strata: StrataOrders | None = None,
    include_paired_levels: bool = True,
) -> EmbeddingMap:
    """Standard block set: levels k*m and k*(m+1) for k = 1..max stabilizer order.

    Levels k*(m+1) can be dropped (include_paired_levels=False) to reproduce
    the one-block map that fails to separate points inside a stabilized orbit.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if strata is None:
        strata = M.strata_orders(seed=seed)
    levels = set(int(x) for x in extra_levels)
    for k in range(1, strata.max_order + 1):
        levels.add(k * m)
        if include_paired_levels:
            levels.add(k * (m + 1))
    return embedding_from_levels(M, levels, base_level=m, measure=measure, samples=samples, seed=seed)


def evaluate(Phi: EmbeddingMap, x: SurfacePoint) -> np.ndarray:
    return np.concatenate([eval_basis(B, x) for _, B in Phi.blocks]) if Phi.blocks else np.zeros(0, complex)


def evaluate_batch(Phi: EmbeddingMap, Z: np.ndarray) -> np.ndarray:
    cols = [eval_basis_batch(B, Z) for _, B in Phi.blocks]
    return np.concatenate(cols, axis=1) if cols else np.zeros((len(Z), 0), complex)


def check_equivariance(Phi: EmbeddingMap, x: SurfacePoint, theta: float) -> float:
    """Max componentwise |Phi_j(e^{i theta}.x) - e^{i w_j theta} Phi_j(x)|."""
    M = Phi.manifold
    rotated = evaluate(Phi, M.act(theta, x))
    phased = np.exp(1j * theta * Phi.coordinate_weights) * evaluate(Phi, x)
    return float(np.max(np.abs(rotated - phased))) if Phi.total_dim else 0.0


def tangent_frame_real(M: Manifold, x: SurfacePoint) -> np.ndarray:
    """Euclidean-orthonormal real frame of T_x X as complex columns (n, 2n-1).

    Columns: the holomorphic frame vectors, their i-rotations, and the
    in-surface normal complement i * conj(d_z rho)/|d_z rho|.
    """
    F = M.holomorphic_tangent_frame(x)
    rho_z = M.rho.z_gradient(x.coordinates)
    nu = 1j * rho_z.conj() / np.linalg.norm(rho_z)
    cols = [row for row in F] + [1j * row for row in F] + [nu]
    return np.stack(cols, axis=1)


def jacobian_singular_values(Phi: EmbeddingMap, x: SurfacePoint) -> np.ndarray:
    """Singular values (descending) of the real Jacobian of Phi on T_x X."""
    M = Phi.manifold
    V = tangent_frame_real(M, x)  # (n, 2n-1)
    J = np.concatenate([eval_basis_jacobian(B, x) for _, B in Phi.blocks])  # (N, n)
    D = J @ V  # (N, 2n-1) complex; rows stay complex-linear in the frame
    R = np.concatenate([D.real, D.imag])  # (2N, 2n-1)
    return np.linalg.svd(R, compute_uv=False)


def jacobian_smallest_singular_value(Phi: EmbeddingMap, x: SurfacePoint) -> float:
    return float(jacobian_singular_values(Phi, x)[-1])


def reeb_image(Phi: EmbeddingMap, x: SurfacePoint) -> np.ndarray:
    """d Phi (T) computed geometrically; equals i * (w_j Phi_j(x)) exactly."""
    M = Phi.manifold
    T = M.reeb_vector(x)
    J = np.concatenate([eval_basis_jacobian(B, x) for _, B in Phi.blocks])
    return J @ T


@dataclass(frozen=True, eq=False)
class ImmersionReport:
    min_singular_value: float
    argmin_point: SurfacePoint | None
    # per sample: (label, stratum order, near-stratum flag, sigma_min)
    records: tuple[tuple[str, int, bool, float], ...]
    failures: tuple[dict, ...]  # rank drops, with the point and its spectrum


def immersion_report(
    Phi: EmbeddingMap,
    samples: int = 100,
    seed: int = 0,
    failure_floor: float = 1e-9,
) -> ImmersionReport:
    """Smallest singular value of d Phi over a stratified sample of X."""
    pts = stratified_points(Phi.manifold, samples, seed=seed)
    records = []
    failures = []
    worst = math.inf
    argmin = None
    for i, (x, label, k) in enumerate(pts):
        spectrum = jacobian_singular_values(Phi, x)
        s = float(spectrum[-1])
        info = Phi.manifold.stratum_info(x)
        records.append((label, k, info.near_stratum, s))
        if s < failure_floor:
            failures.append(
                {
                    "index": i,
                    "label": label,
                    "stratum_order": k,
                    "point": x.coordinates.tolist(),
                    "singular_values": spectrum.tolist(),
                }
            )
        if s < worst:
            worst, argmin = s, x
    return ImmersionReport(float(worst), argmin, tuple(records), tuple(failures))


@dataclass(frozen=True, eq=False)
class SeparationReport:
    pair_count: int
    threshold: float
    min_image_distance: float  # over pairs with quotient distance > threshold
    min_same_orbit_image_distance: float  # over distinct same-orbit pairs
    violations: tuple[dict, ...]
    image_scale: float


def separation_report(
    Phi: EmbeddingMap,
    pair_count: int = 10_000,
    threshold: float = 0.05,
    seed: int = 0,
    violation_floor: float = 1e-9,
) -> SeparationReport:
    """Certify that sampled distinct points have distinct images.

    Pairs are stratified: same-orbit pairs (separated by the phase pair of
    consecutive levels whenever the rotation actually moves the point),
    cross-stratum pairs, and near-stratum regular pairs.  For every pair with
    quotient distance above the threshold the image distance must clear a
    scale-relative floor; same-orbit pairs are held to the same floor once
    the ambient distance is above the threshold.
    """
    M = Phi.manifold
    rng = _rng(seed)
    n_orbit = pair_count // 3
    n_cross = pair_count // 3
    n_near = pair_count - n_orbit - n_cross

    strata = M.strata_orders(seed=seed)
    singular = strata.singular_patterns()

    xs: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    kinds: list[str] = []

    base = [p for p, _, _ in stratified_points(M, n_orbit, seed=seed + 1)]
    thetas = rng.uniform(0.0, 2 * math.pi, size=n_orbit)
    for x, t in zip(base, thetas):
        xs.append(x.coordinates)
        ys.append(M.act(float(t), x).coordinates)
        kinds.append("same-orbit")

    a_pts = random_surface_points(M, n_cross, seed + 2)
    if singular:
        b_pts = []
        for i in range(n_cross):
            support, _ = singular[i % len(singular)]
            b_pts.append(support_pattern_points(M, support, 1, seed + 3000 + i)[0])
    else:
        b_pts = random_surface_points(M, n_cross, seed + 3)
    for a, b in zip(a_pts, b_pts):
        xs.append(a.coordinates)
        ys.append(b.coordinates)
        kinds.append("cross-stratum" if singular else "regular")

    near = stratified_points(M, max(3 * n_near // 2, 3), seed=seed + 4)
    near_pool = [p for p, label, _ in near if label in ("near-stratum", "regular")]
    for i in range(n_near):
        a = near_pool[i % len(near_pool)]
        b = near_pool[(i * 7 + 1) % len(near_pool)]
        xs.append(a.coordinates)
        ys.append(b.coordinates)
        kinds.append("near-stratum")

    X = np.asarray(xs)
    Y = np.asarray(ys)
    qd, _ = M.orbit_distance_batch(X, Y)
    ambient = np.linalg.norm(X - Y, axis=1)
    FX = evaluate_batch(Phi, X)
    FY = evaluate_batch(Phi, Y)
    img = np.linalg.norm(FX - FY, axis=1)
    scale = float(np.median(np.linalg.norm(FX, axis=1))) or 1.0
    floor = violation_floor * scale

    violations = []
    min_sep = math.inf
    min_orbit = math.inf
    for i in range(len(kinds)):
        separated = qd[i] > threshold
        same_orbit_distinct = kinds[i] == "same-orbit" and ambient[i] > threshold
        if separated:
            min_sep = min(min_sep, img[i])
        if same_orbit_distinct:
            min_orbit = min(min_orbit, img[i])
        if (separated or same_orbit_distinct) and img[i] < floor:
            violations.append(
                {
                    "kind": kinds[i],
                    "x": X[i].tolist(),
                    "y": Y[i].tolist(),
                    "quotient_distance": float(qd[i]),
                    "ambient_distance": float(ambient[i]),
                    "image_distance": float(img[i]),
                    "strata": [
                        int(M.stratum_order(M.point(X[i]))),
                        int(M.stratum_order(M.point(Y[i]))),
                    ],
                    "offending_coordinates": np.where(
                        np.abs(FX[i] - FY[i]) == np.max(np.abs(FX[i] - FY[i]))
                    )[0].tolist(),
                }
            )
    return SeparationReport(
        pair_count=len(kinds),
        threshold=threshold,
        min_image_distance=float(min_sep),
        min_same_orbit_image_distance=float(min_orbit),
        violations=tuple(violations),
        image_scale=scale,
    )


@dataclass(frozen=True, eq=False)
class PhasePairDemo:
    """Image distances for a stabilized point against its half-period rotation."""

    point: np.ndarray
    rotated: np.ndarray
    stratum_order: int
    ambient_distance: float
    distance_without_paired_levels: float
    distance_with_paired_levels: float

    @property
    def violation_detected(self) -> bool:
        scale = max(self.distance_with_paired_levels, 1.0)
        return self.distance_without_paired_levels < 1e-9 * scale


def phase_pair_demo(
    M: Manifold, x0: SurfacePoint, m: int, measure: str = "auto", seed: int = 0
) -> PhasePairDemo:
    """Show why paired levels are needed: for x0 with stabilizer order k and
    even m, the rotation by pi/k moves x0 but every coordinate of the
    k*m-level blocks returns to itself, so the one-block map cannot separate
    the pair; the k*(m+1) blocks restore separation.
    """
    k = M.stratum_order(x0)
    if k <= 1:
        raise ValueError("x0 must have stabilizer order > 1")
    y0 = M.act(math.pi / k, x0)
    Phi_km = build_embedding(M, m, measure=measure, seed=seed, include_paired_levels=False)
    Phi_full = build_embedding(M, m, measure=measure, seed=seed)
    d_km = float(np.linalg.norm(evaluate(Phi_km, x0) - evaluate(Phi_km, y0)))
    d_full = float(np.linalg.norm(evaluate(Phi_full, x0) - evaluate(Phi_full, y0)))
    return PhasePairDemo(
        point=x0.coordinates,
        rotated=y0.coordinates,
        stratum_order=k,
        ambient_distance=float(np.linalg.norm(x0.coordinates - y0.coordinates)),
        distance_without_paired_levels=d_km,
        distance_with_paired_levels=d_full,
    )


def search_embedding(
    M: Manifold,
    m_start: int,
    m_max: int,
    pair_count: int = 2000,
    threshold: float = 0.05,
    seed: int = 0,
    **kwargs,
):
    """Increase the base level until the separation certificate passes."""
    for m in range(m_start, m_max + 1):
        Phi = build_embedding(M, m, seed=seed, **kwargs)
        report = separation_report(Phi, pair_count=pair_count, threshold=threshold, seed=seed)
        if not report.violations:
            return m, Phi, report
    raise RuntimeError(f"no embedding certificate up to m = {m_max}")
