"""Monomial bases of the positive Fourier components and their Gram matrices.

The weight-m component of the CR function space on the hypersurface model is
spanned by restrictions of monomials z^alpha with <alpha, weights> = m.  On
the unit sphere with Euclidean surface measure the Gram matrix is diagonal
with closed-form entries

    integral over S^{2n-1} of |z^alpha|^2 dS = 2 pi^n alpha! / (n - 1 + |alpha|)!

carried exactly as (rational, pi-power) pairs.  For the compliant measure or
a general hypersurface the Gram matrix is estimated by Monte Carlo with
per-entry standard errors.  Orthonormalization is Cholesky whitening.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import GramNotPositiveDefiniteError, RankDeficiencyError
from .geometry import Manifold, SurfacePoint, WeightVector
from .integrate import SampleSet, compliant_density, sphere_area, surface_samples

ROUND_EXACT = "round-exact"
COMPLIANT = "compliant-quadrature"

DEFAULT_GRAM_SAMPLES = 200_000
_CHUNK = 20_000


@dataclass(frozen=True)
class MultiIndex:
    """Exponent vector with its weighted and total degrees (always recomputed)."""

    exponents: tuple[int, ...]
    weighted_degree: int
    total_degree: int

    @classmethod
    def make(cls, exponents: Sequence[int], weights: WeightVector) -> "MultiIndex":
        e = tuple(int(a) for a in exponents)
        if any(a < 0 for a in e):
            raise ValueError(f"negative exponent in {e}")
        wd = int(sum(a * w for a, w in zip(e, weights.weights)))
        return cls(e, wd, int(sum(e)))


def enumerate_multiindices(weights: WeightVector, m: int) -> list[MultiIndex]:
    """All alpha >= 0 with <alpha, weights> = m, in colexicographic order."""
    if m < 0:
        raise ValueError("m must be >= 0")
    ws = weights.weights
    n = len(ws)

    def rec(k: int, target: int):
        # exponents for coordinates 0..k, colex order (later coordinates vary
        # slowest and ascend first)
        if k == 0:
            if target % ws[0] == 0:
                yield (target // ws[0],)
            return
        for a in range(target // ws[k] + 1):
            for head in rec(k - 1, target - a * ws[k]):
                yield head + (a,)

    out = []
    for e in sorted(rec(n - 1, m), key=lambda t: t[::-1]):
        out.append(MultiIndex.make(e, weights))
    return out


def dimension(weights: WeightVector, m: int) -> int:
    """Count of enumerate_multiindices without materializing it."""
    ws = weights.weights

    def rec(k: int, target: int) -> int:
        if k == 0:
            return 1 if target % ws[0] == 0 else 0
        return sum(rec(k - 1, target - a * ws[k]) for a in range(target // ws[k] + 1))

    return rec(len(ws) - 1, m)


@dataclass(frozen=True)
class ExactNorm:
    """Exact value rational_part * pi^pi_power."""

    rational_part: Fraction
    pi_power: int

    def __post_init__(self):
        if self.rational_part <= 0:
            raise ValueError("rational part must be positive")

    def value(self) -> float:
        return float(self.rational_part) * math.pi**self.pi_power


def sphere_monomial_norm_sq(alpha: MultiIndex, n: int) -> ExactNorm:
    """Squared L^2(dS) norm of z^alpha on the unit sphere in C^n, exactly."""
    num = 2 * math.prod(math.factorial(a) for a in alpha.exponents)
    den = math.factorial(n - 1 + alpha.total_degree)
    return ExactNorm(Fraction(num, den), n)


def monomial_values(Z: np.ndarray, indices: Sequence[MultiIndex]) -> np.ndarray:
    """Matrix V[i, j] = z_i^{alpha_j} for points Z (N, n)."""
    Z = np.asarray(Z, dtype=complex)
    single = Z.ndim == 1
    Zb = Z[None, :] if single else Z
    n = Zb.shape[1]
    max_exp = [max((mi.exponents[k] for mi in indices), default=0) for k in range(n)]
    powers = []
    for k in range(n):
        P = np.empty((max_exp[k] + 1, Zb.shape[0]), dtype=complex)
        P[0] = 1.0
        for e in range(1, max_exp[k] + 1):
            P[e] = P[e - 1] * Zb[:, k]
        powers.append(P)
    V = np.empty((Zb.shape[0], len(indices)), dtype=complex)
    for j, mi in enumerate(indices):
        col = powers[0][mi.exponents[0]].copy()
        for k in range(1, n):
            if mi.exponents[k]:
                col *= powers[k][mi.exponents[k]]
        V[:, j] = col
    return V[0] if single else V


def monomial_jacobian(z: np.ndarray, indices: Sequence[MultiIndex]) -> np.ndarray:
    """D[j, k] = d z^{alpha_j} / d z_k at a single point."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[0]
    D = np.zeros((len(indices), n), dtype=complex)
    for j, mi in enumerate(indices):
        for k in range(n):
            a = mi.exponents[k]
            if not a:
                continue
            term = complex(a)
            for l in range(n):
                e = mi.exponents[l] - (1 if l == k else 0)
                if e:
                    term *= z[l] ** e
            D[j, k] = term
    return D


class DiagonalGram:
    """Diagonal Gram matrix stored as its (positive real) diagonal."""

    def __init__(self, diagonal):
        self.diagonal = np.asarray(diagonal, dtype=float)

    @property
    def shape(self):
        d = self.diagonal.shape[0]
        return (d, d)

    def toarray(self) -> np.ndarray:
        return np.diag(self.diagonal)


class DiagonalCoeff:
    """Coefficient matrix that happens to be diagonal, stored as its diagonal.

    Keeps large exact-measure components memory-safe (a level with d ~ 10^4
    monomials would otherwise materialize a d x d dense matrix).
    """

    def __init__(self, diagonal):
        self.diagonal = np.asarray(diagonal, dtype=complex)

    @property
    def shape(self):
        d = self.diagonal.shape[0]
        return (d, d)

    def toarray(self) -> np.ndarray:
        return np.diag(self.diagonal)


def apply_coeff(C, rows: np.ndarray) -> np.ndarray:
    """C @ rows for a dense or diagonal coefficient matrix."""
    if isinstance(C, DiagonalCoeff):
        return C.diagonal * rows if rows.ndim == 1 else C.diagonal[:, None] * rows
    return C @ rows


def apply_coeff_right(V: np.ndarray, C) -> np.ndarray:
    """V @ C.T for a dense or diagonal coefficient matrix."""
    if isinstance(C, DiagonalCoeff):
        return V * C.diagonal[None, :]
    return V @ C.T


@dataclass(frozen=True, eq=False)
class GramEstimate:
    matrix: "np.ndarray | DiagonalGram"
    stderr: np.ndarray | None  # None for exact measures
    measure: str
    smallest_eigenvalue: float


def gram_matrix(
    indices: Sequence[MultiIndex],
    M: Manifold,
    measure: str = ROUND_EXACT,
    samples: int = DEFAULT_GRAM_SAMPLES,
    seed: int = 0,
    sample_set: SampleSet | None = None,
) -> GramEstimate:
    """Gram matrix of the monomials under the requested measure.

    round-exact is available on sphere-kind manifolds only and is diagonal by
    torus invariance.  compliant-quadrature draws (or reuses) a sample set and
    reweights by the compliant volume density; the result is Hermitized and
    must be positive definite within noise.
    """
    levels = {mi.weighted_degree for mi in indices}
    if len(levels) > 1:
        raise ValueError(f"indices span several weighted degrees: {sorted(levels)}")
    d = len(indices)
    if measure == ROUND_EXACT:
        if M.kind != "sphere":
            raise ValueError("round-exact measure requires a sphere-kind manifold")
        diag = np.array([sphere_monomial_norm_sq(mi, M.n).value() for mi in indices])
        return GramEstimate(DiagonalGram(diag), None, measure, float(diag.min()) if d else 0.0)
    if measure != COMPLIANT:
        raise ValueError(f"unknown measure {measure!r}")
    S = sample_set if sample_set is not None else surface_samples(M, samples, seed)
    G = np.zeros((d, d), dtype=complex)
    S2 = np.zeros((d, d))
    N = S.count
    for start in range(0, N, _CHUNK):
        Z = S.points[start : start + _CHUNK]
        c = S.weights[start : start + _CHUNK] * compliant_density(M, Z)
        V = monomial_values(Z, indices)
        G += (V * c[:, None]).T @ V.conj()
        B = np.abs(V) ** 2
        S2 += (B * (N * c**2)[:, None]).T @ B
    G = 0.5 * (G + G.conj().T)
    var = np.maximum(S2 - np.abs(G) ** 2, 0.0)
    stderr = np.sqrt(var / max(N - 1, 1))
    eigs = np.linalg.eigvalsh(G) if d else np.array([1.0])
    if d and eigs[0] <= 0:
        raise GramNotPositiveDefiniteError(float(eigs[0]))
    return GramEstimate(G, stderr, measure, float(eigs[0]) if d else 0.0)


@dataclass(frozen=True, eq=False)
class FourierBasis:
    """Orthonormalized weight-m component basis.

    Rows of coeff_matrix applied to the raw monomial vector give the
    orthonormal family; the matrix is lower triangular (inverse Cholesky
    factor of the Gram matrix).
    """

    level: int
    indices: tuple[MultiIndex, ...]
    coeff_matrix: np.ndarray
    measure: str
    weights: WeightVector
    gram_condition: float

    @property
    def d(self) -> int:
        return len(self.indices)


def _cholesky_with_pivot(G: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        lo, hi = 1, G.shape[0]
        while lo < hi:  # smallest failing leading minor
            mid = (lo + hi) // 2
            try:
                np.linalg.cholesky(G[:mid, :mid])
                lo = mid + 1
            except np.linalg.LinAlgError:
                hi = mid
        raise RankDeficiencyError(lo - 1)


def orthonormalize(
    indices: Sequence[MultiIndex],
    gram: GramEstimate | np.ndarray,
    weights: WeightVector,
    measure: str | None = None,
) -> FourierBasis:
    """Cholesky whitening of the Gram matrix into a FourierBasis."""
    if isinstance(gram, GramEstimate):
        G = gram.matrix
        measure = measure or gram.measure
    else:
        G = gram if isinstance(gram, DiagonalGram) else np.asarray(gram)
        measure = measure or "custom"
    d = len(indices)
    if d == 0:
        return FourierBasis(0, (), np.zeros((0, 0), dtype=complex), measure, weights, 1.0)
    level = indices[0].weighted_degree
    if isinstance(G, DiagonalGram):
        diag = G.diagonal
    elif not np.any(G - np.diag(np.diag(G))):
        diag = np.diag(G).real
    else:
        diag = None
    if diag is not None:
        if np.any(diag <= 0):
            raise RankDeficiencyError(int(np.argmax(diag <= 0)))
        C = DiagonalCoeff(1.0 / np.sqrt(diag))
        cond = float(diag.max() / diag.min())
    else:
        L = _cholesky_with_pivot(G)
        C = np.linalg.inv(L)
        cond = float(np.linalg.cond(G))
    return FourierBasis(level, tuple(indices), C, measure, weights, cond)


def fourier_basis(
    M: Manifold,
    m: int,
    measure: str = "auto",
    samples: int = DEFAULT_GRAM_SAMPLES,
    seed: int = 0,
    sample_set: SampleSet | None = None,
) -> FourierBasis:
    """Enumerate, assemble the Gram matrix, and whiten, in one call.

    measure="auto" picks round-exact on the standard sphere (where the
    compliant measure coincides with the round one) and compliant-quadrature
    otherwise.
    """
    if measure == "auto":
        if M.kind == "sphere" and all(w == 1 for w in M.weights):
            measure = ROUND_EXACT
        else:
            measure = COMPLIANT
    indices = enumerate_multiindices(M.weights, m)
    if not indices:
        return FourierBasis(m, (), np.zeros((0, 0), dtype=complex), measure, M.weights, 1.0)
    G = gram_matrix(indices, M, measure=measure, samples=samples, seed=seed, sample_set=sample_set)
    return orthonormalize(indices, G, M.weights)


def eval_basis(B: FourierBasis, x) -> np.ndarray:
    """Values (f_1(x), ..., f_d(x)) at a SurfacePoint or raw coordinates."""
    z = x.coordinates if isinstance(x, SurfacePoint) else np.asarray(x, dtype=complex)
    if B.d == 0:
        return np.zeros(0, dtype=complex)
    return apply_coeff(B.coeff_matrix, monomial_values(z, B.indices))


def eval_basis_batch(B: FourierBasis, Z: np.ndarray) -> np.ndarray:
    """Values matrix (N, d) over raw coordinates (N, n)."""
    if B.d == 0:
        return np.zeros((np.asarray(Z).shape[0], 0), dtype=complex)
    out = np.empty((np.asarray(Z).shape[0], B.d), dtype=complex)
    Z = np.asarray(Z, dtype=complex)
    for start in range(0, Z.shape[0], _CHUNK):
        V = monomial_values(Z[start : start + _CHUNK], B.indices)
        out[start : start + _CHUNK] = apply_coeff_right(V, B.coeff_matrix)
    return out


def eval_basis_jacobian(B: FourierBasis, x) -> np.ndarray:
    """Holomorphic derivatives J[j, k] = d f_j / d z_k at a point."""
    z = x.coordinates if isinstance(x, SurfacePoint) else np.asarray(x, dtype=complex)
    if B.d == 0:
        return np.zeros((0, z.shape[0]), dtype=complex)
    return apply_coeff(B.coeff_matrix, monomial_jacobian(z, B.indices))


def volume(M: Manifold) -> float:
    """Euclidean surface area of the unit sphere model (exact for spheres)."""
    if M.kind != "sphere":
        raise ValueError("exact volume available for sphere kind only")
    return sphere_area(M.n)
