"""Circle-invariant hypersurfaces in C^n and their contact/Levi geometry.

A manifold here is a compact real hypersurface X = {rho = 0} in C^n together
with a diagonal circle action

    e^{i theta} . (z_1, ..., z_n) = (e^{i w_1 theta} z_1, ..., e^{i w_n theta} z_n)

with positive integer weights w_j, gcd 1, leaving rho invariant.  The module
provides the induced rotation field T, the stratification of X by stabilizer
order, orthonormal frames of the holomorphic tangent space H = ker(d_z rho),
the contact form normalized against T, the Levi form with respect to the
compliant metric (Euclidean on H, T unit and orthogonal to H), the volume
density of that metric relative to Euclidean surface measure, and the distance
between circle orbits.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidSurfaceError,
    NotOnSurfaceError,
    PseudoconvexityError,
    SingularPointError,
    TransversalityError,
)

# Support below this is treated as an exact zero when computing stabilizer
# orders; the band up to NEAR_STRATUM_TOLERANCE is flagged in reports because
# the stabilizer order is discontinuous there.
ZERO_TOLERANCE = 1e-9
NEAR_STRATUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class WeightVector:
    """Integer weights (w_1, ..., w_n) of a diagonal circle action."""

    weights: tuple[int, ...]

    def __post_init__(self):
        if len(self.weights) == 0:
            raise ValueError("empty weight vector")
        if any((not isinstance(w, int)) or w < 1 for w in self.weights):
            raise ValueError(f"weights must be positive integers, got {self.weights}")

    @classmethod
    def normalized(cls, weights: Iterable[int]) -> tuple["WeightVector", int]:
        """Divide out the common factor; returns (vector, divisor)."""
        ws = tuple(int(w) for w in weights)
        g = math.gcd(*ws) if len(ws) > 1 else ws[0]
        if g > 1:
            ws = tuple(w // g for w in ws)
        return cls(ws), g

    def __len__(self):
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.int64)

    @property
    def lcm(self) -> int:
        return math.lcm(*self.weights)

    def phases(self, theta: float) -> np.ndarray:
        """Componentwise rotation factors e^{i w_j theta}."""
        return np.exp(1j * theta * self.array)


def _exp_tuple(e) -> tuple[int, ...]:
    t = tuple(int(k) for k in e)
    if any(k < 0 for k in t):
        raise InvalidSurfaceError(f"negative exponent in {t}")
    return t


class DefiningPolynomial:
    """Real polynomial rho in (z, zbar) with rational coefficients.

    Terms are stored canonically as {(a, b): coeff} for the monomial
    z^a zbar^b.  Reality requires coeff(a, b) == coeff(b, a); invariance under
    the weighted action requires <a, w> == <b, w> for every term.
    """

    def __init__(self, n: int, terms: dict[tuple, Fraction]):
        self.n = n
        canonical: dict[tuple, Fraction] = {}
        for (a, b), c in terms.items():
            a, b = _exp_tuple(a), _exp_tuple(b)
            if len(a) != n or len(b) != n:
                raise InvalidSurfaceError(f"term ({a}, {b}) has wrong arity for n={n}")
            c = Fraction(c)
            if c != 0:
                canonical[(a, b)] = canonical.get((a, b), Fraction(0)) + c
        self.terms = {k: c for k, c in sorted(canonical.items()) if c != 0}
        for (a, b), c in self.terms.items():
            if self.terms.get((b, a)) != c:
                raise InvalidSurfaceError(
                    f"rho is not real: coefficient of z^{a} zbar^{b} is {c} "
                    f"but coefficient of z^{b} zbar^{a} is {self.terms.get((b, a))}"
                )
        # float view for fast evaluation
        self._coeff = np.array([float(c) for c in self.terms.values()])
        self._a = np.array([a for (a, _) in self.terms], dtype=np.int64).reshape(-1, n)
        self._b = np.array([b for (_, b) in self.terms], dtype=np.int64).reshape(-1, n)

    def check_invariance(self, weights: WeightVector) -> None:
        w = weights.array
        for (a, b) in self.terms:
            if int(np.dot(a, w)) != int(np.dot(b, w)):
                raise InvalidSurfaceError(
                    f"rho is not invariant: term z^{a} zbar^{b} has weighted "
                    f"bidegree ({int(np.dot(a, w))}, {int(np.dot(b, w))})"
                )

    def value(self, Z: np.ndarray) -> np.ndarray:
        """rho at one point (n,) or a batch (N, n); returns real array."""
        Z = np.asarray(Z, dtype=complex)
        single = Z.ndim == 1
        Zb = Z[None, :] if single else Z
        out = np.zeros(Zb.shape[0])
        Zc = Zb.conj()
        for c, a, b in zip(self._coeff, self._a, self._b):
            term = np.full(Zb.shape[0], c, dtype=complex)
            for k in range(self.n):
                if a[k]:
                    term *= Zb[:, k] ** a[k]
                if b[k]:
                    term *= Zc[:, k] ** b[k]
            out += term.real
        return out[0] if single else out

    def z_gradient(self, Z: np.ndarray) -> np.ndarray:
        """Holomorphic derivatives (d rho / d z_j); shape (n,) or (N, n)."""
        Z = np.asarray(Z, dtype=complex)
        single = Z.ndim == 1
        Zb = Z[None, :] if single else Z
        Zc = Zb.conj()
        out = np.zeros_like(Zb)
        for c, a, b in zip(self._coeff, self._a, self._b):
            for j in range(self.n):
                if not a[j]:
                    continue
                term = np.full(Zb.shape[0], c * a[j], dtype=complex)
                for k in range(self.n):
                    e = a[k] - (1 if k == j else 0)
                    if e:
                        term *= Zb[:, k] ** e
                    if b[k]:
                        term *= Zc[:, k] ** b[k]
                out[:, j] += term
        return out[0] if single else out

    def zz_hessian(self, z: np.ndarray) -> np.ndarray:
        """Mixed complex Hessian H[j, k] = d^2 rho / d z_j d zbar_k at one point."""
        z = np.asarray(z, dtype=complex)
        zc = z.conj()
        H = np.zeros((self.n, self.n), dtype=complex)
        for c, a, b in zip(self._coeff, self._a, self._b):
            for j in range(self.n):
                if not a[j]:
                    continue
                for k in range(self.n):
                    if not b[k]:
                        continue
                    term = c * a[j] * b[k]
                    for l in range(self.n):
                        ea = a[l] - (1 if l == j else 0)
                        eb = b[l] - (1 if l == k else 0)
                        if ea:
                            term *= z[l] ** ea
                        if eb:
                            term *= zc[l] ** eb
                    H[j, k] += term
        return H

    def to_json_terms(self) -> list[dict]:
        return [
            {"coeff": str(c), "z_exponents": list(a), "zbar_exponents": list(b)}
            for (a, b), c in self.terms.items()
        ]


def holomorphic_power_terms(poly: dict[tuple, Fraction], n: int, power: int) -> dict:
    """Expand |p|^(2 power) for a holomorphic polynomial p into (a, b) terms."""

    def multiply(u, v):
        out: dict[tuple, Fraction] = {}
        for ea, ca in u.items():
            for eb, cb in v.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, Fraction(0)) + ca * cb
        return out

    p_pow = {tuple([0] * n): Fraction(1)}
    for _ in range(power):
        p_pow = multiply(p_pow, poly)
    terms: dict[tuple, Fraction] = {}
    for ea, ca in p_pow.items():
        for eb, cb in p_pow.items():
            key = (ea, eb)
            terms[key] = terms.get(key, Fraction(0)) + ca * cb
    return terms


@dataclass(frozen=True, eq=False)
class SurfacePoint:
    """A validated point of X; coordinates in C^n plus |rho| residual."""

    coordinates: np.ndarray
    residual: float

    def __post_init__(self):
        object.__setattr__(
            self, "coordinates", np.asarray(self.coordinates, dtype=complex)
        )


@dataclass(frozen=True)
class StratumInfo:
    order: int
    support: tuple[int, ...]
    near_stratum: bool


@dataclass(frozen=True)
class StrataOrders:
    """Stabilizer orders realized on X, with their certifying support patterns."""

    orders: tuple[int, ...]
    unconfirmed: tuple[int, ...]
    support_patterns: tuple[tuple[tuple[int, ...], int], ...]

    @property
    def max_order(self) -> int:
        return max(self.orders + self.unconfirmed)

    def singular_patterns(self) -> list[tuple[tuple[int, ...], int]]:
        return [(s, k) for s, k in self.support_patterns if k > 1]


@dataclass(frozen=True)
class LeviData:
    """Levi form data at a point, in the compliant-metric normalization."""

    eigenvalues: tuple[float, ...]
    determinant: float
    contact_scale: float
    volume_density: float


class Manifold:
    """Circle-invariant hypersurface {rho = 0} with a diagonal action."""

    def __init__(
        self,
        n: int,
        weights: WeightVector | Sequence[int],
        rho: DefiningPolynomial,
        kind: str = "hypersurface",
        surface_tolerance: float = 1e-8,
    ):
        if n < 2:
            raise ValueError(f"ambient dimension must be >= 2, got {n}")
        if kind not in ("sphere", "hypersurface"):
            raise ValueError(f"unknown kind {kind!r}")
        self.n = n
        self.warnings: list[str] = []
        if not isinstance(weights, WeightVector):
            weights, divisor = WeightVector.normalized(weights)
        else:
            weights, divisor = WeightVector.normalized(weights.weights)
        if divisor > 1:
            msg = f"weights had common factor {divisor}; normalized to {weights.weights}"
            self.warnings.append(msg)
            warnings.warn(msg)
        if len(weights) != n:
            raise ValueError("weights length must equal n")
        self.weights = weights
        self.weight_divisor = divisor
        self.rho = rho
        rho.check_invariance(weights)
        self.kind = kind
        self.surface_tolerance = float(surface_tolerance)

    # -- construction -----------------------------------------------------

    @classmethod
    def sphere(cls, n: int, weights: Sequence[int] | None = None) -> "Manifold":
        """Unit sphere |z|^2 = 1 with the given rotation weights."""
        weights = tuple(weights) if weights is not None else tuple([1] * n)
        terms: dict[tuple, Fraction] = {}
        for j in range(n):
            e = tuple(1 if k == j else 0 for k in range(n))
            terms[(e, e)] = Fraction(1)
        zero = tuple([0] * n)
        terms[(zero, zero)] = Fraction(-1)
        return cls(n, weights, DefiningPolynomial(n, terms), kind="sphere")

    @classmethod
    def invariant_hypersurface_example(cls) -> "Manifold":
        """|z1|^2+|z2|^2+|z3|^2+|z1^2+z2|^4+|z2^3+z3|^6 = 1, weights (1, 2, 6)."""
        n = 3
        terms: dict[tuple, Fraction] = {}

        def add(extra):
            for k, c in extra.items():
                terms[k] = terms.get(k, Fraction(0)) + c

        for j in range(n):
            e = tuple(1 if k == j else 0 for k in range(n))
            add({(e, e): Fraction(1)})
        add(holomorphic_power_terms({(2, 0, 0): Fraction(1), (0, 1, 0): Fraction(1)}, n, 2))
        add(holomorphic_power_terms({(0, 3, 0): Fraction(1), (0, 0, 1): Fraction(1)}, n, 3))
        zero = (0,) * n
        add({(zero, zero): Fraction(-1)})
        return cls(n, (1, 2, 6), DefiningPolynomial(n, terms), kind="hypersurface")

    @classmethod
    def from_spec(cls, spec: dict) -> "Manifold":
        """Build from the JSON manifold description (see README for the schema)."""
        n = int(spec["n"])
        weights = [int(w) for w in spec["weights"]]
        terms: dict[tuple, Fraction] = {}
        for t in spec["rho"]:
            key = (tuple(t["z_exponents"]), tuple(t["zbar_exponents"]))
            terms[key] = terms.get(key, Fraction(0)) + Fraction(str(t["coeff"]))
        kind = spec.get("kind", "hypersurface")
        return cls(n, weights, DefiningPolynomial(n, terms), kind=kind)

    def to_spec(self) -> dict:
        return {
            "n": self.n,
            "weights": list(self.weights.weights),
            "kind": self.kind,
            "rho": self.rho.to_json_terms(),
        }

    @property
    def content_hash(self) -> str:
        blob = json.dumps(self.to_spec(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    # -- points and the action --------------------------------------------

    def point(self, coordinates) -> SurfacePoint:
        Z = np.asarray(coordinates, dtype=complex)
        if Z.shape != (self.n,):
            raise ValueError(f"expected {self.n} coordinates, got shape {Z.shape}")
        residual = abs(float(self.rho.value(Z)))
        if residual > self.surface_tolerance:
            raise NotOnSurfaceError(
                f"|rho(x)| = {residual:.3e} exceeds tolerance {self.surface_tolerance:.1e}"
            )
        return SurfacePoint(Z, residual)

    def act(self, theta: float, x: SurfacePoint) -> SurfacePoint:
        Z = x.coordinates * self.weights.phases(theta)
        return SurfacePoint(Z, abs(float(self.rho.value(Z))))

    def act_coordinates(self, theta, Z: np.ndarray) -> np.ndarray:
        """Rotate raw coordinates; theta may be scalar or an array broadcast over rows."""
        theta = np.asarray(theta, dtype=float)
        phases = np.exp(1j * np.multiply.outer(theta, self.weights.array.astype(float)))
        return Z * phases

    def reeb_vector(self, x: SurfacePoint) -> np.ndarray:
        """Generator of the action at x: d/dtheta of the orbit, i * (w_j x_j)."""
        return 1j * self.weights.array * x.coordinates

    def stratum_info(self, x: SurfacePoint, zero_tolerance: float = ZERO_TOLERANCE) -> StratumInfo:
        mags = np.abs(x.coordinates)
        support = tuple(int(j) for j in np.nonzero(mags > zero_tolerance)[0])
        if not support:
            raise NotOnSurfaceError("all coordinates vanish; the origin is not on X")
        near = bool(np.any((mags > zero_tolerance) & (mags < NEAR_STRATUM_TOLERANCE)))
        order = math.gcd(*(self.weights.weights[j] for j in support))
        return StratumInfo(order, support, near)

    def stratum_order(self, x: SurfacePoint, zero_tolerance: float = ZERO_TOLERANCE) -> int:
        """Least k with e^{2 pi i / k} . x = x: the gcd of weights on the support of x."""
        return self.stratum_info(x, zero_tolerance).order

    def strata_orders(self, samples: int = 32, seed: int = 0) -> StrataOrders:
        """Stabilizer orders realized by points of X.

        Candidate orders are gcds of nonempty weight subsets.  On a sphere
        every support pattern is realizable; on a general hypersurface each
        pattern is certified by finding a point of X supported exactly there
        (radial root along directions in the coordinate subspace).  Patterns
        that fail certification are reported as unconfirmed, not dropped.
        """
        n = self.n
        patterns: list[tuple[tuple[int, ...], int]] = []
        unconfirmed_orders: set[int] = set()
        confirmed_orders: set[int] = set()
        rng = np.random.Generator(np.random.Philox(seed))
        for mask in range(1, 2**n):
            support = tuple(j for j in range(n) if mask >> j & 1)
            k = math.gcd(*(self.weights.weights[j] for j in support))
            if self.kind == "sphere":
                patterns.append((support, k))
                confirmed_orders.add(k)
                continue
            found = False
            for _ in range(samples):
                u = np.zeros(n, dtype=complex)
                g = rng.normal(size=(len(support), 2))
                u[list(support)] = g[:, 0] + 1j * g[:, 1]
                norm = np.linalg.norm(u)
                if norm < 1e-12 or np.min(np.abs(u[list(support)])) < 0.05 * norm:
                    continue
                u /= norm
                t = self._radial_root_single(u)
                if t is not None:
                    patterns.append((support, k))
                    confirmed_orders.add(k)
                    found = True
                    break
            if not found:
                unconfirmed_orders.add(k)
        unconfirmed_orders -= confirmed_orders
        return StrataOrders(
            tuple(sorted(confirmed_orders)),
            tuple(sorted(unconfirmed_orders)),
            tuple(patterns),
        )

    def _radial_root_single(self, u: np.ndarray, t_max: float = 8.0):
        """First positive root of rho(t u) along the ray, or None."""
        lo, hi = 0.0, 1.0
        f_lo = float(self.rho.value(np.zeros(self.n)))
        if f_lo >= 0:
            return None
        while float(self.rho.value(hi * u)) < 0:
            lo = hi
            hi *= 2.0
            if hi > t_max:
                return None
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if float(self.rho.value(mid * u)) < 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-13 * max(1.0, hi):
                break
        return 0.5 * (lo + hi)

    # -- tangent structure -------------------------------------------------

    def holomorphic_tangent_frame(self, x: SurfacePoint) -> np.ndarray:
        """Orthonormal rows xi with sum_j (d rho/d z_j) xi_j = 0; shape (n-1, n)."""
        rho_z = self.rho.z_gradient(x.coordinates)
        if np.linalg.norm(rho_z) < 1e-10:
            raise SingularPointError("d rho vanishes at the requested point")
        _, _, vh = np.linalg.svd(rho_z.reshape(1, self.n), full_matrices=True)
        return vh[1:].conj()

    def transversal_pairing(self, Z: np.ndarray) -> np.ndarray:
        """Re sum_j w_j z_j (d rho / d z_j); positive on X by transversality.

        This is the pairing of Im(d_z rho) with the rotation field, i.e. the
        reciprocal of the contact normalization.
        """
        rho_z = self.rho.z_gradient(Z)
        val = np.sum(self.weights.array * np.asarray(Z, dtype=complex) * rho_z, axis=-1)
        return val.real

    def contact_scale(self, x: SurfacePoint) -> float:
        denom = float(self.transversal_pairing(x.coordinates))
        if denom <= 0:
            raise TransversalityError(
                f"rotation field degenerate against d rho (pairing {denom:.3e})"
            )
        return -1.0 / denom

    def contact_form(self, x: SurfacePoint, v: np.ndarray) -> float:
        """Contact form on a real tangent vector v (complex representation)."""
        rho_z = self.rho.z_gradient(x.coordinates)
        return self.contact_scale(x) * float(np.imag(np.sum(rho_z * np.asarray(v))))

    def levi_form(self, x: SurfacePoint) -> LeviData:
        """Levi form eigenvalues at x with respect to the compliant metric.

        The matrix is the mixed Hessian of rho restricted to an orthonormal
        frame of H, divided by the transversal pairing.  That normalization
        makes the contact form evaluate to -1 on the rotation field, and on
        the standard sphere every eigenvalue equals 1.
        """
        M = self.levi_matrix(x)
        eigs = np.linalg.eigvalsh(M)
        if eigs[0] <= 0:
            raise PseudoconvexityError(
                f"Levi eigenvalue {eigs[0]:.3e} <= 0 at {x.coordinates}"
            )
        return LeviData(
            eigenvalues=tuple(float(e) for e in eigs),
            determinant=float(np.prod(eigs)),
            contact_scale=self.contact_scale(x),
            volume_density=self.volume_density(x),
        )

    def levi_matrix(self, x: SurfacePoint) -> np.ndarray:
        frame = self.holomorphic_tangent_frame(x)
        hess = self.rho.zz_hessian(x.coordinates)
        denom = float(self.transversal_pairing(x.coordinates))
        if denom <= 0:
            raise TransversalityError(f"transversal pairing {denom:.3e} <= 0")
        return frame @ hess @ frame.conj().T / denom

    def volume_density(self, x: SurfacePoint) -> float:
        """Compliant-metric volume density relative to Euclidean surface measure.

        Computed as the Gram-determinant ratio over a real frame of the
        tangent space: Euclidean inner products on one side, the compliant
        metric (Euclidean on H, unit rotation field orthogonal to H) on the
        other.
        """
        frame = self.holomorphic_tangent_frame(x)
        T = self.reeb_vector(x)
        rho_z = self.rho.z_gradient(x.coordinates)
        scale = self.contact_scale(x)
        real_frame = [row for row in frame] + [1j * row for row in frame] + [T]
        dim = len(real_frame)
        G_e = np.empty((dim, dim))
        G_g = np.empty((dim, dim))
        # T-component of a tangent vector is -omega0(v); the remainder lies in H.
        comps = []
        for v in real_frame:
            a = -scale * float(np.imag(np.sum(rho_z * v)))
            comps.append((v - a * T, a))
        for i, (hi, ai) in enumerate(comps):
            for j, (hj, aj) in enumerate(comps):
                G_e[i, j] = float(np.real(np.vdot(real_frame[j], real_frame[i])))
                G_g[i, j] = float(np.real(np.vdot(hj, hi))) + ai * aj
        det_e = np.linalg.det(G_e)
        det_g = np.linalg.det(G_g)
        if det_e <= 0 or det_g <= 0:
            raise SingularPointError("degenerate tangent frame in volume density")
        return math.sqrt(det_g / det_e)

    # -- orbit distance ----------------------------------------------------

    def quotient_distance(self, x: SurfacePoint, y: SurfacePoint) -> float:
        """min over theta of |x - e^{i theta}.y| (Euclidean, dense grid + refinement)."""
        d, _ = self.orbit_distance_batch(
            x.coordinates[None, :], y.coordinates[None, :]
        )
        return float(d[0])

    def orbit_distance_batch(
        self, X: np.ndarray, Y: np.ndarray, grid: int = 720, refine_iters: int = 64
    ) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized orbit distance for row-paired points; returns (dist, theta*).

        |x - e^{i theta}.y|^2 is a trigonometric polynomial in theta; a dense
        grid brackets the minimum and golden-section refinement locates it to
        ~1e-10 in theta.
        """
        X = np.asarray(X, dtype=complex)
        Y = np.asarray(Y, dtype=complex)
        c = X.conj() * Y  # (P, n)
        const = np.sum(np.abs(X) ** 2 + np.abs(Y) ** 2, axis=1)
        thetas = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
        phase = np.exp(1j * np.outer(self.weights.array.astype(float), thetas))

        def sqdist(theta_arr):
            # theta_arr: (P,) -> squared distances (P,)
            ph = np.exp(1j * np.outer(theta_arr, self.weights.array.astype(float)))
            return const - 2.0 * np.sum(c * ph, axis=1).real

        vals = const[:, None] - 2.0 * (c @ phase).real  # (P, grid)
        best = np.argmin(vals, axis=1)
        h = 2 * np.pi / grid
        a = thetas[best] - h
        b = thetas[best] + h
        invphi = (math.sqrt(5) - 1) / 2
        x1 = b - invphi * (b - a)
        x2 = a + invphi * (b - a)
        f1 = sqdist(x1)
        f2 = sqdist(x2)
        for _ in range(refine_iters):
            take1 = f1 < f2
            b = np.where(take1, x2, b)
            a = np.where(take1, a, x1)
            x1_new = np.where(take1, b - invphi * (b - a), x2)
            x2_new = np.where(take1, x1, a + invphi * (b - a))
            f_new = sqdist(np.where(take1, x1_new, x2_new))
            f1, f2 = np.where(take1, f_new, f2), np.where(take1, f1, f_new)
            x1, x2 = x1_new, x2_new
        theta_star = 0.5 * (a + b)
        # Newton polish on the derivative 2 Im sum(w_j c_j e^{i w_j theta});
        # unlike the squared distance it crosses zero linearly at the optimum,
        # so the angle resolves to machine precision instead of ~sqrt(eps)
        w = self.weights.array.astype(float)
        for _ in range(4):
            ph = np.exp(1j * np.outer(theta_star, w))
            g = 2.0 * np.sum(c * ph * w, axis=1).imag
            gp = 2.0 * np.sum(c * ph * w**2, axis=1).real
            safe = np.abs(gp) > 1e-30
            step = np.where(safe, g / np.where(safe, gp, 1.0), 0.0)
            theta_star = np.where(np.abs(step) < h, theta_star - step, theta_star)
        # the difference form below is free of the cancellation that floors
        # const - 2 Re(...) at ~1e-8
        diff = X - Y * np.exp(1j * np.outer(theta_star, w))
        dist = np.linalg.norm(diff, axis=1)
        diff_grid = X - Y * np.exp(1j * np.outer(thetas[best], w))
        dist_grid = np.linalg.norm(diff_grid, axis=1)
        use_grid = dist_grid < dist
        dist = np.where(use_grid, dist_grid, dist)
        theta_star = np.where(use_grid, thetas[best], theta_star)
        return dist, np.mod(theta_star, 2 * np.pi)


def levi_bracket_oracle(M: Manifold, x: SurfacePoint, step: float = 1e-4) -> np.ndarray:
    """Levi matrix at x from numerically bracketed frame fields.

    Each frame vector is extended to a neighborhood by projecting the constant
    ambient vector onto ker(d_z rho); the Lie bracket of the extended field
    with the conjugate of another is formed by central finite differences and
    paired with the contact form.  Independent of the Hessian route except for
    first derivatives of rho.
    """
    z0 = x.coordinates
    n = M.n
    frame = M.holomorphic_tangent_frame(x)
    rho_z0 = M.rho.z_gradient(z0)
    denom = float(M.transversal_pairing(z0))

    def field(zpt: np.ndarray) -> np.ndarray:
        # rows: projection of each frame vector onto ker d_z rho at zpt
        g = M.rho.z_gradient(zpt).conj()
        g2 = np.vdot(g, g).real
        return frame - np.outer(frame @ g.conj(), g) / g2

    # d(field)/d zbar_k via central differences in the real coordinates
    Jzbar = np.zeros((n - 1, n, n), dtype=complex)  # [a, j, k]
    for k in range(n):
        for direction, im in ((1.0, False), (1j, True)):
            dz = np.zeros(n, dtype=complex)
            dz[k] = direction * step
            d_real = (field(z0 + dz) - field(z0 - dz)) / (2 * step)
            # d/d zbar = (d/dx + i d/dy) / 2
            Jzbar[:, :, k] += (1j * d_real if im else d_real) / 2.0

    H = np.zeros((n - 1, n - 1), dtype=complex)
    for a in range(n - 1):
        for b in range(n - 1):
            first = np.einsum("j,k,jk->", rho_z0, frame[b].conj(), Jzbar[a])
            second = np.einsum("k,j,kj->", rho_z0.conj(), frame[a], Jzbar[b].conj())
            H[a, b] = (-first - second) / (2.0 * denom)
    return H
