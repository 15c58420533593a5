"""Convex-body and star-body models.

Every body evaluates its support function h(K, x) = max over y in K of
<x, y> on arbitrary direction arrays through the positively homogeneous
extension, so sublinearity checks and change-of-variables integrands can
feed non-unit vectors directly.  Bodies are immutable values; evaluation
is pure.

Variants
--------
Polytope, Ball, Ellipsoid, Segment
    Closed-form supports.
HarmonicBody
    c + (band-limited harmonic part); validated as an actual support
    function at construction by a dense sublinearity check.
MinkowskiCombination
    Weighted sum of rotated copies, h = sum w_k h(K_k, rho_k^T x).
LinearImage
    h(A K, x) = h(K, A^T x) for invertible A.
PlanarLift / PlanarShadow
    A planar body placed in the x1-x2 plane of space, and the orthogonal
    projection of a spatial body onto a coordinate plane.  These carry
    the embedding and projection operations; they are runtime-only and
    are not part of the on-disk body schema.

Star bodies (positive radial functions) are available for balls,
ellipsoids, polytopes with the origin interior, and linear images of
those; the radial function extends (-1)-homogeneously.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import BodyError, SingularMatrixError
from .harmonics import HarmonicExpansion, check_rotation
from .quadrature import build_sphere_quadrature

SUBLINEARITY_SLACK = 1e-10
_SUBLINEARITY_PAIRS = 10_000


def _as_directions(x, dimension):
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != dimension:
        raise ValueError(f"expected directions of dimension {dimension}, got shape {arr.shape}")
    return arr, single


class ConvexBody:
    """Base class; subclasses implement ``support_vector``."""

    dimension: int

    def support_vector(self, directions):
        """Support values at an (P, n) array of directions (1-homogeneous)."""
        raise NotImplementedError

    def support(self, direction):
        """Support value at a single direction."""
        arr, _ = _as_directions(direction, self.dimension)
        return float(self.support_vector(arr)[0])


@dataclass(frozen=True, eq=False)
class Polytope(ConvexBody):
    vertices: np.ndarray  # (V, n)

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if v.size == 0:
            raise BodyError("a polytope needs at least one vertex")
        if v.shape[1] not in (2, 3):
            raise BodyError(f"polytope vertices must live in dimension 2 or 3, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def dimension(self):
        return self.vertices.shape[1]

    def support_vector(self, directions):
        arr, _ = _as_directions(directions, self.dimension)
        return (arr @ self.vertices.T).max(axis=1)


@dataclass(frozen=True, eq=False)
class Segment(ConvexBody):
    start: np.ndarray
    end: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.start, dtype=float).reshape(-1)
        q = np.asarray(self.end, dtype=float).reshape(-1)
        if p.shape != q.shape or p.shape[0] not in (2, 3):
            raise BodyError(f"segment endpoints must share dimension 2 or 3, got {p.shape}, {q.shape}")
        p.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "start", p)
        object.__setattr__(self, "end", q)

    @property
    def dimension(self):
        return self.start.shape[0]

    def support_vector(self, directions):
        arr, _ = _as_directions(directions, self.dimension)
        return np.maximum(arr @ self.start, arr @ self.end)


@dataclass(frozen=True, eq=False)
class Ball(ConvexBody):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        if c.shape[0] not in (2, 3):
            raise BodyError(f"ball center must have dimension 2 or 3, got {c.shape}")
        if not self.radius > 0.0:
            raise BodyError(f"ball radius must be positive, got {self.radius}")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dimension(self):
        return self.center.shape[0]

    def support_vector(self, directions):
        arr, _ = _as_directions(directions, self.dimension)
        return self.radius * np.linalg.norm(arr, axis=1) + arr @ self.center


@dataclass(frozen=True, eq=False)
class Ellipsoid(ConvexBody):
    """Origin-centered ellipsoid with h(u) = sqrt(u^T M u), M positive definite."""

    shape: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.shape, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 3):
            raise BodyError(f"shape matrix must be square of size 2 or 3, got {m.shape}")
        if not np.allclose(m, m.T, atol=1e-12):
            raise BodyError("shape matrix must be symmetric")
        eigvals = np.linalg.eigvalsh(m)
        if eigvals.min() <= 0.0:
            raise BodyError("shape matrix must be positive definite")
        m.setflags(write=False)
        object.__setattr__(self, "shape", m)

    @property
    def dimension(self):
        return self.shape.shape[0]

    def support_vector(self, directions):
        arr, _ = _as_directions(directions, self.dimension)
        quad = np.einsum("pi,ij,pj->p", arr, self.shape, arr)
        return np.sqrt(np.clip(quad, 0.0, None))


@dataclass(frozen=True, eq=False)
class HarmonicBody(ConvexBody):
    """Body with support function c + (harmonic part) on unit vectors."""

    constant: float
    terms: HarmonicExpansion

    def __post_init__(self):
        object.__setattr__(self, "constant", float(self.constant))
        _check_harmonic_support(self)

    @property
    def dimension(self):
        return self.terms.dimension

    def support_vector(self, directions):
        arr, _ = _as_directions(directions, self.dimension)
        norms = np.linalg.norm(arr, axis=1)
        out = np.zeros(arr.shape[0])
        mask = norms > 0.0
        if np.any(mask):
            unit = arr[mask] / norms[mask, None]
            out[mask] = norms[mask] * (self.constant + self.terms.evaluate(unit))
        return out


@dataclass(frozen=True, eq=False)
class MinkowskiCombination(ConvexBody):
    """Weighted Minkowski sum of rotated copies: sum_k w_k rho_k K_k.

    Parts are (weight, rotation, body) triples with weights >= 0.  An
    empty part list is the origin (support identically zero); the
    shared dimension must then be supplied.
    """

    parts: tuple
    _dimension: int = 0

    def __post_init__(self):
        cleaned = []
        dim = self._dimension
        for entry in self.parts:
            weight, rotation, body = entry
            weight = float(weight)
            if weight < 0.0:
                raise BodyError(f"combination weights must be >= 0, got {weight}")
            rho = check_rotation(rotation, body.dimension)
            if dim and body.dimension != dim:
                raise BodyError("all parts of a combination must share one dimension")
            dim = body.dimension
            cleaned.append((weight, rho, body))
        if not dim:
            raise BodyError("an empty combination needs an explicit dimension")
        object.__setattr__(self, "parts", tuple(cleaned))
        object.__setattr__(self, "_dimension", dim)

    @property
    def dimension(self):
        return self._dimension

    def support_vector(self, directions):
        arr, _ = _as_directions(directions, self.dimension)
        out = np.zeros(arr.shape[0])
        for weight, rho, body in self.parts:
            out += weight * body.support_vector(arr @ rho)
        return out


@dataclass(frozen=True, eq=False)
class LinearImage(ConvexBody):
    """Image A K of a body under an invertible linear map."""

    matrix: np.ndarray
    base: ConvexBody

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        n = self.base.dimension
        if a.shape != (n, n):
            raise BodyError(f"matrix must be {n}x{n}, got {a.shape}")
        if abs(np.linalg.det(a)) < 1e-14:
            raise SingularMatrixError("linear image requires an invertible matrix")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def dimension(self):
        return self.base.dimension

    def support_vector(self, directions):
        arr, _ = _as_directions(directions, self.dimension)
        return self.base.support_vector(arr @ self.matrix)


@dataclass(frozen=True, eq=False)
class PlanarLift(ConvexBody):
    """A planar body regarded as a subset of the x1-x2 plane in space."""

    base: ConvexBody

    def __post_init__(self):
        if self.base.dimension != 2:
            raise BodyError("only planar bodies can be lifted into space")

    @property
    def dimension(self):
        return 3

    def support_vector(self, directions):
        arr, _ = _as_directions(directions, 3)
        return self.base.support_vector(arr[:, :2])


@dataclass(frozen=True, eq=False)
class PlanarShadow(ConvexBody):
    """Orthogonal projection of a spatial body onto a coordinate plane."""

    base: ConvexBody
    axes: tuple = (0, 1)

    def __post_init__(self):
        if self.base.dimension != 3:
            raise BodyError("shadows are defined for spatial bodies")
        axes = tuple(int(a) for a in self.axes)
        if len(axes) != 2 or len(set(axes)) != 2 or not all(0 <= a < 3 for a in axes):
            raise BodyError(f"axes must be two distinct indices in 0..2, got {self.axes}")
        object.__setattr__(self, "axes", axes)

    @property
    def dimension(self):
        return 2

    def support_vector(self, directions):
        arr, _ = _as_directions(directions, 2)
        lifted = np.zeros((arr.shape[0], 3))
        lifted[:, self.axes[0]] = arr[:, 0]
        lifted[:, self.axes[1]] = arr[:, 1]
        return self.base.support_vector(lifted)


# ---------------------------------------------------------------------------
# constructors and helpers


def _sublinearity_pairs(dimension, count=_SUBLINEARITY_PAIRS):
    if dimension == 2:
        k = int(np.ceil(np.sqrt(count)))
        phi = 2.0 * np.pi * np.arange(k) / k
        u = np.column_stack([np.cos(phi), np.sin(phi)])
        iu, iv = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
        return u[iu.reshape(-1)], u[iv.reshape(-1)]
    rng = np.random.default_rng(20240117)  # fixed seed: construction is deterministic
    a = rng.normal(size=(count, 3))
    b = rng.normal(size=(count, 3))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    return a, b


def _check_harmonic_support(body):
    u, v = _sublinearity_pairs(body.dimension)
    hu = body.support_vector(u)
    hv = body.support_vector(v)
    huv = body.support_vector(u + v)
    worst = float(np.max(huv - hu - hv))
    if worst > SUBLINEARITY_SLACK:
        raise BodyError(
            "harmonic data does not define a support function "
            f"(sublinearity violated by {worst:.3e}); increase the constant term"
        )


def harmonic_body_with_fitted_constant(terms, ladder=(1.0, 2.0, 4.0, 8.0)):
    """Build a HarmonicBody, picking the smallest workable constant.

    Tries c = step * max|terms| over the given ladder and returns the
    first body passing the construction-time sublinearity check.
    """
    grid = build_sphere_quadrature(terms.dimension, 256).nodes
    peak = float(np.max(np.abs(terms.evaluate(grid))))
    if peak == 0.0:
        raise BodyError("terms are identically zero; choose a ball instead")
    last_error = None
    for step in ladder:
        try:
            return HarmonicBody(step * peak, terms)
        except BodyError as exc:
            last_error = exc
    raise BodyError(f"no constant in ladder {ladder} makes the terms a support function") from last_error


def translate(body, shift):
    """Minkowski translate body + {shift}."""
    shift = np.asarray(shift, dtype=float).reshape(-1)
    eye = np.eye(body.dimension)
    return MinkowskiCombination(((1.0, eye, body), (1.0, eye, Polytope(shift[None, :]))))


def rotate(body, rotation):
    """Rotated copy rho K."""
    return MinkowskiCombination(((1.0, rotation, body),))


def scale(body, factor):
    """Dilate lambda K, lambda >= 0."""
    return MinkowskiCombination(((float(factor), np.eye(body.dimension), body),))


def apply_linear_map(body, matrix):
    """Materialize A K with variant-specific formulas where they exist.

    Falls back to a LinearImage wrapper for harmonic bodies and other
    wrapped variants; used as the independent code path in equivariance
    tests.
    """
    a = np.asarray(matrix, dtype=float)
    if abs(np.linalg.det(a)) < 1e-14:
        raise SingularMatrixError("cannot apply a singular matrix to a body")
    if isinstance(body, Polytope):
        return Polytope(body.vertices @ a.T)
    if isinstance(body, Segment):
        return Segment(a @ body.start, a @ body.end)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(a @ body.shape @ a.T)
    if isinstance(body, Ball):
        shifted = Ellipsoid(body.radius**2 * (a @ a.T))
        return translate(shifted, a @ body.center)
    return LinearImage(a, body)


def embed_in_3d(body):
    """Place a planar body into the x1-x2 plane of space.

    Polytopes and segments embed by appending a zero coordinate; other
    variants are wrapped, the support extending by h(u) = |p| *
    h_2d(p / |p|) with p the planar part of u.
    """
    if body.dimension != 2:
        raise BodyError("embedding expects a planar body")
    if isinstance(body, Polytope):
        v = body.vertices
        return Polytope(np.column_stack([v, np.zeros(v.shape[0])]))
    if isinstance(body, Segment):
        return Segment(np.append(body.start, 0.0), np.append(body.end, 0.0))
    return PlanarLift(body)


def project_to_plane(body, axes=(0, 1)):
    """Orthogonal shadow of a spatial body on a coordinate plane.

    The shadow's support function is the restriction of the body's to
    directions inside the plane.  Vertex-based variants project their
    data; balls and ellipsoids restrict their closed forms; everything
    else is wrapped.
    """
    if body.dimension != 3:
        raise BodyError("projection expects a spatial body")
    axes = tuple(int(a) for a in axes)
    if len(axes) != 2 or len(set(axes)) != 2 or not all(0 <= a < 3 for a in axes):
        raise BodyError(f"axes must be two distinct indices in 0..2, got {axes}")
    if isinstance(body, Polytope):
        return Polytope(body.vertices[:, axes])
    if isinstance(body, Segment):
        return Segment(body.start[list(axes)], body.end[list(axes)])
    if isinstance(body, Ball):
        return Ball(body.center[list(axes)], body.radius)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(body.shape[np.ix_(axes, axes)])
    return PlanarShadow(body, axes)


def bodies_equal(a, b):
    """Structural equality of body descriptions (exact array comparison)."""
    if type(a) is not type(b):
        return False
    if isinstance(a, Polytope):
        return a.vertices.shape == b.vertices.shape and np.array_equal(a.vertices, b.vertices)
    if isinstance(a, Segment):
        return np.array_equal(a.start, b.start) and np.array_equal(a.end, b.end)
    if isinstance(a, Ball):
        return np.array_equal(a.center, b.center) and a.radius == b.radius
    if isinstance(a, Ellipsoid):
        return np.array_equal(a.shape, b.shape)
    if isinstance(a, HarmonicBody):
        if a.constant != b.constant or a.terms.dimension != b.terms.dimension:
            return False
        if a.terms.max_order != b.terms.max_order:
            return False
        orders = set(a.terms.blocks) | set(b.terms.blocks)
        return all(np.array_equal(a.terms.block(m), b.terms.block(m)) for m in orders)
    if isinstance(a, MinkowskiCombination):
        if len(a.parts) != len(b.parts):
            return False
        return all(
            wa == wb and np.array_equal(ra, rb) and bodies_equal(ka, kb)
            for (wa, ra, ka), (wb, rb, kb) in zip(a.parts, b.parts)
        )
    if isinstance(a, LinearImage):
        return np.array_equal(a.matrix, b.matrix) and bodies_equal(a.base, b.base)
    if isinstance(a, PlanarLift):
        return bodies_equal(a.base, b.base)
    if isinstance(a, PlanarShadow):
        return a.axes == b.axes and bodies_equal(a.base, b.base)
    return NotImplemented


# ---------------------------------------------------------------------------
# star bodies and the dual mixed volume


@dataclass(frozen=True, eq=False)
class StarBody:
    """Star-shaped body given by a positive radial function.

    ``radial_vector`` evaluates the (-1)-homogeneous extension of the
    radial function on arbitrary nonzero vectors.
    """

    dimension: int
    _radial: object

    def radial_vector(self, directions):
        arr, _ = _as_directions(directions, self.dimension)
        return self._radial(arr)

    def radial(self, direction):
        arr, _ = _as_directions(direction, self.dimension)
        return float(self._radial(arr)[0])

    def linear_image(self, matrix):
        """Star body A K, using rho(A K, x) = rho(K, A^-1 x)."""
        a = np.asarray(matrix, dtype=float)
        if abs(np.linalg.det(a)) < 1e-14:
            raise SingularMatrixError("star-body image requires an invertible matrix")
        inv = np.linalg.inv(a)
        inner = self._radial
        return StarBody(self.dimension, lambda arr: inner(arr @ inv.T))


def star_body(body):
    """Radial representation of a convex body, where one exists.

    Supported: balls containing the origin, origin-centered ellipsoids,
    polytopes with the origin interior, and linear images of these.
    """
    if isinstance(body, Ball):
        c, r = body.center, body.radius
        if np.linalg.norm(c) >= r:
            raise BodyError("ball must contain the origin in its interior")

        def radial(arr):
            norms = np.linalg.norm(arr, axis=1)
            unit = arr / norms[:, None]
            proj = unit @ c
            return (proj + np.sqrt(proj**2 + r**2 - c @ c)) / norms

        return StarBody(body.dimension, radial)

    if isinstance(body, Ellipsoid):
        inv = np.linalg.inv(body.shape)

        def radial(arr):
            quad = np.einsum("pi,ij,pj->p", arr, inv, arr)
            return 1.0 / np.sqrt(quad)

        return StarBody(body.dimension, radial)

    if isinstance(body, (Polytope, Segment)):
        vertices = body.vertices if isinstance(body, Polytope) else np.vstack([body.start, body.end])
        try:
            hull = ConvexHull(vertices)
        except QhullError as exc:
            raise BodyError("degenerate polytope has no radial representation") from exc
        normals = hull.equations[:, :-1]
        offsets = -hull.equations[:, -1]
        if offsets.min() <= 1e-12:
            raise BodyError("polytope must contain the origin in its interior")

        def radial(arr):
            ratios = (arr @ normals.T) / offsets
            return 1.0 / ratios.max(axis=1)

        return StarBody(body.dimension, radial)

    if isinstance(body, LinearImage):
        return star_body(body.base).linear_image(body.matrix)

    raise BodyError(f"no radial representation for {type(body).__name__}")


def dual_mixed_volume_minus1(k_star, l_star, quadrature):
    """Dual mixed volume (1/n) * integral of rho_K^(n+1) / rho_L over the sphere."""
    if k_star.dimension != l_star.dimension:
        raise ValueError("star bodies must share a dimension")
    n = k_star.dimension
    if quadrature.dimension != n:
        raise ValueError("quadrature dimension does not match the bodies")
    rho_k = k_star.radial_vector(quadrature.nodes)
    rho_l = l_star.radial_vector(quadrature.nodes)
    if np.any(rho_k <= 0.0) or np.any(rho_l <= 0.0):
        raise BodyError("radial function must be positive at every node")
    return float(quadrature.weights @ (rho_k ** (n + 1) / rho_l)) / n


# ---------------------------------------------------------------------------
# linear change-of-variables identity


def transformation_identity_check(body, order, index, matrix, quadrature):
    """Evaluate both sides of the change-of-variables identity.

    For f the support function of ``body`` (degree 1 homogeneous) and g
    the degree -(n+1) homogeneous extension of the basis harmonic
    (order, index),

        integral f(A v) g(v) dsigma(v)
            = |det A|^-1 * integral f(v) g(A^-1 v) dsigma(v).

    Returns the quadrature values (lhs, rhs); callers assert closeness.
    """
    from .harmonics import basis_values

    a = np.asarray(matrix, dtype=float)
    n = body.dimension
    if a.shape != (n, n):
        raise ValueError(f"matrix must be {n}x{n}, got {a.shape}")
    det = np.linalg.det(a)
    if abs(det) < 1e-14:
        raise SingularMatrixError("identity check requires an invertible matrix")
    inv = np.linalg.inv(a)

    nodes = quadrature.nodes
    w = quadrature.weights
    y_unit = basis_values(n, order, nodes)[index - 1]
    lhs = float(w @ (body.support_vector(nodes @ a.T) * y_unit))

    pulled = nodes @ inv.T
    norms = np.linalg.norm(pulled, axis=1)
    y_pulled = basis_values(n, order, pulled / norms[:, None])[index - 1]
    g_pulled = y_pulled / norms ** (n + 1)
    rhs = float(w @ (body.support_vector(nodes) * g_pulled)) / abs(det)
    return lhs, rhs
