"""Real harmonic bases on the circle and the 2-sphere.

Basis convention (fixed once and never changed)
-----------------------------------------------
All bases are orthonormal for the inner product (f, g) = integral of f*g
over the sphere with the unnormalized surface measure.

dimension 2, order m, index j in 1..N(2, m):
    m = 0:  j=1 -> 1 / sqrt(2 pi)
    m >= 1: j=1 -> cos(m phi) / sqrt(pi),  j=2 -> sin(m phi) / sqrt(pi)

dimension 3, order m, index j in 1..N(3, m) = 2m + 1, with polar angle
theta measured from +z and azimuth phi:
    j = 1        -> zonal component  ~ P_m(cos theta)
    j = 2k, 2k+1 -> sectoral/tesseral pair ~ P_m^k(cos theta) * cos(k phi)
                    and ~ P_m^k(cos theta) * sin(k phi), k = 1..m,

each normalized to unit L2 norm.  Indices are 1-based throughout the
public interface, matching the (order, index) labels used in exported
coefficient tables.

Rotations act on functions by (rho f)(u) = f(rho^-1 u).  For every order
m the action restricts to an orthogonal matrix on the order-m subspace;
``rotation_matrix`` returns that matrix, column j holding the expansion
coefficients of the rotated j-th basis function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, lpmv

from .errors import DimensionError, InvalidRotationError
from .quadrature import OMEGA, build_sphere_quadrature

ROTATION_TOL = 1e-10


def harmonic_count(dimension, order):
    """Dimension N(n, m) of the order-m harmonic subspace."""
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    if dimension == 2:
        return 1 if order == 0 else 2
    if dimension == 3:
        return 2 * order + 1
    raise DimensionError(f"unsupported dimension {dimension}; expected 2 or 3")


def _as_points(points, dimension):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != dimension:
        raise ValueError(f"expected points of dimension {dimension}, got shape {pts.shape}")
    return pts


@lru_cache(maxsize=None)
def _legendre_norm(order, k):
    # L2 normalization of sqrt(2) * P_m^k(cos theta) * cos/sin(k phi) on S^2.
    return np.sqrt(
        (2 * order + 1) / (2.0 * np.pi) * np.exp(gammaln(order - k + 1) - gammaln(order + k + 1))
    )


def basis_values(dimension, order, points):
    """Evaluate all order-m basis functions at unit vectors.

    Parameters
    ----------
    dimension : int
    order : int
    points : ndarray, shape (P, dimension)
        Unit vectors.

    Returns
    -------
    ndarray, shape (N(n, m), P)
        Row j-1 holds the values of the basis function with index j.
    """
    pts = _as_points(points, dimension)
    n = harmonic_count(dimension, order)
    out = np.empty((n, pts.shape[0]))
    if dimension == 2:
        if order == 0:
            out[0] = 1.0 / np.sqrt(2.0 * np.pi)
            return out
        phi = np.arctan2(pts[:, 1], pts[:, 0])
        out[0] = np.cos(order * phi) / np.sqrt(np.pi)
        out[1] = np.sin(order * phi) / np.sqrt(np.pi)
        return out

    z = np.clip(pts[:, 2], -1.0, 1.0)
    if order == 0:
        out[0] = 1.0 / np.sqrt(4.0 * np.pi)
        return out
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    out[0] = np.sqrt((2 * order + 1) / (4.0 * np.pi)) * lpmv(0, order, z)
    for k in range(1, order + 1):
        radial = _legendre_norm(order, k) * lpmv(k, order, z)
        out[2 * k - 1] = radial * np.cos(k * phi)
        out[2 * k] = radial * np.sin(k * phi)
    return out


def eval_harmonic(dimension, order, index, point):
    """Value of the basis function (order, index) at a unit vector.

    ``index`` is 1-based; the point is normalized defensively.
    """
    n = harmonic_count(dimension, order)
    if not 1 <= index <= n:
        raise ValueError(f"index {index} out of range 1..{n} for order {order}")
    p = np.asarray(point, dtype=float)
    norm = np.linalg.norm(p)
    if norm == 0.0:
        raise ValueError("cannot evaluate a harmonic at the zero vector")
    return float(basis_values(dimension, order, (p / norm)[None, :])[index - 1, 0])


def check_rotation(matrix, dimension=None):
    """Validate a proper rotation matrix and return it as a float array."""
    rho = np.asarray(matrix, dtype=float)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidRotationError(f"rotation must be a square matrix, got shape {rho.shape}")
    if dimension is not None and rho.shape[0] != dimension:
        raise InvalidRotationError(f"expected a {dimension}x{dimension} rotation, got {rho.shape}")
    n = rho.shape[0]
    if not np.allclose(rho @ rho.T, np.eye(n), atol=ROTATION_TOL):
        raise InvalidRotationError("matrix is not orthogonal")
    if np.linalg.det(rho) < 0.0:
        raise InvalidRotationError("matrix has determinant -1, not a proper rotation")
    return rho


@lru_cache(maxsize=None)
def _projection_rule(dimension, degree):
    return build_sphere_quadrature(dimension, degree)


def rotation_matrix(dimension, order, rotation):
    """Orthogonal matrix of the rotation action on the order-m subspace.

    Satisfies, for every unit u and every index j,

        basis_j(rho^-1 u) = sum_i  T[i-1, j-1] * basis_i(u).

    The plane case is closed-form; the space case projects the rotated
    basis onto the basis with a quadrature rule exact at degree 2m.
    """
    rho = check_rotation(rotation, dimension)
    n = harmonic_count(dimension, order)
    if order == 0:
        return np.ones((1, 1))
    if dimension == 2:
        alpha = np.arctan2(rho[1, 0], rho[0, 0])
        c, s = np.cos(order * alpha), np.sin(order * alpha)
        return np.array([[c, -s], [s, c]])
    rule = _projection_rule(3, 2 * order)
    base = basis_values(3, order, rule.nodes)            # (N, P)
    rotated = basis_values(3, order, rule.nodes @ rho)   # basis_j(rho^T u) = basis_j(rho^-1 u)
    return (base * rule.weights) @ rotated.T


@dataclass(frozen=True, eq=False)
class HarmonicExpansion:
    """Coefficients of a function against the fixed harmonic basis.

    ``blocks`` maps an order m to its coefficient vector of length
    N(n, m); orders absent from the map are zero.  ``max_order`` bounds
    the orders represented (zero blocks up to it are meaningful, e.g.
    for symmetric functions).
    """

    dimension: int
    max_order: int
    blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for order, coeffs in self.blocks.items():
            coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
            n = harmonic_count(self.dimension, order)
            if coeffs.shape[0] != n:
                raise ValueError(
                    f"order {order} expects {n} coefficients, got {coeffs.shape[0]}"
                )
            if order > self.max_order:
                raise ValueError(f"order {order} exceeds max_order {self.max_order}")
            coeffs.setflags(write=False)
            clean[int(order)] = coeffs
        object.__setattr__(self, "blocks", clean)

    def block(self, order):
        """Coefficient vector for one order (zeros if absent)."""
        if order in self.blocks:
            return self.blocks[order]
        return np.zeros(harmonic_count(self.dimension, order))

    def coefficient(self, order, index):
        return float(self.block(order)[index - 1])

    def order_norm(self, order):
        """L2 norm of the order-m component (basis independent)."""
        return float(np.linalg.norm(self.block(order)))

    def norms(self):
        return {m: self.order_norm(m) for m in range(self.max_order + 1)}

    def evaluate(self, points):
        """Evaluate the expansion at unit vectors; returns (P,) values."""
        pts = _as_points(points, self.dimension)
        out = np.zeros(pts.shape[0])
        for order, coeffs in sorted(self.blocks.items()):
            out += coeffs @ basis_values(self.dimension, order, pts)
        return out

    def __call__(self, points):
        return self.evaluate(points)

    def scaled(self, factor):
        return HarmonicExpansion(
            self.dimension,
            self.max_order,
            {m: factor * c for m, c in self.blocks.items()},
        )


def rotate_expansion(expansion, rotation):
    """Expansion of u -> f(rho^-1 u) for f given by ``expansion``."""
    rho = check_rotation(rotation, expansion.dimension)
    blocks = {}
    for order, coeffs in expansion.blocks.items():
        blocks[order] = rotation_matrix(expansion.dimension, order, rho) @ coeffs
    return HarmonicExpansion(expansion.dimension, expansion.max_order, blocks)


def expansion_to_csv_rows(expansion):
    """Rows (order, index, coefficient) in ascending (order, index)."""
    rows = []
    for order in range(expansion.max_order + 1):
        coeffs = expansion.block(order)
        for j, value in enumerate(coeffs, start=1):
            rows.append((order, j, float(value)))
    return rows


def basis_gram_deviation(dimension, max_order, quadrature):
    """Max deviation of the discrete basis Gram matrix from the identity.

    Diagnostic used by orthonormality tests: stacks all basis functions
    of order <= max_order and measures the worst entry error.
    """
    stacks = [
        basis_values(dimension, order, quadrature.nodes) for order in range(max_order + 1)
    ]
    B = np.vstack(stacks)
    gram = (B * quadrature.weights) @ B.T
    return float(np.max(np.abs(gram - np.eye(B.shape[0]))))
