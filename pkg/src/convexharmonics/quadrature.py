"""Quadrature rules on the unit sphere and on the rotation group.

Conventions
-----------
The sphere carries the (unnormalized) surface measure, so weights of a
sphere rule sum to 2*pi in the plane and 4*pi in space.  The rotation
group carries the normalized invariant measure, so weights of a rotation
rule sum to 1.

A sphere rule with ``exact_degree = d`` integrates every polynomial of
degree <= d restricted to the sphere exactly.  A rotation rule with
``exact_order = q`` integrates products of two matrix entries of the
order-<=q rotation representations exactly (equivalently, it is exact on
functions band-limited to representation order 2q).

All rules are deterministic tensor constructions:

* circle: uniform angles (node count rounded up to an even number so the
  node set is closed under u -> -u),
* 2-sphere: Gauss-Legendre in cos(theta) times uniform azimuth,
* SO(2): uniform angles with equal weights,
* SO(3): uniform x Gauss-Legendre(cos beta) x uniform over ZYZ Euler
  angles, with the invariant density sin(beta) folded into the weights.

Rule objects are immutable after construction (node arrays are marked
read-only) and integration sums nodes in a fixed order, so results are
deterministic and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError

# Surface measure of the unit sphere by ambient dimension.
OMEGA = {2: 2.0 * np.pi, 3: 4.0 * np.pi}


def _readonly(a):
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Nodes and weights for integration over the unit sphere.

    Attributes
    ----------
    dimension : int
        Ambient dimension, 2 or 3.
    nodes : ndarray, shape (P, dimension)
        Unit vectors.
    weights : ndarray, shape (P,)
        Positive weights summing to the sphere's surface measure.
    exact_degree : int
        Largest polynomial degree integrated exactly.
    """

    dimension: int
    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int

    @property
    def node_count(self):
        return self.nodes.shape[0]

    @property
    def total_measure(self):
        return float(np.sum(self.weights))

    def integrate_values(self, values):
        values = np.asarray(values, dtype=float)
        if values.shape != self.weights.shape:
            raise ValueError(
                f"expected {self.weights.shape[0]} node values, got shape {values.shape}"
            )
        return float(self.weights @ values)


@dataclass(frozen=True, eq=False)
class RotationQuadrature:
    """Weighted finite subset of the rotation group.

    Attributes
    ----------
    dimension : int
        Ambient dimension, 2 or 3.
    elements : ndarray, shape (R, dimension, dimension)
        Proper rotation matrices.
    weights : ndarray, shape (R,)
        Positive weights summing to 1.
    exact_order : int
        Products of two representation entries of order <= exact_order
        are integrated exactly.
    angles : ndarray
        Rotation angles (R,) for dimension 2, ZYZ Euler angles (R, 3)
        for dimension 3.
    """

    dimension: int
    elements: np.ndarray
    weights: np.ndarray
    exact_order: int
    angles: np.ndarray

    @property
    def element_count(self):
        return self.elements.shape[0]


def _circle_nodes(count):
    phi = 2.0 * np.pi * np.arange(count) / count
    return phi, np.column_stack([np.cos(phi), np.sin(phi)])


@lru_cache(maxsize=None)
def build_sphere_quadrature(dimension, exact_degree):
    """Build a sphere rule exact for polynomials of degree <= exact_degree.

    For dimension 2 this is the uniform rule with an even number of
    angles; for dimension 3 a Gauss-Legendre x uniform product grid with
    an even azimuth count, so both node sets are antipodally symmetric.

    Raises
    ------
    DimensionError
        If dimension is not 2 or 3.
    ValueError
        If exact_degree is negative.
    """
    if dimension not in (2, 3):
        raise DimensionError(f"unsupported dimension {dimension}; expected 2 or 3")
    if exact_degree < 0:
        raise ValueError(f"exact_degree must be >= 0, got {exact_degree}")

    if dimension == 2:
        count = exact_degree + 1
        count += count % 2  # antipodal node symmetry
        _, nodes = _circle_nodes(count)
        weights = np.full(count, 2.0 * np.pi / count)
        return SphereQuadrature(2, _readonly(nodes), _readonly(weights), exact_degree)

    n_polar = exact_degree // 2 + 1
    n_azimuth = exact_degree + 1
    n_azimuth += n_azimuth % 2
    t, wt = np.polynomial.legendre.leggauss(n_polar)  # t = cos(theta) on [-1, 1]
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    sin_theta = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    x = sin_theta[:, None] * np.cos(phi)[None, :]
    y = sin_theta[:, None] * np.sin(phi)[None, :]
    z = np.broadcast_to(t[:, None], x.shape)
    nodes = np.stack([x, y, z], axis=-1).reshape(-1, 3)
    weights = np.broadcast_to(wt[:, None] * (2.0 * np.pi / n_azimuth), x.shape).reshape(-1)
    return SphereQuadrature(3, _readonly(nodes), _readonly(weights), exact_degree)


def _rot_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    zero, one = np.zeros_like(c), np.ones_like(c)
    return np.stack(
        [
            np.stack([c, -s, zero], axis=-1),
            np.stack([s, c, zero], axis=-1),
            np.stack([zero, zero, one], axis=-1),
        ],
        axis=-2,
    )


def _rot_y(angle):
    c, s = np.cos(angle), np.sin(angle)
    zero, one = np.zeros_like(c), np.ones_like(c)
    return np.stack(
        [
            np.stack([c, zero, s], axis=-1),
            np.stack([zero, one, zero], axis=-1),
            np.stack([-s, zero, c], axis=-1),
        ],
        axis=-2,
    )


def rotation_from_angle(angle):
    """Plane rotation matrix for a given angle."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def rotation_from_euler(alpha, beta, gamma):
    """Spatial rotation Rz(alpha) @ Ry(beta) @ Rz(gamma)."""
    return _rot_z(np.asarray(alpha)) @ _rot_y(np.asarray(beta)) @ _rot_z(np.asarray(gamma))


def build_rotation_quadrature(dimension, exact_order, *, count=None, euler_counts=None):
    """Build a rotation-group rule.

    Parameters
    ----------
    dimension : int
        2 or 3.
    exact_order : int
        Requested exactness order (see module docstring).  Ignored when
        an explicit node count is given; the achieved order is then
        derived from the counts and stored on the result.
    count : int, optional
        Dimension 2 only: force the number of uniform angles.
    euler_counts : tuple of int, optional
        Dimension 3 only: force the (alpha, beta, gamma) grid sizes.
    """
    if dimension not in (2, 3):
        raise DimensionError(f"unsupported dimension {dimension}; expected 2 or 3")

    if dimension == 2:
        if euler_counts is not None:
            raise ValueError("euler_counts applies to dimension 3 only")
        if count is None:
            if exact_order < 0:
                raise ValueError(f"exact_order must be >= 0, got {exact_order}")
            count = 2 * exact_order + 1
        elif count < 1:
            raise ValueError(f"count must be >= 1, got {count}")
        achieved = (count - 1) // 2
        angles, _ = _circle_nodes(count)
        elements = np.zeros((count, 2, 2))
        elements[:, 0, 0] = np.cos(angles)
        elements[:, 0, 1] = -np.sin(angles)
        elements[:, 1, 0] = np.sin(angles)
        elements[:, 1, 1] = np.cos(angles)
        weights = np.full(count, 1.0 / count)
        return RotationQuadrature(
            2, _readonly(elements), _readonly(weights), achieved, _readonly(angles)
        )

    if count is not None:
        raise ValueError("count applies to dimension 2 only; use euler_counts")
    if euler_counts is None:
        if exact_order < 0:
            raise ValueError(f"exact_order must be >= 0, got {exact_order}")
        n_alpha = n_gamma = 2 * exact_order + 1
        n_beta = exact_order + 1
    else:
        n_alpha, n_beta, n_gamma = map(int, euler_counts)
        if min(n_alpha, n_beta, n_gamma) < 1:
            raise ValueError(f"euler_counts must be positive, got {euler_counts}")
    achieved = min(n_alpha - 1, n_gamma - 1, 2 * n_beta - 1) // 2

    alpha = 2.0 * np.pi * np.arange(n_alpha) / n_alpha
    gamma = 2.0 * np.pi * np.arange(n_gamma) / n_gamma
    t, wt = np.polynomial.legendre.leggauss(n_beta)
    beta = np.arccos(np.clip(t, -1.0, 1.0))

    A, B, G = np.meshgrid(alpha, beta, gamma, indexing="ij")
    angles = np.column_stack([A.reshape(-1), B.reshape(-1), G.reshape(-1)])
    elements = rotation_from_euler(angles[:, 0], angles[:, 1], angles[:, 2])
    # dnu = (dalpha / 2pi) (sin(beta) dbeta / 2) (dgamma / 2pi); the GL rule
    # in t = cos(beta) absorbs the sin(beta) factor.
    w_beta = wt / 2.0
    W = np.einsum("a,b,g->abg", np.full(n_alpha, 1.0 / n_alpha), w_beta, np.full(n_gamma, 1.0 / n_gamma))
    weights = W.reshape(-1)
    return RotationQuadrature(
        3, _readonly(elements), _readonly(weights), achieved, _readonly(angles)
    )


def integrate_sphere(quadrature, f):
    """Integrate a scalar function over the sphere.

    ``f`` is called on the full (P, n) node array first; if it does not
    return one value per node it is called node by node instead.
    """
    try:
        values = np.asarray(f(quadrature.nodes), dtype=float)
    except Exception:
        values = None
    if values is None or values.shape != quadrature.weights.shape:
        values = np.array([float(f(u)) for u in quadrature.nodes])
    return float(quadrature.weights @ values)


def direction_grid(dimension, count):
    """Evenly spread unit directions used for sup-norm comparisons.

    Returns the node array of a sphere rule with at least ``count``
    nodes (exactly ``count`` in the plane when count is even).
    """
    if dimension == 2:
        return build_sphere_quadrature(2, count - 1).nodes
    degree = int(np.ceil(np.sqrt(2.0 * count))) + 1
    return build_sphere_quadrature(3, degree).nodes
