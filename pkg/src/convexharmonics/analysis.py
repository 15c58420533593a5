"""Harmonic analysis of support functions.

Projections onto fixed harmonic orders, the mean width and Steiner point
(the order-0 and order-1 projections in disguise), cosine-transform
multipliers, and universality certificates.

A body is *universal up to order M at threshold tau* when every order
m <= M carries an L2 coefficient norm above tau, and *centrally
universal* when every even order does.  Certificates always report the
per-order norms so the margin behind a verdict is visible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bodies as _bodies
from .errors import QuadratureDegreeError
from .harmonics import HarmonicExpansion, basis_values, harmonic_count
from .quadrature import OMEGA, build_sphere_quadrature

TAU_DEFAULT = 1e-8
M_MAX_DEFAULT = 12


def default_quadrature(dimension, max_order=M_MAX_DEFAULT):
    """Projection rule with the default degree margin 2*max_order + 8."""
    return build_sphere_quadrature(dimension, 2 * max_order + 8)


def _require_degree(quadrature, order):
    if quadrature.exact_degree < 2 * order:
        raise QuadratureDegreeError(
            f"projection to order {order} needs exact_degree >= {2 * order}, "
            f"rule has {quadrature.exact_degree}"
        )


def project(body, order, quadrature):
    """Coefficients of the order-m component of the support function.

    Returns the vector (a_m1, ..., a_mN) with a_mj the inner product of
    h_K against the basis function (m, j).
    """
    _require_degree(quadrature, order)
    h = body.support_vector(quadrature.nodes)
    basis = basis_values(body.dimension, order, quadrature.nodes)
    return basis @ (quadrature.weights * h)


def expand(body, max_order, quadrature):
    """Harmonic expansion of the support function through max_order."""
    _require_degree(quadrature, max_order)
    h = quadrature.weights * body.support_vector(quadrature.nodes)
    blocks = {}
    for order in range(max_order + 1):
        blocks[order] = basis_values(body.dimension, order, quadrature.nodes) @ h
    return HarmonicExpansion(body.dimension, max_order, blocks)


def mean_width(body, quadrature):
    """Mean width b(K) = (2 / omega_n) * integral of h_K."""
    h = body.support_vector(quadrature.nodes)
    return 2.0 / OMEGA[body.dimension] * float(quadrature.weights @ h)


def steiner_point(body, quadrature):
    """Steiner point s(K) = (n / omega_n) * integral of h_K(u) u."""
    n = body.dimension
    h = body.support_vector(quadrature.nodes)
    return n / OMEGA[n] * ((quadrature.weights * h) @ quadrature.nodes)


@dataclass(frozen=True)
class UniversalityCertificate:
    """Per-order coefficient norms of a support function, with verdicts.

    The verdicts are pure functions of the norms and the threshold:
    ``universal`` requires norm > tau at every order <= max_order,
    ``centrally_universal`` at every even order <= max_order.
    """

    body_id: str
    dimension: int
    max_order: int
    tau: float
    norms: dict

    @property
    def universal(self):
        return all(self.norms[m] > self.tau for m in range(self.max_order + 1))

    @property
    def centrally_universal(self):
        return all(self.norms[m] > self.tau for m in range(0, self.max_order + 1, 2))

    def failing_orders(self, parity="all"):
        orders = range(self.max_order + 1) if parity == "all" else range(0, self.max_order + 1, 2)
        return tuple(m for m in orders if self.norms[m] <= self.tau)


def certify(body, max_order, tau, quadrature, body_id=""):
    """Certificate of (central) universality up to max_order at threshold tau."""
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    expansion = expand(body, max_order, quadrature)
    return UniversalityCertificate(
        body_id=body_id,
        dimension=body.dimension,
        max_order=max_order,
        tau=float(tau),
        norms=expansion.norms(),
    )


def is_symmetric(body, quadrature, max_order=M_MAX_DEFAULT, tau=TAU_DEFAULT):
    """Numeric symmetry test: all odd-order norms with m != 1 below tau."""
    expansion = expand(body, max_order, quadrature)
    return all(expansion.order_norm(m) <= tau for m in range(3, max_order + 1, 2))


# ---------------------------------------------------------------------------
# cosine transform


def _rotation_taking_pole_to(u):
    """Rotation mapping e_3 to the unit vector u (Rodrigues form)."""
    u = np.asarray(u, dtype=float)
    e3 = np.array([0.0, 0.0, 1.0])
    c = float(u @ e3)
    if c > 1.0 - 1e-14:
        return np.eye(3)
    if c < -1.0 + 1e-14:
        return np.diag([1.0, -1.0, -1.0])
    axis = np.cross(e3, u)
    s = np.linalg.norm(axis)
    axis = axis / s
    k = np.array(
        [[0.0, -axis[2], axis[1]], [axis[2], 0.0, -axis[0]], [-axis[1], axis[0], 0.0]]
    )
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


def _split_gauss(a, b, count):
    t, w = np.polynomial.legendre.leggauss(count)
    return 0.5 * (b - a) * t + 0.5 * (a + b), 0.5 * (b - a) * w


def _cosine_transform_2d(order, index, direction_angle, segments):
    # |cos| kinks sit at offsets +-pi/2 from the direction; integrate the
    # two smooth pieces with Gauss rules.
    total = 0.0
    for a, b in ((-np.pi / 2, np.pi / 2), (np.pi / 2, 3 * np.pi / 2)):
        t, w = _split_gauss(a, b, segments)
        phi = direction_angle + t
        pts = np.column_stack([np.cos(phi), np.sin(phi)])
        y = basis_values(2, order, pts)[index - 1]
        total += float(w @ (np.abs(np.cos(t)) * y))
    return total


def _cosine_transform_3d(order, index, direction, count):
    # Split the polar integral at the kink equator |<u, v>| = 0 and spin
    # the rule so the pole sits at the evaluation direction.
    rho = _rotation_taking_pole_to(direction)
    phi = 2.0 * np.pi * np.arange(2 * count) / (2 * count)
    total = 0.0
    for a, b in ((-1.0, 0.0), (0.0, 1.0)):
        t, wt = _split_gauss(a, b, count)
        sin_theta = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
        x = sin_theta[:, None] * np.cos(phi)[None, :]
        y = sin_theta[:, None] * np.sin(phi)[None, :]
        z = np.broadcast_to(t[:, None], x.shape)
        base = np.stack([x, y, z], axis=-1).reshape(-1, 3)
        weights = np.broadcast_to(
            wt[:, None] * (2.0 * np.pi / (2 * count)), x.shape
        ).reshape(-1)
        vals = basis_values(3, order, base @ rho.T)[index - 1]
        total += float(weights @ (np.abs(base[:, 2]) * vals))
    return total


def cosine_multiplier(dimension, order, quadrature):
    """Multiplier a_m of the cosine transform on the order-m subspace.

    The transform (C f)(u) = integral of |<u, v>| f(v) dsigma(v) acts on
    each harmonic order as multiplication by a constant a_m; odd orders
    are annihilated (a_m = 0).  The constant is estimated as the ratio
    (C Y)(u) / Y(u) at several directions where Y is safely nonzero and
    is required to be direction-independent within 1e-8.

    The transform itself is integrated with an internal rule split at
    the kink of |<u, .>| (sized from ``quadrature.exact_degree``), since
    plain tensor rules converge too slowly across the kink.
    """
    if order % 2 == 1:
        return 0.0
    _require_degree(quadrature, order)
    segments = max(quadrature.exact_degree, 2 * order + 16)
    index = 1  # the multiplier is the same for every order-m harmonic

    if dimension == 2:
        probe_angles = np.array([0.05, 0.55, 1.15, 1.85, 2.6])
        pts = np.column_stack([np.cos(probe_angles), np.sin(probe_angles)])
        y_vals = basis_values(2, order, pts)[index - 1]
        keep = np.abs(y_vals) > 0.3 * np.max(np.abs(y_vals))
        ratios = [
            _cosine_transform_2d(order, index, ang, segments) / y
            for ang, y in zip(probe_angles[keep], y_vals[keep])
        ]
    elif dimension == 3:
        probes = np.array(
            [
                [0.0, 0.0, 1.0],
                [0.3, 0.1, 0.9],
                [0.5, -0.2, 0.8],
                [-0.4, 0.3, 0.85],
            ]
        )
        probes /= np.linalg.norm(probes, axis=1, keepdims=True)
        y_vals = np.array(
            [basis_values(3, order, p[None, :])[index - 1, 0] for p in probes]
        )
        keep = np.abs(y_vals) > 0.3 * np.max(np.abs(y_vals))
        ratios = [
            _cosine_transform_3d(order, index, p, segments) / y
            for p, y in zip(probes[keep], y_vals[keep])
        ]
    else:
        raise QuadratureDegreeError(f"unsupported dimension {dimension}")

    ratios = np.asarray(ratios)
    spread = float(ratios.max() - ratios.min())
    if spread > 1e-8 * max(1.0, float(np.max(np.abs(ratios)))):
        raise ValueError(
            f"cosine multiplier is not direction independent (spread {spread:.3e}); "
            "increase the quadrature degree"
        )
    return float(ratios.mean())


def embed_in_3d(body):
    """Planar body placed in the x1-x2 plane of space (see bodies module)."""
    return _bodies.embed_in_3d(body)
