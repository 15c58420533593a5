"""Near-identity linear images that restore missing harmonic orders.

Two search families over GL(n):

* axis scalings diag(1, lambda, ..., lambda) (family ``axis_scale_1``)
  or diag(1, 1, lambda, ..., lambda) (family ``axis_scale_2``, space
  only), scanned over a lambda interval; the coefficient functions are
  real analytic in lambda, so their zeros are isolated and a dense
  enough scan finds working parameters arbitrarily near 1;
* random matrices Id + E with small entries, certified a posteriori; in
  every neighbourhood of the identity almost every linear map works, so
  rejection-free success is expected within a few draws.

Search reports always carry the full sample trace (parameter or matrix,
per-order norms) next to the winner, and are byte-reproducible for a
fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scipy.spatial import ConvexHull, QhullError

from .analysis import certify, expand, is_symmetric, mean_width, project
from .bodies import LinearImage, MinkowskiCombination, Polytope, Segment
from .bodies import project_to_plane as _project_to_plane
from .errors import DimensionError, PreconditionError
from .quadrature import build_sphere_quadrature

FAMILIES = ("axis_scale_1", "axis_scale_2", "random_near_identity")


def scaling_matrix(dimension, lam, family="axis_scale_1"):
    """Axis-scaling matrix of the requested family."""
    if lam <= 0.0:
        raise ValueError(f"scaling parameter must be positive, got {lam}")
    if family == "axis_scale_1":
        diag = np.full(dimension, float(lam))
        diag[0] = 1.0
        return np.diag(diag)
    if family == "axis_scale_2":
        if dimension < 3:
            raise DimensionError("family axis_scale_2 needs dimension >= 3")
        diag = np.full(dimension, float(lam))
        diag[0] = diag[1] = 1.0
        return np.diag(diag)
    raise ValueError(f"unknown scaling family {family!r}")


def scaled_coefficient(body, order, index, lam, family, quadrature):
    """Support coefficient (order, index) of the axis-scaled image.

    Evaluates the inner product of the support function of A(lambda) K
    against the basis harmonic; real analytic in lambda on (0, inf).
    """
    matrix = scaling_matrix(body.dimension, lam, family)
    return float(project(LinearImage(matrix, body), order, quadrature)[index - 1])


@dataclass(frozen=True)
class PerturbationSearchReport:
    """Sample trace and winner of a linear-image search.

    ``samples`` is a tuple of (parameter-or-matrix, norms dict) in scan
    or draw order.  ``winner`` (a matrix) is present only when it passed
    certification at (max_order, tau); ``distance_to_identity`` is its
    spectral-norm distance from the identity.
    """

    body_id: str
    family: str
    dimension: int
    max_order: int
    tau: float
    goal: str
    samples: tuple
    winner: np.ndarray | None
    winner_certificate: object | None
    distance_to_identity: float | None
    seed: int | None = None


def _rotation_between(a, b):
    """Rotation taking unit vector a to unit vector b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[0] == 2:
        ang = np.arctan2(b[1], b[0]) - np.arctan2(a[1], a[0])
        c, s = np.cos(ang), np.sin(ang)
        return np.array([[c, -s], [s, c]])
    c = float(a @ b)
    if c > 1.0 - 1e-14:
        return np.eye(3)
    if c < -1.0 + 1e-14:
        # rotate by pi about any axis orthogonal to a
        helper = np.array([1.0, 0.0, 0.0])
        if abs(a[0]) > 0.9:
            helper = np.array([0.0, 1.0, 0.0])
        axis = np.cross(a, helper)
        axis /= np.linalg.norm(axis)
        k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
        return np.eye(3) + 2.0 * (k @ k)
    axis = np.cross(a, b)
    s = np.linalg.norm(axis)
    axis = axis / s
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


def align_widest_axis(body, grid_degree=256):
    """Rotate a body so its widest direction lies on the first axis.

    Establishes the axis-scaling hypothesis that the shadow on the first
    coordinate axis is a nondegenerate segment.  Returns (rotated body,
    rotation applied).
    """
    grid = build_sphere_quadrature(body.dimension, grid_degree).nodes
    widths = body.support_vector(grid) + body.support_vector(-grid)
    direction = grid[int(np.argmax(widths))]
    e1 = np.zeros(body.dimension)
    e1[0] = 1.0
    rho = _rotation_between(direction, e1)
    return MinkowskiCombination(((1.0, rho, body),)), rho


def scan_axis_scaling(
    body,
    max_order,
    parity,
    interval,
    sample_count,
    tau,
    quadrature,
    family="axis_scale_1",
    body_id="",
    align=True,
):
    """Scan axis scalings A(lambda) for a (centrally) universal image.

    Parameters
    ----------
    parity : {"all", "even"}
        Orders required to clear tau.  With "even" the body must be
        symmetric with a nondegenerate first-axis shadow (established by
        the alignment preprocessing when ``align`` is set).
    interval : (float, float)
        Positive lambda range, sampled uniformly at ``sample_count``
        points.  The winner is the passing sample nearest 1.

    Returns a report whose winner matrix acts in the body's original
    frame (alignment rotations are conjugated away), so it stays as
    close to the identity as the bare scaling.
    """
    if parity not in ("all", "even"):
        raise ValueError(f"parity must be 'all' or 'even', got {parity}")
    lo, hi = float(interval[0]), float(interval[1])
    if not 0.0 < lo < hi:
        raise ValueError(f"interval must satisfy 0 < lo < hi, got {interval}")
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")

    work, rho = (body, np.eye(body.dimension))
    if align:
        work, rho = align_widest_axis(body)
    if parity == "even":
        if not is_symmetric(body, quadrature, max_order=max_order, tau=tau):
            raise PreconditionError(
                "even-parity scans expect a symmetric body; odd harmonic orders above 1 "
                "are present, run with parity='all' instead"
            )
        e1 = np.zeros(body.dimension)
        e1[0] = 1.0
        width = work.support(e1) + work.support(-e1)
        if width <= 1e-12:
            raise PreconditionError("body has a degenerate first-axis shadow after alignment")

    required = range(max_order + 1) if parity == "all" else range(0, max_order + 1, 2)
    lambdas = np.linspace(lo, hi, sample_count)
    samples = []
    passing = []
    for lam in lambdas:
        matrix = scaling_matrix(body.dimension, lam, family)
        norms = expand(LinearImage(matrix, work), max_order, quadrature).norms()
        samples.append((float(lam), norms))
        if all(norms[m] > tau for m in required):
            passing.append(float(lam))

    winner = None
    certificate = None
    distance = None
    if passing:
        best = min(passing, key=lambda lam: abs(lam - 1.0))
        winner = rho.T @ scaling_matrix(body.dimension, best, family) @ rho
        certificate = certify(LinearImage(winner, body), max_order, tau, quadrature, body_id)
        distance = float(np.linalg.norm(winner - np.eye(body.dimension), 2))
    return PerturbationSearchReport(
        body_id=body_id,
        family=family,
        dimension=body.dimension,
        max_order=max_order,
        tau=float(tau),
        goal="central" if parity == "even" else "universal",
        samples=tuple(samples),
        winner=winner,
        winner_certificate=certificate,
        distance_to_identity=distance,
    )


# ---------------------------------------------------------------------------
# Fourier functionals on GL(2)+


def _polygon_cut_angles(vertices):
    """Angles where the support argmax of a planar vertex set switches."""
    pts = np.atleast_2d(np.asarray(vertices, dtype=float))
    if pts.shape[0] == 1:
        return np.array([0.0])
    try:
        ordered = pts[ConvexHull(pts).vertices]  # counterclockwise in the plane
    except QhullError:
        # collinear generating set: keep the two extreme points
        centered = pts - pts.mean(axis=0)
        axis = np.linalg.svd(centered, full_matrices=False)[2][0]
        proj = pts @ axis
        lo, hi = pts[int(np.argmin(proj))], pts[int(np.argmax(proj))]
        if np.allclose(lo, hi):
            return np.array([0.0])
        ordered = np.vstack([lo, hi])
    edges = np.roll(ordered, -1, axis=0) - ordered
    cuts = np.arctan2(edges[:, 1], edges[:, 0]) - 0.5 * np.pi
    return np.sort(np.mod(cuts, 2.0 * np.pi))


def _polygon_angle_integral(vertices, func, panel_nodes=32, max_panel=np.pi / 4):
    """Integral over the circle of h_polygon(phi) * func(phi).

    Splits at the support kinks and applies Gauss panels inside each
    smooth arc, so kinked supports integrate to near machine precision.
    ``func`` maps an angle array to (possibly complex) values.
    """
    pts = np.atleast_2d(np.asarray(vertices, dtype=float))
    cuts = _polygon_cut_angles(pts)
    base_t, base_w = np.polynomial.legendre.leggauss(panel_nodes)
    total = 0.0 + 0.0j
    for k in range(len(cuts)):
        a = cuts[k]
        b = cuts[k + 1] if k + 1 < len(cuts) else cuts[0] + 2.0 * np.pi
        if b - a < 1e-14:
            continue
        pieces = int(np.ceil((b - a) / max_panel))
        edges = np.linspace(a, b, pieces + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            phi = 0.5 * (hi - lo) * base_t + 0.5 * (hi + lo)
            w = 0.5 * (hi - lo) * base_w
            u = np.column_stack([np.cos(phi), np.sin(phi)])
            h = (u @ pts.T).max(axis=1)
            total += w @ (h * func(phi))
    return total


def _planar_vertex_set(body):
    """Vertex generating set of a planar body, when it has one."""
    if isinstance(body, Polytope):
        return body.vertices
    if isinstance(body, Segment):
        return np.vstack([body.start, body.end])
    return None


def support_fourier(body, matrix, order, quadrature):
    """Fourier coefficient of the transformed support function.

    Integral over the circle of h(A K, phi) * exp(i * order * phi); the
    map A must have positive determinant.  Vanishes at A = Id exactly
    when the order-m projection of the support function vanishes.

    Polytopes and segments are integrated with an arc-split Gauss rule
    (their supports have kinks at the edge normals, where uniform rules
    lose accuracy); other bodies use the supplied quadrature.
    """
    if body.dimension != 2:
        raise DimensionError("Fourier functionals are defined for planar bodies")
    a = np.asarray(matrix, dtype=float)
    if np.linalg.det(a) <= 0.0:
        raise ValueError("the map must lie in the positive-determinant component")
    vertices = _planar_vertex_set(body)
    if vertices is not None:
        kernel = lambda phi: np.exp(1j * order * phi)
        return complex(_polygon_angle_integral(vertices @ a.T, kernel))
    phi = np.arctan2(quadrature.nodes[:, 1], quadrature.nodes[:, 0])
    h = LinearImage(a, body).support_vector(quadrature.nodes)
    return complex(quadrature.weights @ (h * np.exp(1j * order * phi)))


def derivative_identity_check(body, order, step, quadrature):
    """Both sides of the lambda-derivative identity for odd orders.

    Along A(lambda) = diag(1, lambda), the volume-normalized functional
    lambda^-2 * F(lambda), with F the order-m Fourier functional of the
    scaled body, equals the integral of h(K, psi) against an explicitly
    differentiable kernel; its derivative at lambda = 1 is

        - integral h(K, psi) [ 3/2 e^{i m psi}
                               + (3-m)/4 e^{i (m-2) psi}
                               + (3+m)/4 e^{i (m+2) psi} ] dpsi.

    Returns (finite difference, integral expression); both complex, and
    their gap shrinks as O(step^2).
    """
    if order % 2 == 0 or order < 1:
        raise ValueError(f"the identity is stated for odd orders >= 1, got {order}")
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")

    def normalized(lam):
        matrix = np.diag([1.0, lam])
        return support_fourier(body, matrix, order, quadrature) / lam**2

    lhs = (normalized(1.0 + step) - normalized(1.0 - step)) / (2.0 * step)

    def kernel(psi):
        return (
            1.5 * np.exp(1j * order * psi)
            + (3 - order) / 4.0 * np.exp(1j * (order - 2) * psi)
            + (3 + order) / 4.0 * np.exp(1j * (order + 2) * psi)
        )

    vertices = _planar_vertex_set(body)
    if vertices is not None:
        rhs = -complex(_polygon_angle_integral(vertices, kernel))
    else:
        psi = np.arctan2(quadrature.nodes[:, 1], quadrature.nodes[:, 0])
        h = body.support_vector(quadrature.nodes)
        rhs = -complex(quadrature.weights @ (h * kernel(psi)))
    return lhs, rhs


# ---------------------------------------------------------------------------
# random near-identity search


def find_universal_image(
    body,
    max_order,
    epsilon,
    tau,
    attempts,
    seed,
    quadrature,
    goal="universal",
    body_id="",
):
    """Random search for a certified (centrally) universal image near Id.

    Draws A = Id + E with E entries uniform in [-epsilon, epsilon],
    rejecting draws with det(A) <= 0 or spectral norm of E above
    epsilon, so every evaluated candidate stays inside the requested
    neighbourhood.  The identity itself is evaluated first (it lies in
    every neighbourhood); candidates are certified up to ``max_order``
    at threshold ``tau``.  Deterministic for a fixed seed.

    Preconditions: a symmetric body can never be universal (odd orders
    above 1 vanish), so ``goal="universal"`` rejects symmetric input;
    ``goal="central"`` needs a body with more than one point.
    """
    if goal not in ("universal", "central"):
        raise ValueError(f"goal must be 'universal' or 'central', got {goal}")
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if attempts < 1:
        raise ValueError("attempts must be at least 1")

    if goal == "universal":
        if is_symmetric(body, quadrature, max_order=max_order, tau=tau):
            raise PreconditionError(
                "a symmetric body has no odd harmonic orders above 1 and cannot be "
                "universal; use goal='central'"
            )
    else:
        if mean_width(body, quadrature) <= tau:
            raise PreconditionError("the body is a single point; nothing to certify")

    n = body.dimension
    required = range(max_order + 1) if goal == "universal" else range(0, max_order + 1, 2)
    rng = np.random.default_rng(seed)

    samples = []
    winner = None
    while len(samples) < attempts:
        if not samples:
            candidate = np.eye(n)
        else:
            while True:
                e = rng.uniform(-epsilon, epsilon, size=(n, n))
                candidate = np.eye(n) + e
                if np.linalg.det(candidate) > 0.0 and np.linalg.norm(e, 2) <= epsilon:
                    break
        norms = expand(LinearImage(candidate, body), max_order, quadrature).norms()
        samples.append((candidate, norms))
        if all(norms[m] > tau for m in required):
            winner = candidate
            break

    certificate = None
    distance = None
    if winner is not None:
        certificate = certify(LinearImage(winner, body), max_order, tau, quadrature, body_id)
        distance = float(np.linalg.norm(winner - np.eye(n), 2))
    return PerturbationSearchReport(
        body_id=body_id,
        family="random_near_identity",
        dimension=n,
        max_order=max_order,
        tau=float(tau),
        goal=goal,
        samples=tuple(samples),
        winner=winner,
        winner_certificate=certificate,
        distance_to_identity=distance,
        seed=seed,
    )


def project_to_plane(body, axes=(0, 1)):
    """Orthogonal shadow of a spatial body on a coordinate plane."""
    return _project_to_plane(body, axes)
