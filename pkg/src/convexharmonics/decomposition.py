"""Rotational Minkowski decompositions driven by a universal generator.

Given a generator K whose support function carries every required
harmonic order, and a band-limited target expansion h_L, there is a
rotation density

    g = sum_m N(n, m) / c_m * sum_i a_mi * t^m_{i j(m)},

with c_m = (h_K, Y_{m j(m)}) the generator coefficient selected at each
order, such that the rotation average of h against g reproduces the
target:

    integral over rotations of h(rho K, u) g(rho) dnu(rho) = h_L(u).

Splitting g into positive and negative parts and discretizing the
average with a rotation rule yields two finite nonnegative combinations
of rotated copies T1 = sum (w g^-)(rho) rho K and T2 = sum (w g^+)(rho)
rho K with h_L + h_T1 ~ h_T2; the residual is measured on a direction
grid.  The factor N(n, m) is applied inside the sum over orders (it
depends on the order), which is what the rotation-average identity
forces.

Dimension caveat: the single-index construction above relies on the
entrywise orthogonality of representation matrix entries, which holds
for SO(3) (real-type representations) but not for SO(2), whose order-m
representation is of complex type (e.g. the mean of t11 * t22 over the
circle is 1/2, not 0).  In the plane the rotation average is a circle
convolution, and the order-m density block must instead solve the 2x2
system given by complex division:

    g_m1 + i g_m2 = 2 (a_m1 + i a_m2) / (c_m1 + i c_m2),

which reduces to the single-index formula exactly when the generator's
sine coefficient c_m2 vanishes.  ``synthesize_g`` applies the correct
construction per dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import expand
from .bodies import MinkowskiCombination
from .errors import GeneratorOrderError, ResidualToleranceError, SynthesisError
from .harmonics import basis_values, check_rotation, harmonic_count
from .quadrature import OMEGA, build_sphere_quadrature

#: Treat a target block as active when any coefficient exceeds this.
ACTIVE_TOL = 1e-11


@dataclass(frozen=True)
class GeneratorProfile:
    """Per-order generator coefficients and the selected working index.

    ``selected_index[m]`` is the 1-based index maximizing |c_mj|;
    ``available`` lists the orders whose best coefficient clears tau.
    ``conditioning[m]`` is the magnitude of the divisor entering the
    density at that order: |c_m j(m)| in space, the full block norm
    |c_m1 + i c_m2| in the plane (where the density divides complex
    blocks, see the module docstring).
    """

    generator: object
    dimension: int
    max_order: int
    tau: float
    coefficients: dict
    selected_index: dict
    conditioning: dict
    available: frozenset

    def coefficient(self, order):
        """Selected generator coefficient c_m at an available order."""
        return float(self.coefficients[order][self.selected_index[order] - 1])


def profile_generator(generator, max_order, tau, quadrature, parity="all"):
    """Profile a generator's usable harmonic orders.

    Parameters
    ----------
    parity : {"all", "even"}
        Orders the generator is required to carry.  With "even", odd
        orders may come out empty (they are recorded as unavailable);
        with "all", any empty order raises GeneratorOrderError.
    """
    if parity not in ("all", "even"):
        raise ValueError(f"parity must be 'all' or 'even', got {parity}")
    expansion = expand(generator, max_order, quadrature)
    coefficients = {}
    selected = {}
    conditioning = {}
    available = set()
    for order in range(max_order + 1):
        coeffs = expansion.block(order)
        coefficients[order] = coeffs
        j = int(np.argmax(np.abs(coeffs))) + 1
        best = abs(float(coeffs[j - 1]))
        if best > tau:
            selected[order] = j
            if generator.dimension == 2:
                conditioning[order] = float(np.linalg.norm(coeffs))
            else:
                conditioning[order] = best
            available.add(order)
    required = range(max_order + 1) if parity == "all" else range(0, max_order + 1, 2)
    failed = tuple(m for m in required if m not in available)
    if failed:
        raise GeneratorOrderError(
            f"generator carries no coefficient above tau={tau:g} at orders {failed}; "
            "it is not universal enough for this use",
            failed_orders=failed,
        )
    return GeneratorProfile(
        generator=generator,
        dimension=generator.dimension,
        max_order=max_order,
        tau=float(tau),
        coefficients=coefficients,
        selected_index=selected,
        conditioning=conditioning,
        available=frozenset(available),
    )


def _column_2d(order, j, angles):
    """Column j of the order-m rotation block at an array of angles."""
    if order == 0:
        return np.ones((np.size(angles), 1))
    c, s = np.cos(order * angles), np.sin(order * angles)
    if j == 1:
        return np.column_stack([c, s])
    return np.column_stack([-s, c])


def _column_3d(order, j, rotations):
    """Column j of the order-m rotation block at a stack of rotations.

    Uses the projection rule of degree 2m: the column entries are
    integrals of basis_i(u) * basis_j(rho^T u), polynomial of degree 2m.
    """
    if order == 0:
        return np.ones((rotations.shape[0], 1))
    rule = build_sphere_quadrature(3, 2 * order)
    base_w = basis_values(3, order, rule.nodes) * rule.weights  # (N, P)
    # basis_j at rho^T u for all rotations at once
    pulled = np.einsum("pk,rkl->rpl", rule.nodes, rotations)
    flat = pulled.reshape(-1, 3)
    vals = basis_values(3, order, flat)[j - 1].reshape(rotations.shape[0], -1)  # (R, P)
    return vals @ base_w.T  # (R, N)


def _density_columns(dimension, order, j, rotations, angles=None):
    if dimension == 2:
        if angles is None:
            angles = np.arctan2(rotations[:, 1, 0], rotations[:, 0, 0])
        return _column_2d(order, j, np.asarray(angles))
    return _column_3d(order, j, rotations)


@dataclass(frozen=True)
class RotationDensity:
    """Band-limited density on the rotation group synthesized from a profile.

    Evaluable at single rotations or at stacks; ``blocks`` maps an
    active order m to the weight vector N(n, m) / c_m * a_m applied to
    the selected representation column.
    """

    dimension: int
    blocks: dict
    selected_index: dict

    def values(self, rotations, angles=None):
        rotations = np.asarray(rotations, dtype=float)
        out = np.zeros(rotations.shape[0])
        for order, weights in sorted(self.blocks.items()):
            cols = _density_columns(
                self.dimension, order, self.selected_index[order], rotations, angles
            )
            out += cols @ weights
        return out

    def __call__(self, rotation):
        rho = check_rotation(rotation, self.dimension)
        return float(self.values(rho[None, :, :])[0])


def synthesize_g(profile, target, active_tol=ACTIVE_TOL):
    """Rotation density reproducing the target through the generator.

    In space the order is handled by the single-index construction; in
    the plane the block is produced by the complex division described in
    the module docstring (same thing whenever c_m2 = 0).

    Raises SynthesisError when the target carries an order the profile
    lacks (e.g. odd orders against a symmetric generator, or order 1
    against an origin-centered one); such blocks must be dropped by the
    caller, which amounts to translating or recentering the target.
    """
    if target.dimension != profile.dimension:
        raise SynthesisError("target and generator dimensions differ")
    if target.max_order > profile.max_order:
        raise SynthesisError(
            f"target max_order {target.max_order} exceeds profile max_order {profile.max_order}"
        )
    blocks = {}
    selected = {}
    for order in range(target.max_order + 1):
        coeffs = target.block(order)
        if float(np.max(np.abs(coeffs), initial=0.0)) <= active_tol:
            continue
        if order not in profile.available:
            raise SynthesisError(
                f"target carries order {order} but the generator profile lacks it"
            )
        if profile.dimension == 2:
            gen = profile.coefficients[order]
            if order == 0:
                blocks[order] = np.array([float(coeffs[0]) / float(gen[0])])
            else:
                ratio = 2.0 * complex(coeffs[0], coeffs[1]) / complex(gen[0], gen[1])
                blocks[order] = np.array([ratio.real, ratio.imag])
            selected[order] = 1  # plane blocks weight the (cos, sin) column pair
        else:
            n_m = harmonic_count(3, order)
            blocks[order] = n_m / profile.coefficient(order) * coeffs
            selected[order] = profile.selected_index[order]
    return RotationDensity(
        dimension=profile.dimension,
        blocks=blocks,
        selected_index=selected,
    )


def g_condition(profile, target, active_tol=ACTIVE_TOL):
    """Conditioning sum N(n, m) * sum_i |a_mi| / divisor over active orders.

    The divisor is the profile's per-order conditioning magnitude; large
    values mean an ill-conditioned density (huge positive and negative
    parts nearly cancelling).
    """
    total = 0.0
    for order in range(target.max_order + 1):
        coeffs = target.block(order)
        if float(np.max(np.abs(coeffs), initial=0.0)) <= active_tol:
            continue
        n_m = harmonic_count(profile.dimension, order)
        total += n_m * float(np.sum(np.abs(coeffs))) / profile.conditioning[order]
    return total


@dataclass(frozen=True)
class DecompositionResult:
    """Bodies T1, T2 with residual diagnostics for h_L + h_T1 ~ h_T2."""

    t1: MinkowskiCombination
    t2: MinkowskiCombination
    residual_sup: float
    residual_l2: float
    rotation_count: int
    g_condition: float
    rotation_angles: np.ndarray  # quadrature angles, (R,) or (R, 3)
    signed_weights: np.ndarray  # w_r * g(rho_r); positive -> T2, negative -> T1


def _rotated_support_matrix(body, rotations, directions, chunk=2048):
    """Matrix h(rho_r K, u_g) of shape (R, G), computed in chunks."""
    rotations = np.asarray(rotations, dtype=float)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    r_count, g_count = rotations.shape[0], directions.shape[0]
    out = np.empty((r_count, g_count))
    for start in range(0, r_count, chunk):
        stop = min(start + chunk, r_count)
        block = np.einsum("gk,rkl->rgl", directions, rotations[start:stop])
        out[start:stop] = body.support_vector(block.reshape(-1, rotations.shape[1])).reshape(
            stop - start, g_count
        )
    return out


def decompose(profile, target, rotation_quadrature, test_grid, residual_tol=None):
    """Discretize the rotation average into bodies T1, T2.

    Parameters
    ----------
    profile : GeneratorProfile
    target : HarmonicExpansion
        Band-limited target; must fit inside the profile's orders.
    rotation_quadrature : RotationQuadrature
        Should be exact well beyond the target's top order; aliasing of
        the generator's high-order content sets the residual floor.
    test_grid : SphereQuadrature
        Directions (and weights) used for the sup and L2 residuals.
    residual_tol : float, optional
        When given, a sup residual above it raises
        ResidualToleranceError carrying the finished result.
    """
    if rotation_quadrature.dimension != profile.dimension:
        raise SynthesisError("rotation rule dimension does not match the generator")
    if rotation_quadrature.exact_order < target.max_order:
        raise SynthesisError(
            f"rotation rule exact_order {rotation_quadrature.exact_order} is below "
            f"the target's top order {target.max_order}"
        )
    density = synthesize_g(profile, target)
    g_vals = density.values(rotation_quadrature.elements, rotation_quadrature.angles)
    signed = rotation_quadrature.weights * g_vals

    pos = np.where(signed > 0.0, signed, 0.0)
    neg = np.where(signed < 0.0, -signed, 0.0)
    generator = profile.generator
    eye_parts_pos = tuple(
        (float(w), rotation_quadrature.elements[r], generator)
        for r, w in enumerate(pos)
        if w > 0.0
    )
    eye_parts_neg = tuple(
        (float(w), rotation_quadrature.elements[r], generator)
        for r, w in enumerate(neg)
        if w > 0.0
    )
    t2 = MinkowskiCombination(eye_parts_pos, _dimension=profile.dimension)
    t1 = MinkowskiCombination(eye_parts_neg, _dimension=profile.dimension)

    support_matrix = _rotated_support_matrix(
        generator, rotation_quadrature.elements, test_grid.nodes
    )
    reconstruction = signed @ support_matrix
    residual = target.evaluate(test_grid.nodes) - reconstruction
    residual_sup = float(np.max(np.abs(residual)))
    residual_l2 = float(np.sqrt(test_grid.weights @ residual**2))

    result = DecompositionResult(
        t1=t1,
        t2=t2,
        residual_sup=residual_sup,
        residual_l2=residual_l2,
        rotation_count=rotation_quadrature.element_count,
        g_condition=g_condition(profile, target),
        rotation_angles=rotation_quadrature.angles,
        signed_weights=signed,
    )
    if residual_tol is not None and residual_sup > residual_tol:
        raise ResidualToleranceError(
            f"decomposition residual {residual_sup:.6e} exceeds tolerance {residual_tol:.6e} "
            f"(L2 {residual_l2:.6e}, {result.rotation_count} rotations, "
            f"conditioning {result.g_condition:.3e})",
            result=result,
        )
    return result


def residual_report(result, target_body, grid):
    """Residual of h_L + h_T1 - h_T2 against an explicit body L.

    Evaluates the combination bodies directly (the slow, independent
    path); returns (sup, l2) over the grid.
    """
    h_l = target_body.support_vector(grid.nodes)
    diff = h_l + result.t1.support_vector(grid.nodes) - result.t2.support_vector(grid.nodes)
    sup = float(np.max(np.abs(diff)))
    l2 = float(np.sqrt(grid.weights @ diff**2))
    return sup, l2


def rotation_average_error(body, order, rotation_quadrature, quadrature, grid_directions, corrected=False):
    """Worst grid error of the rotation-average reproduction identity.

    Compares, for all entry pairs (i, j) of the order-m rotation block,

        sum_r w_r h(rho_r K, u) t^m_ij(rho_r)

    against a closed form on the direction grid and returns the sup over
    entries and grid points.

    With ``corrected=False`` the closed form is the entrywise expression
    N(n, m)^-1 (h_K, Y_mj) Y_mi(u).  That is exact in space but *not* in
    the plane, where the complex-type coupling adds a second term (see
    the module docstring); ``corrected=True`` compares against the
    dimension-true closed form, which in the plane reads

        (1/2) [ c_j Y_i  +/-  c_{3-j} Y_{3-i} ]   (+ for i = j, - else)

    and coincides with the entrywise expression in space.
    """
    from .analysis import project

    n_m = harmonic_count(body.dimension, order)
    coeffs = project(body, order, quadrature)
    grid_directions = np.atleast_2d(np.asarray(grid_directions, dtype=float))

    support_matrix = _rotated_support_matrix(
        body, rotation_quadrature.elements, grid_directions
    )  # (R, G)
    basis = basis_values(body.dimension, order, grid_directions)  # (N, G)

    worst = 0.0
    for j in range(1, n_m + 1):
        cols = _density_columns(
            body.dimension, order, j, rotation_quadrature.elements, rotation_quadrature.angles
        )  # (R, N), entry [r, i-1] = t^m_ij(rho_r)
        weighted = cols * rotation_quadrature.weights[:, None]
        lhs = weighted.T @ support_matrix  # (N, G)
        rhs = coeffs[j - 1] / n_m * basis
        if corrected and body.dimension == 2 and order >= 1:
            rhs = np.empty_like(lhs)
            for i in (1, 2):
                sign = 1.0 if i == j else -1.0
                rhs[i - 1] = 0.5 * (
                    coeffs[j - 1] * basis[i - 1] + sign * coeffs[2 - j] * basis[2 - i]
                )
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst
