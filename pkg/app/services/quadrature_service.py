"""Quadrature over disks, annuli and the truncated plane, plus monotone root finding.

Every integral here is taken against dA = dxdy/pi. In polar coordinates about a
center, with t = rho^2, this measure is dt dtheta / (2 pi), so the D_r has
dA-measure r^2.
"""
import logging
import math
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from exceptions import BracketError, QuadratureError, RefinementExhaustedError
from models.quadrature_models import QuadratureSpec

logger = logging.getLogger(__name__)

Field = Callable[[np.ndarray], np.ndarray]

DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=32)
def _gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _panel_rule(lo: float, hi: float, panels: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = _gauss_legendre(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    points = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    scaled = (half[:, None] * weights[None, :]).ravel()
    return points, scaled


def annulus_rule(
    center: complex,
    inner_radius: float,
    outer_radius: float,
    radial_panels: int,
    angular_panels: int,
    order: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and dA-weights of the tensor rule on inner < |z - center| < outer."""
    t, wt = _panel_rule(inner_radius**2, outer_radius**2, radial_panels, order)
    theta, wtheta = _panel_rule(0.0, 2.0 * math.pi, angular_panels, order)
    points = center + np.sqrt(t)[:, None] * np.exp(1j * theta)[None, :]
    weights = wt[:, None] * wtheta[None, :] / (2.0 * math.pi)
    return points.ravel(), weights.ravel()


def disk_rule(
    center: complex, radius: float, radial_panels: int, angular_panels: int, order: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and dA-weights of the tensor rule on the disk D_radius(center)."""
    return annulus_rule(center, 0.0, radius, radial_panels, angular_panels, order)


def _apply_rule(f: Field, points: np.ndarray, weights: np.ndarray) -> float:
    values = np.asarray(f(points), dtype=float)
    if values.shape != points.shape:
        values = np.broadcast_to(values, points.shape)
    estimate = float(np.sum(weights * values))
    if not math.isfinite(estimate):
        raise QuadratureError("integrand produced a non-finite value on the quadrature nodes")
    return estimate


def integrate_annulus(
    f: Field,
    center: complex,
    inner_radius: float,
    outer_radius: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """
    Integrate a vectorized real field over an annulus against dA.

    Args:
        f: Callable mapping a complex ndarray of points to real values of the same shape
        center: Center of the annulus
        inner_radius: Inner radius (0 for a disk)
        outer_radius: Outer radius
        spec: Tolerances and panel counts

    Returns:
        The integral estimate

    Raises:
        RefinementExhaustedError: If successive levels never agree within tolerance
    """
    if outer_radius <= 0 or inner_radius < 0 or inner_radius >= outer_radius:
        raise ValueError(f"invalid radii inner={inner_radius!r}, outer={outer_radius!r}")

    previous: Optional[float] = None
    error = math.inf
    estimate = math.nan
    for level in range(spec.max_refinements + 1):
        factor = 2**level
        points, weights = annulus_rule(
            center,
            inner_radius,
            outer_radius,
            spec.radial_panels * factor,
            spec.angular_panels * factor,
            spec.order,
        )
        estimate = _apply_rule(f, points, weights)
        if previous is not None:
            error = abs(estimate - previous)
            if error <= max(spec.abs_tol, spec.rel_tol * abs(estimate)):
                logger.debug(f"[Quadrature] Converged at level {level}: {estimate!r} +/- {error:.3e}")
                return estimate
        previous = estimate

    logger.warning(f"[Quadrature] Refinement exhausted: estimate={estimate!r}, error={error:.3e}")
    raise RefinementExhaustedError(estimate, error, spec.max_refinements)


def integrate_disk(f: Field, center: complex, radius: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Integrate f over D_radius(center) against dA = dxdy/pi."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius!r}")
    return integrate_annulus(f, center, 0.0, radius, spec)


def integrate_plane_truncated(
    f: Field,
    center: complex,
    cutoff_radius: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    tail_bound: Optional[float] = None,
) -> Tuple[float, float]:
    """
    Integrate f over the plane, truncated to D_cutoff(center).

    The remainder outside the cutoff is reported separately: either the caller's
    bound, or a coarse single-level estimate over the annulus cutoff < |z| < 2 cutoff.

    Returns:
        Tuple of (value, tail_bound)
    """
    value = integrate_disk(f, center, cutoff_radius, spec)
    if tail_bound is None:
        points, weights = annulus_rule(
            center, cutoff_radius, 2.0 * cutoff_radius, spec.radial_panels, spec.angular_panels, spec.order
        )
        tail_bound = abs(_apply_rule(f, points, weights))
    return value, float(tail_bound)


def find_root_monotone(g: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """
    Root of a continuous monotone function on a sign-changing bracket.

    Uses Brent's method, which falls back to bisection whenever interpolation
    does not shrink the bracket, so convergence is guaranteed.

    Raises:
        BracketError: If g(lo) and g(hi) have the same strict sign
    """
    g_lo = float(g(lo))
    g_hi = float(g(hi))
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if math.copysign(1.0, g_lo) == math.copysign(1.0, g_hi):
        raise BracketError(lo, hi, g_lo, g_hi)
    return float(brentq(g, lo, hi, xtol=tol, rtol=4.0 * np.finfo(float).eps, maxiter=500))
