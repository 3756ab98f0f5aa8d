"""Compiled O(n) kernels for the incremental energy and the Metropolis inner loop.

All kernels release the GIL so independent chains run in parallel threads.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def potential_value(z, coefficients, origin):
    """Q(z) = sum_m c_m |z - a|^{2m} by Horner's rule."""
    w = z - origin
    s = w.real * w.real + w.imag * w.imag
    value = 0.0
    for idx in range(coefficients.shape[0] - 1, -1, -1):
        value = (value + coefficients[idx]) * s
    return value


@njit(cache=True, nogil=True)
def pair_log_sum(points, j, target):
    """Sum over i != j of log|target - points[i]|; -inf on coincidence."""
    total = 0.0
    for i in range(points.shape[0]):
        if i == j:
            continue
        distance = abs(target - points[i])
        if distance == 0.0:
            return -math.inf
        total += math.log(distance)
    return total


@njit(cache=True, nogil=True)
def move_delta_kernel(points, j, new_point, coefficients, origin):
    """H(after) - H(before) when particle j moves to new_point; +inf on coincidence."""
    n = points.shape[0]
    new_logs = pair_log_sum(points, j, new_point)
    if new_logs == -math.inf:
        return math.inf
    old_logs = pair_log_sum(points, j, points[j])
    q_change = potential_value(new_point, coefficients, origin) - potential_value(points[j], coefficients, origin)
    return -2.0 * (new_logs - old_logs) + n * q_change


@njit(cache=True, nogil=True)
def metropolis_accept(delta, beta, uniform):
    """Accept iff uniform < min(1, exp(-beta * delta))."""
    if delta <= 0.0:
        return True
    if delta == math.inf:
        return False
    return uniform < math.exp(-beta * delta)


@njit(cache=True, nogil=True)
def metropolis_block(points, coefficients, origin, beta, scale, indices, steps, uniforms):
    """
    Run len(indices) single-particle Gaussian moves in place.

    Returns the number of accepted moves and the accumulated energy change.
    """
    accepted = 0
    energy_change = 0.0
    for t in range(indices.shape[0]):
        j = indices[t]
        proposal = points[j] + scale * steps[t]
        delta = move_delta_kernel(points, j, proposal, coefficients, origin)
        if metropolis_accept(delta, beta, uniforms[t]):
            points[j] = proposal
            accepted += 1
            energy_change += delta
    return accepted, energy_change


def as_points(points) -> np.ndarray:
    """Contiguous complex128 copy suitable for the kernels."""
    return np.ascontiguousarray(points, dtype=np.complex128).copy()
