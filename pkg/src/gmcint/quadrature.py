"""Adaptive Gauss-Legendre panel integration.

Small self-contained kernel shared by the double gamma evaluator and the
integral identity checks.  Panels are laid out geometrically by the caller;
each panel is integrated with a 32-node rule, the error is estimated against
a 16-node rule, and failing panels are bisected.
"""
from __future__ import annotations

import numpy as np

from .errors import ConvergenceError

_GL32_X, _GL32_W = np.polynomial.legendre.leggauss(32)
_GL16_X, _GL16_W = np.polynomial.legendre.leggauss(16)

_MAX_DEPTH = 40


def geometric_edges(a, b, ratio=3.0):
    """Panel edges from a to b with geometrically growing widths."""
    if not (0.0 < a < b):
        raise ValueError("need 0 < a < b")
    edges = [a]
    while edges[-1] < b:
        edges.append(min(edges[-1] * ratio, b))
    return edges


def integrate_panels(f, edges, rel_tol=1e-13, abs_floor=1.0):
    """Integrate a smooth vectorized integrand over consecutive panels.

    Each panel is accepted when the 32- vs 16-node Gauss-Legendre results
    agree within rel_tol * (abs_floor + |value|); otherwise it is bisected.
    abs_floor makes the criterion an absolute one for near-zero panels.
    """
    total = 0.0
    stack = [(edges[i], edges[i + 1], 0) for i in range(len(edges) - 1)]
    while stack:
        a, b, depth = stack.pop()
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        v32 = half * np.dot(_GL32_W, f(mid + half * _GL32_X))
        v16 = half * np.dot(_GL16_W, f(mid + half * _GL16_X))
        if not np.isfinite(v32):
            raise ConvergenceError(f"non-finite panel integral on [{a}, {b}]")
        if abs(v32 - v16) <= rel_tol * (abs_floor + abs(v32)) or depth >= _MAX_DEPTH:
            if depth >= _MAX_DEPTH and abs(v32 - v16) > 1e6 * rel_tol * (abs_floor + abs(v32)):
                raise ConvergenceError(f"panel refinement stalled on [{a}, {b}]")
            total += v32
        else:
            stack.append((a, mid, depth + 1))
            stack.append((mid, b, depth + 1))
    return total
