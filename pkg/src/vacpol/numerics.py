"""Shared numerical kernels: adaptive quadrature, bracketed root finding, and
dense Hermitian eigendecomposition.

Everything here is deterministic: fixed node sets, worst-panel-first refinement
with a fixed tie break, no randomness.  The quadrature serves the
renormalization multipliers, whose integrands blow up like 1/(1-z) at an upper
endpoint just below 1; for such limits the integral is evaluated in the
substituted variable z = 1 - exp(-t), which flattens the near-singularity.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "EIGH_DIMENSION_CAP",
    "QuadratureResult",
    "NonConvergence",
    "BadBracket",
    "TooLarge",
    "integrate_adaptive",
    "find_root_monotone",
    "eigh",
]

# Dense eigendecomposition is O(n^3); past this size the desk-scale model is the
# wrong tool and we refuse rather than thrash.
EIGH_DIMENSION_CAP = 8192

# Upper limits beyond this are treated as near-singular and substituted.
_SUBSTITUTION_THRESHOLD = 0.999

_GL7_NODES, _GL7_WEIGHTS = leggauss(7)
_GL15_NODES, _GL15_WEIGHTS = leggauss(15)


class NonConvergence(RuntimeError):
    """Quadrature panel budget exhausted before reaching the tolerance."""

    def __init__(self, message: str, value: float = math.nan, error_estimate: float = math.nan):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class BadBracket(ValueError):
    """Root bracket endpoints do not straddle a sign change."""


class TooLarge(ValueError):
    """Problem size exceeds the dense-solver cap."""


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def _panel_estimate(f: Callable, a: float, b: float) -> tuple[float, float]:
    """Gauss-Legendre 15 value and |GL15 - GL7| error surrogate on [a, b]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = np.concatenate((mid + half * _GL15_NODES, mid + half * _GL7_NODES))
    vals = np.asarray(f(nodes), dtype=float)
    hi = half * float(np.dot(_GL15_WEIGHTS, vals[:15]))
    lo = half * float(np.dot(_GL7_WEIGHTS, vals[15:]))
    return hi, abs(hi - lo)


def integrate_adaptive(
    f: Callable,
    a: float,
    b: float,
    tol: float = 1e-10,
    max_panels: int = 4096,
) -> QuadratureResult:
    """Integrate a vectorized scalar function over [a, b].

    Panels are bisected worst-error-first (ties by creation order) until the
    summed error surrogate drops below max(tol, tol*|value|).  When the upper
    limit lies in (0.999, 1) the integral is transformed through
    z = 1 - exp(-t), so integrands with a 1/(1-z)-type near-singularity are
    tamed before any panel is laid down.

    Raises NonConvergence once max_panels panels exist and the tolerance is
    still not met; the exception carries the best value and error estimate.
    """
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)
    if b < a:
        res = integrate_adaptive(f, b, a, tol, max_panels)
        return QuadratureResult(-res.value, res.error_estimate, res.evaluations)

    if _SUBSTITUTION_THRESHOLD < b < 1.0:
        g = lambda t: f(-np.expm1(-t)) * np.exp(-t)
        ta = -math.log1p(-a) if a < 1.0 else math.inf
        tb = -math.log1p(-b)
        return integrate_adaptive(g, ta, tb, tol, max_panels)

    evaluations = 0
    counter = 0
    val, err = _panel_estimate(f, a, b)
    evaluations += 22
    if not math.isfinite(val) or not math.isfinite(err):
        raise NonConvergence("non-finite integrand on [%g, %g]" % (a, b))
    # heap entries: (-error, creation_index, left, right, value, error)
    heap = [(-err, counter, a, b, val, err)]
    while True:
        total_err = math.fsum(item[5] for item in heap)
        total_val = math.fsum(item[4] for item in heap)
        if total_err <= max(tol, tol * abs(total_val)):
            panels = sorted(heap, key=lambda item: item[2])
            value = math.fsum(p[4] for p in panels)
            return QuadratureResult(value, total_err, evaluations)
        if len(heap) >= max_panels:
            raise NonConvergence(
                "quadrature budget of %d panels exhausted (error %.3e > tol %.3e)"
                % (max_panels, total_err, tol),
                value=total_val,
                error_estimate=total_err,
            )
        _, _, pa, pb, _, _ = heapq.heappop(heap)
        pm = 0.5 * (pa + pb)
        for (qa, qb) in ((pa, pm), (pm, pb)):
            qv, qe = _panel_estimate(f, qa, qb)
            evaluations += 22
            if not math.isfinite(qv) or not math.isfinite(qe):
                raise NonConvergence("non-finite integrand on [%g, %g]" % (qa, qb))
            counter += 1
            heapq.heappush(heap, (-qe, counter, qa, qb, qv, qe))


def find_root_monotone(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    max_iter: int = 256,
) -> float:
    """Bisection root of a monotone function on a bracketing interval.

    Returns the bracket midpoint once the bracket is narrower than tol (or an
    endpoint that evaluates exactly to zero).  Deterministic; the result is
    independent of the initial bracket as long as it contains the same root.
    """
    if not hi > lo:
        raise BadBracket("need lo < hi, got [%g, %g]" % (lo, hi))
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BadBracket("f has the same sign at both endpoints: f(%g)=%g, f(%g)=%g"
                         % (lo, flo, hi, fhi))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid == lo or mid == hi:
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (fhi > 0):
            hi, fhi = mid, fmid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def eigh(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, orthonormal eigenvectors as columns).
    The input must be square, Hermitian to 1e-12 relative Frobenius error, and
    no larger than EIGH_DIMENSION_CAP.
    """
    h = np.asarray(matrix)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix, got shape %r" % (h.shape,))
    n = h.shape[0]
    if n > EIGH_DIMENSION_CAP:
        raise TooLarge("matrix dimension %d exceeds the dense cap %d" % (n, EIGH_DIMENSION_CAP))
    scale = max(1.0, float(np.linalg.norm(h)))
    if float(np.linalg.norm(h - h.conj().T)) > 1e-12 * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(h)
    return vals, vecs
