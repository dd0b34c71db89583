"""Adaptive mean-value quadrature for smooth (optionally periodic) integrands.

The integrands averaged here (tunneling current over an optical cycle,
optionally weighted by a pulse envelope) are smooth, so a composite rule
with interval doubling converges quickly; the relative change between
successive doublings serves as the error estimate.
"""

import numpy as np

from .errors import QuadratureError


def periodic_mean(f, n: int) -> float:
    """Mean of ``f`` over one period using ``n`` uniform samples.

    ``f`` must accept an ndarray of sample phases in [0, 2 pi). For a
    periodic integrand the uniform rectangle rule is the trapezoid rule
    and converges spectrally.
    """
    phases = np.arange(n) * (2.0 * np.pi / n)
    return float(np.mean(f(phases)))


def interval_mean(f, a: float, b: float, n: int) -> float:
    """Composite-trapezoid mean of ``f`` over [a, b] with ``n`` panels."""
    x = np.linspace(a, b, n + 1)
    y = np.asarray(f(x), dtype=float)
    return float(np.trapezoid(y, x) / (b - a))


def adaptive_mean(f, a=0.0, b=2.0 * np.pi, *, periodic=True,
                  rel_tol=1e-8, n_start=32, max_doublings=20) -> tuple[float, int]:
    """Adaptively refined mean of ``f`` over [a, b].

    Doubles the sample count until the estimate changes by less than
    ``rel_tol`` (relative), then returns ``(mean, n_samples)``.

    Raises
    ------
    QuadratureError
        If the tolerance is not met within ``max_doublings`` refinements.
    """
    if periodic:
        def estimate(n):
            return periodic_mean(lambda p: f(a + (b - a) * p / (2.0 * np.pi)), n)
    else:
        def estimate(n):
            return interval_mean(f, a, b, n)

    n = int(n_start)
    prev = estimate(n)
    delta = np.inf
    for _ in range(int(max_doublings)):
        n *= 2
        cur = estimate(n)
        delta = abs(cur - prev)
        scale = max(abs(cur), 1e-300)
        if delta <= rel_tol * scale:
            return cur, n
        prev = cur
    raise QuadratureError(
        f"mean did not converge to rel_tol={rel_tol:g} within "
        f"{max_doublings} doublings (n={n}, last relative change "
        f"{delta / max(abs(prev), 1e-300):.3e})",
        n_points=n, last_delta=delta, rel_tol=rel_tol)
