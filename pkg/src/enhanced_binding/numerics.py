"""Quadrature, angular averaging and fixed-point iteration.

Everything here is shared plumbing for the physics modules. Radial
integrals always arrive already multiplied by the spherical volume
element, so integrands are bounded at r = 0 and no routine ever samples a
bare 1/|k| at the origin.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class FixedPointError(RuntimeError):
    """Fixed-point iteration diverged or hit its iteration cap."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class RadialQuadrature:
    """Settings for :func:`integrate_radial`.

    ``scheme`` is ``"adaptive"`` (QUADPACK Gauss-Kronrod, interior nodes
    only) or ``"gauss"`` (composite Gauss-Legendre with ``order`` nodes per
    panel and ``max_subdivisions`` panels, error estimated by halving).
    """

    scheme: str = "adaptive"
    tol: float = 1e-10
    max_subdivisions: int = 200
    order: int = 32

    def __post_init__(self):
        if self.scheme not in ("adaptive", "gauss"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")


DEFAULT_QUADRATURE = RadialQuadrature()


def gauss_panels(breaks: Sequence[float], order: int = 24):
    """Composite Gauss-Legendre nodes and weights over consecutive panels.

    Parameters
    ----------
    breaks : sequence of float
        Increasing panel boundaries.
    order : int
        Nodes per panel.

    Returns
    -------
    nodes, weights : ndarray
    """
    breaks = np.asarray(breaks, dtype=float)
    if np.any(np.diff(breaks) <= 0):
        raise ValueError("panel boundaries must be strictly increasing")
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    nodes = 0.5 * (b - a) * x + 0.5 * (b + a)
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


def graded_breaks(a: float, b: float, levels: int = 4, ratio: float = 10.0):
    """Panel boundaries on [a, b] refined geometrically towards ``a``."""
    width = b - a
    inner = [a + width * ratio ** (-k) for k in range(levels, 0, -1)]
    return np.array([a, *inner, b])


def _gauss_integral(f, a, b, order, panels):
    nodes, weights = gauss_panels(np.linspace(a, b, panels + 1), order)
    return float(np.sum(weights * f(nodes)))


def integrate_radial(
    f: Callable,
    interval: tuple[float, float],
    quadrature: RadialQuadrature = DEFAULT_QUADRATURE,
    points: Sequence[float] | None = None,
):
    """Integrate a scalar function of the radius over ``interval``.

    Returns ``(value, error_estimate)``. Raises :class:`QuadratureError` if
    the requested tolerance is not reached; the exception carries the last
    estimate.
    """
    a, b = map(float, interval)
    if b < a:
        raise ValueError("interval bounds must be ordered")
    if a == b:
        return 0.0, 0.0
    if quadrature.scheme == "adaptive":
        inner = None
        if points is not None:
            inner = [p for p in points if a < p < b] or None
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                value, err = integrate.quad(
                    f,
                    a,
                    b,
                    epsabs=quadrature.tol,
                    epsrel=quadrature.tol,
                    limit=quadrature.max_subdivisions,
                    points=inner,
                )
            except integrate.IntegrationWarning as exc:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    value, err = integrate.quad(
                        f, a, b, limit=quadrature.max_subdivisions, points=inner
                    )
                raise QuadratureError(str(exc), value, err) from None
        return value, abs(err)

    vf = np.vectorize(f, otypes=[float]) if not _is_vectorized(f) else f
    cuts = sorted({a, b, *(p for p in (points or ()) if a < p < b)})
    coarse = fine = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        coarse += _gauss_integral(vf, lo, hi, quadrature.order, 1)
        fine += _gauss_integral(vf, lo, hi, quadrature.order, 2)
    err = abs(fine - coarse)
    panels = 2
    while err > quadrature.tol * max(1.0, abs(fine)):
        panels *= 2
        if panels > quadrature.max_subdivisions:
            raise QuadratureError("composite Gauss did not converge", fine, err)
        coarse = fine
        fine = sum(
            _gauss_integral(vf, lo, hi, quadrature.order, panels)
            for lo, hi in zip(cuts[:-1], cuts[1:])
        )
        err = abs(fine - coarse)
    return fine, err


def _is_vectorized(f):
    try:
        out = np.asarray(f(np.array([0.25, 0.5])))
    except Exception:
        return False
    return out.shape == (2,)


@dataclass(frozen=True)
class AngularScheme:
    """Quadrature on the unit sphere normalised to the mean value.

    ``nodes`` has shape (n, 3), ``weights`` sums to one.
    """

    nodes: np.ndarray
    weights: np.ndarray
    degree: int = field(default=0)

    def __post_init__(self):
        norms = np.linalg.norm(self.nodes, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-14:
            raise ValueError("angular nodes must be unit vectors")
        if np.any(self.nodes[:, 0] ** 2 + self.nodes[:, 1] ** 2 == 0.0):
            raise ValueError("angular node on the k3 axis")
        if np.any(self.weights <= 0):
            raise ValueError("angular weights must be positive")

    @property
    def size(self):
        return len(self.weights)


def product_scheme(n_theta: int = 6, n_phi: int = 8, phi_offset: float = 0.1234):
    """Gauss-Legendre in cos(theta) times a uniform rule in phi.

    Exact for spherical polynomials of degree ``min(2*n_theta - 1, n_phi - 1)``.
    The phi grid is shifted away from multiples of pi/2 and the Gauss nodes
    never reach cos(theta) = +-1, so no node lies on the k3 axis.
    """
    if n_theta < 1 or n_phi < 1:
        raise ValueError("need at least one node per direction")
    mu, wmu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi + phi_offset
    if np.any(np.isclose(np.mod(phi, np.pi / 2), 0.0, atol=1e-8)):
        raise ValueError("phi offset puts a node on a coordinate plane")
    sin_t = np.sqrt(1.0 - mu**2)
    nodes = np.stack(
        [
            np.outer(sin_t, np.cos(phi)).ravel(),
            np.outer(sin_t, np.sin(phi)).ravel(),
            np.repeat(mu, n_phi),
        ],
        axis=1,
    )
    nodes /= np.linalg.norm(nodes, axis=1, keepdims=True)
    weights = np.repeat(wmu / 2.0, n_phi) / n_phi
    return AngularScheme(nodes, weights, degree=min(2 * n_theta - 1, n_phi - 1))


def angular_average(g: Callable, scheme: AngularScheme):
    """Mean of ``g`` over the unit sphere, ``g`` taking an (n, 3) array."""
    values = np.asarray(g(scheme.nodes))
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("angular integrand not finite at a node")
    return np.tensordot(scheme.weights, values, axes=(0, 0))


@dataclass
class FixedPointResult:
    value: float
    iterations: int
    residual: float
    trace: list


def fixed_point(
    mapping: Callable[[float], float],
    x0: float,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> FixedPointResult:
    """Plain iteration x <- mapping(x) until |x - mapping(x)| <= tol.

    Raises :class:`FixedPointError` when the residual grows for several
    consecutive steps or the iteration cap is hit.
    """
    x = float(x0)
    trace = [x]
    prev_res = np.inf
    growth = 0
    for it in range(1, max_iter + 1):
        nx = float(mapping(x))
        res = abs(nx - x)
        trace.append(nx)
        if not np.isfinite(nx):
            raise FixedPointError("iteration produced a non-finite value", trace)
        if res <= tol:
            return FixedPointResult(nx, it, res, trace)
        growth = growth + 1 if res > prev_res else 0
        if growth >= 5:
            raise FixedPointError("residual growing; map is not contracting", trace)
        prev_res = res
        x = nx
    raise FixedPointError(f"no convergence after {max_iter} iterations", trace)
