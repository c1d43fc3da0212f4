"""Radial potentials, the d-functionals and the constant C_W."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .numerics import QuadratureError, RadialQuadrature, integrate_radial


class DivergentBranchError(RuntimeError):
    def __init__(self, branch, detail=""):
        super().__init__(f"d-functional branch {branch!r} did not converge {detail}".strip())
        self.branch = branch


@dataclass(frozen=True)
class RadialPotential:
    """A spherically symmetric potential W(r), treated as zero beyond ``support``.

    ``breakpoints`` lists radii where the profile is not smooth (they become
    panel edges for every quadrature). ``decay`` holds the (a, c, delta)
    triple of the tail hypothesis |W| <= c (1 + r)^(-2 - delta) for r > a.
    """

    profile: Callable
    support: float
    breakpoints: tuple = ()
    decay: tuple | None = None
    name: str = "custom"

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.support, self.profile(r), 0.0)

    @property
    def edges(self):
        pts = {0.0, float(self.support), *map(float, self.breakpoints)}
        return tuple(sorted(p for p in pts if 0.0 <= p <= self.support))

    def scaled(self, factor):
        f = self.profile
        return replace(self, profile=lambda r: factor * f(r), name=f"{factor}*{self.name}")


def indicator_well(depth=1.0, radius=1.0):
    """W = -depth on the ball of given radius, zero outside."""
    return RadialPotential(
        profile=lambda r: np.full_like(np.asarray(r, dtype=float), -depth),
        support=radius,
        name=f"indicator_well(depth={depth}, radius={radius})",
    )


def smooth_well(depth=1.0, radius=1.0):
    """W = -depth (1 - (r/radius)^2)^2 inside the ball; C^1 at the edge."""
    return RadialPotential(
        profile=lambda r: -depth * (1.0 - (np.asarray(r) / radius) ** 2) ** 2,
        support=radius,
        name=f"smooth_well(depth={depth}, radius={radius})",
    )


def zero_potential(radius=1.0):
    return RadialPotential(lambda r: np.zeros_like(np.asarray(r, dtype=float)), radius, name="zero")


def load_tabulated(path):
    """Read a two-column (radius, value) text file and interpolate linearly."""
    data = np.loadtxt(Path(path), ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns (radius, value)")
    r, w = data[:, 0], data[:, 1]
    if np.any(np.diff(r) <= 0) or r[0] < 0:
        raise ValueError(f"{path}: radii must be non-negative and strictly increasing")
    return RadialPotential(
        profile=lambda x: np.interp(x, r, w),
        support=float(r[-1]),
        breakpoints=tuple(r[1:-1]) if len(r) < 64 else (),
        name=f"tabulated({Path(path).name})",
    )


def positive_part(W: RadialPotential) -> RadialPotential:
    """W_+ = (|W| + W)/2."""
    f = W.profile
    return replace(W, profile=lambda r: np.maximum(f(r), 0.0), name=f"({W.name})_+")


def squared(W: RadialPotential) -> RadialPotential:
    f = W.profile
    return replace(W, profile=lambda r: f(r) ** 2, name=f"({W.name})^2")


@dataclass(frozen=True)
class DFunctionalReport:
    double_integral: float
    radial: float | None

    @property
    def value(self):
        if self.radial is None:
            return self.double_integral
        return min(self.double_integral, self.radial)


_TIGHT = RadialQuadrature(tol=1e-11, max_subdivisions=400)


def _radial_branch(v: RadialPotential):
    try:
        val, _ = integrate_radial(
            lambda t: t * abs(float(v(t))), (0.0, v.support), _TIGHT, points=v.edges
        )
    except QuadratureError as exc:
        raise DivergentBranchError("radial", str(exc)) from None
    return val


def _double_branch(v: RadialPotential):
    # angular reduction: int_{S^2} dOmega_y / |x - y|^2 = (2 pi/(r s)) ln((r+s)/|r-s|)
    R = v.support

    def inner(r):
        if r == 0.0:
            return 0.0
        pts = sorted({*v.edges, r})
        val, _ = integrate_radial(
            lambda s: s * abs(float(v(s))) * np.log((r + s) / abs(r - s)) if s != r else 0.0,
            (0.0, R),
            _TIGHT,
            points=pts,
        )
        return r * abs(float(v(r))) * val

    try:
        total, _ = integrate_radial(inner, (0.0, R), _TIGHT, points=v.edges)
    except QuadratureError as exc:
        raise DivergentBranchError("double_integral", str(exc)) from None
    return np.sqrt(8 * np.pi**2 * max(total, 0.0)) / (2 * np.pi)


def d_functional(v: RadialPotential) -> DFunctionalReport:
    """Both branches of the d-functional of a radial potential and their minimum."""
    return DFunctionalReport(double_integral=_double_branch(v), radial=_radial_branch(v))


def d_double_monte_carlo(v: Callable, radius: float, n: int = 200_000, seed: int = 0):
    """Double-integral branch for a possibly non-radial ``v`` supported in a ball.

    ``v`` takes an (n, 3) array of points. The displacement y - x is drawn
    with density proportional to 1/|y - x|^2, which makes the estimator
    bounded. Returns ``(value, standard_error)`` of d_v itself.
    """
    rng = np.random.default_rng(seed)
    x = _uniform_ball(rng, n, radius)
    rho = rng.uniform(0.0, 2 * radius, n)
    omega = rng.normal(size=(n, 3))
    omega /= np.linalg.norm(omega, axis=1, keepdims=True)
    y = x + rho[:, None] * omega
    vol = 4.0 / 3.0 * np.pi * radius**3
    sample = np.abs(v(x)) * np.abs(v(y)) * 4 * np.pi * 2 * radius * vol
    mean, se = sample.mean(), sample.std(ddof=1) / np.sqrt(n)
    d = np.sqrt(max(mean, 0.0)) / (2 * np.pi)
    d_se = se / (2 * np.sqrt(max(mean, 1e-300))) / (2 * np.pi)
    return d, d_se


def _uniform_ball(rng, n, radius):
    p = rng.normal(size=(n, 3))
    p /= np.linalg.norm(p, axis=1, keepdims=True)
    return p * radius * rng.uniform(0, 1, n)[:, None] ** (1 / 3)


def c_w_constant(lambda0: float, W: RadialPotential) -> float:
    """C_W = lambda0^2 (1 + lambda0 d_{W_+}) d_{W^2}."""
    if lambda0 <= 0:
        raise ValueError("critical coupling must be positive")
    d_plus = d_functional(positive_part(W)).value
    d_sq = d_functional(squared(W)).value
    return lambda0**2 * (1.0 + lambda0 * d_plus) * d_sq


@dataclass(frozen=True)
class DecayCheck:
    passed: bool
    worst_ratio: float
    worst_radius: float


def decay_check(W: RadialPotential, a=None, c=None, delta=None, r_max=None, samples=400):
    """Test |W(r)| <= c (1 + r)^(-2 - delta) on a log grid in (a, r_max]."""
    if None in (a, c, delta):
        if W.decay is None:
            raise ValueError("decay parameters not set")
        a, c, delta = W.decay
    r_max = r_max or max(W.support, 10.0 * a)
    r = np.geomspace(a, r_max, samples + 1)[1:]
    ratio = np.abs(W(r)) / (c * (1 + r) ** (-2 - delta))
    i = int(np.argmax(ratio))
    return DecayCheck(bool(ratio[i] <= 1.0), float(ratio[i]), float(r[i]))
