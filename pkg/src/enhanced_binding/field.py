"""Ultraviolet cutoff, polarization frame and the field coupling kernels.

Units: hbar = c = 1 and particle mass 1/2, so the free kinetic energy is
-Laplacian. Only the kernels at particle position x = 0 are provided; the
fibre operator at zero total momentum never needs anything else.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import integrate_radial

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


class AxisSingularityError(ValueError):
    """Polarization frame requested on the k3 axis, where it is undefined."""


@dataclass(frozen=True)
class CutoffProfile:
    """Radial cutoff zeta(r) with compact support [0, radius].

    ``variant`` is ``"sharp"`` (indicator of [0, radius]) or ``"bump"``
    (equal to one up to ``radius - width``, then a cos^2 ramp to zero, which
    is C^1). ``amplitude`` rescales zeta; it exists for homogeneity checks.
    """

    variant: str = "sharp"
    radius: float = 1.0
    width: float = 0.2
    amplitude: float = 1.0

    def __post_init__(self):
        if self.variant not in ("sharp", "bump"):
            raise ValueError(f"unknown cutoff variant {self.variant!r}")
        if self.radius <= 0:
            raise ValueError("cutoff radius must be positive")
        if self.variant == "bump" and not 0 < self.width <= self.radius:
            raise ValueError("bump width must lie in (0, radius]")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.variant == "sharp":
            out = np.where(r <= self.radius, 1.0, 0.0)
        else:
            start = self.radius - self.width
            t = np.clip((r - start) / self.width, 0.0, 1.0)
            out = np.where(r <= self.radius, np.cos(0.5 * np.pi * t) ** 2, 0.0)
        return self.amplitude * out

    @property
    def breakpoints(self):
        """Radii where zeta is not smooth, including the support edge."""
        if self.variant == "bump" and self.width < self.radius:
            return (0.0, self.radius - self.width, self.radius)
        return (0.0, self.radius)

    def is_null(self):
        return self.amplitude == 0.0


@dataclass(frozen=True)
class ModelParams:
    """Fine structure constant and spin flag (1 keeps the sigma.B term)."""

    alpha: float = 0.0
    g: int = 1

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.g not in (0, 1):
            raise ValueError("spin flag g must be 0 or 1")


def polarization_pair(k):
    """Transverse frame (eps1, eps2) for momenta ``k`` of shape (..., 3).

    eps1 = (k2, -k1, 0)/sqrt(k1^2 + k2^2) and eps2 = khat x eps1, so that
    (khat, eps1, eps2) is right handed.
    """
    k = np.asarray(k, dtype=float)
    rho = np.hypot(k[..., 0], k[..., 1])
    if np.any(rho == 0.0):
        raise AxisSingularityError("polarization undefined on the k3 axis")
    zero = np.zeros_like(rho)
    eps1 = np.stack([k[..., 1] / rho, -k[..., 0] / rho, zero], axis=-1)
    khat = k / np.linalg.norm(k, axis=-1, keepdims=True)
    eps2 = np.cross(khat, eps1)
    return eps1, eps2


def normal_ordering_constant(cutoff: CutoffProfile) -> float:
    """c_no = (2/pi) * int_0^inf r zeta(r)^2 dr."""
    if cutoff.is_null():
        return 0.0
    value, _ = integrate_radial(
        lambda r: r * cutoff(r) ** 2, (0.0, cutoff.radius), points=cutoff.breakpoints
    )
    return 2.0 / np.pi * value


def _prefactor(k, cutoff):
    kn = np.linalg.norm(k, axis=-1)
    return cutoff(kn) / (2 * np.pi * np.sqrt(kn))


def _eps(k, lam):
    if lam not in (1, 2):
        raise ValueError("polarization index must be 1 or 2")
    return polarization_pair(k)[lam - 1]


def D_kernel(k, lam: int, cutoff: CutoffProfile):
    """Coefficient of a_lam(k) in the vector potential at x = 0."""
    k = np.asarray(k, dtype=float)
    return (_prefactor(k, cutoff)[..., None] * _eps(k, lam)).astype(complex)


def K_kernel(k, lam: int, cutoff: CutoffProfile):
    """Coefficient of a_lam(k) in the magnetic field at x = 0: pref * k x (i eps)."""
    k = np.asarray(k, dtype=float)
    return _prefactor(k, cutoff)[..., None] * np.cross(k, 1j * _eps(k, lam))


def sigma_dot(v, spinor):
    """(sigma . v) applied to a two-component spinor; ``v`` may be batched."""
    v = np.asarray(v, dtype=complex)
    a, b = np.asarray(spinor, dtype=complex)
    up = v[..., 2] * a + (v[..., 0] - 1j * v[..., 1]) * b
    down = (v[..., 0] + 1j * v[..., 1]) * a - v[..., 2] * b
    return np.stack([up, down], axis=-1)
