"""Zero-momentum self-energy restricted to the vacuum and one-photon sectors.

One-photon amplitudes are stored with four components ordered
(up, pol 1), (up, pol 2), (down, pol 1), (down, pol 2) on a product grid of
radial Gauss nodes in [0, cutoff radius] and an angular scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import field as fld
from .numerics import (
    AngularScheme,
    RadialQuadrature,
    fixed_point,
    gauss_panels,
    integrate_radial,
    product_scheme,
)

_TIGHT = RadialQuadrature(tol=1e-14, max_subdivisions=400)


class SpinorError(ValueError):
    pass


def spinor(a=1.0, b=0.0, tol=1e-12):
    """Validated zero-photon coefficients (a, b) with |a|^2 + |b|^2 = 1."""
    v = np.array([a, b], dtype=complex)
    if abs(np.vdot(v, v).real - 1.0) > tol:
        raise SpinorError(f"|a|^2 + |b|^2 = {np.vdot(v, v).real!r}, expected 1")
    return v


def random_spinor(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------- grid


@dataclass(frozen=True, eq=False)
class PhotonGrid:
    """Product quadrature grid for one-photon momenta k with |k| <= cutoff radius.

    ``infrared`` > 0 adds panels graded geometrically (ratio 4) from that
    scale up to 0.01 Lambda, which keeps resolvents (k^2 + |k| - E)^-1 with
    small |E| accurate to near machine precision.
    """

    cutoff: fld.CutoffProfile
    radial_order: int = 20
    angular: AngularScheme = field(default_factory=lambda: product_scheme(6, 8))
    infrared: float = 0.0
    k: np.ndarray = field(init=False, repr=False)
    kn: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lam = self.cutoff.radius
        breaks = {0.0, 0.01 * lam, 0.1 * lam, 0.5 * lam, *self.cutoff.breakpoints}
        top = 0.01 * lam
        if 0 < self.infrared < top:
            n = 2 + int(np.log(top / self.infrared) / np.log(4))
            breaks |= set(np.geomspace(self.infrared, top, n)[:-1])
        breaks = sorted(b for b in breaks if b <= lam)
        r, wr = gauss_panels(breaks, self.radial_order)
        k = (r[:, None, None] * self.angular.nodes[None, :, :]).reshape(-1, 3)
        w = (wr * r * r)[:, None] * (4 * np.pi * self.angular.weights)[None, :]
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "kn", np.repeat(r, self.angular.size))
        object.__setattr__(self, "weights", w.ravel())

    @property
    def size(self):
        return len(self.weights)

    @property
    def dispersion(self):
        """k^2 + |k|, the one-photon kinetic plus field energy at zero total momentum."""
        return self.kn**2 + self.kn

    def inner(self, x, y, weight=None):
        """<x, y> = sum over nodes and components of x conj(y), linear in x."""
        w = self.weights if weight is None else self.weights * weight
        return complex(np.sum(w * np.sum(x * np.conj(y), axis=0)))


@dataclass
class OnePhotonAmplitude:
    """Four-component one-photon amplitude sampled on a :class:`PhotonGrid`.

    ``kernel`` optionally keeps the closed form the samples came from.
    """

    grid: PhotonGrid
    values: np.ndarray
    kernel: Callable | None = field(default=None, repr=False)
    label: str = ""

    @classmethod
    def from_kernel(cls, grid, kernel, label=""):
        return cls(grid, np.asarray(kernel(grid.k)).T.copy(), kernel, label)

    @property
    def representation(self):
        return "closed-form" if self.kernel is not None else "grid"

    def inner(self, other):
        return self.grid.inner(self.values, _vals(other))

    def inner1(self, other):
        """<x, y>_1 = <(k^2 + |k|) x, y>."""
        return self.grid.inner(self.values, _vals(other), self.grid.dispersion)

    def norm2(self):
        return self.inner(self).real

    def norm1_2(self):
        return self.inner1(self).real

    def weighted_norm2(self, weight):
        return self.grid.inner(self.values, self.values, weight).real

    def closed_form_deviation(self):
        if self.kernel is None:
            return 0.0
        return float(np.max(np.abs(np.asarray(self.kernel(self.grid.k)).T - self.values)))

    def __add__(self, other):
        return OnePhotonAmplitude(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return OnePhotonAmplitude(self.grid, self.values - _vals(other))

    def __mul__(self, c):
        return OnePhotonAmplitude(self.grid, c * self.values)

    __rmul__ = __mul__


def _vals(x):
    return x.values if isinstance(x, OnePhotonAmplitude) else np.asarray(x)


# ---------------------------------------------------------------- kernels


def gamma_vector(a, b, k, cutoff: fld.CutoffProfile):
    """The four-vector Gamma_{a,b}(k) written out component by component."""
    k = np.asarray(k, dtype=float)
    k1, k2, k3 = k[..., 0], k[..., 1], k[..., 2]
    rho = np.hypot(k1, k2)
    if np.any(rho == 0.0):
        raise fld.AxisSingularityError("Gamma undefined on the k3 axis")
    kn = np.linalg.norm(k, axis=-1)
    z = cutoff(kn)
    sq = np.sqrt(kn)
    return np.stack(
        [
            z / sq * (-a * rho + b * (k1 - 1j * k2) * k3 / rho),
            b * z * (-k2 - 1j * k1) / rho * sq,
            z / sq * (b * rho + a * (k1 + 1j * k2) * k3 / rho),
            a * z * (-k2 + 1j * k1) / rho * sq,
        ],
        axis=-1,
    )


def phi_ab(a, b, alpha, k, cutoff, g=1):
    """Minimiser of L_{a,b}: sqrt(alpha) i / (2 pi |k| (1 + |k|)) Gamma_{a,b}(k)."""
    kn = np.linalg.norm(np.asarray(k, dtype=float), axis=-1)
    pref = g * np.sqrt(alpha) * 1j / (2 * np.pi * kn * (1 + kn))
    return pref[..., None] * gamma_vector(a, b, k, cutoff)


def _per_polarization(fn, k):
    """Stack a per-polarization spinor-valued kernel into the four-component layout."""
    p1, p2 = fn(k, 1), fn(k, 2)
    return np.stack([p1[..., 0], p2[..., 0], p1[..., 1], p2[..., 1]], axis=-1)


def sigma_K_star(a, b, k, cutoff):
    """One-photon component of sigma . K*(0) applied to the vacuum state (a, b)."""
    s = np.array([a, b], dtype=complex)
    return _per_polarization(
        lambda kk, lam: fld.sigma_dot(np.conj(fld.K_kernel(kk, lam, cutoff)), s), k
    )


def g_ab(a, b, k, cutoff):
    """(k^2 + |k|)^-1 sigma . K*(0) (a, b), built from the field kernels."""
    kn = np.linalg.norm(np.asarray(k, dtype=float), axis=-1)
    return sigma_K_star(a, b, k, cutoff) / (kn * kn + kn)[..., None]


def D_star_component(i, a, b, k, cutoff):
    """One-photon component of D*(0)_i applied to the vacuum state (a, b)."""
    s = np.array([a, b], dtype=complex)
    return _per_polarization(
        lambda kk, lam: np.conj(fld.D_kernel(kk, lam, cutoff))[..., i][..., None] * s, k
    )


def theta_kernel(i, a, b, c_w, k, cutoff):
    """theta_i = (k^2 + |k| + C_W)^-1 D*(0)_i (a, b), axis index i in {0, 1, 2}."""
    kn = np.linalg.norm(np.asarray(k, dtype=float), axis=-1)
    return D_star_component(i, a, b, k, cutoff) / (kn * kn + kn + c_w)[..., None]


def theta_i(i, a, b, c_w, grid: PhotonGrid):
    if c_w < 0:
        raise ValueError("C_W must be non-negative")
    return OnePhotonAmplitude.from_kernel(
        grid, lambda k: theta_kernel(i, a, b, c_w, k, grid.cutoff), f"theta_{i + 1}"
    )


def phi_amplitude(a, b, alpha, grid, g=1):
    return OnePhotonAmplitude.from_kernel(
        grid, lambda k: phi_ab(a, b, alpha, k, grid.cutoff, g), "phi_ab"
    )


# ---------------------------------------------------------------- functional


def L_functional(xi, a, b, alpha, g=1):
    """L_{a,b}(xi) = <(k^2+|k|) xi, xi> + 2 sqrt(alpha) Re <xi, sigma.K*(0)(a, b)>."""
    grid = xi.grid
    src = sigma_K_star(a, b, grid.k, grid.cutoff).T
    return xi.norm1_2() + 2 * g * np.sqrt(alpha) * grid.inner(xi.values, src).real


@dataclass
class MinimizerReport:
    minimizer: OnePhotonAmplitude
    inf_value: float
    gamma_coeff: complex
    residual: OnePhotonAmplitude
    residual_norm1: float
    descent_iterations: int
    descent_converged: bool
    descent_deviation: float


def decompose(xi, phi):
    """Split xi = gamma phi + R with <phi, R>_1 = 0."""
    gamma = xi.inner1(phi) / phi.norm1_2()
    resid = xi - gamma * phi
    return gamma, resid


def _conjugate_gradient(grid, diag, rhs, tol=1e-13, max_iter=None):
    """Solve diag * x = rhs by CG in the grid-weighted inner product."""
    ip = lambda x, y: grid.inner(x, y).real
    x = np.zeros_like(rhs)
    r = rhs.copy()
    p = r.copy()
    rr = ip(r, r)
    stop = tol * tol * rr
    max_iter = max_iter or 4 * len(np.unique(np.round(diag, 14)))
    for it in range(1, max_iter + 1):
        if rr <= stop:
            return x, it - 1, True
        Ap = diag * p
        step = rr / ip(Ap, p)
        x = x + step * p
        r = r - step * Ap
        rr_new = ip(r, r)
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x, max_iter, rr <= stop


def minimize_L_numeric(a, b, alpha, grid: PhotonGrid, g=1) -> MinimizerReport:
    """Minimise L_{a,b} on the grid and decompose the result against phi_{a,b}.

    The returned minimiser is the direct formula -sqrt(alpha) g_{a,b}; an
    independent conjugate-gradient descent on the discretised functional is
    run alongside and its deviation reported.
    """
    gvals = g_ab(a, b, grid.k, grid.cutoff).T
    direct = OnePhotonAmplitude(grid, -g * np.sqrt(alpha) * gvals, label="direct minimiser")
    src = g * np.sqrt(alpha) * sigma_K_star(a, b, grid.k, grid.cutoff).T
    cg, iters, ok = _conjugate_gradient(grid, grid.dispersion, -src)
    scale = np.sqrt(max(direct.norm2(), 1e-300))
    deviation = np.sqrt(grid.inner(cg - direct.values, cg - direct.values).real) / scale
    phi = phi_amplitude(a, b, alpha, grid, g)
    if phi.norm1_2() == 0.0:
        gamma, resid = 1.0 + 0j, direct * 0.0
    else:
        gamma, resid = decompose(direct, phi)
    return MinimizerReport(
        minimizer=direct,
        inf_value=L_functional(direct, a, b, alpha, g),
        gamma_coeff=complex(gamma),
        residual=resid,
        residual_norm1=resid.norm1_2(),
        descent_iterations=iters,
        descent_converged=bool(ok),
        descent_deviation=float(deviation) if alpha > 0 else 0.0,
    )


# ---------------------------------------------------------------- self-energy


def _radial(fn, cutoff):
    val, _ = integrate_radial(fn, (0.0, cutoff.radius), _TIGHT, points=cutoff.breakpoints)
    return val


def response(E, cutoff: fld.CutoffProfile):
    """F(E) = (2/pi) int_0^Lambda r^3 zeta^2 / (r^2 + r - E) dr for E <= 0."""
    if E > 0:
        raise ValueError("F(E) is only used for E <= 0")
    return 2 / np.pi * _radial(lambda r: r**3 * cutoff(r) ** 2 / (r * r + r - E), cutoff)


def phi_norm1_2(alpha, cutoff, g=1):
    """||phi_{a,b}||_1^2 = alpha (2/pi) int r^2 zeta^2 / (1 + r) dr = alpha F(0)."""
    return g * g * alpha * response(0.0, cutoff)


@dataclass
class Sigma0Result:
    energy: float
    inf_L: float
    gap: float  # energy - inf_L, evaluated without cancellation
    iterations: int


def sigma0_truncated(alpha, cutoff: fld.CutoffProfile, g=1, tol=None) -> Sigma0Result:
    """Ground energy of T(0) on the vacuum + one-photon sectors.

    On that subspace the vacuum couples to one photon only through
    sqrt(alpha) sigma.K*(0); eliminating the photon leaves the scalar
    equation E = -alpha F(E), solved by fixed-point iteration from 0.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    c = g * g * alpha
    if c == 0.0 or cutoff.is_null():
        return Sigma0Result(0.0, 0.0, 0.0, 0)
    infL = -c * response(0.0, cutoff)
    tol = tol if tol is not None else 1e-15 * abs(infL)
    res = fixed_point(lambda E: -c * response(min(E, 0.0), cutoff), 0.0, tol=tol)
    E = res.value
    gap = -c * E * 2 / np.pi * _radial(
        lambda r: r * r * cutoff(r) ** 2 / ((r * r + r - E) * (r + 1)), cutoff
    )
    return Sigma0Result(E, infL, gap, res.iterations)


@dataclass
class TruncatedDressedState:
    """Vacuum spinor plus one-photon amplitude; higher sectors are absent."""

    spinor: np.ndarray
    photon: OnePhotonAmplitude

    def norm2(self):
        return float(np.vdot(self.spinor, self.spinor).real + self.photon.norm2())


def truncated_ground_state(alpha, grid: PhotonGrid, spin=(1.0, 0.0), g=1, energy=None):
    """Eigenvector of the truncated T(0) normalised by its vacuum part.

    Its photon part is -sqrt(alpha) (k^2 + |k| - Sigma0)^-1 sigma.K*(0)(a, b),
    which reduces to phi_{a,b} when Sigma0 is replaced by 0.
    """
    a, b = spinor(*spin)
    E = sigma0_truncated(alpha, grid.cutoff, g).energy if energy is None else energy
    cut = grid.cutoff

    def kernel(k):
        kn = np.linalg.norm(k, axis=-1)
        return -g * np.sqrt(alpha) * sigma_K_star(a, b, k, cut) / (kn * kn + kn - E)[..., None]

    amp = OnePhotonAmplitude.from_kernel(grid, kernel, "Pi_1 Omega_0")
    return TruncatedDressedState(np.array([a, b]), amp)


def eta_squared(cutoff: fld.CutoffProfile, c_w: float, literal=False):
    """eta^2 = (2/(3 pi)) int_0^Lambda r zeta(r)^2 / (r^2 + r + C_W) dr.

    ``literal=True`` uses zeta to the first power instead of zeta^2; the two
    agree for an indicator cutoff.
    """
    if c_w < 0:
        raise ValueError("C_W must be non-negative")
    p = 1 if literal else 2
    return 2 / (3 * np.pi) * _radial(lambda r: r * cutoff(r) ** p / (r * r + r + c_w), cutoff)


def theta_norm2(cutoff, c_w):
    """||theta_i||^2 = (2/(3 pi)) int r zeta^2 / (r^2 + r + C_W)^2 dr (any i)."""
    return 2 / (3 * np.pi) * _radial(lambda r: r * cutoff(r) ** 2 / (r * r + r + c_w) ** 2, cutoff)


def orthogonality_kphi_theta(a, b, alpha, c_w, grid: PhotonGrid, g=1):
    """<k_i phi_{a,b}, theta_i> for i = 1, 2, 3 together with the scale |k_i phi| |theta_i|."""
    phi = phi_amplitude(a, b, alpha, grid, g)
    vals, scales = [], []
    for i in range(3):
        th = theta_i(i, a, b, c_w, grid)
        kphi = phi.values * grid.k[:, i]
        vals.append(grid.inner(kphi, th.values))
        scales.append(np.sqrt(grid.inner(kphi, kphi).real * th.norm2()))
    return np.array(vals), np.array(scales)


@dataclass
class ScalingReport:
    alphas: np.ndarray
    photon_norm: np.ndarray
    field_energy_norm: np.ndarray
    number_norm: np.ndarray
    excess_norm2: np.ndarray
    exponents: dict


def scaling_check(alphas, grid: PhotonGrid, spin=(1.0, 0.0), g=1) -> ScalingReport:
    """Log-log exponents of sector norms of the truncated ground state versus alpha."""
    alphas = np.asarray(sorted(alphas), dtype=float)
    if len(alphas) < 4 or np.any(alphas <= 0) or alphas[-1] / alphas[0] < 100:
        raise ValueError("need at least four positive alphas spanning two decades")
    p1, hf, nf, ex = [], [], [], []
    for alpha in alphas:
        st = truncated_ground_state(alpha, grid, spin, g)
        n2 = st.photon.norm2()
        p1.append(np.sqrt(n2))
        hf.append(np.sqrt(st.photon.weighted_norm2(grid.kn)))
        nf.append(np.sqrt(n2))
        ex.append(st.norm2() - 1.0)
    cols = {"photon_norm": p1, "field_energy_norm": hf, "number_norm": nf, "excess_norm2": ex}
    exps = {}
    for name, y in cols.items():
        y = np.asarray(y)
        if np.any(y <= 0):
            raise ValueError(f"degenerate fit: {name} not positive")
        exps[name] = float(np.polyfit(np.log(alphas), np.log(y), 1)[0])
    return ScalingReport(alphas, *(np.asarray(v) for v in cols.values()), exps)
