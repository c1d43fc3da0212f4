"""Independent reference computations used to cross-check the main routes.

None of these share code paths with the quantities they check: the
self-energy oracle diagonalises an explicitly assembled two-sector matrix,
the bound-state oracle uses finite differences, and the square-well
routines solve the matching conditions in closed form.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.optimize import brentq

from . import field as fld
from .numerics import AngularScheme, gauss_panels, product_scheme


def sigma0_dense(alpha, cutoff: fld.CutoffProfile, g=1, radial_order=10,
                 angular: AngularScheme | None = None):
    """Lowest eigenvalue of T(0) compressed to the vacuum + one-photon sectors.

    The matrix is assembled term by term from (P_f - sqrt(alpha) A)^2,
    g sqrt(alpha) sigma.B, H_f and -c_no alpha in an orthonormalised node basis.
    """
    angular = angular or product_scheme(2, 4)
    lam = cutoff.radius
    breaks = sorted({0.0, 1e-4 * lam, 1e-3 * lam, 1e-2 * lam, 0.1 * lam, 0.5 * lam,
                     *cutoff.breakpoints})
    r, wr = gauss_panels(breaks, radial_order)
    k = (r[:, None, None] * angular.nodes[None]).reshape(-1, 3)
    w = ((wr * r * r)[:, None] * 4 * np.pi * angular.weights[None]).ravel()
    kn = np.linalg.norm(k, axis=1)
    n = len(w)
    sw = np.sqrt(w)
    # photon basis index = pol * 2n + spin * n + node
    def idx(pol, s):
        return slice(pol * 2 * n + s * n, pol * 2 * n + (s + 1) * n)

    dim = 2 + 4 * n
    H = np.zeros((dim, dim), dtype=complex)
    ph = slice(2, dim)
    disp = np.tile(kn * kn + kn, 4)
    H[ph, ph] += np.diag(disp)

    Dk = [fld.D_kernel(k, p, cutoff) for p in (1, 2)]
    Kk = [fld.K_kernel(k, p, cutoff) for p in (1, 2)]
    c_grid = sum(np.sum(w * np.abs(Dk[p][:, m]) ** 2) for p in range(2) for m in range(3))
    c_no = fld.normal_ordering_constant(cutoff)

    # alpha (A^2 - c_no) on the truncated space
    for m in range(3):
        for s in range(2):
            y = np.zeros(4 * n, dtype=complex)
            for p in range(2):
                y[idx(p, s)] = sw * np.conj(Dk[p][:, m])
            H[ph, ph] += 2 * alpha * np.outer(y, np.conj(y))
    H[ph, ph] += alpha * (c_grid - c_no) * np.eye(4 * n)
    H[0, 0] += alpha * (c_grid - c_no)
    H[1, 1] += alpha * (c_grid - c_no)

    # vacuum -> one photon couplings
    for s0 in range(2):
        e = np.zeros(2, dtype=complex)
        e[s0] = 1.0
        col = np.zeros(4 * n, dtype=complex)
        for p in range(2):
            sb = fld.sigma_dot(np.conj(Kk[p]), e)
            kd = np.einsum("ij,ij->i", k, np.conj(Dk[p]))
            for s in range(2):
                col[idx(p, s)] += g * np.sqrt(alpha) * sw * sb[:, s]
                if s == s0:
                    col[idx(p, s)] += -2 * np.sqrt(alpha) * sw * kd
        H[2:, s0] += col
        H[s0, 2:] += np.conj(col)
    return float(eigh(H, eigvals_only=True, subset_by_index=[0, 0], driver="evr")[0])


def square_well_kappa(depth, radius, mu):
    """Ground-state decay rate of -u'' - mu*depth*1_{r<radius} u = -kappa^2 u.

    Solves q cot(q radius) = -kappa with q^2 = mu*depth - kappa^2.
    """
    v = mu * depth
    def h(kap):
        q = np.sqrt(v - kap * kap)
        return q * np.cos(q * radius) + kap * np.sin(q * radius)
    top = np.sqrt(v) * (1 - 1e-15)
    if h(0.0) >= 0:
        raise ValueError("no bound state")
    return brentq(h, 0.0, top, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def square_well_critical(depth, radius):
    """pi^2 / (4 depth radius^2)."""
    return np.pi**2 / (4 * depth * radius**2)


def fd_ground_energy(W, lam, gamma_reg, length=150.0, n=60000):
    """Lowest eigenvalue of -(1-gamma) u'' + lam W u = e u by second-order finite differences.

    Dirichlet conditions at 0 and ``length``. The step is adjusted so the
    support edge is a node; nodes on a jump of W take the mean of the
    one-sided limits, which keeps the scheme second order.
    """
    R = W.support
    h = R / max(1, round(R * (n + 1) / length))
    n = int(round(length / h)) - 1
    r = h * np.arange(1, n + 1)
    Wv = np.asarray(W(r), dtype=float)
    for e in W.edges[1:]:
        j = np.argmin(np.abs(r - e))
        if abs(r[j] - e) < 1e-9 * h:
            Wv[j] = 0.5 * (float(W(e - 1e-12)) + float(W(e + 1e-12)))
    diag = 2 * (1 - gamma_reg) / h**2 + lam * Wv
    off = -(1 - gamma_reg) / h**2 * np.ones(n - 1)
    return float(eigh_tridiagonal(diag, off, select="i", select_range=(0, 0),
                                  eigvals_only=True)[0])


def square_well_gradient_norm(depth, radius, mu, kappa=None):
    """|grad f|^2 for the normalised s-wave ground state of the square well.

    Uses the analytic profile u = sin(q r) inside and
    sin(q R) exp(-kappa (r - R)) outside, integrated with scipy's quad.
    """
    from scipy.integrate import quad

    kap = square_well_kappa(depth, radius, mu) if kappa is None else kappa
    q = np.sqrt(mu * depth - kap * kap)
    ue = np.sin(q * radius)
    norm = quad(lambda r: np.sin(q * r) ** 2, 0, radius, epsabs=0, epsrel=1e-13)[0] + ue**2 / (2 * kap)

    def grad_in(r):
        u, du = np.sin(q * r), q * np.cos(q * r)
        return (du - u / r) ** 2

    inner = quad(grad_in, 0, radius, epsabs=0, epsrel=1e-13)[0]
    # outside: (u' - u/r)^2 = ue^2 e^{-2 kap (r-R)} (kap + 1/r)^2
    outer = quad(lambda r: ue**2 * np.exp(-2 * kap * (r - radius)) * (kap + 1 / r) ** 2,
                 radius, np.inf, epsabs=0, epsrel=1e-12)[0]
    return 4 * np.pi * (inner + outer) / (4 * np.pi * norm)


def eta2_sharp_closed_form(radius, c_w):
    """(2/(3 pi)) int_0^radius r / (r^2 + r + C) dr for a sharp unit cutoff.

    Closed forms exist for C = 0 and C > 1/4 (complex roots); other C
    return None.
    """
    if c_w == 0:
        return 2 / (3 * np.pi) * np.log1p(radius)
    if c_w <= 0.25:
        return None
    s = np.sqrt(c_w - 0.25)
    atan = (np.arctan((radius + 0.5) / s) - np.arctan(0.5 / s)) / s
    return 2 / (3 * np.pi) * 0.5 * (np.log((radius * radius + radius + c_w) / c_w) - atan)
