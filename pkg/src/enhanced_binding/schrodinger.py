"""Critical coupling and the regularised s-wave bound state.

Both problems are solved by shooting u = r f from the origin to the edge of
the potential support, where the exterior solution is known in closed form
(u linear at zero energy, u ~ exp(-kappa r) below it). The Pruefer phase
phi, defined by u = rho sin(phi), u' = rho cos(phi), obeys

    phi' = cos(phi)^2 - (mu W + kappa^2) sin(phi)^2,

which is smooth and monotone in the coupling, so brackets are reliable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .numerics import gauss_panels
from .potential import RadialPotential


class NoBindingError(ValueError):
    """The potential (or the chosen coupling) supports no bound state."""


class BracketError(RuntimeError):
    pass


ODE_RTOL = 1e-13
ODE_ATOL = 1e-15


def _panel_edges(W: RadialPotential, n_sub=4):
    edges = np.array(W.edges)
    out = [edges[0]]
    for lo, hi in zip(edges[:-1], edges[1:]):
        out.extend(np.linspace(lo, hi, n_sub + 1)[1:])
    return np.array(out)


def _phase_at_edge(W, mu, kappa2=0.0, rtol=ODE_RTOL, max_step=np.inf):
    phi = 0.0
    edges = W.edges
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        # evaluate W strictly inside the panel so jump discontinuities stay on edges
        def rhs(r, y):
            rr = min(max(r, lo + 1e-15 * (hi - lo)), hi - 1e-15 * (hi - lo))
            s = np.sin(y[0])
            return [np.cos(y[0]) ** 2 - (mu * float(W.profile(rr)) + kappa2) * s * s]

        sol = solve_ivp(rhs, (lo, hi), [phi], method="DOP853", rtol=rtol, atol=ODE_ATOL,
                        max_step=max_step)
        if not sol.success:
            raise RuntimeError(f"phase integration failed on [{lo}, {hi}] at mid {mid}")
        phi = sol.y[0, -1]
    return phi


def _has_negative_part(W, samples=2000):
    r = np.linspace(0.0, W.support, samples + 1)[1:]
    return bool(np.any(W(r) < 0.0))


def critical_coupling(W: RadialPotential, rtol=ODE_RTOL, max_step=np.inf, xtol=1e-14):
    """Smallest lambda for which -Laplacian + lambda W has a zero-energy s-wave resonance.

    Binding sets in when the zero-energy solution turns over inside the
    support, i.e. when its Pruefer phase at the support edge reaches pi/2.
    """
    if not _has_negative_part(W):
        raise NoBindingError(f"{W.name} has no negative part; no critical coupling")
    r = np.linspace(0.0, W.support, 2001)[1:]
    depth = float(np.max(-W(r)))
    mismatch = lambda lam: _phase_at_edge(W, lam, 0.0, rtol, max_step) - np.pi / 2

    lo = 0.1 / (depth * W.support**2)
    if mismatch(lo) > 0:
        lo = 0.0
    hi = lo if lo > 0 else 0.1 / (depth * W.support**2)
    for _ in range(80):
        if mismatch(hi) > 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise BracketError("no binding found while doubling the coupling")
    return brentq(mismatch, lo, hi, xtol=xtol * hi, rtol=4 * np.finfo(float).eps)


@dataclass
class BoundStateSolution:
    """Normalised real s-wave ground state f = u/r of -(1-gamma)Lap + lam W.

    Inside the support u is a dense ODE solution; beyond it
    u(r) = u_edge exp(-kappa (r - R)) exactly.
    """

    potential: RadialPotential
    coupling: float
    gamma_reg: float
    kappa: float
    segments: list = field(repr=False)
    norm2_raw: float = field(repr=False, default=1.0)
    u_edge: float = field(repr=False, default=1.0)
    moments: dict = field(default_factory=dict, repr=False)

    @property
    def mu(self):
        return self.coupling / (1.0 - self.gamma_reg)

    @property
    def energy(self):
        return -(1.0 - self.gamma_reg) * self.kappa**2

    @property
    def support(self):
        return self.potential.support

    def _interior(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        u = np.empty_like(r)
        du = np.empty_like(r)
        for lo, hi, sol in self.segments:
            m = (r >= lo) & (r <= hi)
            if np.any(m):
                y = sol(r[m])
                u[m], du[m] = y[0], y[1]
        return u, du

    def u(self, r):
        """Radial function u = r f (normalised) and its first two derivatives."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        R, k = self.support, self.kappa
        inside = r <= R
        u = np.empty_like(r)
        du = np.empty_like(r)
        if np.any(inside):
            u[inside], du[inside] = self._interior(r[inside])
        out = ~inside
        if np.any(out):
            u[out] = self.u_edge * np.exp(-k * (r[out] - R))
            du[out] = -k * u[out]
        W = np.where(inside, self.potential.profile(np.minimum(r, R)), 0.0)
        d2u = (self.mu * W + k * k) * u
        s = 1.0 / np.sqrt(self.norm2_raw)
        return s * u, s * du, s * d2u

    def f(self, r):
        """f, f', f'' at radii r > 0."""
        r = np.asarray(r, dtype=float)
        u, du, d2u = self.u(r)
        f = u / r
        df = (du - f) / r
        d2f = d2u / r - 2.0 * df / r
        return f, df, d2f


def _segments(W, mu, kappa2):
    edges = _panel_edges(W)
    y = np.array([0.0, 1.0])
    segs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        def rhs(r, v):
            rr = min(max(r, lo + 1e-15 * (hi - lo)), hi - 1e-15 * (hi - lo))
            return [v[1], (mu * float(W.profile(rr)) + kappa2) * v[0]]

        sol = solve_ivp(rhs, (lo, hi), y, method="DOP853", rtol=ODE_RTOL, atol=ODE_ATOL,
                        dense_output=True)
        if not sol.success:
            raise RuntimeError("bound-state integration failed")
        segs.append((lo, hi, sol.sol))
        y = sol.y[:, -1]
    return segs, y


def interior_nodes(W: RadialPotential, order=32):
    """Gauss nodes/weights on [0, support] aligned with the potential's panels."""
    return gauss_panels(_panel_edges(W), order)


def bound_state(W: RadialPotential, lam: float, gamma_reg: float) -> BoundStateSolution:
    """Ground state of -(1 - gamma_reg) Laplacian + lam W in the s-wave channel."""
    if not 0.0 < gamma_reg < 1.0:
        raise ValueError("gamma_reg must lie in (0, 1)")
    if not _has_negative_part(W):
        raise NoBindingError(f"{W.name} has no negative part")
    mu = lam / (1.0 - gamma_reg)

    def mismatch(kappa):
        return _phase_at_edge(W, mu, kappa * kappa) - np.pi / 2 - np.arctan(kappa)

    m0 = mismatch(0.0)
    if m0 <= 0.0:
        raise NoBindingError(
            f"no bound state: lam/(1-gamma) = {mu:.10g} is not above the critical coupling"
        )
    r = np.linspace(0.0, W.support, 2001)[1:]
    kmax = np.sqrt(mu * float(np.max(-W(r)))) * 1.01 + 1e-12
    # ground state = largest kappa where the mismatch changes sign
    hi = kmax
    for lo in kmax * np.geomspace(0.5, 1e-30, 100):
        if mismatch(lo) > 0.0:
            break
        hi = lo
    else:
        lo = 0.0
    kappa = brentq(mismatch, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)

    segs, y_edge = _segments(W, mu, kappa * kappa)
    sol = BoundStateSolution(W, lam, gamma_reg, kappa, segs, 1.0, float(y_edge[0]))
    sol.norm2_raw = _raw_norm2(sol)
    sol.moments = radial_moments(sol)
    return sol


def _raw_norm2(sol):
    nodes, weights = interior_nodes(sol.potential)
    u, _ = sol._interior(nodes)
    return 4 * np.pi * (np.sum(weights * u * u) + sol.u_edge**2 / (2 * sol.kappa))


def radial_moments(sol: BoundStateSolution, W: RadialPotential | None = None):
    """Radial integrals of the normalised state, exterior tails in closed form.

    Keys: ``norm2``, ``grad2`` = |grad f|^2, ``W_f2`` = <W f, f>,
    ``W_grad2`` = sum_i <W d_i f, d_i f>, ``lap2`` = |Lap f|^2.
    ``W`` replaces the potential in the two W-weighted moments (it must
    vanish beyond the support).
    """
    Wq = sol.potential if W is None else W
    nodes, weights = interior_nodes(sol.potential)
    u, du, d2u = sol.u(nodes)
    w4 = 4 * np.pi * weights
    s2 = 1.0 / sol.norm2_raw
    ue2 = s2 * sol.u_edge**2
    k, R = sol.kappa, sol.support
    gradr = du - u / nodes
    Wn = Wq.profile(nodes)
    return {
        "norm2": float(np.sum(w4 * u * u) + 4 * np.pi * ue2 / (2 * k)),
        "grad2": float(np.sum(w4 * gradr**2) + 4 * np.pi * ue2 * (k / 2 + 1 / R)),
        "W_f2": float(np.sum(w4 * Wn * u * u)),
        "W_grad2": float(np.sum(w4 * Wn * gradr**2)),
        "lap2": float(np.sum(w4 * d2u**2) + 4 * np.pi * ue2 * k**3 / 2),
    }


def gradient_norms(sol: BoundStateSolution):
    """(|grad f|^2, per-axis |d_i f|^2); the state is radial so the axes agree."""
    g = sol.moments["grad2"]
    return g, (g / 3.0, g / 3.0, g / 3.0)


def gradient_form(sol: BoundStateSolution, lam: float, W: RadialPotential | None = None):
    """sum_i <(-Laplacian + lam W) d_i f, d_i f> = |Lap f|^2 + lam sum_i <W d_i f, d_i f>."""
    m = sol.moments if W is None else radial_moments(sol, W)
    return m["lap2"] + lam * m["W_grad2"]


def form_value(sol: BoundStateSolution, lam: float):
    """<(-Laplacian + lam W) f, f>."""
    m = sol.moments
    return m["grad2"] + lam * m["W_f2"]


@dataclass(frozen=True)
class GradientBound:
    lhs: float
    rhs: float
    satisfied: bool
    ratio: float  # lhs / |grad f|^2, to be compared with C_W


def gradient_bound_check(sol: BoundStateSolution, lam: float, c_w: float, slack: float):
    """Compare sum_i <(-Lap + lam W) d_i f, d_i f> with (C_W + slack) |grad f|^2."""
    lhs = gradient_form(sol, lam)
    g = sol.moments["grad2"]
    rhs = (c_w + slack) * g
    return GradientBound(lhs, rhs, bool(lhs <= rhs), lhs / g)
