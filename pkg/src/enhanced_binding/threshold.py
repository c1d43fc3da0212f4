"""Trial state, quadratic-form evaluation and binding certificates.

The trial state is

    Psi = f (x) Omega + i sqrt(alpha) sum_i d_i f (x) theta_i

with f the regularised bound state at the Schrodinger threshold, Omega the
ground state of the zero-momentum fiber truncated to 0 + 1 photons, and
theta_i the gradient dressing amplitudes. Everything is evaluated in the
factorised frame where the particle operator enters as

    H' = (p - P_f + sqrt(alpha) A(0))^2 + g sqrt(alpha) sigma.B(0) + H_f
         + lam W - c_no alpha
       = (-Lap + lam W) (x) 1 - 2 sum_m p_m (x) X_m + 1 (x) T(0),

X = P_f - sqrt(alpha) A(0). Two evaluators are provided: the term-by-term
factorised formulas (:func:`quadratic_form_breakdown`) and a direct
evaluation of <H' Psi, Psi> from 3D particle quadrature and first-principles
photon matrix elements (:func:`direct_form`).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import field as fld
from .numerics import AngularScheme, gauss_panels, product_scheme
from .potential import RadialPotential, c_w_constant
from .schrodinger import (
    BoundStateSolution,
    GradientBound,
    bound_state,
    critical_coupling,
    interior_nodes,
    gradient_bound_check,
)
from .selfenergy import (
    PhotonGrid,
    TruncatedDressedState,
    D_star_component,
    _radial,
    eta_squared,
    sigma0_truncated,
    sigma_K_star,
    spinor,
    theta_i,
    theta_norm2,
    truncated_ground_state,
)

TRUNCATION_NOTE = (
    "Sigma0 is the ground energy of the zero-momentum fiber restricted to the "
    "vacuum and one-photon sectors; margins certify binding of the truncated model."
)


class TrialStateError(ValueError):
    pass


@dataclass(frozen=True)
class GammaPolicy:
    """gamma_reg(alpha) = max(scale * alpha**power, floor).

    The default 0.1 alpha^2 keeps the regularisation offset (about gamma/2
    relative to |grad f|^2) an order of alpha below the alpha eta^2 gain.
    ``GammaPolicy(1.0, 0.5, 0.01)`` gives max(sqrt(alpha), 0.01).
    """

    scale: float = 0.1
    power: float = 2.0
    floor: float = 1e-9

    def __call__(self, alpha):
        g = max(self.scale * float(alpha) ** self.power if alpha > 0 else 0.0, self.floor)
        if not 0.0 < g < 1.0:
            raise ValueError(f"gamma_reg = {g!r} outside (0, 1)")
        return g

    @classmethod
    def constant(cls, value):
        return cls(scale=value, power=0.0, floor=value)


# ---------------------------------------------------------------- trial state


@dataclass(eq=False)
class TrialState:
    particle: BoundStateSolution
    dressed: TruncatedDressedState
    thetas: list
    alpha: float
    c_w: float
    gamma_reg: float
    lambda0: float
    sigma0: float
    g: float = 1.0
    angular: AngularScheme = field(default_factory=lambda: product_scheme(6, 8), repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def grid(self) -> PhotonGrid:
        return self.dressed.photon.grid

    @property
    def cutoff(self):
        return self.grid.cutoff

    def omega_norm2(self):
        """||Omega||^2 = 1 + g^2 alpha F'(Sigma0), radial closed form."""
        E = self.sigma0
        fp = 2 / np.pi * _radial(lambda r: r**3 * self.cutoff(r) ** 2 / (r * r + r - E) ** 2,
                                 self.cutoff)
        return 1.0 + self.g**2 * self.alpha * fp

    def norm2_formula(self):
        """||f||^2 ||Omega||^2 + alpha sum_i ||d_i f||^2 ||theta_i||^2."""
        m = self.particle.moments
        return m["norm2"] * self.omega_norm2() + self.alpha * m["grad2"] * theta_norm2(self.cutoff, self.c_w)

    def norm2_quadrature(self):
        """||Psi||^2 from the particle Gram matrix and the photon-grid Gram matrix."""
        p, q = particle_matrices(self), field_matrices(self)
        return float(np.sum(p["gram"] * q["gram"]).real)


def assemble_trial(
    W: RadialPotential,
    alpha: float,
    gamma_reg: float | None = None,
    cutoff: fld.CutoffProfile | None = None,
    spin=(1.0, 0.0),
    g: float = 1.0,
    radial_order: int = 20,
    angular: AngularScheme | None = None,
    lambda0: float | None = None,
    c_w: float | None = None,
) -> TrialState:
    """Build f_gamma at lambda0, the truncated dressed state and theta_1..3."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    cutoff = cutoff or fld.CutoffProfile()
    gamma_reg = GammaPolicy()(alpha) if gamma_reg is None else gamma_reg
    lam0 = critical_coupling(W) if lambda0 is None else lambda0
    cw = c_w_constant(lam0, W) if c_w is None else c_w
    sol = bound_state(W, lam0, gamma_reg)
    E = sigma0_truncated(alpha, cutoff, g).energy if alpha > 0 else 0.0
    grid = PhotonGrid(cutoff, radial_order, angular or product_scheme(6, 8), infrared=abs(E) / 4)
    a, b = spinor(*spin)
    omega = truncated_ground_state(alpha, grid, (a, b), g, energy=E)
    thetas = [theta_i(i, a, b, cw, grid) for i in range(3)]
    return TrialState(sol, omega, thetas, alpha, cw, gamma_reg, lam0, E, g)


def _validate(trial: TrialState):
    if trial.alpha < 0:
        raise TrialStateError("negative alpha")
    if len(trial.thetas) != 3:
        raise TrialStateError("expected three theta amplitudes")
    if any(t.grid is not trial.grid for t in trial.thetas):
        raise TrialStateError("theta amplitudes live on a different photon grid")
    if abs(trial.particle.gamma_reg - trial.gamma_reg) > 0:
        raise TrialStateError("gamma_reg of the particle factor does not match the trial state")
    if not 0 < trial.gamma_reg < 1:
        raise TrialStateError("gamma_reg outside (0, 1)")
    if trial.alpha == 0 and trial.dressed.photon.norm2() != 0:
        raise TrialStateError("decoupled trial state carries a photon component")


# ---------------------------------------------------------------- breakdown


@dataclass
class FormBreakdown:
    lam: float
    alpha: float
    sigma0: float
    self_energy: float
    schrodinger: float
    theta_schrodinger: float
    cross: float
    theta_field: float
    total: float
    norm2: float
    margin: float
    eta2: float
    theta_field_ratio: float  # ||theta||_1^2 / eta^2
    theta_schrodinger_bound: float  # alpha ||theta||^2 (C_W) |grad f|^2
    gradient_bound: GradientBound | None = None
    direct: float | None = None
    direct_margin: float | None = None
    direct_norm2: float | None = None

    @property
    def terms(self):
        return {
            "self_energy": self.self_energy,
            "schrodinger": self.schrodinger,
            "theta_schrodinger": self.theta_schrodinger,
            "cross": self.cross,
            "theta_field": self.theta_field,
        }

    def bookkeeping_residual(self):
        return self.total - sum(self.terms.values())

    @property
    def difference(self):
        """direct - breakdown total (None when the direct evaluator was skipped)."""
        return None if self.direct is None else self.direct - self.total


def _theta_energy_norm2(cutoff, c_w):
    """||theta_i||_1^2 = (2/(3 pi)) int r zeta^2 (r^2 + r) / (r^2 + r + C_W)^2 dr."""
    return 2 / (3 * np.pi) * _radial(
        lambda r: r * cutoff(r) ** 2 * (r * r + r) / (r * r + r + c_w) ** 2, cutoff
    )


def quadratic_form_breakdown(trial: TrialState, lam: float, direct=True) -> FormBreakdown:
    """Term-by-term quadratic form from the factorised formulas.

    With ``direct=True`` the first-principles value is attached as well.
    """
    _validate(trial)
    m = trial.particle.moments
    a, E, cut, cw = trial.alpha, trial.sigma0, trial.cutoff, trial.c_w
    om2 = trial.omega_norm2()
    G = m["grad2"]
    S0 = G + lam * m["W_f2"]
    S1 = m["lap2"] + lam * m["W_grad2"]
    eta2 = eta_squared(cut, cw)
    t0 = theta_norm2(cut, cw)
    t1 = _theta_energy_norm2(cut, cw)

    terms = dict(
        self_energy=E * m["norm2"] * om2,
        schrodinger=om2 * S0,
        theta_schrodinger=a * t0 * S1,
        cross=-2 * a * G * eta2,
        theta_field=a * G * t1,
    )
    total = sum(terms.values())
    norm2 = m["norm2"] * om2 + a * G * t0
    out = FormBreakdown(
        lam=lam, alpha=a, sigma0=E, total=total, norm2=norm2, margin=total - E * norm2,
        eta2=eta2, theta_field_ratio=t1 / eta2,
        theta_schrodinger_bound=a * t0 * cw * G,
        gradient_bound=gradient_bound_check(trial.particle, lam, cw, 0.0),
        **terms,
    )
    if direct:
        d = direct_form(trial, lam)
        out.direct, out.direct_margin, out.direct_norm2 = d.value, d.margin, d.norm2
    return out


# ---------------------------------------------------------------- direct evaluator


def _tail_breaks(R, kappa, order_of=40.0):
    L = 1.0 / kappa
    s = [0.0]
    x = min(R, L) / 4
    while x < L:
        s.append(x)
        x *= 2
    s.append(L)
    s.extend(L * np.arange(2.0, order_of + 1.0))
    return R + np.asarray(s)


def particle_matrices(trial: TrialState):
    """4x4 particle-side matrices for u_0 = f, u_i = i sqrt(alpha) d_i f.

    Keys ``gram`` <u_j, u_l>, ``kin`` <grad u_j, grad u_l>, ``pot``
    <W u_j, u_l> and ``mom`` (3, 4, 4) <-i d_m u_j, u_l>, all by 3D
    quadrature over radial Gauss panels times the angular scheme.
    """
    if "particle" in trial._cache:
        return trial._cache["particle"]
    sol = trial.particle
    W = sol.potential
    r_in, w_in = interior_nodes(W)
    r_out, w_out = gauss_panels(_tail_breaks(W.support, sol.kappa), 24)
    r = np.concatenate([r_in, r_out])
    wr = np.concatenate([w_in, w_out])
    f, df, d2f = sol.f(r)
    xh = trial.angular.nodes  # (A, 3)
    w = 4 * np.pi * (wr * r * r)[:, None] * trial.angular.weights[None, :]  # (R, A)
    c = 1j * np.sqrt(trial.alpha)
    eye = np.eye(3)

    U = np.empty((4,) + w.shape, dtype=complex)
    dU = np.empty((4, 3) + w.shape, dtype=complex)
    U[0] = f[:, None]
    dU[0] = (df[:, None, None] * xh[None]).transpose(2, 0, 1)
    for i in range(3):
        U[i + 1] = c * df[:, None] * xh[None, :, i]
        hess = (
            d2f[:, None, None] * xh[None, :, i, None] * xh[None]
            + (df / r)[:, None, None] * (eye[i][None, None, :] - xh[None, :, i, None] * xh[None])
        )  # (R, A, 3) = d_m d_i f
        dU[i + 1] = c * hess.transpose(2, 0, 1)

    Wr = W(r)[:, None]
    Uc = np.conj(U)
    out = {
        "gram": np.einsum("jra,lra,ra->jl", U, Uc, w),
        "kin": np.einsum("jmra,lmra,ra->jl", dU, np.conj(dU), w),
        "pot": np.einsum("jra,lra,ra->jl", U, Uc, w * Wr),
        "mom": np.einsum("jmra,lra,ra->mjl", -1j * dU, Uc, w),
    }
    trial._cache["particle"] = out
    return out


def field_matrices(trial: TrialState):
    """4x4 photon-side matrices over chi_0 = Omega, chi_i = theta_i.

    Keys ``gram`` <chi_j, chi_l>, ``T`` <T(0) chi_j, chi_l> on the 0 + 1
    photon space (the A^2 term keeps its sector-diagonal part, including the
    one-photon -> two-photon -> one-photon path), and ``X`` (3, 4, 4)
    <(P_f - sqrt(alpha) A(0))_m chi_j, chi_l>.
    """
    if "field" in trial._cache:
        return trial._cache["field"]
    grid, cut = trial.grid, trial.cutoff
    a, g = trial.alpha, trial.g
    sa = np.sqrt(a)
    vac = [trial.dressed.spinor, np.zeros(2, complex), np.zeros(2, complex), np.zeros(2, complex)]
    xi = [trial.dressed.photon.values] + [t.values for t in trial.thetas]
    n = 4
    k = grid.k

    dstar = [{s: D_star_component(m, *s, k, cut).T for s in ((1, 0), (0, 1))} for m in range(3)]
    sK = {s: sigma_K_star(*s, k, cut).T for s in ((1, 0), (0, 1))}

    def dv(m, v):
        return dstar[m][(1, 0)] * v[0] + dstar[m][(0, 1)] * v[1]

    def sv(v):
        return sK[(1, 0)] * v[0] + sK[(0, 1)] * v[1]

    def D_on(m, x):
        # vacuum spinor D_m x; component s equals <x, D*_m e_s>
        return np.array([grid.inner(x, dstar[m][(1, 0)]), grid.inner(x, dstar[m][(0, 1)])])

    c_grid = sum(
        np.sum(grid.weights * np.abs(fld.D_kernel(k, p, cut)[:, mm]) ** 2)
        for p in (1, 2) for mm in range(3)
    )
    c_no = fld.normal_ordering_constant(cut)
    disp = grid.dispersion
    Dx = [[D_on(m, x) for m in range(3)] for x in xi]
    q = [sum(k[:, m] * dv(m, v) for m in range(3)) for v in vac]  # P_f . D* v

    gram = np.zeros((n, n), complex)
    T = np.zeros((n, n), complex)
    X = np.zeros((3, n, n), complex)
    for j in range(n):
        for l in range(n):
            ov = np.vdot(vac[l], vac[j]) + grid.inner(xi[j], xi[l])
            gram[j, l] = ov
            A2 = 2 * sum(np.vdot(Dx[l][m], Dx[j][m]) for m in range(3)) + (c_grid - c_no) * ov
            PA = grid.inner(q[j], xi[l]) + grid.inner(xi[j], q[l])
            SB = grid.inner(sv(vac[j]), xi[l]) + grid.inner(xi[j], sv(vac[l]))
            T[j, l] = grid.inner(xi[j], xi[l], disp) + a * A2 - sa * PA + g * sa * SB
            for m in range(3):
                X[m, j, l] = grid.inner(xi[j] * k[:, m], xi[l]) - sa * (
                    grid.inner(dv(m, vac[j]), xi[l]) + grid.inner(xi[j], dv(m, vac[l]))
                )
    out = {"gram": gram, "T": T, "X": X, "c_grid": c_grid}
    trial._cache["field"] = out
    return out


@dataclass(frozen=True)
class DirectForm:
    value: float
    margin: float
    norm2: float
    imag_residual: float
    kinetic_part: float  # lam-independent part
    potential_part: float  # coefficient of lam


def direct_form(trial: TrialState, lam: float) -> DirectForm:
    """<H' Psi, Psi> evaluated from the particle and photon matrices."""
    _validate(trial)
    p, q = particle_matrices(trial), field_matrices(trial)
    base = np.sum(p["kin"] * q["gram"] + p["gram"] * q["T"]) - 2 * np.sum(p["mom"] * q["X"])
    slope = np.sum(p["pot"] * q["gram"])
    val = base + lam * slope
    norm2 = np.sum(p["gram"] * q["gram"]).real
    return DirectForm(
        value=float(val.real),
        margin=float(val.real - trial.sigma0 * norm2),
        norm2=float(norm2),
        imag_residual=float(abs(val.imag)),
        kinetic_part=float(base.real),
        potential_part=float(slope.real),
    )


def margin_function(trial: TrialState, evaluator="direct") -> Callable[[float], float]:
    """lam -> certificate margin; affine in lam for either evaluator."""
    if evaluator == "direct":
        return lambda lam: direct_form(trial, lam).margin
    if evaluator == "breakdown":
        return lambda lam: quadratic_form_breakdown(trial, lam, direct=False).margin
    raise ValueError(f"unknown evaluator {evaluator!r}")


# ---------------------------------------------------------------- certificate


@dataclass
class Certificate:
    margin: float
    verdict: bool
    lam: float
    alpha: float
    gamma_reg: float
    breakdown: FormBreakdown
    note: str = TRUNCATION_NOTE


def binding_certificate(
    W: RadialPotential,
    alpha: float,
    gamma_reg: float | None = None,
    lam: float | None = None,
    trial: TrialState | None = None,
    **trial_kw,
) -> Certificate:
    """Margin <H Psi, Psi> - Sigma0 ||Psi||^2 by the direct evaluator; negative certifies binding."""
    trial = trial or assemble_trial(W, alpha, gamma_reg, **trial_kw)
    lam = trial.lambda0 if lam is None else lam
    br = quadratic_form_breakdown(trial, lam, direct=True)
    return Certificate(br.direct_margin, br.direct_margin < 0, lam, trial.alpha, trial.gamma_reg, br)


# ---------------------------------------------------------------- sweep


def predicted_slope(eta2, t0, c_w, q, evaluator="direct"):
    """Leading-order (lambda0 - lambda_c) / (lambda0 alpha) for this trial family.

    Linearising the margin in alpha and setting it to zero gives
    (c - 1) eta^2 + ||theta||^2 (C_W - q), where q |grad f|^2 =
    sum_l <(-Lap + lambda0 W) d_l f, d_l f> and c is the coefficient of
    -alpha |grad f|^2 eta^2 in the cross term: 4 when evaluated directly,
    2 in the factorised breakdown.
    """
    c = {"direct": 4.0, "breakdown": 2.0}[evaluator]
    return (c - 1) * eta2 + t0 * (c_w - q)


@dataclass
class ThresholdReport:
    lambda0: float
    c_w: float
    eta2: float
    alphas: np.ndarray
    gamma_regs: np.ndarray
    lambda_c: np.ndarray
    predicted_bound: np.ndarray  # lambda0 (1 - alpha eta^2)
    flags: list
    probe_margins: dict
    fitted_slope: float  # intercept of (lambda0 - lambda_c)/(lambda0 alpha) vs alpha
    fit_coefficients: tuple
    extrapolated_lambda0: float
    mechanistic_slope: float
    evaluator: str
    note: str = TRUNCATION_NOTE

    @property
    def shifts(self):
        return (self.lambda0 - self.lambda_c) / (self.lambda0 * self.alphas)

    @property
    def monotone(self):
        lc = self.lambda_c[np.isfinite(self.lambda_c)]
        return bool(np.all(np.diff(lc) <= 1e-14 * self.lambda0))

    @property
    def all_below_threshold(self):
        return bool(np.all(self.lambda_c < self.lambda0))

    @property
    def complete(self):
        return all(f is None for f in self.flags)


def critical_lambda(trial: TrialState, evaluator="direct", lo=None, hi=None):
    """Smallest lam with negative margin (the margin is nonincreasing in lam)."""
    m = margin_function(trial, evaluator)
    lam0 = trial.lambda0
    lo = 0.5 * lam0 if lo is None else lo
    hi = 1.1 * lam0 if hi is None else hi
    mlo, mhi = m(lo), m(hi)
    if not (mlo > 0 > mhi):
        raise ValueError(f"margin not bracketed on [{lo:g}, {hi:g}]: {mlo:g}, {mhi:g}")
    return brentq(m, lo, hi, xtol=1e-15 * lam0, rtol=4 * np.finfo(float).eps, maxiter=200)


def alpha_sweep(
    W: RadialPotential,
    alphas: Sequence[float],
    gamma_policy: Callable[[float], float] | None = None,
    cutoff: fld.CutoffProfile | None = None,
    evaluator="direct",
    probes: Sequence[float] = (0.9, 1.0),
    threads: int = 1,
    spin=(1.0, 0.0),
    g: float = 1.0,
) -> ThresholdReport:
    """lambda_c(alpha) over a ladder of couplings and the fitted leading shift.

    ``probes`` are fractions of lambda0 at which margins are recorded.
    """
    alphas = np.asarray(sorted(alphas), dtype=float)
    if np.any(alphas <= 0) or len(set(alphas)) != len(alphas):
        raise ValueError("alpha values must be distinct and positive")
    if alphas[-1] / alphas[0] < 10**1.5:
        raise ValueError("alpha ladder must span at least 1.5 decades")
    cutoff = cutoff or fld.CutoffProfile()
    policy = gamma_policy or GammaPolicy()
    lam0 = critical_coupling(W)
    cw = c_w_constant(lam0, W)
    eta2 = eta_squared(cutoff, cw)

    def one(alpha):
        gam = policy(alpha)
        try:
            tr = assemble_trial(W, alpha, gam, cutoff, spin, g, lambda0=lam0, c_w=cw)
            m = margin_function(tr, evaluator)
            pm = {float(p): m(p * lam0) for p in probes}
            return gam, critical_lambda(tr, evaluator), pm, None, tr
        except (ValueError, RuntimeError) as exc:
            return gam, np.nan, {}, f"{type(exc).__name__}: {exc}", None

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(one, alphas))
    else:
        results = [one(a) for a in alphas]

    gam = np.array([r[0] for r in results])
    lc = np.array([r[1] for r in results])
    ok = np.isfinite(lc)
    y = (lam0 - lc) / (lam0 * alphas)
    if ok.sum() >= 2:
        coef = np.polyfit(alphas[ok], y[ok], 1)
        lam_fit = np.polyfit(alphas[ok], lc[ok], min(2, ok.sum() - 1))
        slope, extrap = float(coef[-1]), float(lam_fit[-1])
    else:
        coef, slope, extrap = (np.nan, np.nan), np.nan, np.nan

    first = next((r[4] for r in results if r[4] is not None), None)
    mech = np.nan
    if first is not None:
        mo = first.particle.moments
        q = (mo["lap2"] + lam0 * mo["W_grad2"]) / mo["grad2"]
        mech = predicted_slope(eta2, theta_norm2(cutoff, cw), cw, q, evaluator)

    return ThresholdReport(
        lambda0=lam0,
        c_w=cw,
        eta2=eta2,
        alphas=alphas,
        gamma_regs=gam,
        lambda_c=lc,
        predicted_bound=lam0 * (1 - alphas * eta2),
        flags=[r[3] for r in results],
        probe_margins={float(a): r[2] for a, r in zip(alphas, results)},
        fitted_slope=slope,
        fit_coefficients=tuple(float(c) for c in np.atleast_1d(coef)),
        extrapolated_lambda0=extrap,
        mechanistic_slope=mech,
        evaluator=evaluator,
    )
