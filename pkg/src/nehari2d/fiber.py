"""Two-parameter fibering maps and rescaling onto the constraint set.

For a pair u with both components nontrivial, the fibering map

    h_u(t1, t2) = E(t1 u1, t2 u2)

has critical points exactly at the rescalings t of u with (t1 u1, t2 u2)
on the constraint set (both residuals zero).  For repulsive or vanishing
coupling (beta <= 0), under the structural hypotheses on the diffusion
profiles and admissible linear coefficients, the critical point is unique
and is the global maximizer, so the projection

    m(u) = (t1* u1, t2* u2)

is well defined whenever the necessary membership inequalities

    int |u_i|^p + beta * int |u1 u2|^(p/2) > 0,   i = 1, 2

hold; it is located by a log-spaced coarse scan (one automatic box
enlargement) followed by damped Newton on the fiber gradient.  For
attractive coupling (beta > 0) the fully nontrivial critical point is a
saddle of h (the axis maxima of the semi-trivial rescalings dominate), so
the rescale is computed by damped Newton root-finding on the fiber
gradient instead; it may genuinely fail to exist when one component is
energetically redundant, which callers treat as candidate collapse.

Every t-dependent integral separates: the profile terms depend on t_i
only through A_i(t_i u_i), so value/gradient grids over the scan box cost
O(n_scan * n_cells) per component instead of O(n_scan^2 * n_cells).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coeffs import KIND_IDENTITY, CoefficientFamily
from .energy import (
    NehariResidual,
    ProblemParams,
    nehari_residual,
    scale_state,
    total_energy,
)
from .errors import DegenerateInput, NoConvergence
from .grid import Grid, ScalarField, StatePair, cell_gradients, cell_values, grad_sq, integrate

STATUS_INTERIOR_MAX = "interior_max"
STATUS_NOT_PROJECTABLE = "not_projectable"


@dataclass(frozen=True)
class FiberPoint:
    t1: float
    t2: float

    def __post_init__(self):
        if not (self.t1 > 0.0 and self.t2 > 0.0):
            raise ValueError(f"fiber point must be positive, got ({self.t1}, {self.t2})")
        if not (math.isfinite(self.t1) and math.isfinite(self.t2)):
            raise ValueError("fiber point must be finite")


@dataclass(frozen=True)
class ProjectionOptions:
    t_min: float = 1e-3
    t_max: float = 1e3
    n_scan: int = 64
    tol: float = 1e-10
    max_iter: int = 100


@dataclass(frozen=True)
class ProjectionResult:
    status: str
    t: FiberPoint | None = None
    projected: StatePair | None = None
    residual: NehariResidual | None = None
    reason: str = ""

    @property
    def projectable(self) -> bool:
        return self.status == STATUS_INTERIOR_MAX


class FiberEvaluator:
    """Cached per-cell data of one state for fast fiber evaluations."""

    def __init__(
        self,
        u: StatePair,
        params: ProblemParams,
        fam1: CoefficientFamily,
        fam2: CoefficientFamily,
        grid: Grid,
    ):
        self.params = params
        self.fams = (fam1, fam2)
        area = grid.cell_area
        self.area = area
        p = params.p

        self._v = []
        self._gsq = []
        self.q = []   # int u_i^2
        self.pp = []  # int |u_i|^p
        for comp in (u.u1, u.u2):
            v = cell_values(comp, grid)
            gx, gy = cell_gradients(comp, grid)
            gsq = gx * gx + gy * gy
            self._v.append(v)
            self._gsq.append(gsq)
            self.q.append(float(np.sum(v * v)) * area)
            self.pp.append(float(np.sum(np.abs(v) ** p)) * area)
        self.cross = float(np.sum(np.abs(self._v[0] * self._v[1]) ** (p / 2.0))) * area
        self._const_profile = [fam.kind == KIND_IDENTITY for fam in self.fams]
        self._ia0 = [float(np.sum(self._gsq[k])) * area for k in range(2)]

    def membership_values(self) -> tuple[float, float]:
        """int |u_i|^p + beta * cross term, for i = 1, 2."""
        b = self.params.beta
        return (self.pp[0] + b * self.cross, self.pp[1] + b * self.cross)

    # profile integrals: ia(k, tau) = int A(tau*u)|grad u|^2,
    #                    idv(k, tau) = int A'(tau*u) * u * |grad u|^2
    def _ia(self, k: int, taus: np.ndarray) -> np.ndarray:
        if self._const_profile[k]:
            return np.full(np.shape(taus), self._ia0[k])
        sv = np.multiply.outer(taus, self._v[k])
        return np.sum(self.fams[k].a(sv) * self._gsq[k], axis=(-2, -1)) * self.area

    def _idv(self, k: int, taus: np.ndarray) -> np.ndarray:
        if self._const_profile[k]:
            return np.zeros(np.shape(taus))
        sv = np.multiply.outer(taus, self._v[k])
        return (
            np.sum(self.fams[k].da(sv) * self._v[k] * self._gsq[k], axis=(-2, -1))
            * self.area
        )

    def _ia_idv(self, k: int, taus) -> tuple[np.ndarray, np.ndarray]:
        """Both profile integrals from one scaled-sample array."""
        if self._const_profile[k]:
            return np.full(np.shape(taus), self._ia0[k]), np.zeros(np.shape(taus))
        sv = np.multiply.outer(taus, self._v[k])
        ia = np.sum(self.fams[k].a(sv) * self._gsq[k], axis=(-2, -1)) * self.area
        idv = (
            np.sum(self.fams[k].da(sv) * self._v[k] * self._gsq[k], axis=(-2, -1))
            * self.area
        )
        return ia, idv

    def _axis_value(self, k: int, taus: np.ndarray) -> np.ndarray:
        """Terms of h depending on t_k alone (everything but the cross term)."""
        p = self.params.p
        lam = self.params.lam(k + 1)
        taus = np.asarray(taus, dtype=float)
        return 0.5 * taus**2 * (self._ia(k, taus) - lam * self.q[k]) - (
            taus**p / p
        ) * self.pp[k]

    def _axis_grad(self, k: int, taus: np.ndarray) -> np.ndarray:
        p = self.params.p
        lam = self.params.lam(k + 1)
        taus = np.asarray(taus, dtype=float)
        ia, idv = self._ia_idv(k, taus)
        return (
            taus * (ia - lam * self.q[k])
            + 0.5 * taus**2 * idv
            - taus ** (p - 1.0) * self.pp[k]
        )

    def value(self, t1: float, t2: float) -> float:
        p, b = self.params.p, self.params.beta
        cross = (2.0 * b / p) * t1 ** (p / 2.0) * t2 ** (p / 2.0) * self.cross
        return float(self._axis_value(0, t1) + self._axis_value(1, t2) - cross)

    def grad(self, t1: float, t2: float) -> tuple[float, float]:
        p, b = self.params.p, self.params.beta
        half = p / 2.0
        g1 = self._axis_grad(0, t1) - b * t1 ** (half - 1.0) * t2**half * self.cross
        g2 = self._axis_grad(1, t2) - b * t2 ** (half - 1.0) * t1**half * self.cross
        return float(g1), float(g2)

    def grad_and_jacobian(self, t1: float, t2: float):
        """Fiber gradient and its Jacobian at (t1, t2).

        The cross-term derivatives are analytic monomials; the axis terms
        are differenced centrally with one batched profile evaluation per
        component (the profile second derivative is not part of the
        family interface).
        """
        p, b = self.params.p, self.params.beta
        half = p / 2.0
        g = np.empty(2)
        J = np.empty((2, 2))
        ts = (t1, t2)
        for k in range(2):
            dt = 1e-6 * ts[k]
            batch = self._axis_grad(k, np.array([ts[k] - dt, ts[k], ts[k] + dt]))
            g[k] = batch[1]
            J[k, k] = (batch[2] - batch[0]) / (2.0 * dt)
        c = b * self.cross
        g[0] -= c * t1 ** (half - 1.0) * t2**half
        g[1] -= c * t2 ** (half - 1.0) * t1**half
        J[0, 0] -= c * (half - 1.0) * t1 ** (half - 2.0) * t2**half
        J[1, 1] -= c * (half - 1.0) * t2 ** (half - 2.0) * t1**half
        J[0, 1] = J[1, 0] = -c * half * t1 ** (half - 1.0) * t2 ** (half - 1.0)
        return g, J

    def value_grid(self, taus1: np.ndarray, taus2: np.ndarray) -> np.ndarray:
        p, b = self.params.p, self.params.beta
        h = self._axis_value(0, taus1)[:, None] + self._axis_value(1, taus2)[None, :]
        h -= (2.0 * b / p) * self.cross * np.outer(
            taus1 ** (p / 2.0), taus2 ** (p / 2.0)
        )
        return h

    def grad_grid(self, taus1, taus2) -> tuple[np.ndarray, np.ndarray]:
        p, b = self.params.p, self.params.beta
        half = p / 2.0
        cross1 = b * self.cross * np.outer(taus1 ** (half - 1.0), taus2**half)
        cross2 = b * self.cross * np.outer(taus1**half, taus2 ** (half - 1.0))
        g1 = self._axis_grad(0, taus1)[:, None] - cross1
        g2 = self._axis_grad(1, taus2)[None, :] - cross2
        return g1, g2


def fiber_value(
    u: StatePair,
    t: FiberPoint,
    params: ProblemParams,
    fam1: CoefficientFamily,
    fam2: CoefficientFamily,
    grid: Grid,
) -> float:
    """h_u(t); evaluated as total_energy of the scaled pair (same quadrature)."""
    return total_energy(scale_state(u, t.t1, t.t2), params, fam1, fam2, grid)


def fiber_gradient(
    u: StatePair,
    t: FiberPoint,
    params: ProblemParams,
    fam1: CoefficientFamily,
    fam2: CoefficientFamily,
    grid: Grid,
) -> tuple[float, float]:
    """(dh/dt1, dh/dt2) at t."""
    return FiberEvaluator(u, params, fam1, fam2, grid).grad(t.t1, t.t2)


def _check_nontrivial(u: StatePair):
    if not np.any(u.u1.values != 0.0):
        raise DegenerateInput("first component is identically zero")
    if not np.any(u.u2.values != 0.0):
        raise DegenerateInput("second component is identically zero")


def _solve_2x2(J: np.ndarray, g: np.ndarray, t: np.ndarray) -> np.ndarray:
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    if det != 0.0 and np.all(np.isfinite(J)):
        step = np.array(
            [
                (-g[0] * J[1, 1] + g[1] * J[0, 1]) / det,
                (-g[1] * J[0, 0] + g[0] * J[1, 0]) / det,
            ]
        )
        if np.all(np.isfinite(step)):
            return step
    return g * (min(t[0], t[1]) / (np.max(np.abs(g)) + 1.0))


def _axis_root(ev: FiberEvaluator, k: int, tau_init: float | None = None) -> float:
    """Positive root of the decoupled axis gradient D_k (coupling ignored)."""
    p = ev.params.p
    lam = ev.params.lam(k + 1)
    quad0 = float(ev._ia(k, 1e-6)) - lam * ev.q[k]
    tau0 = tau_init if tau_init else 1.0
    if tau_init is None and quad0 > 0.0 and ev.pp[k] > 0.0:
        tau0 = (quad0 / ev.pp[k]) ** (1.0 / (p - 2.0))
    lo = hi = None
    for span in (2.0, 16.0, 256.0, 65536.0):
        taus = np.geomspace(tau0 / span, tau0 * span, 16)
        vals = ev._axis_grad(k, taus)
        pos = vals > 0.0
        if pos[0] and not pos[-1]:
            j = int(np.argmin(pos))
            lo, hi = float(taus[j - 1]), float(taus[j])
            break
    if lo is None:
        raise NoConvergence("could not bracket the axis fiber root")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ev._axis_grad(k, mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-6 * mid:
            break
    return 0.5 * (lo + hi)


def _newton_root(ev: FiberEvaluator, t: np.ndarray, opts: ProjectionOptions):
    """Damped Newton for a zero of the fiber gradient (beta > 0 rescale).

    With attractive coupling the fully nontrivial critical point is a
    saddle of h, so the merit function is the gradient norm rather than
    the fiber value.
    """
    g, J = ev.grad_and_jacobian(t[0], t[1])
    merit = float(np.max(np.abs(g)))
    for _ in range(opts.max_iter):
        h = ev.value(t[0], t[1])
        if merit <= opts.tol * (abs(h) + 1.0):
            trial = t + _solve_2x2(J, g, t)
            if np.all(trial > 0.0) and np.all(np.isfinite(trial)):
                g_trial, J_trial = ev.grad_and_jacobian(trial[0], trial[1])
                if np.max(np.abs(g_trial)) <= merit:
                    t, g, J = trial, g_trial, J_trial
            return t, True
        step = _solve_2x2(J, g, t)
        scale = 1.0
        accepted = False
        for _ in range(60):
            trial = t + scale * step
            if np.all(trial > 0.0):
                g_try, J_try = ev.grad_and_jacobian(trial[0], trial[1])
                m_try = float(np.max(np.abs(g_try)))
                if m_try < merit:
                    t, g, J, merit = trial, g_try, J_try, m_try
                    accepted = True
                    break
            scale *= 0.5
        if not accepted:
            return t, False
    return t, False


def _newton_polish(ev: FiberEvaluator, t: np.ndarray, opts: ProjectionOptions):
    """Damped Newton on the fiber gradient, maximizing h along the way."""
    h = ev.value(t[0], t[1])
    for it in range(opts.max_iter):
        g, J = ev.grad_and_jacobian(t[0], t[1])
        if np.max(np.abs(g)) <= opts.tol * (abs(h) + 1.0):
            # one extra quadratic step sharpens t well past the gradient tol
            trial = t + _solve_2x2(J, g, t)
            if np.all(trial > 0.0) and np.all(np.isfinite(trial)):
                g_trial = np.array(ev.grad(trial[0], trial[1]))
                if np.max(np.abs(g_trial)) <= np.max(np.abs(g)):
                    t = trial
            return t, True
        step = _solve_2x2(J, g, t)

        # halve until positive and h does not decrease (tiny fp slack)
        slack = 32.0 * np.finfo(float).eps * (abs(h) + 1.0)
        scale = 1.0
        accepted = False
        for _ in range(60):
            trial = t + scale * step
            if np.all(trial > 0.0):
                h_trial = ev.value(trial[0], trial[1])
                if h_trial >= h - slack:
                    t, h = trial, h_trial
                    accepted = True
                    break
            scale *= 0.5
        if not accepted:
            g = np.array(ev.grad(t[0], t[1]))
            return t, bool(np.max(np.abs(g)) <= 10.0 * opts.tol * (abs(h) + 1.0))
    g = np.array(ev.grad(t[0], t[1]))
    return t, bool(np.max(np.abs(g)) <= opts.tol * (abs(h) + 1.0))


def project_to_nehari(
    u: StatePair,
    params: ProblemParams,
    fam1: CoefficientFamily,
    fam2: CoefficientFamily,
    grid: Grid,
    opts: ProjectionOptions = ProjectionOptions(),
    t_init: tuple[float, float] | None = None,
) -> ProjectionResult:
    """Rescale u onto the constraint set via its fiber maximizer.

    Returns not_projectable when the necessary membership inequalities
    fail or when the coarse-scan maximum escapes the search box even
    after one tenfold enlargement.  A warm-start guess `t_init` skips the
    coarse scan when Newton succeeds from it; by uniqueness of the fiber
    critical point the outcome is the same.
    """
    _check_nontrivial(u)
    ev = FiberEvaluator(u, params, fam1, fam2, grid)
    m1, m2 = ev.membership_values()
    if m1 <= 0.0 or m2 <= 0.0:
        return ProjectionResult(
            status=STATUS_NOT_PROJECTABLE,
            reason=f"membership inequalities fail: ({m1:.3e}, {m2:.3e})",
        )

    if params.beta > 0.0:
        # attractive coupling: the fully nontrivial critical point is a
        # saddle of h, found by root-finding instead of maximization
        if t_init is not None and t_init[0] > 0.0 and t_init[1] > 0.0:
            t0 = np.asarray(t_init, dtype=float)
        else:
            t0 = np.array([_axis_root(ev, 0), _axis_root(ev, 1)])
        t, converged = _newton_root(ev, t0, opts)
        if not converged:
            return ProjectionResult(
                status=STATUS_NOT_PROJECTABLE,
                reason="no interior rescale found (attractive coupling)",
            )
    else:
        t = None
        if t_init is not None and t_init[0] > 0.0 and t_init[1] > 0.0:
            t_warm, converged = _newton_polish(
                ev, np.asarray(t_init, dtype=float), opts
            )
            if converged:
                t = t_warm
        if t is None:
            lo, hi = opts.t_min, opts.t_max
            for attempt in range(2):
                taus = np.logspace(math.log10(lo), math.log10(hi), opts.n_scan)
                H = ev.value_grid(taus, taus)
                k1, k2 = np.unravel_index(int(np.argmax(H)), H.shape)
                on_border = k1 in (0, opts.n_scan - 1) or k2 in (0, opts.n_scan - 1)
                if not on_border:
                    break
                lo, hi = lo / 10.0, hi * 10.0
            else:
                return ProjectionResult(
                    status=STATUS_NOT_PROJECTABLE,
                    reason="scan maximum on box boundary after enlargement",
                )

            t0 = np.array([taus[k1], taus[k2]])
            t, converged = _newton_polish(ev, t0, opts)
            if not converged:
                raise NoConvergence(
                    f"fiber Newton stalled at t = ({t[0]:.6g}, {t[1]:.6g})",
                    iterations=opts.max_iter,
                )
    point = FiberPoint(float(t[0]), float(t[1]))
    projected = scale_state(u, point.t1, point.t2)
    residual = nehari_residual(projected, params, fam1, fam2, grid)
    return ProjectionResult(
        status=STATUS_INTERIOR_MAX, t=point, projected=projected, residual=residual
    )


def sphere_normalize(u: StatePair, grid: Grid) -> StatePair:
    """Scale each component to unit gradient norm."""
    _check_nontrivial(u)
    out = []
    for comp in (u.u1, u.u2):
        nrm = math.sqrt(integrate(grad_sq(comp, grid), grid))
        if nrm == 0.0:
            raise DegenerateInput("component has zero gradient norm")
        out.append(ScalarField(comp.values / nrm, comp.spec))
    return StatePair(out[0], out[1])


def critical_cell_count(
    u: StatePair,
    params: ProblemParams,
    fam1: CoefficientFamily,
    fam2: CoefficientFamily,
    grid: Grid,
    n: int = 200,
    t_min: float = 1e-3,
    t_max: float = 1e3,
) -> int:
    """Count scan cells where both fiber gradient components change sign.

    A transversal fiber critical point shows up as exactly one such cell;
    the count is the sampled check of critical-point uniqueness.
    """
    ev = FiberEvaluator(u, params, fam1, fam2, grid)
    taus = np.logspace(math.log10(t_min), math.log10(t_max), n)
    g1, g2 = ev.grad_grid(taus, taus)
    s1 = g1 > 0.0
    s2 = g2 > 0.0

    def mixed(s):
        blocks = s[:-1, :-1] & s[1:, :-1] & s[:-1, 1:] & s[1:, 1:]
        any_true = s[:-1, :-1] | s[1:, :-1] | s[:-1, 1:] | s[1:, 1:]
        return any_true & ~blocks

    return int(np.sum(mixed(s1) & mixed(s2)))


class ScalarFiberCache:
    """Cached one-component fiber map: psi(tau) = d/dtau E(tau z)."""

    def __init__(
        self,
        z: ScalarField,
        lam: float,
        params: ProblemParams,
        fam: CoefficientFamily,
        grid: Grid,
        nonlin_coeff: float = 1.0,
    ):
        if not np.any(z.values != 0.0):
            raise DegenerateInput("cannot rescale the zero field")
        if nonlin_coeff <= 0.0:
            raise ValueError(
                f"need a positive nonlinearity weight, got {nonlin_coeff}"
            )
        self.p = params.p
        self.lam = lam
        self.c = nonlin_coeff
        self.fam = fam
        area = grid.cell_area
        self.area = area
        self._v = cell_values(z, grid)
        gx, gy = cell_gradients(z, grid)
        self._gsq = gx * gx + gy * gy
        self.q = float(np.sum(self._v * self._v)) * area
        self.pp = float(np.sum(np.abs(self._v) ** self.p)) * area
        self._const = fam.kind == KIND_IDENTITY
        self.ia0 = float(np.sum(self._gsq)) * area

    def psi(self, taus) -> np.ndarray:
        """Vectorized over an array of rescalings."""
        taus = np.asarray(taus, dtype=float)
        if self._const:
            ia = self.ia0
            idv = 0.0
        else:
            sv = np.multiply.outer(taus, self._v)
            ia = np.sum(self.fam.a(sv) * self._gsq, axis=(-2, -1)) * self.area
            idv = (
                np.sum(self.fam.da(sv) * self._v * self._gsq, axis=(-2, -1))
                * self.area
            )
        return (
            taus * (ia - self.lam * self.q)
            + 0.5 * taus**2 * idv
            - self.c * taus ** (self.p - 1.0) * self.pp
        )

    def root(self, tau_init: float | None = None, tol: float = 1e-12) -> float:
        """Unique positive zero of psi, by bracketing plus damped Newton."""
        if tau_init is not None and tau_init > 0.0 and math.isfinite(tau_init):
            tau0 = tau_init
        else:
            quad = self.ia0 - self.lam * self.q
            tau0 = (
                (quad / (self.c * self.pp)) ** (1.0 / (self.p - 2.0))
                if quad > 0.0
                else 1.0
            )

        # geometric batches to bracket the sign change around tau0
        lo = hi = None
        for span in (2.0, 16.0, 256.0, 65536.0):
            taus = np.geomspace(tau0 / span, tau0 * span, 16)
            vals = self.psi(taus)
            pos = vals > 0.0
            if pos[0] and not pos[-1]:
                k = int(np.argmin(pos))  # first False
                lo, hi = float(taus[k - 1]), float(taus[k])
                break
        if lo is None:
            raise NoConvergence("could not bracket the scalar fiber root")

        tau = 0.5 * (lo + hi)
        for _ in range(100):
            dt = 1e-7 * tau
            f_m, f, f_p = self.psi(np.array([tau - dt, tau, tau + dt]))
            if f > 0.0:
                lo = tau
            else:
                hi = tau
            df = (f_p - f_m) / (2.0 * dt)
            t_new = tau - f / df if df != 0.0 else 0.5 * (lo + hi)
            if not (lo < t_new < hi):
                t_new = 0.5 * (lo + hi)
            if abs(t_new - tau) <= tol * tau:
                return float(t_new)
            tau = t_new
        return float(tau)


def scalar_fiber_root(
    z: ScalarField,
    lam: float,
    params: ProblemParams,
    fam: CoefficientFamily,
    grid: Grid,
    nonlin_coeff: float = 1.0,
    tol: float = 1e-12,
    tau_init: float | None = None,
) -> float:
    """Unique positive rescaling tau with tau*z on the scalar constraint set.

    Solves tau*(int A(tau z)|grad z|^2 - lam int z^2)
           + tau^2/2 int A'(tau z) z |grad z|^2
           - c * tau^(p-1) int |z|^p = 0.
    """
    cache = ScalarFiberCache(z, lam, params, fam, grid, nonlin_coeff)
    return cache.root(tau_init=tau_init, tol=tol)
