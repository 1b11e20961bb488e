"""Ground-state solvers: scalar, competitive, cooperative, and sweeps.

Scalar ground states minimize the one-component energy over the unit
gradient sphere: each trial direction is rescaled onto the scalar
constraint set by its unique fiber root, and the descent direction is the
Riesz lift of the exact energy gradient projected onto the sphere
tangent.  The repulsive system solver runs the same scheme on the
product of two spheres, with the two-parameter fiber projection supplying
the constrained energy.  The attractive solver has no sphere reduction;
it refines a candidate list (diagonal state, near-semitrivial pair,
random positives) by descent with per-iteration rescaling onto the
constraint set.  All converged candidates are polished by a damped
Newton-Krylov root finder on the exact gradient.

Determinism: every random draw flows from the seed in SolverOptions, and
asymmetric candidates are explored in both component orders so that
swapping the problem data swaps the solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse.linalg import LinearOperator, minres

from .coeffs import CoefficientFamily
from .energy import (
    NehariResidual,
    ProblemParams,
    euler_gradient,
    nehari_residual,
    scalar_energy_c,
    scalar_euler_gradient_c,
    total_energy,
)
from .errors import (
    CoercivityViolation,
    DegenerateInput,
    InadmissibleLambda,
    InvalidParams,
    NoConvergence,
    NoFullyNontrivialCandidate,
    NotProjectable,
)
from .fiber import (
    ProjectionOptions,
    project_to_nehari,
    scalar_fiber_root,
    sphere_normalize,
)
from .grid import (
    Grid,
    GridSpec,
    ScalarField,
    StatePair,
    cell_values,
    grad_sq,
    integrate,
)
from .spectrum import (
    ADMISSIBLE,
    ADMISSIBLE_WEAK,
    INADMISSIBLE,
    admissible,
    make_poisson_solver,
    principal_eigenpair,
    strong_threshold,
)

REGIME_COOPERATIVE = "cooperative"
REGIME_COMPETITIVE = "competitive"
REGIME_DECOUPLED = "decoupled"


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8              # Euler residual target, function-space l2 norm
    nehari_tol: float = 1e-10      # fiber rescale tolerance (relative)
    max_iter: int = 2000
    n_restarts: int = 2            # random starts; each explored in both orders
    seed: int = 0
    armijo: float = 1e-4
    stagnation_tol: float = 1e-12
    stagnation_window: int = 20
    scan_t_min: float = 1e-3
    scan_t_max: float = 1e3
    scan_n: int = 64
    polish_max_iter: int = 60
    polish_inner_iter: int = 400
    check_coercivity: bool = True

    def projection(self) -> ProjectionOptions:
        return ProjectionOptions(
            t_min=self.scan_t_min,
            t_max=self.scan_t_max,
            n_scan=self.scan_n,
            tol=self.nehari_tol,
        )


@dataclass(frozen=True)
class ScalarReport:
    energy: float
    euler_residual_norm: float
    iterations: int
    converged: bool
    admissibility: str
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class SolveReport:
    energy: float
    L1: float
    L2: float
    e_beta_estimate: float
    euler_residual_norm: float
    nehari_residual: NehariResidual
    fully_nontrivial: bool
    nonnegative: bool
    iterations: int
    regime: str
    warnings: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# shared numerics


_EIGEN_CACHE: dict[GridSpec, object] = {}
_POISSON_CACHE: dict[GridSpec, object] = {}


def grid_eigenpair(grid: Grid):
    pair = _EIGEN_CACHE.get(grid.spec)
    if pair is None:
        pair = principal_eigenpair(grid)
        _EIGEN_CACHE[grid.spec] = pair
    return pair


def _poisson(grid: Grid):
    solver = _POISSON_CACHE.get(grid.spec)
    if solver is None:
        solver = make_poisson_solver(grid)
        _POISSON_CACHE[grid.spec] = solver
    return solver


def conservative_mu1(grid: Grid) -> float:
    pair = grid_eigenpair(grid)
    return min(pair.mu, pair.mu_quad)


def _vol_norm(values: np.ndarray, grid: Grid) -> float:
    return math.sqrt(float(np.sum(values * values)) * grid.cell_area)


def _riesz(values: np.ndarray, grid: Grid) -> np.ndarray:
    """H1 lift of a function-space gradient: exact 5-point -Laplace solve."""
    return _poisson(grid)(values)


def _raw_cell_grads(arr: np.ndarray, grid: Grid):
    P = grid.padded(arr)
    gx = ((P[1:, :-1] + P[1:, 1:]) - (P[:-1, :-1] + P[:-1, 1:])) / (2.0 * grid.hx)
    gy = ((P[:-1, 1:] + P[1:, 1:]) - (P[:-1, :-1] + P[1:, :-1])) / (2.0 * grid.hy)
    return gx, gy


def _quad_grad_inner(a: np.ndarray, b: np.ndarray, grid: Grid) -> float:
    ax, ay = _raw_cell_grads(a, grid)
    bx, by = _raw_cell_grads(b, grid)
    return float(np.sum(ax * bx + ay * by)) * grid.cell_area


def _h1_normalize(values: np.ndarray, grid: Grid) -> np.ndarray:
    nrm = math.sqrt(_quad_grad_inner(values, values, grid))
    if nrm == 0.0:
        raise DegenerateInput("cannot normalize a gradient-free field")
    return values / nrm


def _sign_fix(values: np.ndarray) -> np.ndarray:
    return -values if float(np.sum(values)) < 0.0 else values


def _is_nonnegative(values: np.ndarray) -> bool:
    top = float(np.max(np.abs(values)))
    return top == 0.0 or float(np.min(values)) >= -1e-8 * top


def _rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *tags]))


def _random_positive(grid: Grid, rng: np.random.Generator) -> np.ndarray:
    return np.abs(rng.standard_normal(grid.shape)) + 0.1


def _bump(grid: Grid, cx: float, cy: float, width: float) -> np.ndarray:
    X, Y = grid.node_mesh()
    return np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2.0 * width**2))


def segregated_pair(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Two disjoint-ish bumps in the left and right half of the rectangle."""
    s = grid.spec
    w = s.lx / 8.0
    left = _bump(grid, s.lx / 4.0, s.ly / 2.0, w)
    right = _bump(grid, 3.0 * s.lx / 4.0, s.ly / 2.0, w)
    return left, right


def _symmetric_problem(params, fam1, fam2) -> bool:
    return (
        params.lambda1 == params.lambda2
        and fam1.kind == fam2.kind
        and fam1.gamma == fam2.gamma
        and fam1.nu == fam2.nu
        and fam1.c0 == fam2.c0
    )


def _component_integrals(u: StatePair, params, grid: Grid):
    """(int |grad u_i|^2, int u_i^2, int |u_i|^p) per component."""
    out = []
    for comp in (u.u1, u.u2):
        v = cell_values(comp, grid)
        gsq = grad_sq(comp, grid)
        out.append(
            (
                float(np.sum(gsq)) * grid.cell_area,
                float(np.sum(v * v)) * grid.cell_area,
                float(np.sum(np.abs(v) ** params.p)) * grid.cell_area,
            )
        )
    return out


def check_coercivity_bound(
    energy_val: float,
    u: StatePair,
    params: ProblemParams,
    nu: float,
    mu1: float,
    grid: Grid,
    residual: NehariResidual,
) -> None:
    """Abort when a constrained iterate undercuts the coercivity bound.

    On the constraint set the energy dominates
    (p-2-gamma)/(2p) * nu * sum_i int |grad u_i|^2
        - (p-2)/(2p) * sum_i lambda_i int u_i^2,
    an exact consequence of the growth hypothesis on the profiles.  The
    slack absorbs quadrature roundoff and the distance of the iterate
    from the constraint set (measured by the residuals).
    """
    p, g = params.p, params.gamma
    ints = _component_integrals(u, params, grid)
    bound = sum(
        (p - 2.0 - g) / (2.0 * p) * nu * gr - (p - 2.0) / (2.0 * p) * lam * q
        for (gr, q, _), lam in zip(ints, (params.lambda1, params.lambda2))
    )
    slack = 1e-8 * (1.0 + abs(energy_val)) + abs(residual.r1) + abs(residual.r2)
    if energy_val < bound - slack:
        raise CoercivityViolation(
            f"constrained energy {energy_val:.12g} fell below the bound "
            f"{bound:.12g} (residuals {residual.r1:.3e}, {residual.r2:.3e})"
        )


def nehari_floors_hold(
    u: StatePair, params: ProblemParams, nu: float, mu1: float, grid: Grid
) -> bool:
    """Component floors nu*(1 - max(lam,0)/(nu*mu1)) int|grad u_i|^2 <= int|u_i|^p.

    Valid for constraint-set members with non-attractive coupling
    (beta <= 0); negative lambdas enter through their positive part since
    the spectral bound only helps against positive ones.
    """
    ints = _component_integrals(u, params, grid)
    for (gr, _q, pp), lam in zip(ints, (params.lambda1, params.lambda2)):
        lhs = nu * (1.0 - max(lam, 0.0) / (nu * mu1)) * gr
        if lhs > pp + 1e-10 * (1.0 + abs(pp)):
            return False
    return True


# ---------------------------------------------------------------------------
# Newton-Krylov polish on the exact gradient


def _newton_krylov_polish(
    x0: np.ndarray,
    grad_fn,
    energy_fn,
    grid: Grid,
    tol: float,
    max_iter: int,
    inner_iter: int,
    precond=None,
):
    """Damped Newton on grad_fn(x) = 0 with FD directional curvature.

    The Jacobian of the gradient is applied matrix-free through central
    differences and inverted approximately by MINRES (the operator is
    symmetric but may be indefinite at the saddle-type critical points
    sought here).  Steps are halved until the residual norm decreases;
    accepted steps may not raise the energy beyond rounding level.
    Returns (x, residual_norm, converged, iterations).
    """
    scale = math.sqrt(grid.cell_area)
    x = x0.copy()
    g = grad_fn(x)
    res = float(np.linalg.norm(g)) * scale
    energy_val = energy_fn(x)
    its = 0
    for its in range(1, max_iter + 1):
        if res <= tol:
            return x, res, True, its - 1
        x_norm = float(np.linalg.norm(x, ord=np.inf))

        def hess_vec(v):
            vn = float(np.linalg.norm(v, ord=np.inf))
            if vn == 0.0:
                return np.zeros_like(v)
            eps = 1e-6 * (1.0 + x_norm) / vn
            return (grad_fn(x + eps * v) - grad_fn(x - eps * v)) / (2.0 * eps)

        op = LinearOperator((x.size, x.size), matvec=hess_vec, dtype=float)
        M = None
        if precond is not None:
            M = LinearOperator((x.size, x.size), matvec=precond, dtype=float)
        step, _info = minres(op, -g, rtol=1e-6, maxiter=inner_iter, M=M)
        if not np.all(np.isfinite(step)) or float(np.linalg.norm(step)) == 0.0:
            step = -g

        accepted = False
        s = 1.0
        for _ in range(40):
            x_try = x + s * step
            g_try = grad_fn(x_try)
            res_try = float(np.linalg.norm(g_try)) * scale
            if res_try < res:
                e_try = energy_fn(x_try)
                if e_try <= energy_val + 1e-11 * (1.0 + abs(energy_val)):
                    x, g, res, energy_val = x_try, g_try, res_try, e_try
                    accepted = True
                    break
            s *= 0.5
        if not accepted:
            return x, res, res <= tol, its
    return x, res, res <= tol, its


def refine_solution(
    u: StatePair,
    params: ProblemParams,
    fam1: CoefficientFamily,
    fam2: CoefficientFamily,
    grid: Grid,
    opts: SolverOptions = SolverOptions(),
) -> tuple[StatePair, float, bool]:
    """Polish a candidate to a sharper gradient zero.

    Returns (state, residual_norm, converged); the residual never
    increases and the energy of accepted steps never rises beyond
    rounding level.
    """
    n = grid.spec.n_nodes

    def unpack(x):
        return StatePair(
            ScalarField(x[:n].reshape(grid.shape), grid.spec),
            ScalarField(x[n:].reshape(grid.shape), grid.spec),
        )

    def grad_fn(x):
        g = euler_gradient(unpack(x), params, fam1, fam2, grid)
        return np.concatenate([g.u1.values.ravel(), g.u2.values.ravel()])

    def energy_fn(x):
        return total_energy(unpack(x), params, fam1, fam2, grid)

    solve = _poisson(grid)

    def precond(x):
        return np.concatenate(
            [
                solve(x[:n].reshape(grid.shape)).ravel(),
                solve(x[n:].reshape(grid.shape)).ravel(),
            ]
        )

    x0 = np.concatenate([u.u1.values.ravel(), u.u2.values.ravel()])
    x, res, converged, _its = _newton_krylov_polish(
        x0, grad_fn, energy_fn, grid, opts.tol, opts.polish_max_iter,
        opts.polish_inner_iter, precond=precond,
    )
    return unpack(x), res, converged


def _refine_scalar(z, lam, params, fam, grid, opts, nonlin_coeff=1.0):
    def grad_fn(x):
        fld = ScalarField(x.reshape(grid.shape), grid.spec)
        return scalar_euler_gradient_c(
            fld, lam, params.p, fam, grid, nonlin_coeff
        ).values.ravel()

    def energy_fn(x):
        fld = ScalarField(x.reshape(grid.shape), grid.spec)
        return scalar_energy_c(fld, lam, params.p, fam, grid, nonlin_coeff)

    solve = _poisson(grid)

    def precond(x):
        return solve(x.reshape(grid.shape)).ravel()

    x, res, converged, its = _newton_krylov_polish(
        z.values.ravel().copy(), grad_fn, energy_fn, grid, opts.tol,
        opts.polish_max_iter, opts.polish_inner_iter, precond=precond,
    )
    return ScalarField(x.reshape(grid.shape), grid.spec), res, converged, its


# ---------------------------------------------------------------------------
# scalar ground state


def _scalar_descent(z0, lam, params, fam, grid, opts, nonlin_coeff=1.0,
                    stop_res=None):
    """Sphere-constrained descent for the scalar problem from one start."""
    if stop_res is None:
        stop_res = opts.tol
    p = params.p
    v = _h1_normalize(np.asarray(z0, dtype=float), grid)

    def reduced(v_arr, tau_guess=None):
        fld = ScalarField(v_arr, grid.spec)
        tau = scalar_fiber_root(
            fld, lam, params, fam, grid, nonlin_coeff, tau_init=tau_guess
        )
        w = ScalarField(tau * v_arr, grid.spec)
        return tau, w, scalar_energy_c(w, lam, p, fam, grid, nonlin_coeff)

    tau, w, energy_val = reduced(v)
    alpha = 1.0
    history = [energy_val]
    res = math.inf
    for it in range(1, opts.max_iter + 1):
        g = scalar_euler_gradient_c(w, lam, p, fam, grid, nonlin_coeff)
        res = _vol_norm(g.values, grid)
        if res <= stop_res:
            return w, energy_val, res, it, True
        r = _riesz(g.values, grid)
        coef = _quad_grad_inner(r, v, grid) / _quad_grad_inner(v, v, grid)
        d = -(r - coef * v)
        slope = tau * grid.cell_area * float(np.sum(g.values * d))
        if slope >= 0.0:
            d = -r
            slope = tau * grid.cell_area * float(np.sum(g.values * d))

        accepted = False
        a = alpha
        for _ in range(50):
            try:
                v_try = _h1_normalize(v + a * d, grid)
                tau_try, w_try, e_try = reduced(v_try, tau_guess=tau)
            except (DegenerateInput, NoConvergence):
                a *= 0.5
                continue
            if e_try <= energy_val + opts.armijo * a * slope:
                v, tau, w, energy_val = v_try, tau_try, w_try, e_try
                alpha = min(a * 2.0, 1e3)
                accepted = True
                break
            a *= 0.5
        if not accepted:
            break
        history.append(energy_val)
        if len(history) > opts.stagnation_window and (
            history[-opts.stagnation_window - 1] - energy_val
            <= opts.stagnation_tol * (1.0 + abs(energy_val))
        ):
            break
    return w, energy_val, res, it, False


def scalar_ground_state(
    i: int,
    params: ProblemParams,
    fam: CoefficientFamily,
    grid: Grid,
    opts: SolverOptions = SolverOptions(),
    nonlin_coeff: float = 1.0,
) -> tuple[ScalarField, float, ScalarReport]:
    """Least energy state of the one-component problem, and its level.

    Multistart sphere descent plus Newton polish.  The output is
    sign-normalized to the nonnegative representative (the energy is even
    in the field).  `nonlin_coeff` weights the |z|^(p-2) z term; the
    default 1 is the plain scalar problem.

    Raises InadmissibleLambda when lambda_i reaches nu * mu1.
    """
    lam = params.lam(i)
    mu1 = conservative_mu1(grid)
    verdict = _scalar_admissibility(lam, params, fam, mu1)
    warnings = []
    if verdict == INADMISSIBLE:
        raise InadmissibleLambda(
            f"lambda_{i} = {lam:.6g} is not below nu*mu1 = {fam.nu * mu1:.6g}"
        )
    if verdict == ADMISSIBLE_WEAK:
        warnings.append(
            f"lambda_{i} admissible only in the weak sense "
            f"(threshold {strong_threshold(params.p, params.gamma, fam.nu, mu1):.6g})"
        )

    starts = [_bump(grid, grid.spec.lx / 2.0, grid.spec.ly / 2.0, grid.spec.lx / 6.0)]
    for k in range(opts.n_restarts):
        starts.append(_random_positive(grid, _rng(opts.seed, 11, i, k)))

    best = None
    total_iters = 0
    for z0 in starts:
        w, energy_val, res, its, _conv = _scalar_descent(
            z0, lam, params, fam, grid, opts, nonlin_coeff,
            stop_res=1e2 * opts.tol,
        )
        total_iters += its
        if res > opts.tol:
            w, res, _converged, pits = _refine_scalar(
                w, lam, params, fam, grid, opts, nonlin_coeff
            )
            energy_val = scalar_energy_c(w, lam, params.p, fam, grid, nonlin_coeff)
            total_iters += pits
        if res <= opts.tol and (best is None or energy_val < best[1]):
            best = (w, energy_val, res)
    if best is None:
        raise NoConvergence(
            f"scalar solve (component {i}) did not reach tol from any start",
            iterations=total_iters,
        )
    w, energy_val, res = best
    w = ScalarField(_sign_fix(w.values), grid.spec)
    if not _is_nonnegative(w.values):
        warnings.append("scalar output is sign-changing; not a ground state?")
    report = ScalarReport(
        energy=energy_val,
        euler_residual_norm=res,
        iterations=total_iters,
        converged=True,
        admissibility=verdict,
        warnings=tuple(warnings),
    )
    return w, energy_val, report


def _scalar_admissibility(lam, params, fam, mu1):
    probe = ProblemParams(lam, lam, params.beta, params.p, params.gamma)
    return admissible(probe, fam.nu, params.gamma, mu1)


def scalar_levels(
    params: ProblemParams,
    fam1: CoefficientFamily,
    fam2: CoefficientFamily,
    grid: Grid,
    opts: SolverOptions = SolverOptions(),
):
    """Ground fields and levels (z1, z2, L1, L2) of the two scalar problems."""
    z1, L1, _ = scalar_ground_state(1, params, fam1, grid, opts)
    z2, L2, _ = scalar_ground_state(2, params, fam2, grid, opts)
    return z1, z2, L1, L2


# ---------------------------------------------------------------------------
# competitive regime (repulsive coupling)


def _require_admissible(params, fam1, fam2, grid) -> float:
    mu1 = conservative_mu1(grid)
    nu = min(fam1.nu, fam2.nu)
    verdict = admissible(params, nu, params.gamma, mu1)
    if verdict != ADMISSIBLE:
        raise InadmissibleLambda(
            f"(lambda1, lambda2) = ({params.lambda1:.6g}, {params.lambda2:.6g}) "
            f"not below the threshold "
            f"{strong_threshold(params.p, params.gamma, nu, mu1):.6g}"
        )
    return mu1


def _pair_res_norm(g: StatePair, grid: Grid) -> float:
    return math.sqrt(
        grid.cell_area
        * (float(np.sum(g.u1.values**2)) + float(np.sum(g.u2.values**2)))
    )


def _reduced_descent(
    v: StatePair,
    params: ProblemParams,
    fam1: CoefficientFamily,
    fam2: CoefficientFamily,
    grid: Grid,
    opts: SolverOptions,
    mu1: float,
    nu: float,
    stop_res: float,
):
    """Descend the reduced energy J(m(v)) over the sphere product.

    v must be normalized and projectable.  Returns (projection, res_norm,
    iterations); raises NotProjectable via the caller's initial check.
    """
    proj_opts = opts.projection()
    proj = project_to_nehari(v, params, fam1, fam2, grid, proj_opts)
    if not proj.projectable:
        raise NotProjectable(proj.reason)
    energy_val = total_energy(proj.projected, params, fam1, fam2, grid)
    if opts.check_coercivity:
        check_coercivity_bound(
            energy_val, proj.projected, params, nu, mu1, grid, proj.residual
        )

    alpha = 1.0
    history = [energy_val]
    res = math.inf
    it = 0
    for it in range(1, opts.max_iter + 1):
        u = proj.projected
        g = euler_gradient(u, params, fam1, fam2, grid)
        res = _pair_res_norm(g, grid)
        if res <= stop_res:
            return proj, res, it
        t = (proj.t.t1, proj.t.t2)

        dirs = []
        slope = 0.0
        for gi, vi, ti in ((g.u1, v.u1, t[0]), (g.u2, v.u2, t[1])):
            r = _riesz(gi.values, grid)
            coef = _quad_grad_inner(r, vi.values, grid) / _quad_grad_inner(
                vi.values, vi.values, grid
            )
            d = -(r - coef * vi.values)
            dirs.append(d)
            slope += ti * grid.cell_area * float(np.sum(gi.values * d))
        if slope >= 0.0:
            dirs = [-_riesz(g.u1.values, grid),
                    -_riesz(g.u2.values, grid)]
            slope = sum(
                ti * grid.cell_area * float(np.sum(gi.values * d))
                for gi, d, ti in ((g.u1, dirs[0], t[0]), (g.u2, dirs[1], t[1]))
            )

        accepted = False
        a = alpha
        for _ in range(50):
            try:
                v_try = StatePair(
                    ScalarField(
                        _h1_normalize(v.u1.values + a * dirs[0], grid), grid.spec
                    ),
                    ScalarField(
                        _h1_normalize(v.u2.values + a * dirs[1], grid), grid.spec
                    ),
                )
                proj_try = project_to_nehari(
                    v_try, params, fam1, fam2, grid, proj_opts, t_init=t
                )
            except (DegenerateInput, NoConvergence):
                a *= 0.5
                continue
            if not proj_try.projectable:
                a *= 0.5
                continue
            e_try = total_energy(proj_try.projected, params, fam1, fam2, grid)
            if e_try <= energy_val + opts.armijo * a * slope:
                v, proj, energy_val = v_try, proj_try, e_try
                if opts.check_coercivity:
                    check_coercivity_bound(
                        energy_val, proj.projected, params, nu, mu1, grid,
                        proj.residual,
                    )
                alpha = min(a * 2.0, 1e3)
                accepted = True
                break
            a *= 0.5
        if not accepted:
            return proj, res, it
        history.append(energy_val)
        if len(history) > opts.stagnation_window and (
            history[-opts.stagnation_window - 1] - energy_val
            <= opts.stagnation_tol * (1.0 + abs(energy_val))
        ):
            return proj, res, it
    return proj, res, it


def _note_candidate_spread(energies, warnings) -> None:
    # distinct converged minimizers are reported, not resolved
    if len(energies) > 1:
        lo, hi = min(energies), max(energies)
        if hi - lo > 1e-8 * (1.0 + abs(lo)):
            warnings.append(
                f"{len(energies)} converged candidates span energies "
                f"[{lo:.10g}, {hi:.10g}]; reporting the lowest"
            )


def _finalize_system(
    u: StatePair,
    params: ProblemParams,
    fam1: CoefficientFamily,
    fam2: CoefficientFamily,
    grid: Grid,
    opts: SolverOptions,
    regime: str,
    iterations: int,
    L1: float,
    L2: float,
    warnings: list[str],
) -> tuple[StatePair, SolveReport]:
    u = StatePair(
        ScalarField(_sign_fix(u.u1.values), grid.spec),
        ScalarField(_sign_fix(u.u2.values), grid.spec),
    )
    energy_val = total_energy(u, params, fam1, fam2, grid)
    g = euler_gradient(u, params, fam1, fam2, grid)
    res_norm = _pair_res_norm(g, grid)
    resid = nehari_residual(u, params, fam1, fam2, grid)
    nu = min(fam1.nu, fam2.nu)
    mu1 = conservative_mu1(grid)

    ints = _component_integrals(u, params, grid)
    guard = 1e3 * opts.tol
    nontrivial = all(pp > guard for (_g, _q, pp) in ints)
    if params.beta <= 0.0 and nontrivial:
        if not nehari_floors_hold(u, params, nu, mu1, grid):
            nontrivial = False
            warnings.append("component floors violated; state treated as semi-trivial")
    nonneg = _is_nonnegative(u.u1.values) and _is_nonnegative(u.u2.values)

    report = SolveReport(
        energy=energy_val,
        L1=L1,
        L2=L2,
        e_beta_estimate=energy_val,
        euler_residual_norm=res_norm,
        nehari_residual=resid,
        fully_nontrivial=nontrivial,
        nonnegative=nonneg,
        iterations=iterations,
        regime=regime,
        warnings=tuple(warnings),
    )
    return u, report


def competitive_least_energy(
    params: ProblemParams,
    fam1: CoefficientFamily,
    fam2: CoefficientFamily,
    grid: Grid,
    opts: SolverOptions = SolverOptions(),
    scalar_data=None,
    warm_start: StatePair | None = None,
) -> tuple[StatePair, SolveReport]:
    """Least energy fully nontrivial state for repulsive coupling (beta < 0).

    Minimizes the reduced energy J(m(v)) over projectable pairs on the
    sphere product, from segregated and random starts, then polishes the
    winner in the full space.  `scalar_data` may carry precomputed
    (z1, z2, L1, L2) to skip the scalar solves.
    """
    if params.beta >= 0.0:
        raise InvalidParams(f"competitive solver needs beta < 0, got {params.beta}")
    warnings = []
    if params.beta >= -1.0:
        warnings.append(
            f"beta = {params.beta:g} is in [-1, 0): projectability is only "
            "guaranteed below -1"
        )
    mu1 = _require_admissible(params, fam1, fam2, grid)
    nu = min(fam1.nu, fam2.nu)

    if scalar_data is None:
        z1, z2, L1, L2 = scalar_levels(params, fam1, fam2, grid, opts)
    else:
        z1, z2, L1, L2 = scalar_data

    # mirrored copies keep the explored candidate set swap-symmetric; for
    # symmetric data the mirror run is arithmetically identical, so skip it
    mirror = not _symmetric_problem(params, fam1, fam2)
    left, right = segregated_pair(grid)
    starts: list[StatePair] = []
    if warm_start is not None:
        starts.append(warm_start)
    starts.append(StatePair(ScalarField(left, grid.spec), ScalarField(right, grid.spec)))
    if mirror:
        starts.append(
            StatePair(ScalarField(right, grid.spec), ScalarField(left, grid.spec))
        )
    for k in range(opts.n_restarts):
        rng = _rng(opts.seed, 21, k)
        f = _random_positive(grid, rng) * left
        g_ = _random_positive(grid, rng) * right
        starts.append(StatePair(ScalarField(f, grid.spec), ScalarField(g_, grid.spec)))
        if mirror:
            starts.append(
                StatePair(ScalarField(g_, grid.spec), ScalarField(f, grid.spec))
            )

    best = None
    accepted_energies = []
    total_iters = 0
    n_failed = 0
    for start in starts:
        try:
            v = sphere_normalize(start, grid)
            proj, res, its = _reduced_descent(
                v, params, fam1, fam2, grid, opts, mu1, nu,
                stop_res=1e2 * opts.tol,
            )
        except (NotProjectable, DegenerateInput, NoConvergence) as exc:
            n_failed += 1
            warnings.append(f"start rejected: {exc}")
            continue
        total_iters += its
        u, res, _conv = refine_solution(proj.projected, params, fam1, fam2, grid, opts)
        e = total_energy(u, params, fam1, fam2, grid)
        if res <= opts.tol:
            accepted_energies.append(e)
            if best is None or e < best[1]:
                best = (u, e)
    if best is None:
        raise NoConvergence(
            f"no competitive start converged ({n_failed} rejected)",
            iterations=total_iters,
        )
    _note_candidate_spread(accepted_energies, warnings)
    return _finalize_system(
        best[0], params, fam1, fam2, grid, opts, REGIME_COMPETITIVE,
        total_iters, L1, L2, warnings,
    )


# ---------------------------------------------------------------------------
# cooperative regime (attractive coupling)


def _constrained_descent(
    u0: StatePair,
    params: ProblemParams,
    fam1: CoefficientFamily,
    fam2: CoefficientFamily,
    grid: Grid,
    opts: SolverOptions,
    mu1: float,
    nu: float,
    stop_res: float,
):
    """Descent on the energy with per-iteration rescaling onto the
    constraint set (two-parameter fiber rescale of both components)."""
    proj_opts = opts.projection()
    proj = project_to_nehari(u0, params, fam1, fam2, grid, proj_opts)
    if not proj.projectable:
        raise NotProjectable(proj.reason)
    u = proj.projected
    energy_val = total_energy(u, params, fam1, fam2, grid)
    if opts.check_coercivity:
        check_coercivity_bound(energy_val, u, params, nu, mu1, grid, proj.residual)

    alpha = 1.0
    history = [energy_val]
    res = math.inf
    it = 0
    for it in range(1, opts.max_iter + 1):
        g = euler_gradient(u, params, fam1, fam2, grid)
        res = _pair_res_norm(g, grid)
        if res <= stop_res:
            return u, res, it
        d1 = -_riesz(g.u1.values, grid)
        d2 = -_riesz(g.u2.values, grid)
        slope = grid.cell_area * (
            float(np.sum(g.u1.values * d1)) + float(np.sum(g.u2.values * d2))
        )

        accepted = False
        a = alpha
        for _ in range(50):
            try:
                trial = StatePair(
                    ScalarField(u.u1.values + a * d1, grid.spec),
                    ScalarField(u.u2.values + a * d2, grid.spec),
                )
                proj_try = project_to_nehari(
                    trial, params, fam1, fam2, grid, proj_opts, t_init=(1.0, 1.0)
                )
            except (DegenerateInput, NoConvergence):
                a *= 0.5
                continue
            if not proj_try.projectable:
                a *= 0.5
                continue
            e_try = total_energy(proj_try.projected, params, fam1, fam2, grid)
            if e_try <= energy_val + opts.armijo * a * slope:
                u, energy_val = proj_try.projected, e_try
                if opts.check_coercivity:
                    check_coercivity_bound(
                        energy_val, u, params, nu, mu1, grid, proj_try.residual
                    )
                alpha = min(a * 2.0, 1e3)
                accepted = True
                break
            a *= 0.5
        if not accepted:
            return u, res, it
        history.append(energy_val)
        if len(history) > opts.stagnation_window and (
            history[-opts.stagnation_window - 1] - energy_val
            <= opts.stagnation_tol * (1.0 + abs(energy_val))
        ):
            return u, res, it
    return u, res, it


def diagonal_candidate(
    params: ProblemParams,
    fam: CoefficientFamily,
    grid: Grid,
    opts: SolverOptions = SolverOptions(),
) -> tuple[StatePair, float]:
    """Synchronized state (w, w) from the scalar problem with the coupled
    nonlinearity weight 1 + beta; an exact critical point of the system
    when the problem is symmetric."""
    if params.beta <= -1.0:
        raise InvalidParams("diagonal reduction needs 1 + beta > 0")
    w, _e, _rep = scalar_ground_state(
        1, params, fam, grid, opts, nonlin_coeff=1.0 + params.beta
    )
    pair = StatePair(w, w)
    pp = integrate(np.abs(cell_values(w, grid)) ** params.p, grid)
    return pair, pp


def cooperative_least_energy(
    params: ProblemParams,
    fam1: CoefficientFamily,
    fam2: CoefficientFamily,
    grid: Grid,
    opts: SolverOptions = SolverOptions(),
    scalar_data=None,
    warm_start: StatePair | None = None,
) -> tuple[StatePair, SolveReport]:
    """Least energy fully nontrivial candidate for attractive coupling.

    Builds candidates (synchronized diagonal state when the problem is
    symmetric, near-semitrivial pairs, random positives), refines each by
    rescaled descent plus Newton polish, and returns the lowest-energy
    fully nontrivial critical point.
    """
    if params.beta <= 0.0:
        raise InvalidParams(f"cooperative solver needs beta > 0, got {params.beta}")
    warnings = []
    mu1 = _require_admissible(params, fam1, fam2, grid)
    nu = min(fam1.nu, fam2.nu)

    if scalar_data is None:
        z1, z2, L1, L2 = scalar_levels(params, fam1, fam2, grid, opts)
    else:
        z1, z2, L1, L2 = scalar_data

    symmetric = _symmetric_problem(params, fam1, fam2)
    mirror = not symmetric
    starts: list[StatePair] = []
    if warm_start is not None:
        starts.append(warm_start)
    if symmetric:
        diag, _pp = diagonal_candidate(params, fam1, grid, opts)
        starts.append(diag)
    eps = 1e-2
    starts.append(StatePair(z1, ScalarField(eps * z2.values, grid.spec)))
    if mirror:
        starts.append(StatePair(ScalarField(eps * z1.values, grid.spec), z2))
    for k in range(opts.n_restarts):
        rng = _rng(opts.seed, 31, k)
        f = _random_positive(grid, rng)
        g_ = _random_positive(grid, rng)
        starts.append(StatePair(ScalarField(f, grid.spec), ScalarField(g_, grid.spec)))
        if mirror:
            starts.append(
                StatePair(ScalarField(g_, grid.spec), ScalarField(f, grid.spec))
            )

    guard = 1e3 * opts.tol
    best = None
    accepted_energies = []
    total_iters = 0
    for start in starts:
        try:
            u, res, its = _constrained_descent(
                start, params, fam1, fam2, grid, opts, mu1, nu,
                stop_res=1e2 * opts.tol,
            )
        except (NotProjectable, DegenerateInput, NoConvergence) as exc:
            warnings.append(f"start rejected: {exc}")
            continue
        total_iters += its
        u, res, _conv = refine_solution(u, params, fam1, fam2, grid, opts)
        if res > opts.tol:
            continue
        ints = _component_integrals(u, params, grid)
        if not all(pp > guard for (_g, _q, pp) in ints):
            continue  # collapsed to a semi-trivial state
        e = total_energy(u, params, fam1, fam2, grid)
        accepted_energies.append(e)
        if best is None or e < best[1]:
            best = (u, e)
    if best is None:
        raise NoFullyNontrivialCandidate(
            "every cooperative candidate collapsed or failed to converge"
        )
    _note_candidate_spread(accepted_energies, warnings)
    u, report = _finalize_system(
        best[0], params, fam1, fam2, grid, opts, REGIME_COOPERATIVE,
        total_iters, L1, L2, warnings,
    )
    if report.energy >= min(L1, L2):
        report = replace(
            report,
            warnings=report.warnings
            + (f"energy {report.energy:.6g} not below min(L1, L2) = {min(L1, L2):.6g}",),
        )
    return u, report


# ---------------------------------------------------------------------------
# beta = 0 and sweeps


def decoupled_solution(
    params: ProblemParams,
    fam1: CoefficientFamily,
    fam2: CoefficientFamily,
    grid: Grid,
    opts: SolverOptions = SolverOptions(),
    scalar_data=None,
) -> tuple[StatePair, SolveReport]:
    """beta = 0: the pair of scalar ground states solves the system."""
    if scalar_data is None:
        z1, z2, L1, L2 = scalar_levels(params, fam1, fam2, grid, opts)
    else:
        z1, z2, L1, L2 = scalar_data
    u = StatePair(z1, z2)
    return _finalize_system(
        u, params, fam1, fam2, grid, opts, REGIME_DECOUPLED, 0, L1, L2, [],
    )


@dataclass(frozen=True)
class SweepRow:
    beta: float
    status: str
    report: SolveReport | None = None
    error: str = ""


def beta_sweep(
    beta_list,
    params: ProblemParams,
    fam1: CoefficientFamily,
    fam2: CoefficientFamily,
    grid: Grid,
    opts: SolverOptions = SolverOptions(),
) -> list[SweepRow]:
    """One solve per beta, warm-starting from the previous solution.

    Rows never abort the sweep; failures are recorded as row-level
    status markers.
    """
    rows: list[SweepRow] = []
    scalars = scalar_levels(params, fam1, fam2, grid, opts)
    warm = None
    for beta in beta_list:
        if not math.isfinite(beta):
            rows.append(SweepRow(beta=beta, status="error", error="non-finite beta"))
            continue
        p = replace(params, beta=float(beta))
        try:
            if beta < 0.0:
                u, rep = competitive_least_energy(
                    p, fam1, fam2, grid, opts, scalar_data=scalars, warm_start=warm
                )
            elif beta > 0.0:
                u, rep = cooperative_least_energy(
                    p, fam1, fam2, grid, opts, scalar_data=scalars, warm_start=warm
                )
            else:
                u, rep = decoupled_solution(
                    p, fam1, fam2, grid, opts, scalar_data=scalars
                )
            warm = u
            rows.append(SweepRow(beta=float(beta), status="ok", report=rep))
        except Exception as exc:  # row-level failure, sweep continues
            rows.append(SweepRow(beta=float(beta), status="error", error=str(exc)))
    return rows
