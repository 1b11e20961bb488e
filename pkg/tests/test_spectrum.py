import math

import numpy as np
import pytest

import nehari2d.grid as G
from nehari2d import GridSpec, ProblemParams, build_grid, principal_eigenpair
from nehari2d.spectrum import (
    ADMISSIBLE,
    ADMISSIBLE_WEAK,
    INADMISSIBLE,
    admissible,
    apply_neg_laplacian,
    cg_solve,
    quadrature_eigenvalue_exact,
    stencil_eigenvalue_exact,
)


class TestConjugateGradient:
    def test_solves_poisson(self, grid31):
        rng = np.random.default_rng(0)
        b = rng.standard_normal(grid31.shape)
        x = cg_solve(lambda v: apply_neg_laplacian(v, grid31), b, rtol=1e-12)
        res = np.linalg.norm(apply_neg_laplacian(x, grid31) - b)
        assert res <= 1e-11 * np.linalg.norm(b)


class TestPrincipalEigenpair:
    @pytest.mark.parametrize("n", [15, 31])
    def test_matches_closed_form(self, n):
        grid = build_grid(GridSpec(n, n, 1.0, 1.0))
        pair = principal_eigenpair(grid)
        exact = stencil_eigenvalue_exact(grid)
        assert abs(pair.mu - exact) / exact <= 1e-10

    def test_rectangle_refinement(self):
        # lx = 2, ly = 1: continuum value 5 pi^2 / 4
        target = 5.0 * math.pi**2 / 4.0
        errs = []
        for n in (15, 31, 63):
            grid = build_grid(GridSpec(n, n, 2.0, 1.0))
            pair = principal_eigenpair(grid)
            errs.append(abs(pair.mu - target))
        assert errs[2] < errs[1] < errs[0]
        assert errs[2] / target < 2e-3

    def test_positive_eigenvector(self, grid31):
        pair = principal_eigenpair(grid31)
        assert np.min(pair.phi.values) > 0.0

    def test_l2_normalized(self, grid31):
        pair = principal_eigenpair(grid31)
        nrm = math.sqrt(np.sum(pair.phi.values**2) * grid31.cell_area)
        assert nrm == pytest.approx(1.0, abs=1e-12)

    def test_residual_small(self, grid31):
        pair = principal_eigenpair(grid31)
        assert pair.residual <= 1e-10 * (1.0 + pair.mu)

    def test_quadrature_rayleigh_matches_tangent_formula(self):
        for n in (15, 31, 63):
            grid = build_grid(GridSpec(n, n, 1.0, 1.0))
            pair = principal_eigenpair(grid)
            assert abs(pair.mu_quad - quadrature_eigenvalue_exact(grid)) <= 1e-8

    def test_two_notions_bracket_continuum(self):
        # stencil below, quadrature above, both converging at O(h^2)
        target = 2.0 * math.pi**2
        gaps = []
        for n in (15, 31, 63):
            grid = build_grid(GridSpec(n, n, 1.0, 1.0))
            pair = principal_eigenpair(grid)
            assert pair.mu < target < pair.mu_quad
            gaps.append(pair.mu_quad - pair.mu)
        assert math.log2(gaps[0] / gaps[1]) >= 1.9
        assert math.log2(gaps[1] / gaps[2]) >= 1.9

    def test_poincare_with_conservative_eigenvalue(self, grid31):
        pair = principal_eigenpair(grid31)
        mu = pair.mu_conservative
        rng = np.random.default_rng(3)
        for _ in range(100):
            f = G.ScalarField(rng.standard_normal(grid31.shape), grid31.spec)
            num = G.integrate(G.grad_sq(f, grid31), grid31)
            den = G.l2_inner(f, f, grid31)
            assert num >= mu * den * (1.0 - 1e-12)


class TestAdmissible:
    def test_zero_lambdas_always_admissible(self):
        params = ProblemParams(0.0, 0.0, 1.0, 4.0, 1.0)
        assert admissible(params, 1.0, 1.0, 19.7) == ADMISSIBLE

    def test_threshold_shrinks_with_gamma(self):
        # gamma close to p - 2 pushes the strong threshold toward zero
        mu1 = 2.0 * math.pi**2
        params = ProblemParams(mu1 / 2.0, mu1 / 2.0, 0.0, 4.0, 1.999)
        assert admissible(params, 1.0, 1.999, mu1) != ADMISSIBLE

    def test_example_numbers(self):
        # p = 4, gamma = 1, nu = 1, mu1 = 2 pi^2: threshold is pi^2 = 9.87
        mu1 = 2.0 * math.pi**2
        params = ProblemParams(9.0, 9.0, 0.0, 4.0, 1.0)
        assert admissible(params, 1.0, 1.0, mu1) == ADMISSIBLE

    def test_weak_band(self):
        mu1 = 10.0
        params = ProblemParams(8.0, 0.0, 0.0, 4.0, 1.0)
        # strong threshold = 5, weak = 10
        assert admissible(params, 1.0, 1.0, mu1) == ADMISSIBLE_WEAK

    def test_inadmissible(self):
        params = ProblemParams(11.0, 0.0, 0.0, 4.0, 1.0)
        assert admissible(params, 1.0, 1.0, 10.0) == INADMISSIBLE

    def test_requires_positive_mu(self):
        params = ProblemParams(0.0, 0.0, 0.0, 4.0, 1.0)
        with pytest.raises(ValueError):
            admissible(params, 1.0, 1.0, 0.0)
