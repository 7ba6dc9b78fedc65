"""Discretizations and the PDE experiments."""

import math

import numpy as np
import pytest

from contractkit import pde, sampling
from contractkit.errors import ContractViolation
from contractkit.flows import integrate
from contractkit.sip import L2, NormSpec, norm


class TestDiscretization:
    def test_neumann_rows_sum_to_zero(self):
        disc = pde.build_discretization(16, boundary="neumann_zero_flux")
        rows = np.asarray(disc.laplacian.sum(axis=1)).ravel()
        assert np.max(np.abs(rows)) <= 1e-12
        assert np.linalg.norm(disc.laplacian @ np.ones(16)) <= 1e-12

    def test_neumann_second_eigenvalue_formula(self):
        for n in (8, 16, 32):
            disc = pde.build_discretization(n, boundary="neumann")
            vals = np.linalg.eigvalsh(disc.laplacian.toarray())
            second = np.sort(vals)[-2]
            assert second == pytest.approx(
                pde.neumann_second_eigenvalue(n, disc.h), rel=1e-8)

    def test_dirichlet_negative_definite_poincare(self):
        disc = pde.build_discretization(16, boundary="dirichlet_zero")
        L = disc.laplacian.toarray()
        vals = np.linalg.eigvalsh(L)
        assert np.max(vals) < 0
        lam_min = pde.dirichlet_poincare_constant(16, disc.h)
        assert -np.max(vals) == pytest.approx(lam_min, rel=1e-10)
        rng = np.random.default_rng(0)
        for _ in range(10):
            phi = rng.standard_normal(16)
            assert phi @ (L @ phi) <= -lam_min * (phi @ phi) + 1e-9

    def test_periodic_symmetric_kernel_constants(self):
        disc = pde.build_discretization(16, boundary="periodic")
        L = disc.laplacian.toarray()
        assert np.linalg.norm(L - L.T) <= 1e-12
        assert np.linalg.norm(L @ np.ones(16)) <= 1e-12

    def test_2d_laplacian_shape_and_kernel(self):
        disc = pde.build_discretization(8, dims=2, boundary="neumann")
        assert disc.laplacian.shape == (64, 64)
        assert np.linalg.norm(disc.laplacian @ np.ones(64)) <= 1e-10

    def test_validation(self):
        with pytest.raises(ContractViolation):
            pde.build_discretization(2)
        with pytest.raises(ContractViolation):
            pde.build_discretization(8, dims=3)
        with pytest.raises(ContractViolation):
            pde.build_discretization(8, boundary="robin")


class TestHeatExperiment:
    def test_all_checks_pass(self):
        rep, series = pde.heat_zero_flux_experiment(n=16, alpha=1.0, t_end=0.5, seed=0)
        assert rep["passed"]
        assert rep["certified"]
        header, cols = series["decay"]
        assert header[0] == "time"

    def test_constant_initial_state_stays_flat(self):
        disc = pde.build_discretization(16, boundary="neumann")
        fld = pde.heat_field(disc, 1.0)
        traj = integrate(fld, np.full(16, 3.0), (0.0, 0.3), dt=0.2 * disc.h**2,
                         record_every=50)
        from contractkit.geometry import Projector

        Q = Projector.mean(16).Q
        assert all(np.linalg.norm(Q @ u) <= 1e-12 for u in traj.states)

    def test_2d_variant(self):
        rep, _ = pde.heat_zero_flux_experiment(n=8, alpha=1.0, t_end=0.3, seed=1,
                                               dims=2)
        assert rep["certified"]
        assert rep["mass_drift"] <= 1e-10


class TestReactionDiffusion:
    def test_allen_cahn_homogenizes(self):
        rep, _ = pde.reaction_diffusion_experiment(n=16, alphas=0.5, t_end=6.0, seed=0)
        assert rep["certified"]
        assert rep["homogenized"]
        lam = rep["lambda_certified"]
        assert abs(rep["fitted_decay"] - lam) <= 0.1 * abs(lam)

    def test_zero_reaction_reduces_to_heat(self):
        zero = pde.PointwiseReaction(fn=lambda U: np.zeros_like(U),
                                     jac=lambda U: np.zeros((1, 1, U.shape[1])),
                                     n_species=1, name="zero")
        rep, _ = pde.reaction_diffusion_experiment(n=16, alphas=1.0, reaction=zero,
                                                   t_end=0.5, seed=0, amplitude=1.0)
        assert rep["certified"]
        lam_heat = pde.neumann_second_eigenvalue(16, 1.0 / 16)
        assert rep["fitted_decay"] == pytest.approx(lam_heat, rel=0.02)

    def test_brusselator_turing_counterexample(self):
        r = pde.brusselator_reaction(a=1.0, b=1.8)
        rep, _ = pde.reaction_diffusion_experiment(
            n=64, alphas=[1e-3, 0.1], reaction=r, t_end=60.0, seed=0,
            amplitude=0.05, base_state=r.steady_state)
        assert not rep["certified"]
        # condition (2) fails for the activator
        failing = [c for c in rep["checks"] if not c.passed]
        assert any("species_0" in c.name for c in failing)
        assert not rep["homogenized"]
        assert rep["final_qnorm_ratio"] > 0.1


class TestPoisson:
    def test_zero_reaction_gives_zero_solution(self):
        rep, _ = pde.nonlinear_poisson_experiment(n=16, fn=lambda u: np.zeros_like(u),
                                                  dfn=lambda u: np.zeros_like(u),
                                                  seed=0, refinement=(8, 16))
        assert rep["passed"]
        assert rep["max_residual"] <= 1e-10

    def test_sine_reaction_unique_fixed_point(self):
        rep, _ = pde.nonlinear_poisson_experiment(n=32, c=5.0, seed=0)
        assert rep["certified"]
        assert rep["max_pairwise_distance"] <= 1e-8
        assert rep["max_residual"] <= 1e-8

    def test_supercritical_not_certified_but_runs(self):
        rep, _ = pde.nonlinear_poisson_experiment(n=16, c=30.0, seed=0,
                                                  refinement=(8, 16))
        assert not rep["certified"]
        assert rep["existence_note"] == "existence not certified"

    def test_refinement_monotone_to_continuum(self):
        rep, _ = pde.nonlinear_poisson_experiment(n=16, c=5.0, seed=0)
        lams = rep["refinement"]["lambda"]
        assert all(b > a for a, b in zip(lams, lams[1:]))
        assert lams[-1] < math.pi**2
        assert lams[-1] == pytest.approx(math.pi**2, rel=5e-3)


class TestSobolevRate:
    def test_heat_rate_monotone_in_k(self):
        disc = pde.build_discretization(32, boundary="periodic")
        fld = pde.heat_field(disc, 1.0)
        sampler = sampling.gaussian_samples(3, 32, seed=0)
        r0 = pde.sobolev_rate(fld, 0, 2.0, sampler=sampler).value
        r1 = pde.sobolev_rate(fld, 1, 2.0, sampler=sampler).value
        r2 = pde.sobolev_rate(fld, 2, 2.0, sampler=sampler).value
        # all three are 0 (the constant mode); higher-k Gram matrices are
        # worse conditioned, so allow eigensolver noise
        assert r1 <= r0 + 1e-6
        assert r2 <= r0 + 1e-6

    def test_transport_isometric_every_order(self):
        from contractkit.flows import VectorField
        from contractkit.grids import derivative_matrix_1d

        disc = pde.build_discretization(32, boundary="periodic")
        D = derivative_matrix_1d(32, disc.h, "periodic")
        fld = VectorField(f=lambda t, u: -(D @ u), jac=lambda t, u: (-D).toarray(),
                          dim=32, grid=disc.grid)
        sampler = sampling.gaussian_samples(3, 32, seed=1)
        for k in (0, 1, 2):
            r = pde.sobolev_rate(fld, k, 2.0, sampler=sampler).value
            assert abs(r) <= 1e-8

    def test_viscous_burgers_h1_finite(self):
        disc = pde.build_discretization(64, boundary="periodic")
        fld = pde.burgers_field(disc, 0.05)
        x = np.arange(64) * disc.h
        sampler = sampling.states([np.sin(2 * np.pi * x), 0.5 * np.cos(2 * np.pi * x)])
        est = pde.sobolev_rate(fld, 1, 2.0, sampler=sampler)
        assert np.isfinite(est.value)
        assert est.method == "sampled"

    def test_k_cap(self):
        disc = pde.build_discretization(16, boundary="periodic")
        fld = pde.heat_field(disc, 1.0)
        with pytest.raises(ContractViolation):
            pde.sobolev_rate(fld, 3, 2.0, sampler=[])


class TestRegularizedFamily:
    def test_burgers_eps_residual_decreasing(self):
        fam = pde.burgers_family(n=64)
        rng = np.random.default_rng(2)
        u = np.sin(2 * np.pi * np.arange(64) / 64) + 0.1 * rng.standard_normal(64)
        f0 = fam.field(0.0)
        # same centered scheme at eps = 0 for the pointwise-limit probe
        disc = pde.build_discretization(64, boundary="periodic")
        f0c = pde.burgers_field(disc, 0.0, scheme="centered")
        res = [np.linalg.norm(fam.field(e).eval(0.0, u) - f0c.eval(0.0, u))
               for e in fam.eps_schedule]
        assert all(b < a for a, b in zip(res, res[1:]))

    def test_constant_family_differences_zero(self):
        disc = pde.build_discretization(32, boundary="periodic")
        fld = pde.heat_field(disc, 0.05)
        fam = pde.RegularizedFamily(f_eps=lambda e: fld,
                                    eps_schedule=(0.1, 0.05, 0.025, 0.0125),
                                    grid=disc.grid)
        u0 = np.sin(2 * np.pi * np.arange(32) / 32)
        rep, _ = pde.vanishing_osl_experiment(fam, u0, t_end=0.1, n_out=20, seed=0)
        assert all(d <= 1e-14 for d in rep["successive_differences"])

    def test_advection_limit_is_transported_profile(self):
        n = 128
        fam = pde.advection_family(n=n, speed=1.0,
                                   eps_schedule=(0.02, 0.01, 0.005, 0.0025))
        x = np.arange(n) / n
        u0 = np.exp(-50.0 * (x - 0.3) ** 2)
        t_end = 0.25
        errs = []
        for eps in fam.eps_schedule:
            disc_h = 1.0 / n
            dt = min(0.2 * disc_h / 2.0, disc_h**2 / (2 * eps))
            traj = integrate(fam.field(eps), u0, (0.0, t_end), dt=dt,
                             record_every=10**9)
            shift = int(round(1.0 * t_end * n))  # exact transport on the grid
            exact = np.roll(u0, shift)
            errs.append(np.linalg.norm(traj.final_state - exact) / np.linalg.norm(exact))
        assert all(b < a for a, b in zip(errs, errs[1:]))
        # error is O(eps): halving eps roughly halves the error
        assert errs[-1] <= 0.7 * errs[-2]


class TestVanishingOSL:
    def test_burgers_small_scale(self):
        fam = pde.burgers_family(n=96)
        x = np.arange(96) / 96
        rep, series = pde.vanishing_osl_experiment(fam, np.sin(2 * np.pi * x),
                                                   t_end=0.4, n_out=80, seed=0)
        assert rep["cauchy_trend"]
        assert not rep["hypotheses_failed"]
        assert rep["rate_trend_increasing"]
        assert rep["grid"]["n"] == 96

    def test_weak_residual_improves_under_joint_refinement(self):
        def run(n, schedule):
            fam = pde.burgers_family(n=n, eps_schedule=schedule)
            x = np.arange(n) / n
            rep, _ = pde.vanishing_osl_experiment(fam, np.sin(2 * np.pi * x),
                                                  t_end=0.4, n_out=80, seed=0)
            return rep["max_weak_residual"]

        coarse = run(96, (0.08, 0.04, 0.02, 0.01))
        fine = run(192, (0.04, 0.02, 0.01, 0.005))
        assert fine < coarse

    def test_validation(self):
        fam = pde.burgers_family(n=64, eps_schedule=(0.1, 0.05))
        with pytest.raises(ContractViolation):
            pde.vanishing_osl_experiment(fam, np.zeros(64))
        disc = pde.build_discretization(16, boundary="neumann")
        fam2 = pde.RegularizedFamily(f_eps=lambda e: pde.heat_field(disc, e),
                                     eps_schedule=(0.1, 0.05, 0.025, 0.0125),
                                     grid=disc.grid)
        with pytest.raises(ContractViolation):
            pde.vanishing_osl_experiment(fam2, np.zeros(16))
