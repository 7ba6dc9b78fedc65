"""Integrators, variational dynamics, growth bounds, and Lyapunov
exponent estimation."""

import numpy as np
import pytest
import scipy.linalg as sla

from contractkit import weights
from contractkit.errors import ContractViolation, DivergenceError, StiffnessError
from contractkit.flows import (
    VectorField,
    fd_jacobian,
    fit_decay_rate,
    integrate,
    integrate_variational,
    linear_field,
    mle_estimate,
    verify_growth_bound,
)
from contractkit.sip import L2, NormSpec

SHEAR = np.array([[-1.0, 10.0], [0.0, -1.0]])


class TestIntegrate:
    def test_scalar_exponential(self):
        traj = integrate(lambda t, u: -u, [1.0], (0.0, 1.0), dt=1e-3)
        assert traj.final_state[0] == pytest.approx(np.exp(-1.0), abs=1e-6)

    def test_matrix_exponential_oracle(self):
        rng = np.random.default_rng(0)
        A = rng.standard_normal((4, 4)) - 1.0 * np.eye(4)
        u0 = rng.standard_normal(4)
        traj = integrate(linear_field(A), u0, (0.0, 1.0), dt=1e-3)
        expect = sla.expm(A) @ u0
        assert np.linalg.norm(traj.final_state - expect) <= 1e-6 * np.linalg.norm(expect)

    def test_fourth_order_convergence(self):
        errs = []
        for dt in (1e-2, 5e-3):
            traj = integrate(lambda t, u: -u, [1.0], (0.0, 1.0), dt=dt)
            errs.append(abs(traj.final_state[0] - np.exp(-1.0)))
        assert errs[0] / errs[1] >= 8.0

    def test_adaptive_matches_fixed(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((3, 3)) - 2 * np.eye(3)
        u0 = rng.standard_normal(3)
        fixed = integrate(linear_field(A), u0, (0.0, 2.0), dt=1e-4)
        adaptive = integrate(linear_field(A), u0, (0.0, 2.0), rtol=1e-10)
        assert np.linalg.norm(fixed.final_state - adaptive.final_state) <= 1e-6
        assert adaptive.stats["accepted"] > 0

    def test_divergence_error_keeps_last_state(self):
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(DivergenceError) as err:
                integrate(lambda t, u: u**2, [2.0], (0.0, 5.0), dt=1e-2)
        assert err.value.last_state is not None
        assert np.all(np.isfinite(err.value.last_state))

    def test_step_budget_stiffness_error(self):
        with pytest.raises(StiffnessError):
            integrate(lambda t, u: -1e6 * u, [1.0], (0.0, 10.0), rtol=1e-12,
                      max_steps=200)

    def test_times_strictly_increasing_and_span(self):
        traj = integrate(lambda t, u: -u, [1.0], (0.0, 0.7), dt=1e-2, record_every=3)
        assert np.all(np.diff(traj.times) > 0)
        assert traj.times[0] == 0.0
        assert traj.times[-1] == pytest.approx(0.7)

    def test_argument_validation(self):
        with pytest.raises(ContractViolation):
            integrate(lambda t, u: -u, [1.0], (0.0, 1.0))
        with pytest.raises(ContractViolation):
            integrate(lambda t, u: -u, [1.0], (0.0, 1.0), dt=1e-3, rtol=1e-6)
        with pytest.raises(ContractViolation):
            integrate(lambda t, u: -u, [1.0], (1.0, 0.5), dt=1e-3)

    def test_diagnostics_recorded(self):
        fld = linear_field(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        fld.diagnostics["energy"] = lambda u: float(u @ u)
        traj = integrate(fld, [1.0, 0.0], (0.0, 3.0), dt=1e-3, record_every=100)
        e = traj.stats["diagnostics"]["energy"]
        assert np.max(np.abs(e - e[0])) <= 1e-10


class TestVariational:
    def test_linear_perturbation_independent_of_base_point(self):
        A = SHEAR
        du0 = np.array([0.3, -0.2])
        outs = []
        for u0 in (np.zeros(2), np.array([5.0, -3.0])):
            traj = integrate_variational(linear_field(A), u0, du0, (0.0, 2.0), 1e-3)
            outs.append(traj.perturbations[-1])
        np.testing.assert_allclose(outs[0], outs[1], rtol=1e-9)

    def test_cubic_contraction_nonincreasing(self):
        f = VectorField(f=lambda t, u: -u**3, jac=lambda t, u: np.diag(-3.0 * u**2),
                        dim=1)
        traj = integrate_variational(f, np.array([1.0]), np.array([1.0]), (0.0, 4.0),
                                     1e-3, record_every=50)
        norms = np.linalg.norm(traj.perturbations, axis=1)
        assert np.all(np.diff(norms) <= 1e-12)

    def test_fd_jacobian_matches_exact(self):
        rng = np.random.default_rng(2)
        f = lambda t, u: np.array([np.sin(u[0]) * u[1], u[0] ** 2 - np.cos(u[1])])
        exact = lambda t, u: np.array([[np.cos(u[0]) * u[1], np.sin(u[0])],
                                       [2.0 * u[0], np.sin(u[1])]])
        for _ in range(10):
            u = rng.standard_normal(2)
            J = fd_jacobian(f, 0.0, u)
            assert np.linalg.norm(J - exact(0.0, u)) <= 1e-5 * (1 + np.linalg.norm(exact(0.0, u)))


class TestGrowthBound:
    def test_diagonal_identity_weight(self):
        rep = verify_growth_bound(np.diag([-1.0, -2.0]), weights.identity(), L2,
                                  np.array([1.0, 1.0]), np.array([0.5, -0.5]),
                                  (0.0, 4.0), 1e-3, record_every=20)
        assert rep["max_weighted_ratio"] <= 1.0 + 1e-6
        assert not rep["advisory"]

    def test_shear_weighted_vs_unweighted(self):
        th = weights.diagonal([0.01, 1.0])
        u0 = np.array([0.0, 0.0])
        du0 = np.array([0.0, 1.0])
        rep = verify_growth_bound(SHEAR, th, L2, u0, du0, (0.0, 10.0), 1e-3,
                                  record_every=20)
        assert rep["lambda_sup"] == pytest.approx(-0.95)
        assert rep["kappa"] == pytest.approx(100.0)
        assert rep["max_weighted_ratio"] <= 1.0 + 1e-6
        # unweighted distance overshoots its initial value transiently
        assert np.max(rep["pair_distances"]) > 1.5 * rep["pair_distances"][0]
        # but stays below the kappa e^{lambda t} envelope
        assert rep["max_pair_ratio"] <= 1.0 + 1e-6
        # norm contraction kicks in before the transient bound
        assert rep["transient_bound"] == pytest.approx(2 * np.log(100.0) / 0.95)
        assert rep["contracted_after_tb"]

    def test_heat_pairwise_contraction(self):
        from contractkit.pde import build_discretization, heat_field
        from contractkit.geometry import Projector

        disc = build_discretization(16, boundary="neumann")
        fld = heat_field(disc, 1.0)
        proj = Projector.mean(16)
        qw = weights.projection_complement(proj.P)
        rng = np.random.default_rng(3)
        u0 = rng.standard_normal(16)
        du0 = proj.Q @ rng.standard_normal(16)
        rep = verify_growth_bound(fld, qw, L2, u0, du0, (0.0, 0.2),
                                  0.2 * disc.h**2, rate_stride=10,
                                  grid=disc.grid, record_every=10)
        assert rep["max_weighted_ratio"] <= 1.0 + 1e-6


class TestMLE:
    def test_diagonal(self):
        est = mle_estimate(np.diag([-1.0, -2.0]), np.zeros(2), (0.0, 30.0), 0.5, 1e-2)
        assert est.value == pytest.approx(-1.0, abs=0.05)
        assert est.converged

    def test_shear_slack_vs_measure(self):
        from contractkit.measures import mu

        # defective double eigenvalue: ||du|| ~ t e^{-t}, so the estimate
        # approaches -1 like log(t)/t and needs a long horizon
        est = mle_estimate(SHEAR, np.zeros(2), (0.0, 160.0), 0.5, 1e-2)
        assert est.value == pytest.approx(-1.0, abs=0.05)
        assert mu(SHEAR, L2).value == pytest.approx(4.0)
        assert est.value <= mu(SHEAR, L2).value + 0.05

    def test_p_norm_variants(self):
        for p in (1.0, 2.0, np.inf):
            est = mle_estimate(np.diag([-0.5, -3.0]), np.zeros(2), (0.0, 30.0),
                               0.5, 1e-2, p=p)
            assert est.value == pytest.approx(-0.5, abs=0.05)


class TestFitDecay:
    def test_pure_exponential(self):
        t = np.linspace(0.0, 10.0, 400)
        v = 3.0 * np.exp(-3.0 * t)
        slope, info = fit_decay_rate(t, v)
        assert slope == pytest.approx(-3.0, rel=1e-6)
        assert info["points"] > 10


class TestTrajectoryExport:
    def test_csv_table_with_perturbation_norms(self, tmp_path):
        from contractkit.reporting import write_csv

        traj = integrate_variational(linear_field(np.diag([-1.0, -2.0])),
                                     np.array([1.0, 1.0]), np.array([0.1, 0.2]),
                                     (0.0, 1.0), 1e-2, record_every=10)
        header, cols = traj.table()
        assert header == ["time", "u0", "u1", "perturbation_norm"]
        path = tmp_path / "traj.csv"
        write_csv(str(path), header, cols)
        lines = path.read_text().splitlines()
        assert lines[0] == "time,u0,u1,perturbation_norm"
        assert len(lines) == len(traj.times) + 1
