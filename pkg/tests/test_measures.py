"""Matrix measures (closed forms vs the definition-level oracle) and
weighted contraction rates."""

import numpy as np
import pytest

from contractkit.errors import (
    ContractViolation,
    DegenerateWeightError,
    DimensionError,
)
from contractkit.measures import (
    LinearOp,
    as_linear_op,
    mu,
    mu_fd_oracle,
    nonlinear_rate,
    weighted_rate,
)
from contractkit.sip import L1, L2, LINF, NormSpec
from contractkit import sampling, weights
from contractkit.flows import linear_field

SHEAR = np.array([[-1.0, 10.0], [0.0, -1.0]])


class TestLinearOp:
    def test_apply_is_linear_on_probes(self):
        rng = np.random.default_rng(0)
        M = rng.standard_normal((5, 5))
        op = LinearOp(M)
        for _ in range(10):
            a, b = rng.standard_normal(2)
            u, v = rng.standard_normal(5), rng.standard_normal(5)
            lhs = op(a * u + b * v)
            rhs = a * op(u) + b * op(v)
            assert np.linalg.norm(lhs - rhs) <= 1e-10 * (1 + np.linalg.norm(rhs))

    def test_matrix_free_round_trip(self):
        M = np.arange(9.0).reshape(3, 3)
        op = as_linear_op(lambda v: M @ v, shape=(3, 3))
        np.testing.assert_allclose(op.to_dense(), M)

    def test_matrix_free_requires_shape(self):
        with pytest.raises(ContractViolation):
            LinearOp(matvec=lambda v: v)


class TestMu:
    def test_diagonal_p2(self):
        assert mu(np.diag([-1.0, -2.0]), L2).value == pytest.approx(-1.0)

    def test_column_formula_p1(self):
        A = np.array([[-2.0, 1.0], [0.0, -3.0]])
        est = mu(A, L1)
        assert est.value == pytest.approx(-2.0)
        assert est.method == "closed_form"

    def test_row_formula_pinf(self):
        A = np.array([[-2.0, 1.0], [0.0, -3.0]])
        assert mu(A, LINF).value == pytest.approx(-1.0)

    def test_zero_matrix(self):
        for spec in (L1, L2, LINF):
            assert mu(np.zeros((3, 3)), spec).value == pytest.approx(0.0, abs=1e-12)

    def test_non_square_raises(self):
        with pytest.raises(DimensionError):
            mu(np.ones((2, 3)))

    def test_subadditivity(self):
        rng = np.random.default_rng(1)
        for spec in (L1, L2, LINF):
            for _ in range(20):
                A = rng.standard_normal((4, 4))
                B = rng.standard_normal((4, 4))
                ab = mu(A + B, spec).value
                assert ab <= mu(A, spec).value + mu(B, spec).value + 1e-10

    def test_spectral_abscissa_lower_bound(self):
        rng = np.random.default_rng(2)
        for spec in (L1, L2, LINF):
            for _ in range(20):
                A = rng.standard_normal((4, 4))
                alpha = np.max(np.real(np.linalg.eigvals(A)))
                assert mu(A, spec).value >= alpha - 1e-10

    def test_sampled_general_p_on_diagonal(self):
        # for diagonal matrices the measure is max a_ii in every lp norm
        est = mu(np.diag([-1.0, -2.0]), NormSpec(p=3.0), seed=0)
        assert est.method == "sampled"
        assert est.value == pytest.approx(-1.0, abs=1e-6)

    def test_sparse_input(self):
        import scipy.sparse as sp

        A = sp.diags([-1.0, -2.0, -3.0])
        assert mu(A, L2).value == pytest.approx(-1.0)


class TestMuOracle:
    rng = np.random.default_rng(3)

    def test_diag_p2(self):
        got = mu_fd_oracle(np.diag([-1.0, -2.0]), L2)
        assert got.value == pytest.approx(-1.0, abs=1e-4)
        assert got.converged

    def test_matches_column_formula(self):
        for _ in range(10):
            A = self.rng.standard_normal((3, 3)) - 2 * np.eye(3)
            got = mu_fd_oracle(A, L1)
            assert got.value == pytest.approx(mu(A, L1).value, abs=1e-4)

    def test_zero_matrix(self):
        got = mu_fd_oracle(np.zeros((2, 2)), LINF)
        assert got.value == pytest.approx(0.0, abs=1e-10)

    def test_dim_limit(self):
        with pytest.raises(ContractViolation):
            mu_fd_oracle(np.eye(7), L2)


class TestWeightedRate:
    def test_identity_weight_reduces_to_mu(self):
        rng = np.random.default_rng(4)
        for spec in (L1, L2, LINF):
            A = rng.standard_normal((4, 4))
            wr = weighted_rate(A, weights.identity(), spec=spec)
            assert wr.value == pytest.approx(mu(A, spec).value, rel=1e-10, abs=1e-10)

    def test_shear_with_squeezing_weight(self):
        # mu_2 of the similarity [[-1, 0.1], [0, -1]] is -1 + 0.05
        th = weights.diagonal([0.01, 1.0])
        wr = weighted_rate(SHEAR, th, spec=L2)
        assert -1.0 < wr.value < -0.94
        assert wr.value == pytest.approx(-0.95)
        # norm-dependence: the unweighted measure is positive
        assert mu(SHEAR, L2).value == pytest.approx(4.0)

    def test_generalized_jacobian_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = rng.integers(2, 6)
            A = rng.standard_normal((n, n))
            q, _ = np.linalg.qr(rng.standard_normal((n, n)))
            Th = q @ np.diag(rng.uniform(0.5, 2.0, n))
            w = weights.constant_matrix(Th)
            lhs = weighted_rate(A, w, spec=L2).value
            rhs = mu(Th @ A @ np.linalg.inv(Th), L2).value
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs), abs(rhs))

    def test_p1_pinf_invertible_routes(self):
        rng = np.random.default_rng(6)
        A = rng.standard_normal((3, 3))
        th = weights.diagonal([2.0, 1.0, 0.5])
        Tm = np.diag([2.0, 1.0, 0.5])
        B = Tm @ A @ np.linalg.inv(Tm)
        for spec in (L1, LINF):
            wr = weighted_rate(A, th, spec=spec)
            assert wr.method == "closed_form"
            assert wr.value == pytest.approx(mu(B, spec).value, rel=1e-12)

    def test_neumann_laplacian_mean_complement(self):
        from contractkit.pde import build_discretization, neumann_second_eigenvalue

        disc = build_discretization(16, boundary="neumann")
        P = np.full((16, 16), 1.0 / 16)
        qw = weights.projection_complement(P)
        wr = weighted_rate(disc.laplacian, qw, spec=L2, grid=disc.grid)
        assert wr.value == pytest.approx(neumann_second_eigenvalue(16, disc.h), rel=1e-10)
        assert wr.method == "eigen"

    def test_time_varying_weight_needs_derivative(self):
        th = weights.WeightFamily(kind="custom", bound_b=2.0, invertible=True,
                                  time_varying=True,
                                  _matrix=lambda t, u, n: np.eye(n) * (1 + 0.1 * t),
                                  _inv=lambda t, u, n: np.eye(n) / (1 + 0.1 * t))
        with pytest.raises(ContractViolation):
            weighted_rate(np.eye(2), th)

    def test_time_varying_weight_rate(self):
        # Theta(t) = e^{ct} I adds exactly c to the rate
        c = 0.3
        th = weights.WeightFamily(
            kind="custom", bound_b=np.inf, invertible=True, time_varying=True,
            _matrix=lambda t, u, n: np.exp(c * t) * np.eye(n),
            _inv=lambda t, u, n: np.exp(-c * t) * np.eye(n),
            _dmat=lambda t, u, n: c * np.exp(c * t) * np.eye(n),
        )
        A = np.diag([-1.0, -2.0])
        wr = weighted_rate(A, th, t=0.7)
        assert wr.value == pytest.approx(-1.0 + c, rel=1e-10)

    def test_degenerate_weight_raises(self):
        th = weights.WeightFamily(kind="custom", bound_b=1.0, invertible=False,
                                  _matrix=lambda t, u, n: np.zeros((n, n)))
        with pytest.raises(DegenerateWeightError):
            weighted_rate(np.eye(3), th)


class TestNonlinearRate:
    def test_linear_field_constant_jacobian(self):
        A = np.array([[-2.0, 1.0], [0.0, -1.0]])
        f = linear_field(A)
        samples = sampling.gaussian_samples(5, 2, seed=0)
        est = nonlinear_rate(f, weights.identity(), spec=L2, sampler=samples)
        assert est.value == pytest.approx(mu(A, L2).value, rel=1e-12)
        assert est.method == "sampled"
        assert est.sample_count == 5

    def test_cubic_scalar_max_at_origin(self):
        from contractkit.flows import VectorField

        f = VectorField(f=lambda t, u: -u**3, jac=lambda t, u: np.diag(-3.0 * u**2),
                        dim=1)
        samples = sampling.states([np.array([-1.0]), np.array([0.0]), np.array([1.0])])
        est = nonlinear_rate(f, weights.identity(), spec=L2, sampler=samples)
        assert est.value == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(est.argmax[1], 0.0)

    def test_hopf_level_weight_band(self):
        from contractkit import systems

        f = systems.hopf_field(omega=1.0)
        sub = systems.circle_submersion()
        rng = np.random.default_rng(8)
        samples = []
        while len(samples) < 20:
            u = rng.uniform(-1.2, 1.2, 2)
            if 0.8 <= np.linalg.norm(u) <= 1.2:
                samples.append((0.0, u))
        est = nonlinear_rate(f, sub.weight(), spec=L2, sampler=samples)
        # radial tangent rate is 1 - 3 r^2, so sup over the band is <= -0.92
        assert -3.33 <= est.value <= -0.9

    def test_empty_sampler_raises(self):
        with pytest.raises(ContractViolation):
            nonlinear_rate(linear_field(np.eye(2)), weights.identity(),
                           sampler=[])
