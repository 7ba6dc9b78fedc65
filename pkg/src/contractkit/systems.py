"""Built-in dynamical systems used by the experiments and tests."""

import numpy as np
import scipy.linalg as sla

from .flows import VectorField
from .geometry import Conjugacy, Submersion

SHEAR_MATRIX = np.array([[-1.0, 10.0], [0.0, -1.0]])


def hopf_field(omega=1.0, gain=1.0):
    """Planar oscillator with an attracting unit circle:
    rdot = gain * r (1 - r^2), thetadot = omega, in Cartesian coordinates."""

    def f(t, u):
        x, y = u
        r2 = x * x + y * y
        return np.array([gain * x * (1.0 - r2) - omega * y,
                         gain * y * (1.0 - r2) + omega * x])

    def jac(t, u):
        x, y = u
        return np.array([
            [gain * (1.0 - 3.0 * x * x - y * y), -omega - 2.0 * gain * x * y],
            [omega - 2.0 * gain * x * y, gain * (1.0 - x * x - 3.0 * y * y)],
        ])

    return VectorField(f=f, jac=jac, dim=2, name=f"hopf(omega={omega},gain={gain})")


def circle_submersion():
    """phi(u) = ||u||^2 - 1, whose zero set is the unit circle."""
    return Submersion(
        phi=lambda u: np.array([u[0] ** 2 + u[1] ** 2 - 1.0]),
        dphi=lambda u: np.array([[2.0 * u[0], 2.0 * u[1]]]),
        codim=1,
    )


def conjugated_field(base, M, name=None):
    """Field whose conjugate under v = M u is ``base``: f(t, u) =
    M^{-1} base(t, M u)."""
    M = np.asarray(M, dtype=float)
    Minv = np.linalg.inv(M)

    def f(t, u):
        return Minv @ base.eval(t, M @ u)

    def jac(t, u):
        return Minv @ base.jacobian(t, M @ u) @ M

    return VectorField(f=f, jac=jac, dim=base.dim,
                       name=name or (base.name + "_pulled_back"))


def rotation_field(omega=1.0):
    """Pure rotation f(u) = Omega u with Omega skew; spheres are invariant
    but nothing contracts toward them."""
    Om = np.array([[0.0, -omega], [omega, 0.0]])
    return VectorField(f=lambda t, u: Om @ u, jac=lambda t, u: Om, dim=2,
                       name="rotation")


def hopf_with_equilibrium_on_loop(omega=1.0):
    """Hopf-like field scaled by (1 - cos(theta)): the speed vanishes at
    the point (1, 0) of the unit circle, violating non-accumulation."""
    base = hopf_field(omega=omega)

    def f(t, u):
        x, y = u
        r2 = x * x + y * y
        s = 1.0 - x / max(np.sqrt(r2), 1e-12)
        return s * base.eval(t, u)

    return VectorField(f=f, dim=2, name="hopf_pinned")


def coupled_hopf_field(omegas, conj_mats, coupling):
    """n coupled oscillators, heterogeneous through linear conjugacies:
    in conjugate coordinates v_i = M_i u_i every subsystem runs the same
    planar oscillator plus diffusive coupling,

        dv_i/dt = hopf(v_i; omega_i) + K * sum_j (v_j - v_i),

    mapped back through u_i = M_i^{-1} v_i."""
    n_osc = len(omegas)
    mats = [np.asarray(M, dtype=float) for M in conj_mats]
    inv_mats = [np.linalg.inv(M) for M in mats]
    hopfs = [hopf_field(omega=w) for w in omegas]
    K = float(coupling)

    def split(z):
        return [z[2 * i:2 * i + 2] for i in range(n_osc)]

    def f(t, u):
        vs = [M @ ui for M, ui in zip(mats, split(np.asarray(u, dtype=float)))]
        vbar = np.mean(vs, axis=0)
        dvs = [h.eval(t, v) + K * n_osc * (vbar - v) for h, v in zip(hopfs, vs)]
        return np.concatenate([Mi @ dv for Mi, dv in zip(inv_mats, dvs)])

    def jac(t, u):
        vs = [M @ ui for M, ui in zip(mats, split(np.asarray(u, dtype=float)))]
        blocks = [[None] * n_osc for _ in range(n_osc)]
        for i in range(n_osc):
            Ji = hopfs[i].jacobian(t, vs[i])
            for j in range(n_osc):
                core = (K * np.eye(2)) if i != j else (Ji - K * (n_osc - 1) * np.eye(2))
                blocks[i][j] = inv_mats[i] @ core @ mats[j]
        return np.block(blocks)

    fld = VectorField(f=f, jac=jac, dim=2 * n_osc, name="coupled_hopf")
    fld.conjugacies = [Conjugacy.linear(M) for M in mats]
    return fld


def stacked_circle_submersion(n_osc):
    """Level-set map whose zero set is the product of unit circles."""

    def phi(z):
        return np.array([z[2 * i] ** 2 + z[2 * i + 1] ** 2 - 1.0
                         for i in range(n_osc)])

    def dphi(z):
        J = np.zeros((n_osc, 2 * n_osc))
        for i in range(n_osc):
            J[i, 2 * i] = 2.0 * z[2 * i]
            J[i, 2 * i + 1] = 2.0 * z[2 * i + 1]
        return J

    return Submersion(phi=phi, dphi=dphi, codim=n_osc)


def random_stable_matrix(rng, n, margin=0.5, scale=1.0):
    """Random matrix shifted so its spectral abscissa is about -margin."""
    A = scale * rng.standard_normal((n, n))
    alpha = np.max(np.real(np.linalg.eigvals(A)))
    return A - (alpha + margin) * np.eye(n)


def matrix_exponential_flow(A, t, u0):
    return sla.expm(t * np.asarray(A)) @ np.asarray(u0)
