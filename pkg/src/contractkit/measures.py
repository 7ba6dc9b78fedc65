"""Logarithmic norms (matrix measures) and weighted contraction rates.

The measure of a matrix A in a given norm is the one-sided derivative

    mu(A) = lim_{h->0+} (||I + h A|| - 1) / h,

the tightest exponential growth bound for the linear flow.  The weighted
contraction rate of A under an operator family Theta(t, u) is

    sup_{v != 0} [Theta v, (dTheta/dt + Theta A) v] / ||Theta v||^2,

computed exactly for p = 2 (as a symmetric generalized eigenproblem, with
kernel directions of a surjective non-invertible weight removed), via the
classical column/row formulas for p in {1, inf} with invertible weights,
and by multi-start ray search otherwise.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ContractViolation, DegenerateWeightError, DimensionError, NumericalError
from .grids import GridFunction, unit_grid
from .sip import L2, NormSpec, OracleResult, gram_matrix
from .sip import norm as sip_norm
from .sip import sip as sip_pair

DENSE_EIG_LIMIT = 2048  # above this, switch to Lanczos-style iteration
_KERNEL_RTOL = 1e-10    # singular values below rtol*smax count as kernel


class LinearOp:
    """Dense, sparse, or matrix-free linear operator."""

    def __init__(self, mat=None, *, matvec=None, shape=None):
        if mat is not None:
            if sp.issparse(mat):
                self.mat = mat.tocsr()
            else:
                self.mat = np.asarray(mat)
            self.shape = self.mat.shape
            self._matvec = None
        else:
            if matvec is None or shape is None:
                raise ContractViolation("matrix-free LinearOp needs matvec and shape")
            self.mat = None
            self._matvec = matvec
            self.shape = tuple(shape)

    @property
    def dim_in(self):
        return self.shape[1]

    @property
    def dim_out(self):
        return self.shape[0]

    def apply(self, v):
        v = np.asarray(v)
        if self.mat is not None:
            return self.mat @ v
        return np.asarray(self._matvec(v))

    __call__ = apply

    def to_dense(self, max_dim=4096):
        if self.mat is not None:
            return self.mat.toarray() if sp.issparse(self.mat) else np.asarray(self.mat)
        if self.dim_in > max_dim:
            raise NumericalError(
                f"refusing to densify matrix-free operator of dim {self.dim_in}"
            )
        cols = [self.apply(e) for e in np.eye(self.dim_in)]
        return np.stack(cols, axis=1)


def as_linear_op(A, shape=None):
    if isinstance(A, LinearOp):
        return A
    if callable(A) and not (sp.issparse(A) or isinstance(A, np.ndarray)):
        return LinearOp(matvec=A, shape=shape)
    return LinearOp(A)


def as_matrix(A):
    """Dense or sparse matrix view of a LinearOp-like object."""
    if isinstance(A, LinearOp):
        return A.mat if A.mat is not None else A.to_dense()
    if sp.issparse(A):
        return A
    return np.asarray(A)


def _dense(A):
    return A.toarray() if sp.issparse(A) else np.asarray(A)


@dataclass
class RateEstimate:
    """A contraction-rate value together with how it was obtained.

    ``sampled`` values are maxima over finitely many probes and hence lower
    bounds on the true supremum."""

    value: float
    method: str              # closed_form | eigen | sampled
    sample_count: int = 1
    residual: float = 0.0
    argmax: object = None


def _check_square(M):
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"operator must be square, got shape {M.shape}")


def _max_eig_sym(S):
    """Largest eigenvalue of a symmetric/Hermitian matrix."""
    n = S.shape[0]
    if n <= DENSE_EIG_LIMIT and not sp.issparse(S):
        try:
            return float(sla.eigh(S, eigvals_only=True, subset_by_index=(n - 1, n - 1))[0])
        except Exception as exc:  # pragma: no cover - LAPACK failure
            raise NumericalError(f"symmetric eigensolver failed: {exc}") from exc
    Ssp = sp.csr_matrix(S) if not sp.issparse(S) else S
    try:
        vals = spla.eigsh(Ssp, k=1, which="LA", return_eigenvectors=False)
    except Exception as exc:
        raise NumericalError(f"Lanczos eigensolver failed: {exc}") from exc
    return float(vals[0])


def _max_gen_eig_sym(S, G):
    """Largest eigenvalue of the symmetric pencil (S, G), G positive definite."""
    S = _dense(S)
    G = _dense(G)
    try:
        return float(sla.eigh(S, G, eigvals_only=True,
                              subset_by_index=(S.shape[0] - 1, S.shape[0] - 1))[0])
    except Exception as exc:
        raise NumericalError(f"generalized eigensolver failed: {exc}") from exc


def _sym(M):
    Md = _dense(M)
    if np.iscomplexobj(Md):
        return 0.5 * (Md + Md.conj().T)
    return 0.5 * (Md + Md.T)


def _mu_l1(M):
    """max over columns j of Re(m_jj) + sum_{i != j} |m_ij|."""
    Md = _dense(M)
    col = np.sum(np.abs(Md), axis=0) - np.abs(np.diag(Md)) + np.real(np.diag(Md))
    return float(np.max(col))


def _mu_linf(M):
    Md = _dense(M)
    row = np.sum(np.abs(Md), axis=1) - np.abs(np.diag(Md)) + np.real(np.diag(Md))
    return float(np.max(row))


def _ray_search(objective, n, seed=0, restarts=32, maxiter=6):
    """Multi-start derivative-free ascent of a 0-homogeneous ratio."""
    from scipy.optimize import minimize

    rng = np.random.default_rng(seed)
    best = -np.inf
    best_v = None
    for _ in range(restarts):
        v0 = rng.standard_normal(n)
        v0 /= np.linalg.norm(v0)
        res = minimize(lambda x: -objective(x), v0, method="Powell",
                       options={"maxiter": maxiter, "xtol": 1e-10, "ftol": 1e-12})
        val = -res.fun
        if np.isfinite(val) and val > best:
            best = val
            best_v = res.x
    if best_v is None:
        raise NumericalError("ray search failed to produce a finite value")
    return best, best_v, restarts


def _wrap_state(v, grid):
    if grid is None:
        return v
    return GridFunction(v, grid)


def mu(A, spec=L2, grid=None, seed=0):
    """Logarithmic norm of a square operator in the norm given by ``spec``.

    Closed forms: p = 2 is the largest eigenvalue of the symmetrized matrix
    (generalized to the Sobolev Gram matrix when k > 0), p = 1 / p = inf are
    the classical column / row formulas.  Other p fall back to a sampled ray
    search and are flagged as such.
    """
    M = as_matrix(A)
    _check_square(M)
    n = M.shape[0]
    p, k = spec.p, spec.k
    if k > 0 and grid is None:
        raise ContractViolation("Sobolev measures need the grid argument")
    if p == 2.0:
        if k == 0:
            return RateEstimate(_max_eig_sym(_sym(M)), "eigen")
        G = gram_matrix(spec, grid, ncomp=n // grid.npoints)
        S = _sym(G @ M)
        return RateEstimate(_max_gen_eig_sym(S, G), "eigen")
    if k == 0 and p == 1.0:
        return RateEstimate(_mu_l1(M), "closed_form")
    if k == 0 and np.isinf(p):
        return RateEstimate(_mu_linf(M), "closed_form")

    Md = _dense(M)
    g = grid if grid is not None else unit_grid(n)

    def objective(v):
        u = _wrap_state(v, g)
        nv = sip_norm(u, spec)
        if nv == 0.0:
            return -np.inf
        return sip_pair(u, _wrap_state(Md @ v, g), spec) / nv**2

    val, argv, count = _ray_search(objective, n, seed=seed)
    return RateEstimate(val, "sampled", sample_count=count, argmax=argv)


def _opnorm(M, p, seed=0):
    if p in (1.0, 2.0) or np.isinf(p):
        return float(np.linalg.norm(M, np.inf if np.isinf(p) else int(p)))
    n = M.shape[1]
    g = unit_grid(n)
    spec = NormSpec(p=p)

    def objective(v):
        nv = sip_norm(v, spec)
        if nv == 0.0:
            return -np.inf
        return sip_norm(M @ v, spec) / nv

    val, _, _ = _ray_search(objective, n, seed=seed)
    return val


def mu_fd_oracle(A, spec=L2, h_list=None, rtol=1e-6, seed=0):
    """Definition-level oracle (||I + h A|| - 1)/h with linear-in-h
    extrapolation of the two smallest quotients.  Dims <= 6 only."""
    M = _dense(as_matrix(A))
    _check_square(M)
    if M.shape[0] > 6:
        raise ContractViolation("mu_fd_oracle is restricted to dim <= 6")
    if spec.k != 0:
        raise ContractViolation("mu_fd_oracle handles lp norms only")
    if h_list is None:
        h_list = np.geomspace(1e-2, 1e-6, 9)
    h_list = np.asarray(h_list, dtype=float)
    if h_list.size < 2 or np.any(h_list <= 0) or np.any(np.diff(h_list) >= 0):
        raise ContractViolation("h_list must have >= 2 strictly decreasing positive entries")
    eye = np.eye(M.shape[0])
    q = np.array([(_opnorm(eye + h * M, spec.p, seed=seed) - 1.0) / h for h in h_list])
    h1, h0 = h_list[-2], h_list[-1]
    value = (h1 * q[-1] - h0 * q[-2]) / (h1 - h0)
    converged = bool(abs(q[-1] - value) <= rtol * max(1.0, abs(value)))
    return OracleResult(value=float(value), converged=converged, quotients=q)


def _theta_dtheta(theta, t, u, n):
    Th = np.asarray(theta.matrix(t, u, n))
    dTh = theta.dmatrix_dt(t, u, n)
    return Th, (None if dTh is None else np.asarray(dTh))


def weighted_rate(A, theta, t=0.0, u=None, spec=L2, grid=None, seed=0):
    """Theta-weighted contraction rate of a linear operator.

    For an invertible weight this equals the measure of the generalized
    Jacobian (dTheta/dt + Theta A) Theta^{-1}; for a surjective
    non-invertible weight the supremum is taken over the complement of
    ker(Theta), where the weighted seminorm is a norm.
    """
    M = _dense(as_matrix(A))
    _check_square(M)
    n = M.shape[0]
    Th, dTh = _theta_dtheta(theta, t, u, n)
    if Th.shape[1] != n:
        raise DimensionError(f"weight maps dim {Th.shape[1]}, operator dim {n}")
    C = Th @ M if dTh is None else dTh + Th @ M
    p, k = spec.p, spec.k

    if theta.invertible:
        if p == 2.0:
            if k == 0:
                Gw = np.eye(Th.shape[0]) * (grid.cell_measure if grid is not None else 1.0)
            else:
                Gw = _dense(gram_matrix(spec, grid, ncomp=Th.shape[0] // grid.npoints))
            S = _sym(Th.conj().T @ Gw @ C)
            G = Th.conj().T @ Gw @ Th
            return RateEstimate(_max_gen_eig_sym(S, G), "eigen")
        Thi = np.asarray(theta.inv_matrix(t, u, n))
        B = C @ Thi
        if k == 0 and (p == 1.0 or np.isinf(p)):
            return RateEstimate(_mu_l1(B) if p == 1.0 else _mu_linf(B), "closed_form")
        return mu(B, spec, grid=grid, seed=seed)

    # surjective, non-invertible: restrict to the complement of ker(Theta)
    svd_u, svals, vt = np.linalg.svd(Th)
    smax = svals[0] if svals.size else 0.0
    keep = svals > _KERNEL_RTOL * max(smax, 1.0)
    if not np.any(keep):
        raise DegenerateWeightError("weight vanishes on every direction")
    Vr = vt[: np.count_nonzero(keep)].conj().T  # n x r basis of ker(Theta)^perp
    if p == 2.0:
        if k == 0:
            Gw = np.eye(Th.shape[0]) * (grid.cell_measure if grid is not None else 1.0)
        else:
            Gw = _dense(gram_matrix(spec, grid, ncomp=Th.shape[0] // grid.npoints))
        S = _sym(Th.conj().T @ Gw @ C)
        G = Th.conj().T @ Gw @ Th
        Sr = Vr.conj().T @ S @ Vr
        Gr = Vr.conj().T @ G @ Vr
        return RateEstimate(_max_gen_eig_sym(Sr, Gr), "eigen")

    gW = grid if grid is not None else unit_grid(Th.shape[0])
    r = Vr.shape[1]

    def objective(y):
        v = Vr @ y
        tv = _wrap_state(Th @ v, gW)
        nv = sip_norm(tv, spec)
        if nv == 0.0:
            return -np.inf
        return sip_pair(tv, _wrap_state(C @ v, gW), spec) / nv**2

    val, argv, count = _ray_search(objective, r, seed=seed)
    return RateEstimate(val, "sampled", sample_count=count, argmax=argv)


def nonlinear_rate(f, theta, spec=L2, sampler=None, grid=None, seed=0):
    """Empirical sup over sampled (t, u) of the weighted rate of Df_t(u).

    This is a sampled estimate of the supremum, reported as such; it is
    never a certified global bound.
    """
    if sampler is None:
        raise ContractViolation("nonlinear_rate needs a sampler of (t, u) pairs")
    best = -np.inf
    best_at = None
    count = 0
    for t, u in sampler:
        u = np.asarray(u, dtype=float)
        J = f.jacobian(t, u)
        r = weighted_rate(J, theta, t, u, spec=spec, grid=grid, seed=seed)
        count += 1
        if r.value > best:
            best = r.value
            best_at = (t, u)
    if count == 0:
        raise ContractViolation("sampler yielded no (t, u) samples")
    return RateEstimate(best, "sampled", sample_count=count, argmax=best_at)
