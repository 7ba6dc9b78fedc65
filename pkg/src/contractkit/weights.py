"""Weight families Theta(t, u) and the radius-b diagonal rate optimizer.

A weight re-norms tangent vectors: invertible families give equivalent
norms (asymptotic contraction certificates), surjective non-invertible
ones give seminorms measuring displacement transverse to a subspace or
manifold.  ``bound_b`` is the declared uniform bound on ||Theta|| and
||Theta^{-1}||.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation
from .measures import nonlinear_rate
from .sip import L2

_PROJ_TOL = 1e-10


@dataclass
class WeightFamily:
    kind: str
    bound_b: float
    invertible: bool
    time_varying: bool = False
    params: dict = field(default_factory=dict)
    _matrix: object = None   # (t, u, n) -> ndarray
    _inv: object = None      # (t, u, n) -> ndarray
    _dmat: object = None     # (t, u, n) -> ndarray

    def matrix(self, t, u, n):
        return np.asarray(self._matrix(t, u, n))

    def inv_matrix(self, t, u, n):
        if not self.invertible or self._inv is None:
            raise ContractViolation(f"{self.kind} weight has no inverse")
        return np.asarray(self._inv(t, u, n))

    def dmatrix_dt(self, t, u, n):
        """Time derivative of Theta at (t, u); None means identically zero."""
        if not self.time_varying:
            return None
        if self._dmat is None:
            raise ContractViolation(
                "time-varying weight must provide its time derivative"
            )
        return np.asarray(self._dmat(t, u, n))

    def apply(self, t, u, v):
        v = np.asarray(v)
        return self.matrix(t, u, v.shape[0]) @ v

    def inverse_apply(self, t, u, w):
        w = np.asarray(w)
        return self.inv_matrix(t, u, w.shape[0]) @ w


def identity():
    return WeightFamily(
        kind="identity", bound_b=1.0, invertible=True,
        _matrix=lambda t, u, n: np.eye(n),
        _inv=lambda t, u, n: np.eye(n),
    )


def _spectral_norm(M):
    return float(np.linalg.norm(M, 2))


def constant_matrix(M, b=None):
    M = np.asarray(M, dtype=float)
    if M.shape[0] != M.shape[1]:
        raise ContractViolation("constant weight matrix must be square")
    Minv = np.linalg.inv(M)
    measured = max(_spectral_norm(M), _spectral_norm(Minv))
    if b is None:
        b = measured
    elif measured > b * (1 + 1e-9):
        raise ContractViolation(
            f"declared bound b={b} violated: measured {measured:.6g}"
        )
    return WeightFamily(
        kind="constant_matrix", bound_b=float(b), invertible=True,
        params={"matrix": M},
        _matrix=lambda t, u, n, M=M: M,
        _inv=lambda t, u, n, Mi=Minv: Mi,
    )


def diagonal(entries, b=None):
    d = np.asarray(entries, dtype=float)
    if np.any(d <= 0):
        raise ContractViolation("diagonal weight entries must be positive")
    measured = max(float(np.max(d)), float(np.max(1.0 / d)))
    if b is None:
        b = measured
    elif measured > b * (1 + 1e-9):
        raise ContractViolation(
            f"diagonal entries must lie in [1/b, b] for b={b}; measured {measured:.6g}"
        )
    return WeightFamily(
        kind="diagonal", bound_b=float(b), invertible=True,
        params={"entries": d},
        _matrix=lambda t, u, n, d=d: np.diag(d),
        _inv=lambda t, u, n, d=d: np.diag(1.0 / d),
    )


def projection_complement(P, rng_probes=8, seed=0):
    """Q = I - P for a bounded linear projection P (P^2 = P)."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    Q = np.eye(n) - P
    rng = np.random.default_rng(seed)
    for _ in range(rng_probes):
        v = rng.standard_normal(n)
        if np.linalg.norm(Q @ (Q @ v) - Q @ v) > _PROJ_TOL * (1 + np.linalg.norm(v)):
            raise ContractViolation("P is not a projection: Q^2 != Q on probes")
    return WeightFamily(
        kind="projection_complement", bound_b=_spectral_norm(Q), invertible=False,
        params={"P": P, "Q": Q},
        _matrix=lambda t, u, n_, Q=Q: Q,
    )


def jacobian_of_map(dphi, b=None, kind="jacobian_of_map"):
    """State-dependent surjective weight Theta(u) = Dphi(u)."""
    return WeightFamily(
        kind=kind, bound_b=float(b) if b is not None else np.inf,
        invertible=False,
        params={"dphi": dphi},
        _matrix=lambda t, u, n, dphi=dphi: np.atleast_2d(dphi(np.asarray(u))),
    )


def custom(matrix, inverse=None, dmatrix_dt=None, b=np.inf, time_varying=False):
    return WeightFamily(
        kind="custom", bound_b=float(b), invertible=inverse is not None,
        time_varying=time_varying,
        _matrix=matrix, _inv=inverse, _dmat=dmatrix_dt,
    )


_KINDS = {
    "identity": lambda **kw: identity(),
    "constant_matrix": lambda **kw: constant_matrix(**kw),
    "diagonal": lambda **kw: diagonal(**kw),
    "projection_complement": lambda **kw: projection_complement(**kw),
    "jacobian_of_map": lambda **kw: jacobian_of_map(**kw),
    "custom": lambda **kw: custom(**kw),
}


def make_weight(kind, **params):
    if kind not in _KINDS:
        raise ContractViolation(f"unknown weight kind {kind!r}")
    return _KINDS[kind](**params)


def _power_norm(matvec, n, rng, iters=50, probes=64):
    """Operator 2-norm by random probing plus power iteration on M^T M."""
    best = 0.0
    for _ in range(probes):
        v = rng.standard_normal(n)
        nv = np.linalg.norm(v)
        if nv > 0:
            best = max(best, np.linalg.norm(matvec(v)) / nv)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = matvec(v)
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        best = max(best, nw)
        v = w / nw
    return best


def check_radius_b(theta, b, sampler, seed=0):
    """Probe ||Theta|| and ||Theta^{-1}|| over sampled (t, u) against b."""
    if not theta.invertible:
        raise ContractViolation("radius check needs an invertible weight")
    rng = np.random.default_rng(seed)
    max_fwd = 0.0
    max_inv = 0.0
    count = 0
    for t, u in sampler:
        u = np.asarray(u, dtype=float)
        n = u.shape[0]
        try:
            Th = theta.matrix(t, u, n)
            Ti = theta.inv_matrix(t, u, n)
            max_fwd = max(max_fwd, _spectral_norm(Th))
            max_inv = max(max_inv, _spectral_norm(Ti))
        except NotImplementedError:  # matrix-free fallback
            max_fwd = max(max_fwd, _power_norm(lambda v: theta.apply(t, u, v), n, rng))
            max_inv = max(max_inv, _power_norm(lambda v: theta.inverse_apply(t, u, v), n, rng))
        count += 1
    if count == 0:
        raise ContractViolation("radius check needs at least one sample")
    observed = max(max_fwd, max_inv)
    return {
        "max_theta": max_fwd,
        "max_theta_inv": max_inv,
        "observed": observed,
        "bound": float(b),
        "passed": bool(observed <= b * (1 + 1e-9)),
        "samples": count,
    }


@dataclass
class AsymptoticRateResult:
    """Best rate found within a radius-b diagonal family, with the transient
    bound t_b = -2 ln(b) / lambda for negative rates."""

    lambda_b: float
    best_weight: WeightFamily
    b: float
    transient_bound: float
    iterations: int
    history: list = field(default_factory=list)

    @staticmethod
    def transient(lam, b):
        return -2.0 * math.log(b) / lam if lam < 0 else math.inf


def optimize_diagonal_weight(A_or_f, spec=L2, b=10.0, sampler=None, seed=0,
                             max_sweeps=200, step_tol=1e-3, grid=None):
    """Coordinate descent over time-invariant diagonal weights with entries
    in [1/b, b], minimizing the sampled nonlinear rate.

    Multiplicative steps (initial factor 2) shrink on failed sweeps; stops
    when the log-step drops below ``step_tol`` or after ``max_sweeps``.
    The result upper-bounds the radius-b rate within the diagonal family.
    """
    if b <= 1.0:
        raise ContractViolation("optimizer needs b > 1")
    from .flows import as_vector_field

    f = as_vector_field(A_or_f)
    if sampler is None:
        raise ContractViolation("optimizer needs a sampler")
    samples = [(t, np.asarray(u, dtype=float)) for t, u in sampler]
    if not samples:
        raise ContractViolation("optimizer sampler is empty")
    n = samples[0][1].shape[0]

    def evaluate(d):
        w = diagonal(d, b=b)
        return nonlinear_rate(f, w, spec=spec, sampler=samples, grid=grid, seed=seed).value

    d = np.ones(n)
    best = evaluate(d)
    log_step = math.log(2.0)
    sweeps = 0
    lo, hi = 1.0 / b, b
    history = [best]
    while sweeps < max_sweeps and log_step >= step_tol:
        improved = False
        for i in range(n):
            for sgn in (1.0, -1.0):
                trial = float(np.clip(d[i] * math.exp(sgn * log_step), lo, hi))
                if trial == d[i]:
                    continue
                d_try = d.copy()
                d_try[i] = trial
                val = evaluate(d_try)
                if val < best - 1e-12:
                    best = val
                    d = d_try
                    improved = True
        sweeps += 1
        history.append(best)
        if not improved:
            log_step *= 0.5
    return AsymptoticRateResult(
        lambda_b=best,
        best_weight=diagonal(d, b=b),
        b=float(b),
        transient_bound=AsymptoticRateResult.transient(best, b),
        iterations=sweeps,
        history=history,
    )
