"""Trajectory and variational integration, growth-bound verification, and
maximum-Lyapunov-exponent estimation.

The integrator is the classical fourth-order one-step method with fixed
step, plus an optional step-doubling error controller.  Perturbations are
co-integrated with the linearized dynamics d(du)/dt = Df_t(u) du.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ContractViolation, DimensionError, DivergenceError, StiffnessError
from .grids import GridFunction
from .measures import as_matrix, weighted_rate
from .sip import L2, NormSpec
from .sip import norm as sip_norm

_FD_REL_STEP = math.sqrt(np.finfo(float).eps)


@dataclass
class VectorField:
    """Right-hand side f(t, u) with exact or finite-difference Jacobian."""

    f: object
    jac: object = None
    dim: int = None
    name: str = ""
    grid: object = None
    diagnostics: dict = field(default_factory=dict)

    def eval(self, t, u):
        return np.asarray(self.f(t, np.asarray(u)), dtype=float)

    def jacobian(self, t, u):
        u = np.asarray(u, dtype=float)
        if self.jac is not None:
            return as_matrix(self.jac(t, u))
        return fd_jacobian(self.eval, t, u)

    def __call__(self, t, u):
        return self.eval(t, u)


def fd_jacobian(f, t, u, rel_step=_FD_REL_STEP):
    """Central-difference Jacobian, step = sqrt(eps) * (1 + ||u||)."""
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    h = rel_step * (1.0 + np.linalg.norm(u))
    J = np.empty((n, n))
    for j in range(n):
        up = u.copy()
        um = u.copy()
        up[j] += h
        um[j] -= h
        J[:, j] = (np.asarray(f(t, up)) - np.asarray(f(t, um))) / (2.0 * h)
    return J


def linear_field(A, name="linear"):
    A = as_matrix(A)
    return VectorField(
        f=lambda t, u, A=A: A @ u,
        jac=lambda t, u, A=A: A,
        dim=A.shape[0],
        name=name,
    )


def as_vector_field(obj):
    if isinstance(obj, VectorField):
        return obj
    if sp.issparse(obj) or isinstance(obj, np.ndarray):
        return linear_field(obj)
    if hasattr(obj, "mat") or hasattr(obj, "apply"):
        return linear_field(as_matrix(obj))
    if callable(obj):
        return VectorField(f=obj)
    raise ContractViolation(f"cannot interpret {type(obj)} as a vector field")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray                 # (nt, n)
    perturbations: np.ndarray = None   # (nt, n) or None
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise DimensionError("trajectory times must be strictly increasing")
        self.times = t
        self.states = np.asarray(self.states, dtype=float)

    @property
    def final_state(self):
        return self.states[-1]

    def table(self, norm_spec=None):
        """(header, columns) for CSV export: time, state columns, and the
        perturbation norm when perturbations were recorded."""
        header = ["time"] + [f"u{i}" for i in range(self.states.shape[1])]
        cols = [self.times] + [self.states[:, i] for i in range(self.states.shape[1])]
        if self.perturbations is not None:
            spec = norm_spec or L2
            header.append("perturbation_norm")
            cols.append(np.array([sip_norm(d, spec) for d in self.perturbations]))
        return header, cols


def _rk4_step(f, t, u, dt):
    k1 = f(t, u)
    k2 = f(t + 0.5 * dt, u + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, u + 0.5 * dt * k2)
    k4 = f(t + dt, u + dt * k3)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_finite(u, t, prev):
    if not np.all(np.isfinite(u)):
        raise DivergenceError(f"state became non-finite at t={t:.6g}", t=t, last_state=prev)


def integrate(f, u0, t_span, dt=None, rtol=None, record_every=1, max_steps=50_000_000):
    """Integrate du/dt = f(t, u) over t_span.

    Either a fixed step ``dt`` or a step-doubling tolerance ``rtol`` must be
    given.  Local truncation error is O(dt^5) per step.
    """
    f = as_vector_field(f)
    if isinstance(u0, GridFunction):
        u0 = u0.ravel()
    u = np.array(u0, dtype=float).reshape(-1)
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 <= t0:
        raise ContractViolation("t_span must have t1 > t0")
    if (dt is None) == (rtol is None):
        raise ContractViolation("give exactly one of dt or rtol")

    diag_series = {name: [fn(u)] for name, fn in f.diagnostics.items()}
    times = [t0]
    states = [u.copy()]
    accepted = rejected = 0

    if dt is not None:
        if dt <= 0:
            raise ContractViolation("dt must be positive")
        nsteps = max(1, int(math.ceil((t1 - t0) / dt - 1e-12)))
        dt_eff = (t1 - t0) / nsteps
        t = t0
        for step in range(nsteps):
            u_new = _rk4_step(f.eval, t, u, dt_eff)
            _check_finite(u_new, t + dt_eff, u)
            u = u_new
            t = t0 + (step + 1) * dt_eff
            accepted += 1
            if (step + 1) % record_every == 0 or step == nsteps - 1:
                times.append(t)
                states.append(u.copy())
                for name, fn in f.diagnostics.items():
                    diag_series[name].append(fn(u))
    else:
        t = t0
        h = (t1 - t0) / 100.0
        h_min = (t1 - t0) * 1e-12
        since_record = 0
        while t < t1 - 1e-14 * (t1 - t0):
            if accepted + rejected > max_steps:
                raise StiffnessError("step budget exhausted")
            h = min(h, t1 - t)
            full = _rk4_step(f.eval, t, u, h)
            half = _rk4_step(f.eval, t, u, 0.5 * h)
            two = _rk4_step(f.eval, t + 0.5 * h, half, 0.5 * h)
            _check_finite(two, t + h, u)
            err = np.linalg.norm(two - full) / 15.0
            tol = rtol * (1.0 + np.linalg.norm(two))
            if err <= tol:
                t += h
                u = two
                accepted += 1
                since_record += 1
                if since_record >= record_every or t >= t1 - 1e-14:
                    times.append(t)
                    states.append(u.copy())
                    for name, fn in f.diagnostics.items():
                        diag_series[name].append(fn(u))
                    since_record = 0
            else:
                rejected += 1
            factor = 0.9 * (tol / err) ** 0.2 if err > 0 else 4.0
            h *= min(4.0, max(0.1, factor))
            if h < h_min:
                raise StiffnessError(f"step size underflow at t={t:.6g}")

    stats = {"accepted": accepted, "rejected": rejected}
    if diag_series:
        stats["diagnostics"] = {k: np.asarray(v) for k, v in diag_series.items()}
    return Trajectory(np.asarray(times), np.asarray(states), stats=stats)


def integrate_variational(f, u0, du0, t_span, dt, record_every=1):
    """Co-integrate the state and a tangent perturbation with the
    linearized dynamics d(du)/dt = Df_t(u) du."""
    f = as_vector_field(f)
    if isinstance(u0, GridFunction):
        u0 = u0.ravel()
    u = np.array(u0, dtype=float).reshape(-1)
    du = np.array(du0, dtype=float).reshape(-1)
    if u.shape != du.shape:
        raise DimensionError("u0 and du0 must have the same shape")
    t0, t1 = float(t_span[0]), float(t_span[1])
    nsteps = max(1, int(math.ceil((t1 - t0) / dt - 1e-12)))
    dt_eff = (t1 - t0) / nsteps
    n = u.shape[0]

    def rhs(t, z):
        uu, dd = z[:n], z[n:]
        J = f.jacobian(t, uu)
        return np.concatenate([f.eval(t, uu), J @ dd])

    z = np.concatenate([u, du])
    times = [t0]
    states = [u.copy()]
    perts = [du.copy()]
    t = t0
    for step in range(nsteps):
        z_new = _rk4_step(rhs, t, z, dt_eff)
        _check_finite(z_new, t + dt_eff, z)
        z = z_new
        t = t0 + (step + 1) * dt_eff
        if (step + 1) % record_every == 0 or step == nsteps - 1:
            times.append(t)
            states.append(z[:n].copy())
            perts.append(z[n:].copy())
    return Trajectory(np.asarray(times), np.asarray(states),
                      perturbations=np.asarray(perts),
                      stats={"accepted": nsteps, "rejected": 0})


def _weighted_norm(theta, t, u, vec, spec, grid):
    Th = theta.matrix(t, u, vec.shape[0])
    w = Th @ vec
    if grid is not None and w.shape[0] == grid.npoints:
        return sip_norm(GridFunction(w, grid), spec)
    return sip_norm(w, spec)


def verify_growth_bound(f, theta, spec, u0, du0, t_span, dt,
                        rate_stride=1, grid=None, tol=1e-4, record_every=1):
    """Check the perturbation growth bound ||du(t)||_Theta <=
    exp(int lambda ds) ||du(0)||_Theta along a trajectory, and the pairwise
    trajectory bound ||u1 - u2|| <= kappa(Theta) e^{lambda t} ||u1(0) - u2(0)||.

    The report is advisory when any rate along the trajectory came from
    sampling rather than an eigensolve or closed form.
    """
    f = as_vector_field(f)
    traj = integrate_variational(f, u0, du0, t_span, dt, record_every=record_every)
    idx = list(range(0, len(traj.times), rate_stride))
    if idx[-1] != len(traj.times) - 1:
        idx.append(len(traj.times) - 1)
    ts = traj.times[idx]

    rates = []
    advisory = False
    kappa = 1.0
    for i in idx:
        t_i, u_i = traj.times[i], traj.states[i]
        r = weighted_rate(f.jacobian(t_i, u_i), theta, t_i, u_i, spec=spec, grid=grid)
        advisory = advisory or r.method == "sampled"
        rates.append(r.value)
        if theta.invertible:
            n = u_i.shape[0]
            Th = theta.matrix(t_i, u_i, n)
            Ti = theta.inv_matrix(t_i, u_i, n)
            kappa = max(kappa, np.linalg.norm(Th, 2) * np.linalg.norm(Ti, 2))
    rates = np.asarray(rates)
    cumint = np.concatenate([[0.0], np.cumsum(0.5 * (rates[1:] + rates[:-1]) * np.diff(ts))])

    wnorms = np.array([
        _weighted_norm(theta, traj.times[i], traj.states[i], traj.perturbations[i], spec, grid)
        for i in idx
    ])
    if wnorms[0] == 0.0:
        raise ContractViolation("initial perturbation has zero weighted norm")
    ratios = wnorms / (np.exp(cumint) * wnorms[0])
    lam_sup = float(np.max(rates))

    traj2 = integrate(f, np.asarray(u0, dtype=float).reshape(-1) + np.asarray(du0, dtype=float).reshape(-1),
                      t_span, dt=dt, record_every=record_every)
    def dist(i):
        d = traj.states[i] - traj2.states[i]
        if grid is not None and d.shape[0] == grid.npoints:
            return sip_norm(GridFunction(d, grid), spec)
        return sip_norm(d, spec)
    dists = np.array([dist(i) for i in range(len(traj.times))])
    pair_bound = kappa * np.exp(lam_sup * (traj.times - traj.times[0])) * dists[0]
    pair_ratios = dists / pair_bound

    b = theta.bound_b
    t_b = -2.0 * math.log(b) / lam_sup if (lam_sup < 0 and np.isfinite(b) and b >= 1) else math.inf
    after = traj.times - traj.times[0] >= t_b
    contracted_after_tb = bool(np.all(dists[after] < dists[0])) if np.any(after) else False
    tail = dists[len(dists) * 3 // 4:]
    tail_monotone = bool(np.all(np.diff(tail) <= 1e-12 + 1e-6 * dists[0]))

    return {
        "times": ts,
        "rates": rates,
        "lambda_sup": lam_sup,
        "advisory": advisory,
        "weighted_ratios": ratios,
        "max_weighted_ratio": float(np.max(ratios)),
        "weighted_ok": bool(np.max(ratios) <= 1.0 + tol),
        "kappa": float(kappa),
        "pair_times": traj.times,
        "pair_distances": dists,
        "max_pair_ratio": float(np.max(pair_ratios)),
        "pair_ok": bool(np.max(pair_ratios) <= 1.0 + tol),
        "transient_bound": t_b,
        "contracted_after_tb": contracted_after_tb,
        "tail_monotone": tail_monotone,
        "asymptotic_check": "empirical",
    }


@dataclass
class MLEResult:
    value: float
    converged: bool
    times: np.ndarray = None
    history: np.ndarray = None


def mle_estimate(f, u0, t_span, renorm_interval, dt, p=2.0, seed=0):
    """Maximum Lyapunov exponent by the renormalized-perturbation method:
    average the log growth of a co-integrated tangent vector over fixed
    renormalization intervals."""
    f = as_vector_field(f)
    u = np.array(u0, dtype=float).reshape(-1)
    rng = np.random.default_rng(seed)
    du = rng.standard_normal(u.shape[0])
    spec = NormSpec(p=p)
    du /= sip_norm(du, spec)
    t0, t1 = float(t_span[0]), float(t_span[1])
    n_seg = max(1, int(round((t1 - t0) / renorm_interval)))
    log_sum = 0.0
    t = t0
    hist_t, hist = [], []
    for _ in range(n_seg):
        seg = integrate_variational(f, u, du, (t, t + renorm_interval), dt,
                                    record_every=10**9)
        u = seg.states[-1]
        du = seg.perturbations[-1]
        r = sip_norm(du, spec)
        if r == 0.0:
            break
        log_sum += math.log(r)
        du = du / r
        t += renorm_interval
        hist_t.append(t)
        hist.append(log_sum / (t - t0))
    hist = np.asarray(hist)
    value = float(hist[-1])
    i34 = max(0, int(len(hist) * 0.75) - 1)
    converged = bool(abs(hist[i34] - value) <= 0.02 * max(1.0, abs(value)))
    return MLEResult(value=value, converged=converged,
                     times=np.asarray(hist_t), history=hist)


def fit_decay_rate(times, values, rel_window=(1e-8, 1e-1), min_points=5):
    """Least-squares slope of log(values) vs time, restricted to the window
    where values have decayed into ``rel_window`` relative to their initial
    magnitude (falls back to the positive tail half)."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    ref = v[0] if v[0] > 0 else np.max(v)
    mask = (v > 0) & (v >= rel_window[0] * ref) & (v <= rel_window[1] * ref)
    if np.count_nonzero(mask) < min_points:
        pos = v > 0
        tail = np.zeros_like(pos)
        tail[len(v) // 2:] = True
        mask = pos & tail
    if np.count_nonzero(mask) < 2:
        return math.nan, {"points": int(np.count_nonzero(mask))}
    slope, intercept = np.polyfit(t[mask], np.log(v[mask]), 1)
    resid = np.log(v[mask]) - (slope * t[mask] + intercept)
    return float(slope), {
        "points": int(np.count_nonzero(mask)),
        "intercept": float(intercept),
        "rms_residual": float(np.sqrt(np.mean(resid**2))),
    }
