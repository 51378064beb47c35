"""Continuity-method solver with a damped, Fourier-preconditioned Newton corrector.

The continuation deforms the data by t in [0, 1]: at t = 0 the problem has
the exact constant solution u = -log A, and each accepted step solves the
equation at the new t starting from the previous solution.  The corrector is
a damped Newton iteration on residual_sigma2:

  * the Newton system  linearize(u, d, .) v = -residual_sigma2(u, d)  is
    solved iteratively (BiCGStab, GMRES fallback) on the zero-mean subspace,
    preconditioned by the constant-coefficient Fourier symbol of the
    linearization frozen at the field averages;
  * the step is backtracked to the largest s in {1, b, b^2, ...} for which
    the normalized trial iterate keeps every grid node in the Gamma_2 cone
    with the configured eigenvalue margin and does not increase the residual
    max-norm;
  * the additive normalization constant is restored after every step by the
    exact closed-form shift, so every accepted iterate satisfies
    (integral e^{-gamma u})^{1/gamma} = A.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy.sparse.linalg import LinearOperator, bicgstab, gmres

from .errors import (
    ConeBreakdownError,
    ConeViolationError,
    ContinuationStallError,
    ConvergenceError,
    LinearSolveError,
    NormalizationError,
)
from .forms import (
    LinearCoefficients,
    ProblemData,
    gamma2_mask,
    gprime,
    linearization_coefficients,
    residual_sigma2,
)
from .monitors import estimate_report
from .torus import ScalarField, constant_field, spectral_derivatives

_RESIDUAL_SLACK = 1e-12  # relative slack in the "non-increasing" residual test


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-9
    max_newton_iters: int = 25
    t_step_init: float = 0.25
    t_step_min: float = 1e-3
    cone_margin: float = 1e-6
    backtrack_factor: float = 0.5
    linear_rtol: float = 1e-6
    linear_maxiter: int = 200
    max_backtracks: int = 30
    t_step_growth: float = 2.0
    easy_newton_iters: int = 3

    def __post_init__(self):
        if not self.newton_tol > 0.0:
            raise ValueError("newton_tol must be positive")
        if not 0.0 < self.t_step_min <= self.t_step_init <= 1.0:
            raise ValueError("need 0 < t_step_min <= t_step_init <= 1")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.cone_margin < 0.0:
            raise ValueError("cone_margin must be nonnegative")


@dataclass
class SolveReport:
    """Continuation history: accepted t values, residual norms at acceptance,
    one monitor snapshot per accepted t, and the convergence flag."""

    t_values: list = field(default_factory=list)
    residual_norms: list = field(default_factory=list)
    monitor_snapshots: list = field(default_factory=list)
    converged: bool = False


def normalize(u: ScalarField, A: float, gamma: float) -> ScalarField:
    """Shift u by the exact constant restoring (integral e^{-gamma u})^{1/gamma} = A.

    The shifted-exponential form  log I = gamma m + log mean(e^{-gamma(u + m)})
    with m = -min u keeps every exponent nonpositive, so the computation
    cannot overflow for finite fields.
    """
    vals = u.values
    m = -float(np.min(vals))
    log_mean = np.log(np.mean(np.exp(-gamma * (vals + m))))
    c = (gamma * m + log_mean) / gamma - np.log(A)
    if not np.isfinite(c):
        raise NormalizationError(
            f"normalization shift is not finite (gamma={gamma}, A={A})"
        )
    return ScalarField(u.geometry, vals + c)


# ---------------------------------------------------------------------------
# linear solve


def _precondition_symbol(coeffs: LinearCoefficients) -> np.ndarray:
    """Fourier symbol of the linearization with coefficients frozen at their
    field averages; the zero mode is set to 1 (the solve lives on the
    zero-mean subspace)."""
    geom = coeffs.geometry
    n = coeffs.n
    g_mean = np.mean(coeffs.gtilde, axis=tuple(range(2, coeffs.gtilde.ndim)))
    c0_mean = float(np.mean(coeffs.c0))
    w_mean = np.mean(coeffs.w, axis=tuple(range(1, coeffs.w.ndim)))

    syms = [geom.holo_symbol(j) for j in range(1, n + 1)]
    anti = [geom.antiholo_symbol(j) for j in range(1, n + 1)]
    sym = np.zeros(geom.shape, dtype=complex)
    for j in range(n):
        for k in range(n):
            sym = sym + g_mean[k, j] * (syms[j] * anti[k])
    sym *= 2.0 * n * coeffs.alpha
    first = np.zeros(geom.shape, dtype=complex)
    for j in range(n):
        prod = w_mean[j] * syms[j]
        first = first - (prod - np.conj(prod))  # -2i Im(w_j s_j)
    sym = sym + c0_mean + first

    flat0 = (0,) * len(geom.shape)
    sym[flat0] = 1.0
    floor = 1e-12 * max(1.0, float(np.max(np.abs(sym))))
    small = np.abs(sym) < floor
    if np.any(small):
        sym[small] = floor
    return sym


def solve_newton_system(u: ScalarField, d: ProblemData, coeffs: LinearCoefficients,
                        rhs: np.ndarray, cfg: SolverConfig,
                        rtol: float | None = None) -> np.ndarray:
    """Solve  L v = rhs  for zero-mean v with the Fourier-symbol preconditioner."""
    geom = u.geometry
    shape = geom.shape
    size = rhs.size
    sym = _precondition_symbol(coeffs)
    rtol = cfg.linear_rtol if rtol is None else rtol

    def matvec(x):
        v = x.reshape(shape)
        v = v - v.mean()
        dv = spectral_derivatives(ScalarField(geom, v))
        out = coeffs.apply_to(dv, v)
        return (out - out.mean()).ravel()

    def apply_precond(x):
        r = x.reshape(shape)
        out = scipy.fft.ifftn(scipy.fft.fftn(r, workers=-1) / sym, workers=-1).real
        return (out - out.mean()).ravel()

    op = LinearOperator((size, size), matvec=matvec, dtype=float)
    mop = LinearOperator((size, size), matvec=apply_precond, dtype=float)
    b = (rhs - rhs.mean()).ravel()
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(shape)

    x, info = bicgstab(op, b, rtol=rtol, atol=0.0,
                       maxiter=cfg.linear_maxiter, M=mop)
    if info != 0:
        x, info = gmres(op, b, rtol=rtol, atol=0.0, restart=40,
                        maxiter=max(4, cfg.linear_maxiter // 40), M=mop)
    if info != 0:
        res = float(np.linalg.norm(op.matvec(x) - b)) / bnorm
        raise LinearSolveError(
            f"iterative linear solve stagnated (relative residual {res:.2e})"
        )
    v = x.reshape(shape)
    return v - v.mean()


# ---------------------------------------------------------------------------
# Newton corrector


def _cone_ok(gp, margin: float) -> bool:
    return bool(np.all(gamma2_mask(gp, margin)))


def _newton_step(u: ScalarField, d: ProblemData, cfg: SolverConfig,
                 forcing: float | None = None):
    """One damped step.  Returns (u_new, s, residual_norm_new)."""
    dv = spectral_derivatives(u)
    gp = gprime(u, d, dv)
    if not _cone_ok(gp, cfg.cone_margin):
        raise ConeViolationError(
            "current iterate leaves Gamma_2 at the required margin"
        )
    r = residual_sigma2(u, d, dv).values
    rnorm = float(np.max(np.abs(r)))
    coeffs = linearization_coefficients(u, d, dv)
    v = solve_newton_system(u, d, coeffs, -r, cfg, rtol=forcing)

    gamma = d.norm_constants.gamma
    s = 1.0
    last_reason = "no admissible step"
    for _ in range(cfg.max_backtracks + 1):
        trial = normalize(ScalarField(u.geometry, u.values + s * v),
                          d.A, gamma)
        dv_t = spectral_derivatives(trial)
        gp_t = gprime(trial, d, dv_t)
        if not _cone_ok(gp_t, cfg.cone_margin):
            last_reason = f"cone margin violated at s={s:.3e}"
            s *= cfg.backtrack_factor
            continue
        r_t = residual_sigma2(trial, d, dv_t).values
        rnorm_t = float(np.max(np.abs(r_t)))
        if rnorm_t <= rnorm * (1.0 + _RESIDUAL_SLACK):
            return trial, s, rnorm_t
        last_reason = (
            f"residual increased at s={s:.3e} "
            f"({rnorm:.3e} -> {rnorm_t:.3e})"
        )
        s *= cfg.backtrack_factor
    raise ConeBreakdownError(f"backtracking exhausted: {last_reason}")


def newton_step(u: ScalarField, d: ProblemData, cfg: SolverConfig):
    """One damped Newton step; returns (normalized new iterate, accepted s)."""
    u_new, s, _ = _newton_step(u, d, cfg)
    return u_new, s


def solve_at_t(u0: ScalarField, d: ProblemData, cfg: SolverConfig) -> ScalarField:
    """Newton iteration at fixed t until the residual max-norm drops below
    newton_tol; raises ConvergenceError (with best iterate and history)
    otherwise.  The returned field is normalized."""
    u, _, _ = _solve_at_t(u0, d, cfg)
    return u


def _solve_at_t(u0: ScalarField, d: ProblemData, cfg: SolverConfig):
    gamma = d.norm_constants.gamma
    u = normalize(u0, d.A, gamma)
    rnorm = float(np.max(np.abs(residual_sigma2(u, d).values)))
    rnorm0 = rnorm
    history = [rnorm]
    iters = 0
    while rnorm >= cfg.newton_tol:
        if iters >= cfg.max_newton_iters:
            raise ConvergenceError(
                f"Newton did not reach tol={cfg.newton_tol:.1e} in "
                f"{cfg.max_newton_iters} iterations (residual {rnorm:.3e})",
                best=u, history=history,
            )
        # inexact-Newton forcing: solve loosely while far from the root,
        # tighten to linear_rtol as the residual drops
        forcing = min(1e-2, max(cfg.linear_rtol, 0.01 * rnorm / rnorm0))
        u, _, rnorm = _newton_step(u, d, cfg, forcing=forcing)
        history.append(rnorm)
        iters += 1
    return u, iters, history


# ---------------------------------------------------------------------------
# continuation


_SOLVE_FAILURES = (ConvergenceError, ConeViolationError, ConeBreakdownError,
                   LinearSolveError)


def run_and_return(d: ProblemData, cfg: SolverConfig,
                   u_init: ScalarField | None = None, on_accept=None):
    """March t from 0 to 1 with adaptive steps; returns (report, final field).

    Starts from the constant -log A (the exact t = 0 solution), halves the
    step on any solver failure down to t_step_min, and grows it again after
    easy successes.  Monitors are recorded at every accepted t, and
    on_accept(t, field, problem) is invoked there when given.  Raises
    ContinuationStallError (carrying the partial report and, as .last_field,
    the furthest accepted iterate) if the step floor is reached before t = 1.
    """
    report = SolveReport()
    geom = d.geometry
    u = u_init if u_init is not None else constant_field(geom, -np.log(d.A))

    def accept(t: float, u_acc: ScalarField, d_t: ProblemData):
        rnorm = float(np.max(np.abs(residual_sigma2(u_acc, d_t).values)))
        report.t_values.append(t)
        report.residual_norms.append(rnorm)
        report.monitor_snapshots.append(estimate_report(u_acc, d_t))
        if on_accept is not None:
            on_accept(t, u_acc, d_t)

    def stall(message, exc=None):
        err = ContinuationStallError(message, report=report)
        err.last_field = u
        if exc is not None:
            raise err from exc
        raise err

    d0 = d.with_t(0.0)
    try:
        u, _, _ = _solve_at_t(u, d0, cfg)
    except _SOLVE_FAILURES as exc:
        stall(f"could not solve the t = 0 problem: {exc}", exc)
    accept(0.0, u, d0)

    t = 0.0
    dt = cfg.t_step_init
    while t < 1.0:
        t_try = min(1.0, t + dt)
        d_t = d.with_t(t_try)
        try:
            u_new, iters, _ = _solve_at_t(u, d_t, cfg)
        except _SOLVE_FAILURES:
            dt *= 0.5
            if dt < cfg.t_step_min:
                stall(f"continuation stalled at t={t:.4f} "
                      f"(step floor {cfg.t_step_min:g} reached)")
            continue
        t = t_try
        u = u_new
        accept(t, u, d_t)
        if iters <= cfg.easy_newton_iters:
            dt = min(cfg.t_step_growth * dt, 1.0)

    report.converged = True
    return report, u


def continuity_run(d: ProblemData, cfg: SolverConfig,
                   u_init: ScalarField | None = None) -> SolveReport:
    """Adaptive continuation in t from the trivial solution; see run_and_return."""
    report, _ = run_and_return(d, cfg, u_init)
    return report
