"""Numerical monitors for the a priori estimates and integral identities.

The theorems behind these quantities give qualitative bounds with
non-explicit constants, so the monitors report ratios whose boundedness an
A-sweep can inspect empirically:

  * C^0: e^{-inf u} / A and e^{sup u} * A,
  * C^1: max of e^{-u} |Du|^2,
  * ellipticity: nodewise eigenvalue range of the linearization metric and
    the Gamma_2 fraction of the nodes,
  * degeneracy: kappa = min e^{-2u} sigma_2(g') against kappa_c = n(n-1)/2.

Two exact continuum identities are also evaluated as checks on solved
fields: the k-weighted integral identity produced by the integration-by-
parts chain (moser_identity_gap) and the reverse-Sobolev-type inequality
constant used by the Moser iteration (reverse_sobolev_constant).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HypothesisError, RangeUnderflowError
from .forms import (
    ProblemData,
    gamma2_mask,
    gprime,
    gtilde,
    hermitian_eigenvalues,
    kappa_field,
    kappa_rhs_field,
    sigma2_field,
)
from .torus import ScalarField, integrate_values, mixed_wedge_density, spectral_derivatives

CSV_COLUMNS = (
    "t",
    "residual_norm",
    "inf_u",
    "sup_u",
    "c0_low_ratio",
    "c0_high_ratio",
    "c1_max",
    "gtilde_eig_min",
    "gtilde_eig_max",
    "kappa",
    "kappa_c",
    "gamma2_fraction",
)


@dataclass(frozen=True)
class EstimateReport:
    inf_u: float
    sup_u: float
    c0_low_ratio: float
    c0_high_ratio: float
    c1_max: float
    gtilde_eig_min: float
    gtilde_eig_max: float
    kappa: float
    kappa_c: float
    gamma2_fraction: float

    def row(self, t: float, residual_norm: float) -> tuple:
        return (
            t, residual_norm, self.inf_u, self.sup_u, self.c0_low_ratio,
            self.c0_high_ratio, self.c1_max, self.gtilde_eig_min,
            self.gtilde_eig_max, self.kappa, self.kappa_c, self.gamma2_fraction,
        )


def estimate_report(u: ScalarField, d: ProblemData) -> EstimateReport:
    """Evaluate every monitored quantity on one field."""
    dv = spectral_derivatives(u)
    vals = u.values
    inf_u = float(np.min(vals))
    sup_u = float(np.max(vals))
    c1 = float(np.max(np.exp(-vals) * dv.grad_sq))
    gp = gprime(u, d, dv)
    gt = gtilde(u, d, dv)
    eigs = hermitian_eigenvalues(gt)
    kappa = float(np.min(np.exp(-2.0 * vals) * sigma2_field(gp)))
    frac = float(np.mean(gamma2_mask(gp)))
    return EstimateReport(
        inf_u=inf_u,
        sup_u=sup_u,
        c0_low_ratio=float(np.exp(-inf_u) / d.A),
        c0_high_ratio=float(np.exp(sup_u) * d.A),
        c1_max=c1,
        gtilde_eig_min=float(np.min(eigs)),
        gtilde_eig_max=float(np.max(eigs)),
        kappa=kappa,
        kappa_c=d.kappa_c,
        gamma2_fraction=frac,
    )


def kappa_consistency(u: ScalarField, d: ProblemData) -> float:
    """Relative disagreement, at the node minimizing e^{-2u} sigma_2(g'),
    between that value and the kappa form of the right-hand side.  Zero (to
    discretization error) exactly when u solves the equation at this t."""
    lhs = kappa_field(u, d)
    rhs = kappa_rhs_field(u, d)
    node = np.unravel_index(np.argmin(lhs), lhs.shape)
    scale = max(abs(float(lhs[node])), abs(float(rhs[node])), 1e-300)
    return abs(float(lhs[node]) - float(rhs[node])) / scale


def moser_identity_gap(u: ScalarField, d: ProblemData, k: float) -> float:
    """Residual of the k-weighted integral identity, normalized by its
    largest term.

    For a solution at the current t the identity

        k * I[e^{-ku} |Du|^2 (e^u + f e^{-u})]
            = -(k n alpha / (n-1)!) * I[e^{-ku} * wedge density]
              - (1/(n-1)) * I[e^{-ku} mu]
              + (1 - 1/(k+1)) * I[e^{-(k+1)u} Lap f]

    holds exactly in the continuum; the returned gap is the discretization
    (plus non-solution) error.  All data are t-scaled.
    """
    if not k > 0.0:
        raise ValueError("the identity weight k must be positive")
    geom = u.geometry
    n = d.n
    dv = spectral_derivatives(u)
    vals = u.values
    with np.errstate(over="raise"):
        try:
            e_min_ku = np.exp(-k * vals)
            e_min_k1u = np.exp(-(k + 1.0) * vals)
        except FloatingPointError as exc:
            raise RangeUnderflowError(
                f"exp(-k u) overflowed for k={k}"
            ) from exc
    fe = d.f_eff()
    a = np.exp(vals) + fe * np.exp(-vals)
    wedge = mixed_wedge_density(u, dv).values

    fact = 1.0
    for m in range(2, n):
        fact *= m  # (n-1)!
    lhs = k * integrate_values(geom, e_min_ku * dv.grad_sq * a)
    r1 = -(k * n * d.alpha / fact) * integrate_values(geom, e_min_ku * wedge)
    r2 = -(1.0 / (n - 1)) * integrate_values(geom, e_min_ku * d.mu_eff())
    r3 = (1.0 - 1.0 / (k + 1.0)) * integrate_values(geom, e_min_k1u * d.lap_f_eff())
    terms = np.array([lhs, r1, r2, r3])
    scale = float(np.max(np.abs(terms)))
    if scale == 0.0:
        return 0.0
    return abs(lhs - (r1 + r2 + r3)) / scale


def reverse_sobolev_constant(u: ScalarField, k: float) -> float:
    """Smallest C with I[|D e^{-ku/2}|^2] <= C k (I[e^{-(k+1)u}] + I[e^{-(k+2)u}]).

    Since D e^{-ku/2} = -(k/2) e^{-ku/2} Du pointwise, the left side is
    (k^2/4) I[e^{-ku} |Du|^2].  Everything is evaluated in shifted log space
    so large k u cannot overflow; an underflow of the right-hand integrals
    raises RangeUnderflowError.
    """
    if not k >= 1.0:
        raise ValueError("the Sobolev weight k must be >= 1")
    vals = u.values
    dv_gsq = spectral_derivatives(u).grad_sq
    m = -float(np.min(vals))  # max of -u

    def log_integral(p: float, extra: np.ndarray | None = None) -> float:
        # log I[e^{-p u} * extra] = p m + log mean(e^{-p(u + m)} * extra)
        w = np.exp(-p * (vals + m))
        if extra is not None:
            w = w * extra
        mean = float(np.mean(w))
        if mean <= 0.0:
            if extra is None:
                raise RangeUnderflowError(
                    f"exponential integral underflowed for weight {p}"
                )
            return -np.inf
        return p * m + float(np.log(mean))

    log_num = log_integral(k, dv_gsq)
    if log_num == -np.inf:
        return 0.0  # constant field: left side is exactly zero
    log_i1 = log_integral(k + 1.0)
    log_i2 = log_integral(k + 2.0)
    log_den = np.log(k) + np.logaddexp(log_i1, log_i2)
    return float(np.exp(np.log(k * k / 4.0) + log_num - log_den))


def wedge_lower_bound_check(u: ScalarField, d: ProblemData) -> float:
    """Nodewise slack minimum of the wedge-density lower bound.

    Wherever the linearization metric is positive the density obeys

        density > -((n-1)!/(2 n alpha)) |Du|^2 (e^u + f e^{-u});

    returns min over nodes of density + bound (>= 0 up to rounding).  Raises
    HypothesisError if the metric is not positive definite at every node.
    """
    dv = spectral_derivatives(u)
    gt = gtilde(u, d, dv)
    min_eig = float(np.min(hermitian_eigenvalues(gt)))
    if min_eig <= 0.0:
        raise HypothesisError(
            f"the linearization metric is not positive (min eigenvalue {min_eig:.3e})"
        )
    n = d.n
    fact = 1.0
    for m in range(2, n):
        fact *= m  # (n-1)!
    vals = u.values
    a = np.exp(vals) + d.f_eff() * np.exp(-vals)
    wedge = mixed_wedge_density(u, dv).values
    slack = wedge + (fact / (2.0 * n * d.alpha)) * dv.grad_sq * a
    return float(np.min(slack))


# ---------------------------------------------------------------------------
# CSV serialization (fixed column order, one row per accepted t)


def csv_header() -> str:
    return ",".join(CSV_COLUMNS)


def csv_row(t: float, residual_norm: float, rep: EstimateReport) -> str:
    return ",".join(f"{x:.17g}" for x in rep.row(t, residual_norm))
