"""Restricted isometry certificates and sparse recovery experiments.

The certificate route bounds the restricted isometry deviation of a sampled
matrix through its submatrix norms: the largest k with k <= (A_{k,m}/B)^2
locates the crossover sparsity, and the deviation bound combines the realized
norm at that crossover with a Monte Carlo estimate of its mean square over
fresh replicas.

The recovery route plants a sparse unit signal, measures it with the sampled
matrix, decodes by l1 minimization (Douglas-Rachford splitting against the
affine constraint), and aggregates success rates into phase diagrams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .ensembles import EnsembleSpec, RngStream, SampleMatrix, sample_matrix
from .errors import ConvergenceFailure
from .sparse_norms import akm_profile

# ---------------------------------------------------------------------------
# Admissible sparsity scan
# ---------------------------------------------------------------------------


def _b_m(m: int, n: int, n_cols: int) -> float:
    """The entropy budget m * loglog(3m) * log^2(3 max(N, n) / m)."""
    big = max(n, n_cols)
    return float(m * math.log(math.log(3.0 * m)) * math.log(3.0 * big / m) ** 2)


def rip_admissible_m(
    n: int,
    n_cols: int,
    theta: float,
    c: float = 1.0,
    c1: float = 1.0,
) -> dict:
    """Largest sparsity passing the deviation-budget scan, with diagnostics.

    Finds the largest m <= N with

        m * loglog(3m) * (log(3 max(N,n)/m))^2 <= c * theta^2 * n / log(3/theta)

    and reports the budget value b_m at that m, the derived truncation level
    B = max(1, c1 * log(n / b_m)), and whether the companion condition
    m * log(3N/m) * log^2(n / b_m) <= c * theta^2 * n holds.  Returns m = 0
    with null diagnostics when no sparsity qualifies.
    """
    if n < 1 or n_cols < 1:
        raise ValueError("`n` and `n_cols` must be positive")
    if not 0 < theta < 1:
        raise ValueError("`theta` must lie in (0, 1)")
    budget = c * theta * theta * n / math.log(3.0 / theta)
    ms = np.arange(1, n_cols + 1, dtype=float)
    big = float(max(n, n_cols))
    lhs = ms * np.log(np.log(3.0 * ms)) * np.log(3.0 * big / ms) ** 2
    ok = np.nonzero(lhs <= budget)[0]
    result = {
        "n": n,
        "dimension": n_cols,
        "theta": theta,
        "c": c,
        "c1": c1,
        "budget": budget,
        "m_admissible": 0,
        "b_m": None,
        "B_default": 1.0,
        "companion_condition_holds": None,
        "companion_lhs": None,
        "companion_rhs": c * theta * theta * n,
    }
    if ok.size == 0:
        return result
    m = int(ok[-1] + 1)
    bm = _b_m(m, n, n_cols)
    result["m_admissible"] = m
    result["b_m"] = bm
    if bm < n:
        b_def = max(1.0, c1 * math.log(n / bm))
        comp_lhs = m * math.log(3.0 * n_cols / m) * math.log(n / bm) ** 2
        result["B_default"] = b_def
        result["companion_lhs"] = comp_lhs
        result["companion_condition_holds"] = bool(comp_lhs <= result["companion_rhs"])
    return result


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

#: Cache of replica mean-square submatrix-norm profiles, keyed by the
#: campaign parameters that determine them exactly.
_replica_profile_cache: dict = {}


@dataclass(frozen=True)
class RipCertificate:
    """Deviation certificate for one sampled matrix.

    ``bound`` always equals
    2 * theta + 2 * (akm_value^2 + mean_sq_estimate) / n, so it can be
    recomputed from the stored fields.
    """

    m: int
    theta: float
    b_level: float
    k_star: int
    akm_value: float
    mean_sq_estimate: float
    bound: float
    replicas: int
    admissible: bool
    admissible_margin: float
    truncated_moment_estimate: float
    config: dict = field(default_factory=dict)


def _replica_mean_sq_profile(
    spec: EnsembleSpec,
    n_rows: int,
    m: int,
    replicas: int,
    stream: RngStream,
) -> np.ndarray:
    """Mean of squared A_{k,m} profiles over fresh replica matrices, cached."""
    key = (spec.kind.value, spec.dimension, n_rows, m, replicas, stream.master_seed, stream.stream_index)
    if key in _replica_profile_cache:
        return _replica_profile_cache[key]
    if replicas < 1:
        raise ValueError(
            "`replicas` must be positive when no cached replica mean exists"
        )
    acc = np.zeros(n_rows + 1)
    for r in range(replicas):
        mat = sample_matrix(spec, n_rows, stream.offset(r * n_rows))
        acc += akm_profile(mat.values, m) ** 2
    mean = acc / replicas
    _replica_profile_cache[key] = mean
    return mean


def _truncated_moment_probe(
    spec: EnsembleSpec,
    n_rows: int,
    m: int,
    b_level: float,
    replicas: int,
    stream: RngStream,
    probes: int = 32,
) -> float:
    """Monte Carlo probe of the truncated directional second moment.

    For a handful of random m-sparse unit directions y it averages, over
    replica matrices, the max over y of sum_i <X_i, y>^2 1{|<X_i, y>| >= B}.
    A finite direction search makes this a lower-bound diagnostic only.
    """
    reps = min(replicas, 16) if replicas >= 1 else 0
    if reps == 0:
        return 0.0
    rng = stream.offset(replicas * n_rows + 1).generator()
    n_dim = spec.dimension
    supports = np.stack(
        [rng.choice(n_dim, size=m, replace=False) for _ in range(probes)]
    )
    coefs = rng.standard_normal((probes, m))
    coefs /= np.linalg.norm(coefs, axis=1, keepdims=True)
    total = 0.0
    for r in range(reps):
        mat = sample_matrix(spec, n_rows, stream.offset(r * n_rows)).values
        best = 0.0
        for sup, coef in zip(supports, coefs):
            proj = mat[:, sup] @ coef
            kept = proj * proj * (np.abs(proj) >= b_level)
            best = max(best, float(kept.sum()))
        total += best
    return total / reps


def rip_certificate(
    mat: SampleMatrix,
    m: int,
    theta: float,
    replicas: int,
    stream: RngStream,
    b_level: Optional[float] = None,
) -> RipCertificate:
    """Submatrix-norm certificate for the restricted isometry deviation.

    Computes the exact A_{k,m} profile of the matrix, locates
    k* = max{k : k <= (A_{k,m}/B)^2}, estimates E A_{k*,m}^2 over fresh
    replicas of the same ensemble (cached per campaign so replicas can be
    shared across inputs), and assembles the deviation bound

        bound = 2 theta + 2 (A_{k*,m}^2 + E-hat A_{k*,m}^2) / n.

    When ``b_level`` is omitted it defaults to the truncation level
    max(1, log(n / b_m)) derived from the entropy budget at this m.  The
    certificate also records whether the sparsity passes the net-based
    admissibility inequality m log(11 e N / m) <= 3 theta^2 n / (16 B^2).
    """
    if not isinstance(mat, SampleMatrix):
        raise ValueError("`mat` must be a SampleMatrix (provenance is required)")
    n_rows, n_dim = mat.values.shape
    if not 1 <= m <= n_dim:
        raise ValueError("`m` must satisfy 1 <= m <= N")
    if not 0 < theta < 1:
        raise ValueError("`theta` must lie in (0, 1)")
    if b_level is None:
        bm = _b_m(m, n_rows, n_dim)
        b_level = max(1.0, math.log(n_rows / bm)) if bm < n_rows else 1.0
    if b_level <= 0:
        raise ValueError("`b_level` must be positive")

    profile = akm_profile(mat.values, m)
    ks = np.arange(n_rows + 1, dtype=float)
    hits = np.nonzero(ks <= (profile / b_level) ** 2)[0]
    k_star = int(hits[-1]) if hits.size else 0
    akm_value = float(profile[k_star])

    mean_sq = _replica_mean_sq_profile(mat.spec, n_rows, m, replicas, stream)
    est = float(mean_sq[k_star])
    bound = 2.0 * theta + 2.0 * (akm_value**2 + est) / n_rows

    adm_lhs = m * math.log(11.0 * math.e * n_dim / m)
    adm_rhs = 3.0 * theta * theta * n_rows / (16.0 * b_level * b_level)
    probe = _truncated_moment_probe(mat.spec, n_rows, m, b_level, replicas, stream)
    return RipCertificate(
        m=m,
        theta=theta,
        b_level=float(b_level),
        k_star=k_star,
        akm_value=akm_value,
        mean_sq_estimate=est,
        bound=float(bound),
        replicas=replicas,
        admissible=bool(adm_lhs <= adm_rhs),
        admissible_margin=float(adm_rhs - adm_lhs),
        truncated_moment_estimate=probe,
        config={
            "kind": mat.spec.kind.value,
            "dimension": n_dim,
            "n_rows": n_rows,
            "master_seed": stream.master_seed,
            "stream_index": stream.stream_index,
        },
    )


# ---------------------------------------------------------------------------
# l1 decoding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisPursuitResult:
    """Outcome of the l1 decoder.

    ``x`` is the final feasible iterate (projected onto the constraint, so
    the equality residual is at rounding level on success).  When
    ``converged`` is False the caller gets the last iterate and both
    residuals rather than an exception.
    """

    x: np.ndarray
    residual: float
    step_change: float
    iterations: int
    converged: bool


def _soft_threshold(z: np.ndarray, gamma: float) -> np.ndarray:
    return np.sign(z) * np.maximum(np.abs(z) - gamma, 0.0)


def basis_pursuit(
    mat: np.ndarray,
    y: np.ndarray,
    tol: float = 1e-7,
    max_iter: int = 5000,
) -> BasisPursuitResult:
    """Minimum-l1 solution of mat @ x = y by Douglas-Rachford splitting.

    Alternates soft-thresholding (penalty parameter 1) with projection onto
    the affine constraint set; the projection reuses a cached Cholesky
    factorization of the row Gram matrix.  Rows are pre-scaled to unit norm,
    which changes neither the constraint set nor the objective.

    Termination: the thresholded and projected iterates agree within ``tol``
    and the driver variable has stopped moving.  On ``max_iter`` the result
    is returned with ``converged = False``.

    Raises
    ------
    ValueError
        If shapes are inconsistent or the rows are (numerically) dependent.
    """
    a = np.asarray(mat, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if a.ndim != 2 or a.shape[0] > a.shape[1]:
        raise ValueError("`mat` must be an n x N matrix with n <= N")
    if y.size != a.shape[0]:
        raise ValueError("`y` length must match the row count")
    row_norms = np.linalg.norm(a, axis=1)
    if np.any(row_norms <= 0):
        raise ValueError("`mat` has a zero row; the system is degenerate")
    m_scaled = a / row_norms[:, None]
    b = y / row_norms
    gram = m_scaled @ m_scaled.T
    try:
        factor = cho_factor(gram)
    except np.linalg.LinAlgError as exc:
        raise ValueError("rows are linearly dependent; the constraint "
                         "projection is not defined") from exc

    def project(u: np.ndarray) -> np.ndarray:
        return u - m_scaled.T @ cho_solve(factor, m_scaled @ u - b)

    z = project(np.zeros(a.shape[1]))  # least-norm feasible warm start
    x = np.zeros_like(z)
    w = z.copy()
    iterations = 0
    converged = False
    step = math.inf
    for iterations in range(1, max_iter + 1):
        x = _soft_threshold(z, 1.0)
        w = project(2.0 * x - z)
        z_new = z + w - x
        step = float(np.linalg.norm(z_new - z))
        z = z_new
        gap = float(np.linalg.norm(x - w))
        if gap <= tol * max(1.0, np.linalg.norm(w)) and step <= tol * max(
            1.0, float(np.linalg.norm(z))
        ):
            converged = True
            break
    residual = float(np.linalg.norm(a @ w - y))
    return BasisPursuitResult(
        x=w,
        residual=residual,
        step_change=step,
        iterations=iterations,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# Planted recovery trials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecoveryTrial:
    """One planted-signal decode."""

    n_rows: int
    dimension: int
    sparsity: int
    support: tuple
    rel_error: float
    residual: float
    iterations: int
    converged: bool
    success: bool

    def to_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "dimension": self.dimension,
            "sparsity": self.sparsity,
            "support": list(self.support),
            "rel_error": self.rel_error,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "success": self.success,
        }


def recovery_trial(
    spec: EnsembleSpec,
    n_rows: int,
    sparsity: int,
    stream: RngStream,
    success_rtol: float = 1e-4,
    tol: float = 1e-7,
    max_iter: int = 5000,
) -> RecoveryTrial:
    """Plant a sparse unit signal, measure with a fresh matrix, decode.

    The matrix consumes sub-streams ``stream.offset(0..n_rows-1)``; the
    support and coefficients come from ``stream.offset(n_rows)``.  The
    decoder sees the measurement pair scaled by 1/sqrt(n).  Solver
    non-convergence is propagated as ``success = False``, never raised.
    """
    n_dim = spec.dimension
    if not 0 <= sparsity <= n_dim:
        raise ValueError("`sparsity` must lie in [0, N]")
    mat = sample_matrix(spec, n_rows, stream).values
    rng = stream.offset(n_rows).generator()
    if sparsity == 0:
        return RecoveryTrial(
            n_rows=n_rows,
            dimension=n_dim,
            sparsity=0,
            support=(),
            rel_error=0.0,
            residual=0.0,
            iterations=0,
            converged=True,
            success=True,
        )
    support = np.sort(rng.choice(n_dim, size=sparsity, replace=False))
    signal = np.zeros(n_dim)
    coefs = rng.standard_normal(sparsity)
    signal[support] = coefs / np.linalg.norm(coefs)
    scaled = mat / math.sqrt(n_rows)
    result = basis_pursuit(scaled, scaled @ signal, tol=tol, max_iter=max_iter)
    rel = float(np.linalg.norm(result.x - signal))
    return RecoveryTrial(
        n_rows=n_rows,
        dimension=n_dim,
        sparsity=sparsity,
        support=tuple(int(i) for i in support),
        rel_error=rel,
        residual=result.residual,
        iterations=result.iterations,
        converged=result.converged,
        success=bool(result.converged and rel <= success_rtol),
    )


@dataclass(frozen=True)
class PhaseDiagram:
    """Success rates over a sparsity grid, with binomial standard errors."""

    n_rows: int
    dimension: int
    cells: list
    admissibility: dict
    config: dict

    def to_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "dimension": self.dimension,
            "cells": self.cells,
            "admissibility": self.admissibility,
            "config": self.config,
        }


def phase_diagram(
    spec: EnsembleSpec,
    n_rows: int,
    sparsity_grid: Sequence[int],
    trials_per_cell: int,
    stream: RngStream,
    theta: float = 0.25,
    success_rtol: float = 1e-4,
    workers: int = 1,
) -> PhaseDiagram:
    """Recovery success rates across sparsities, annotated with the scan.

    Trial t of cell c uses the sub-stream block starting at
    ``stream.offset((c * trials + t) * (n_rows + 1))``, so the diagram is
    byte-identical for any worker count.
    """
    from .parallel import run_indexed

    if trials_per_cell < 1:
        raise ValueError("`trials_per_cell` must be positive")
    grid = [int(s) for s in sparsity_grid]
    if any(s < 0 or s > spec.dimension for s in grid):
        raise ValueError("sparsities must lie in [0, N]")
    cells = []
    for c, sparsity in enumerate(grid):

        def one(t: int, _c: int = c, _s: int = sparsity) -> bool:
            offset = (_c * trials_per_cell + t) * (n_rows + 1)
            trial = recovery_trial(
                spec, n_rows, _s, stream.offset(offset), success_rtol=success_rtol
            )
            return trial.success

        outcomes = run_indexed(trials_per_cell, one, workers)
        successes = int(sum(outcomes))
        rate = successes / trials_per_cell
        cells.append(
            {
                "sparsity": sparsity,
                "trials": trials_per_cell,
                "successes": successes,
                "rate": rate,
                "stderr": math.sqrt(rate * (1.0 - rate) / trials_per_cell),
            }
        )
    return PhaseDiagram(
        n_rows=n_rows,
        dimension=spec.dimension,
        cells=cells,
        admissibility=rip_admissible_m(n_rows, spec.dimension, theta),
        config={
            "kind": spec.kind.value,
            "dimension": spec.dimension,
            "n_rows": n_rows,
            "sparsity_grid": grid,
            "trials_per_cell": trials_per_cell,
            "theta": theta,
            "master_seed": stream.master_seed,
            "stream_index": stream.stream_index,
        },
    )
