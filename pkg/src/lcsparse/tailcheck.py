"""Survival-curve estimation and tail-bound calibration harnesses.

Every harness follows the same recipe: draw a Monte Carlo sample of some
statistic of an ensemble, estimate its survival function on a threshold
grid with the closed-event convention P(S >= t), and fit the smallest
constant C that makes a theoretical bound family hold on the grid:

    P-hat(S >= C * threshold(t)) <= bound(t)   for every grid point t.

Fitted constants are exact functions of the sorted sample and the grid, so
refitting reproduces them bit for bit.  All Monte Carlo statistics carry
lower-bound semantics where a supremum is approximated by a finite search.

Campaigns are partitioned into fixed-size blocks keyed by sub-stream, so
results are independent of worker count and scheduling order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .ensembles import EnsembleSpec, RngStream, sample_block, sample_matrix
from .errors import BudgetExceeded
from .spectra import (
    M0Result,
    SigmaModel,
    m0_threshold,
    rearrange_desc,
    sigma_estimate_from_samples,
    top_m_norm_rows,
)
from .sparse_norms import akm_exact, akm_lower, delta_m_exact, lambda_km, lambda_m

_BLOCK = 16384

DEFAULT_T_GRID = tuple(float(t) for t in np.geomspace(1.0, 8.0, 12))


# ---------------------------------------------------------------------------
# Survival curves and calibration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurvivalCurve:
    """Empirical survival P(S >= t) of a statistic on a threshold grid."""

    statistic: str
    thresholds: np.ndarray
    survival: np.ndarray
    trials: int

    def to_rows(self) -> list:
        return [
            {"threshold": float(t), "survival": float(s)}
            for t, s in zip(self.thresholds, self.survival)
        ]


def survival_curve(
    samples: np.ndarray, thresholds: Sequence[float], statistic: str = "statistic"
) -> SurvivalCurve:
    """Empirical survival function with the closed-event convention S >= t."""
    s = np.sort(np.asarray(samples, dtype=float))
    if s.size == 0:
        raise ValueError("`samples` must be non-empty")
    t = np.asarray(thresholds, dtype=float)
    counts = s.size - np.searchsorted(s, t, side="left")
    return SurvivalCurve(
        statistic=statistic,
        thresholds=t,
        survival=counts / s.size,
        trials=s.size,
    )


def _upper_level(sorted_desc: np.ndarray, prob: float) -> float:
    """inf{u : P-hat(S >= u) <= prob} for a descending-sorted sample.

    With b = floor(prob * trials) admissible exceedances, the infimum is the
    (b+1)-th largest sample value; if every sample may exceed, it is 0 (any
    positive level already works when prob >= 1).
    """
    trials = sorted_desc.size
    b = int(math.floor(prob * trials))
    if b >= trials:
        return 0.0
    return float(sorted_desc[b])


@dataclass(frozen=True)
class CalibrationReport:
    """Smallest constant making a bound family hold on a threshold grid.

    ``fitted_c`` is the infimum of admissible constants (a pure function of
    the sorted sample and the grid).  ``slope`` is the least-squares slope of
    log-survival against t over grid points with positive survival (NaN when
    fewer than two such points exist).
    """

    bound_id: str
    fitted_c: float
    slope: float
    passed: bool
    ceiling: float
    grid: np.ndarray

    def to_dict(self) -> dict:
        return {
            "bound_id": self.bound_id,
            "fitted_c": self.fitted_c,
            "slope": None if math.isnan(self.slope) else self.slope,
            "passed": self.passed,
            "ceiling": self.ceiling,
            "grid": [float(t) for t in self.grid],
        }


def log_survival_slope(samples: np.ndarray, thresholds: Sequence[float]) -> float:
    """Least-squares slope of log P(S >= t) versus t where survival > 0."""
    curve = survival_curve(samples, thresholds)
    mask = curve.survival > 0
    if mask.sum() < 2:
        return float("nan")
    t = curve.thresholds[mask]
    y = np.log(curve.survival[mask])
    slope = np.polyfit(t, y, 1)[0]
    return float(slope)


def calibrate_constant(
    samples: np.ndarray,
    t_grid: Sequence[float],
    threshold_formula: Callable[[float], float],
    bound_formula: Callable[[float], float],
    bound_id: str,
    ceiling: float = math.inf,
) -> CalibrationReport:
    """Fit the smallest C with P-hat(S >= C * threshold(t)) <= bound(t) on the grid.

    For each grid point the needed level is the empirical upper quantile at
    the bound's probability, so C is the largest level-to-threshold ratio.
    Weakening the bound pointwise can only lower the fitted constant.
    """
    s_desc = -np.sort(-np.asarray(samples, dtype=float))
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("`t_grid` must be non-empty")
    fitted = 0.0
    for t in t_grid:
        tau = threshold_formula(float(t))
        if tau <= 0:
            raise ValueError("threshold formula must be positive on the grid")
        level = _upper_level(s_desc, float(bound_formula(float(t))))
        fitted = max(fitted, level / tau)
    slope = log_survival_slope(
        samples, [threshold_formula(float(t)) for t in t_grid]
    )
    return CalibrationReport(
        bound_id=bound_id,
        fitted_c=float(fitted),
        slope=slope,
        passed=bool(fitted <= ceiling),
        ceiling=float(ceiling),
        grid=t_grid,
    )


def _fit_inner_constant(
    predicate: Callable[[float], bool],
    lo: float = 1e-3,
    hi: float = 1e6,
    iters: int = 200,
) -> float:
    """Bisection for the smallest C with predicate(C) true; predicate must be
    monotone (false below, true above).  Returns hi end of the bracket."""
    if predicate(lo):
        return lo
    if not predicate(hi):
        return math.inf
    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
        if hi / lo < 1 + 1e-10:
            break
    return hi


@dataclass(frozen=True)
class TailReport:
    """One harness run: the survival curve plus its calibration reports."""

    harness: str
    config: dict
    curve: SurvivalCurve
    calibrations: list
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "harness": self.harness,
            "config": self.config,
            "trials": self.curve.trials,
            "statistic": self.curve.statistic,
            "curve": self.curve.to_rows(),
            "calibrations": [c.to_dict() for c in self.calibrations],
            "extras": self.extras,
        }


# ---------------------------------------------------------------------------
# Sampling helpers
# ---------------------------------------------------------------------------


def sample_statistic_blocks(
    spec: EnsembleSpec,
    trials: int,
    stream: RngStream,
    row_statistic: Callable[[np.ndarray], np.ndarray],
    block: int = _BLOCK,
) -> np.ndarray:
    """Row-wise statistic over ``trials`` vector draws, in fixed blocks.

    Block b draws from ``stream.offset(b)``; the concatenated result does not
    depend on how blocks are scheduled across workers.
    """
    if trials < 1:
        raise ValueError("`trials` must be positive")
    out = np.empty(trials)
    done = 0
    b = 0
    while done < trials:
        take = min(block, trials - done)
        rows = sample_block(spec, take, stream.offset(b))
        out[done : done + take] = row_statistic(rows)
        done += take
        b += 1
    return out


def _matrix_statistic_trials(
    spec: EnsembleSpec,
    n_rows: int,
    trials: int,
    stream: RngStream,
    statistic: Callable[[np.ndarray], float],
) -> np.ndarray:
    """Per-trial matrix statistic; trial t draws from stream.offset(t * n_rows)."""
    out = np.empty(trials)
    for t in range(trials):
        mat = sample_matrix(spec, n_rows, stream.offset(t * n_rows))
        out[t] = statistic(mat.values)
    return out


# ---------------------------------------------------------------------------
# Harnesses
# ---------------------------------------------------------------------------


def check_euclid_norm(
    spec: EnsembleSpec,
    s_grid: Sequence[float] = DEFAULT_T_GRID,
    trials: int = 100_000,
    stream: RngStream = RngStream(0),
    moment_orders: Sequence[float] = (2.0, 4.0, 8.0),
) -> TailReport:
    """Euclidean-norm tail harness.

    Calibrates the smallest C with P(|X| >= C * s * sqrt(N)) <= exp(-s sqrt(N))
    on the s-grid, and reports the moment ratios (E|X|^p)^(1/p) / (sqrt(N) + p)
    for the requested orders.
    """
    n_dim = spec.dimension
    samples = sample_statistic_blocks(
        spec, trials, stream, lambda rows: np.linalg.norm(rows, axis=1)
    )
    rt = math.sqrt(n_dim)
    cal = calibrate_constant(
        samples,
        s_grid,
        threshold_formula=lambda s: s * rt,
        bound_formula=lambda s: math.exp(-s * rt),
        bound_id="norm_tail_exp",
    )
    thresholds = np.asarray([s * rt for s in s_grid])
    curve = survival_curve(samples, thresholds, statistic="euclidean_norm")
    ratios = {
        f"moment_ratio_p{int(p)}": float(
            np.mean(samples**p) ** (1.0 / p) / (rt + p)
        )
        for p in moment_orders
    }
    return TailReport(
        harness="euclid_norm",
        config={
            "kind": spec.kind.value,
            "dimension": n_dim,
            "trials": trials,
            "s_grid": [float(s) for s in s_grid],
            "master_seed": stream.master_seed,
            "stream_index": stream.stream_index,
        },
        curve=curve,
        calibrations=[cal],
        extras=ratios,
    )


def _m0_for_grid(model: SigmaModel, t_grid, m: int, n_dim: int):
    """m0 per grid point; empty results clamp to 1 and set a flag."""
    values = []
    any_empty = False
    for t in t_grid:
        res: M0Result = m0_threshold(model, float(t), m, n_dim)
        if res.empty:
            any_empty = True
            values.append(1)
        else:
            values.append(res.value)
    return values, any_empty


def check_projection_sup(
    spec: EnsembleSpec,
    m: int,
    t_grid: Sequence[float] = DEFAULT_T_GRID,
    trials: int = 100_000,
    stream: RngStream = RngStream(0),
    model: Optional[SigmaModel] = None,
) -> TailReport:
    """Tail harness for the best m-coordinate projection norm.

    Statistic: Euclidean norm of the m largest-magnitude coordinates.  Two
    bound families are calibrated on the same threshold t * sqrt(m) log(eN/m):
    one whose exponent divides by sqrt(log(e m / m0(t))) with m0 from the
    moment model, and the simplified family dividing by sqrt(log(e m)).
    Empty m0 values clamp to 1 and are flagged in the extras.
    """
    n_dim = spec.dimension
    if not 1 <= m <= n_dim:
        raise ValueError("`m` must satisfy 1 <= m <= N")
    model = model or SigmaModel.generic_log_concave()
    samples = sample_statistic_blocks(
        spec, trials, stream, lambda rows: top_m_norm_rows(rows, m)
    )
    scale = math.sqrt(m) * math.log(math.e * n_dim / m)
    m0_values, m0_clamped = _m0_for_grid(model, t_grid, m, n_dim)
    m0_map = {float(t): v for t, v in zip(t_grid, m0_values)}

    def bound_adaptive(t: float) -> float:
        denom = math.sqrt(math.log(math.e * m / m0_map[float(t)]))
        arg = t * scale
        if arg < model.floor:
            return 1.0
        return math.exp(-model.inverse(arg) / max(denom, 1e-12))

    def bound_simplified(t: float) -> float:
        arg = t * scale
        if arg < model.floor:
            return 1.0
        return math.exp(-model.inverse(arg) / math.sqrt(math.log(math.e * m)))

    cal_adaptive = calibrate_constant(
        samples, t_grid, lambda t: t * scale, bound_adaptive, "projection_adaptive_scale"
    )
    cal_simple = calibrate_constant(
        samples, t_grid, lambda t: t * scale, bound_simplified, "projection_simplified"
    )
    thresholds = np.asarray([t * scale for t in t_grid])
    curve = survival_curve(samples, thresholds, statistic=f"top_{m}_norm")
    return TailReport(
        harness="projection_sup",
        config={
            "kind": spec.kind.value,
            "dimension": n_dim,
            "m": m,
            "trials": trials,
            "t_grid": [float(t) for t in t_grid],
            "master_seed": stream.master_seed,
            "stream_index": stream.stream_index,
        },
        curve=curve,
        calibrations=[cal_adaptive, cal_simple],
        extras={"m0_per_grid_point": m0_values, "m0_clamped": m0_clamped},
    )


def check_order_stat(
    spec: EnsembleSpec,
    ell: int,
    t_grid: Sequence[float],
    trials: int = 100_000,
    stream: RngStream = RngStream(0),
) -> TailReport:
    """Tail harness for the ell-th largest coordinate magnitude.

    Fits the smallest C such that, on grid points t >= C log(eN/ell),
    P(X*(ell) >= t) <= exp(-inverse-sigma(t sqrt(ell) / C)) under the
    generic model (inverse = identity).  Both the grid restriction and the
    exponent loosen as C grows, so the fit is a monotone bisection.
    """
    n_dim = spec.dimension
    if not 1 <= ell <= n_dim:
        raise ValueError("`ell` must satisfy 1 <= ell <= N")
    model = SigmaModel.generic_log_concave()
    samples = sample_statistic_blocks(
        spec,
        trials,
        stream,
        lambda rows: np.sort(np.abs(rows), axis=1)[:, n_dim - ell],
    )
    curve = survival_curve(samples, np.asarray(t_grid, dtype=float), statistic=f"order_stat_{ell}")
    log_term = math.log(math.e * n_dim / ell)
    s_desc = -np.sort(-samples)

    def holds(c: float) -> bool:
        for t in curve.thresholds:
            if t < c * log_term:
                continue
            arg = t * math.sqrt(ell) / c
            prob = 1.0 if arg < model.floor else math.exp(-model.inverse(arg))
            max_level = _upper_level(s_desc, prob)
            # need P(S >= t) <= prob, i.e. t >= inf-level for that prob
            if t < max_level:
                return False
        return True

    fitted = _fit_inner_constant(holds)
    cal = CalibrationReport(
        bound_id="order_stat_inverse_sigma",
        fitted_c=float(fitted),
        slope=log_survival_slope(samples, curve.thresholds),
        passed=math.isfinite(fitted),
        ceiling=math.inf,
        grid=curve.thresholds,
    )
    return TailReport(
        harness="order_stat",
        config={
            "kind": spec.kind.value,
            "dimension": n_dim,
            "ell": ell,
            "trials": trials,
            "t_grid": [float(t) for t in t_grid],
            "master_seed": stream.master_seed,
            "stream_index": stream.stream_index,
        },
        curve=curve,
        calibrations=[cal],
    )


def check_count_moments(
    spec: EnsembleSpec,
    t: float,
    p: float,
    trials: int = 100_000,
    stream: RngStream = RngStream(0),
    admissibility_scale: float = 1.0,
    model: Optional[SigmaModel] = None,
) -> dict:
    """Moment harness for the exceedance count N_X(t) = #{i : X(i) >= t}.

    Estimates lhs = (E (t^2 N_X(t))^p)^(1/p) and reports the fitted constant
    sqrt(lhs) / sigma(p), so that lhs <= (C sigma(p))^2 holds with C equal to
    the fitted value.  Requires the admissibility condition
    t >= scale * log(N t^2 / sigma(p)^2).
    """
    n_dim = spec.dimension
    model = model or SigmaModel.generic_log_concave()
    sigma_p = model.value(p)
    admissible_floor = admissibility_scale * math.log(n_dim * t * t / sigma_p**2)
    if t < admissible_floor:
        raise ValueError(
            f"`t` = {t:g} is below the admissible floor {admissible_floor:g} "
            "for this (N, p)"
        )
    counts = sample_statistic_blocks(
        spec, trials, stream, lambda rows: np.count_nonzero(rows >= t, axis=1).astype(float)
    )
    lhs = float(np.mean((t * t * counts) ** p) ** (1.0 / p))
    fitted = math.sqrt(lhs) / sigma_p
    return {
        "harness": "count_moments",
        "config": {
            "kind": spec.kind.value,
            "dimension": n_dim,
            "t": t,
            "p": p,
            "trials": trials,
            "master_seed": stream.master_seed,
            "stream_index": stream.stream_index,
        },
        "lhs_moment": lhs,
        "sigma_p": sigma_p,
        "fitted_c": fitted,
        "admissible_floor": admissible_floor,
        "mean_count": float(np.mean(counts)),
    }


def check_weighted_sum(
    spec: EnsembleSpec,
    weights: Sequence[float],
    m: int,
    ell: int,
    t_grid: Sequence[float] = DEFAULT_T_GRID,
    trials: int = 20_000,
    stream: RngStream = RngStream(0),
    moment_orders: Sequence[float] = (2.0, 4.0, 8.0),
    directions: int = 32,
) -> TailReport:
    """Harness for weighted sums Y = sum_i x_i X_i of independent draws.

    Three sub-reports:

    - envelope: fitted C with sigma_Y(p) <= C (sqrt(p) |x| + p ||x||_inf)
      over the requested moment orders (estimated on the sample, so a lower
      bound on the true sup);
    - order statistic: fitted C in the two-regime bound for Y*(ell), with
      grid restricted to t >= C |x| log(eN/ell);
    - projection: fitted C on the threshold C t sqrt(m) log(eN/m) against
      the infinity-norm regime bound for the top-m norm of Y.  When
      ||x||_inf is at the regime boundary 1/sqrt(m) both branch bounds are
      evaluated and reported.
    """
    x = np.asarray(weights, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("`weights` must be a non-empty vector")
    norm_x = float(np.linalg.norm(x))
    if norm_x > 1.0 + 1e-12:
        raise ValueError("`weights` must have Euclidean norm at most 1")
    b = float(np.max(np.abs(x)))
    if b <= 0:
        raise ValueError("`weights` must be nonzero")
    n_dim = spec.dimension
    if not (1 <= m <= n_dim and 1 <= ell <= n_dim):
        raise ValueError("`m` and `ell` must lie in [1, N]")
    n_terms = x.size

    # one summand block per weight index keeps trials independent of workers
    y = np.zeros((trials, n_dim))
    for i in range(n_terms):
        y += x[i] * sample_block(spec, trials, stream.offset(i))

    log_nm = math.log(math.e * n_dim / m)
    scale_m = math.sqrt(m) * log_nm
    top_m = top_m_norm_rows(y, m)
    order_ell = np.sort(np.abs(y), axis=1)[:, n_dim - ell]

    # (a) moment envelope
    env_ratios = []
    for i, p in enumerate(moment_orders):
        sig_y = sigma_estimate_from_samples(y, float(p), directions, stream.offset(n_terms + i))
        env_ratios.append(sig_y / (math.sqrt(p) * norm_x + p * b))
    cal_env = CalibrationReport(
        bound_id="weighted_moment_envelope",
        fitted_c=float(max(env_ratios)),
        slope=float("nan"),
        passed=True,
        ceiling=math.inf,
        grid=np.asarray(moment_orders, dtype=float),
    )

    # (b) order statistic of Y
    log_ne = math.log(math.e * n_dim / ell)
    ord_desc = -np.sort(-order_ell)

    def ord_holds(c: float) -> bool:
        for t in t_grid:
            if t < c * norm_x * log_ne:
                continue
            expo = min(t * t * ell / max(norm_x, 1e-300) ** 2, t * math.sqrt(ell) / b)
            prob = math.exp(-expo / c)
            if t < _upper_level(ord_desc, prob):
                return False
        return True

    cal_order = CalibrationReport(
        bound_id="weighted_order_stat_two_regime",
        fitted_c=float(_fit_inner_constant(ord_holds)),
        slope=log_survival_slope(order_ell, np.asarray(t_grid, dtype=float)),
        passed=True,
        ceiling=math.inf,
        grid=np.asarray(t_grid, dtype=float),
    )

    # (c) top-m norm of Y, branched on the infinity-norm regime
    at_boundary = abs(b - 1.0 / math.sqrt(m)) <= 1e-12

    def bound_large_b(t: float) -> float:
        return math.exp(-t * scale_m / (b * math.sqrt(math.log(math.e**2 * b * b * m))))

    def bound_small_b(t: float) -> float:
        return math.exp(-min(t * t * m * log_nm**2, (t / b) * math.sqrt(m) * log_nm))

    branches = []
    if b >= 1.0 / math.sqrt(m) - 1e-12:
        branches.append(("projection_weighted_large_binf", bound_large_b))
    if b <= 1.0 / math.sqrt(m) + 1e-12:
        branches.append(("projection_weighted_small_binf", bound_small_b))
    cals_proj = [
        calibrate_constant(top_m, t_grid, lambda t: t * scale_m, fn, name)
        for name, fn in branches
    ]
    curve = survival_curve(
        top_m, np.asarray([t * scale_m for t in t_grid]), statistic=f"top_{m}_norm_weighted"
    )
    return TailReport(
        harness="weighted_sum",
        config={
            "kind": spec.kind.value,
            "dimension": n_dim,
            "terms": n_terms,
            "m": m,
            "ell": ell,
            "trials": trials,
            "t_grid": [float(t) for t in t_grid],
            "master_seed": stream.master_seed,
            "stream_index": stream.stream_index,
        },
        curve=curve,
        calibrations=[cal_env, cal_order] + cals_proj,
        extras={
            "weight_norm": norm_x,
            "weight_inf": b,
            "at_regime_boundary": at_boundary,
            "envelope_ratios": [float(r) for r in env_ratios],
        },
    )


def check_submatrix_tail(
    spec: EnsembleSpec,
    n_rows: int,
    k: int,
    m: int,
    t_grid: Sequence[float] = DEFAULT_T_GRID,
    trials: int = 2000,
    stream: RngStream = RngStream(0),
    pair_budget: int = 200_000,
    lower_restarts: int = 8,
) -> TailReport:
    """Tail harness for the k x m submatrix norm of an n x N sample matrix.

    Calibrates C in P(A_{k,m} >= C t lambda_{k,m}) <= exp(-t lambda_{k,m}
    / sqrt(log 3m)).  Uses exact enumeration when the pair budget allows and
    the alternating lower bound otherwise (flagged in the extras).
    """
    n_dim = spec.dimension
    lam = lambda_km(k, m, n_rows, n_dim)
    exact = math.comb(n_rows, k) * math.comb(n_dim, m) <= pair_budget

    def statistic(mat: np.ndarray) -> float:
        if exact:
            return akm_exact(mat, k, m, pair_budget=pair_budget).value
        return akm_lower(mat, k, m, lower_restarts, stream.offset(trials * n_rows)).value

    samples = _matrix_statistic_trials(spec, n_rows, trials, stream, statistic)
    denom = math.sqrt(math.log(3.0 * m))
    cal = calibrate_constant(
        samples,
        t_grid,
        threshold_formula=lambda t: t * lam,
        bound_formula=lambda t: math.exp(-t * lam / denom),
        bound_id="submatrix_norm_tail",
    )
    curve = survival_curve(
        samples, np.asarray([t * lam for t in t_grid]), statistic=f"akm_{k}_{m}"
    )
    return TailReport(
        harness="submatrix_tail",
        config={
            "kind": spec.kind.value,
            "dimension": n_dim,
            "n_rows": n_rows,
            "k": k,
            "m": m,
            "trials": trials,
            "t_grid": [float(t) for t in t_grid],
            "master_seed": stream.master_seed,
            "stream_index": stream.stream_index,
        },
        curve=curve,
        calibrations=[cal],
        extras={"lambda_km": lam, "exact": exact},
    )


def check_gram_convergence(
    spec: EnsembleSpec,
    n_grid: Sequence[int],
    trials: int = 500,
    stream: RngStream = RngStream(0),
) -> dict:
    """Gram-matrix convergence harness across a grid of row counts.

    For each n in the grid the statistic is the full deviation
    ||(1/n) A^T A - Id|| (equal to the restricted isometry deviation at
    m = N).  Reports per-n medians, the fitted constant in
    median <= C sqrt(N/n), and the log-log slope of median against n.
    """
    n_dim = spec.dimension
    n_grid = [int(v) for v in n_grid]
    if any(v < n_dim for v in n_grid):
        raise ValueError("every n in `n_grid` must be at least the dimension N")
    medians = []
    per_n = {}
    offset = 0
    for n_rows in n_grid:
        vals = _matrix_statistic_trials(
            spec,
            n_rows,
            trials,
            stream.offset(offset),
            lambda mat: delta_m_exact(mat, n_dim).value,
        )
        offset += trials * n_rows
        med = float(np.median(vals))
        medians.append(med)
        per_n[n_rows] = {
            "median": med,
            "mean": float(np.mean(vals)),
            "q90": float(np.quantile(vals, 0.9)),
        }
    fitted = max(
        med / math.sqrt(n_dim / n_rows) for med, n_rows in zip(medians, n_grid)
    )
    slope = float(
        np.polyfit(np.log(np.asarray(n_grid, dtype=float)), np.log(medians), 1)[0]
    )
    return {
        "harness": "gram_convergence",
        "config": {
            "kind": spec.kind.value,
            "dimension": n_dim,
            "n_grid": n_grid,
            "trials": trials,
            "master_seed": stream.master_seed,
            "stream_index": stream.stream_index,
        },
        "per_n": per_n,
        "medians": medians,
        "fitted_c": float(fitted),
        "loglog_slope": slope,
    }
