"""Order statistics, exceedance counts, and weak-moment growth models.

The central objects are the nonincreasing rearrangement of the coordinate
magnitudes of a random vector, the sup of Euclidean norms of m-coordinate
projections (``top_m_norm``), and the direction-sup moment growth function

    sigma(p) = sup over unit t of (E |<t, X>|^p)^(1/p),  p >= 2,

together with its generalized inverse.  Two models are provided: the generic
log-concave envelope sigma(p) = p, and an empirical model interpolated on a
grid of estimated values.  Threshold solvers built on the inverse locate the
sparsity scale where projection tails change regime.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .ensembles import EnsembleSpec, RngStream, sample_block

# ---------------------------------------------------------------------------
# Rearrangements, counts, projection norms
# ---------------------------------------------------------------------------


def rearrange_desc(x: np.ndarray) -> np.ndarray:
    """Coordinate magnitudes sorted in nonincreasing order.

    ``rearrange_desc(x)[ell - 1]`` is the ell-th largest of the |x(i)|.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("`x` must be a non-empty vector")
    return np.sort(np.abs(x))[::-1]


def count_exceed(x: np.ndarray, threshold: float, signed: bool = True) -> int:
    """Number of coordinates at or above a level (closed event).

    With ``signed=True`` counts ``x(i) >= threshold``; with ``signed=False``
    counts ``|x(i)| >= threshold``.  The comparison is non-strict in both
    modes so that survival-curve conventions match exactly.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("`x` must be a non-empty vector")
    vals = x if signed else np.abs(x)
    return int(np.count_nonzero(vals >= threshold))


def top_m_norm(x: np.ndarray, m: int) -> float:
    """Euclidean norm of the m largest-magnitude coordinates.

    Equals the maximum of |P_I x| over all coordinate subsets I of size m,
    since the best subset keeps the m largest magnitudes.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("`x` must be a non-empty vector")
    if not 1 <= m <= x.size:
        raise ValueError("`m` must be between 1 and len(x)")
    sq = x * x
    if m == x.size:
        return float(np.sqrt(sq.sum()))
    top = np.partition(sq, x.size - m)[x.size - m :]
    return float(np.sqrt(top.sum()))


def top_m_norm_rows(rows: np.ndarray, m: int) -> np.ndarray:
    """Row-wise :func:`top_m_norm` for a (trials, N) sample block."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2:
        raise ValueError("`rows` must be a 2-d array")
    n_cols = rows.shape[1]
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must be between 1 and the row length")
    sq = rows * rows
    if m == n_cols:
        return np.sqrt(sq.sum(axis=1))
    top = np.partition(sq, n_cols - m, axis=1)[:, n_cols - m :]
    return np.sqrt(top.sum(axis=1))


# ---------------------------------------------------------------------------
# Moment growth models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaModel:
    """Moment growth function sigma(p) on p >= 2 with its inverse.

    Two kinds:

    - ``generic``: the log-concave envelope sigma(p) = p.  Exact inverse.
    - ``empirical``: nondecreasing piecewise-linear interpolation of a grid
      of estimated values.  Estimates carry lower-bound semantics (a finite
      direction search can only under-shoot the true sup), so the inverse is
      an upper bound on the true inverse.

    The doubling property sigma(t*p) <= 2*t*sigma(p) for t >= 1 is asserted
    on construction for empirical grids.
    """

    p_grid: np.ndarray
    sigma_grid: np.ndarray
    generic: bool = False

    @staticmethod
    def generic_log_concave() -> "SigmaModel":
        """The envelope model sigma(p) = p for p >= 2."""
        p = np.array([2.0, 4.0])
        return SigmaModel(p_grid=p, sigma_grid=p.copy(), generic=True)

    @staticmethod
    def empirical(p_grid: Sequence[float], sigma_values: Sequence[float]) -> "SigmaModel":
        """Model from a grid of (p, sigma-hat) pairs.

        Values are forced nondecreasing by a running maximum; this preserves
        lower-bound semantics since each estimate already under-shoots.
        """
        p = np.asarray(p_grid, dtype=float)
        s = np.asarray(sigma_values, dtype=float)
        if p.ndim != 1 or p.size < 2 or s.shape != p.shape:
            raise ValueError("`p_grid` and `sigma_values` must be matching vectors, length >= 2")
        if p[0] < 2.0 or np.any(np.diff(p) <= 0):
            raise ValueError("`p_grid` must be strictly increasing and start at p >= 2")
        if np.any(s <= 0):
            raise ValueError("`sigma_values` must be positive")
        s = np.maximum.accumulate(s)
        model = SigmaModel(p_grid=p, sigma_grid=s, generic=False)
        model._assert_doubling()
        return model

    def value(self, p: float) -> float:
        """sigma(p); for empirical models p must lie inside the grid."""
        if p < 2.0:
            raise ValueError("`p` must be at least 2")
        if self.generic:
            return float(p)
        if p > self.p_grid[-1] + 1e-12:
            raise ValueError("`p` is beyond the empirical grid")
        return float(np.interp(p, self.p_grid, self.sigma_grid))

    @property
    def floor(self) -> float:
        """sigma at the left end of the domain (p = 2)."""
        return 2.0 if self.generic else float(self.sigma_grid[0])

    @property
    def p_max(self) -> float:
        return np.inf if self.generic else float(self.p_grid[-1])

    def inverse(self, s: float) -> float:
        """Largest p with sigma(p) <= s.

        For the generic model this is exactly s.  For empirical models the
        sup is resolved on the interpolated function; values of ``s`` at or
        above the top of the grid saturate at the largest grid point.

        Raises
        ------
        ValueError
            If ``s`` is below sigma(2), where no p >= 2 qualifies.
        """
        if s < self.floor:
            raise ValueError("`s` is below sigma(2); the inverse is empty")
        if self.generic:
            return float(s)
        sig = self.sigma_grid
        idx = int(np.searchsorted(sig, s, side="right"))
        if idx >= sig.size:
            return float(self.p_grid[-1])
        # sigma is linear on [p_{idx-1}, p_idx] with sig[idx] > s >= sig[idx-1]
        p_lo, p_hi = self.p_grid[idx - 1], self.p_grid[idx]
        s_lo, s_hi = sig[idx - 1], sig[idx]
        return float(p_lo + (s - s_lo) / (s_hi - s_lo) * (p_hi - p_lo))

    def _assert_doubling(self) -> None:
        """Check sigma(t*p) <= 2*t*sigma(p) on grid-supported (p, t) pairs."""
        for i, p in enumerate(self.p_grid):
            targets = self.p_grid[i:]
            t = targets / p
            lhs = self.sigma_grid[i:]
            rhs = 2.0 * t * self.sigma_grid[i]
            if np.any(lhs > rhs * (1 + 1e-9)):
                j = int(np.argmax(lhs > rhs * (1 + 1e-9)))
                raise ValueError(
                    "sigma grid violates the doubling property at "
                    f"p={p:g}, t={t[j]:g}"
                )


def sigma_estimate_from_samples(
    samples: np.ndarray,
    p: float,
    directions: int,
    stream: RngStream,
    ascent_steps: int = 50,
) -> float:
    """Direction-sup p-th moment estimate from a fixed sample block.

    Candidates are the coordinate directions plus ``directions`` random unit
    vectors, refined by projected gradient ascent on the empirical moment.
    The result is a lower bound on the true sup over the sphere (the search
    is finite), up to Monte Carlo error in the moment itself.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2:
        raise ValueError("`samples` must be a (trials, N) array")
    trials, n_dim = x.shape
    if p < 2.0:
        raise ValueError("`p` must be at least 2")

    def moment(t: np.ndarray) -> float:
        proj = x @ t
        return float(np.mean(np.abs(proj) ** p) ** (1.0 / p))

    cands = [np.eye(n_dim)]
    if directions > 0:
        extra = stream.generator().standard_normal((directions, n_dim))
        extra /= np.linalg.norm(extra, axis=1, keepdims=True)
        cands.append(extra)
    cand = np.vstack(cands)
    proj = x @ cand.T
    vals = np.mean(np.abs(proj) ** p, axis=0) ** (1.0 / p)
    best = cand[int(np.argmax(vals))].copy()
    best_val = float(np.max(vals))

    # Projected gradient ascent with a crude adaptive step.
    step = 0.5
    for _ in range(ascent_steps):
        z = x @ best
        grad = (np.abs(z) ** (p - 1) * np.sign(z)) @ x / trials
        cand_dir = best + step * grad / max(np.linalg.norm(grad), 1e-300)
        cand_dir /= np.linalg.norm(cand_dir)
        val = moment(cand_dir)
        if val > best_val + 1e-14:
            best, best_val = cand_dir, val
            step *= 1.5
        else:
            step *= 0.5
            if step < 1e-8:
                break
    return best_val


def sigma_estimate(
    spec: EnsembleSpec,
    p: float,
    trials: int,
    directions: int,
    stream: RngStream,
) -> float:
    """Monte Carlo estimate of sigma_X(p) for an ensemble.

    Requires ``trials >= 1000 * p`` so the p-th moment has workable variance;
    the draw uses ``stream`` and the direction search uses ``stream.offset(1)``.
    """
    if trials < 1000 * p:
        raise ValueError("`trials` must be at least 1000 * p for a stable moment")
    samples = sample_block(spec, trials, stream)
    return sigma_estimate_from_samples(samples, p, directions, stream.offset(1))


def empirical_sigma_model(
    spec: EnsembleSpec,
    p_grid: Sequence[float],
    trials: int,
    directions: int,
    stream: RngStream,
) -> SigmaModel:
    """Empirical :class:`SigmaModel` estimated on a grid of moments.

    One shared sample block is used for every grid point; the direction
    searches use per-point sub-streams.
    """
    p_arr = np.asarray(p_grid, dtype=float)
    if p_arr.size < 2:
        raise ValueError("`p_grid` needs at least two points")
    if trials < 1000 * float(p_arr[-1]):
        raise ValueError("`trials` must be at least 1000 * max(p_grid)")
    samples = sample_block(spec, trials, stream)
    values = [
        sigma_estimate_from_samples(samples, float(p), directions, stream.offset(1 + i))
        for i, p in enumerate(p_arr)
    ]
    return SigmaModel.empirical(p_arr, values)


# ---------------------------------------------------------------------------
# Threshold solvers
# ---------------------------------------------------------------------------


class M0Result(NamedTuple):
    """Result of :func:`m0_threshold`.

    ``value`` is 0 with ``empty=True`` when no k in [1, m] satisfies the
    defining inequality (possible at small t); downstream bound evaluation
    then treats the scale as 1 and flags the report.
    """

    value: int
    empty: bool


def m0_threshold(model: SigmaModel, t: float, m: int, n_cols: int) -> M0Result:
    """Largest k <= m with k*log(e*N/k) <= inverse-sigma(t*sqrt(m)*log(e*N/m)).

    Parameters
    ----------
    model : SigmaModel
    t : float
        Tail parameter, at least 1.
    m : int
        Projection size, 1 <= m <= N.
    n_cols : int
        Ambient dimension N.
    """
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= n_cols")
    if t < 1.0:
        raise ValueError("`t` must be at least 1")
    s_arg = t * np.sqrt(m) * np.log(np.e * n_cols / m)
    if s_arg < model.floor:
        return M0Result(0, True)
    p_star = model.inverse(s_arg)
    ks = np.arange(1, m + 1, dtype=float)
    ok = ks * np.log(np.e * n_cols / ks) <= p_star
    if not ok.any():
        return M0Result(0, True)
    return M0Result(int(ks[ok][-1]), False)


def m1_threshold(b: float, m: int, n_cols: int, rel_tol: float = 1e-10) -> float:
    """Root of z*log(e*N/z) = (sqrt(m)/b) * log(e*N/m) on (0, N].

    The left side is strictly increasing on (0, N], and the right side lies
    in its range whenever 1/sqrt(m) <= b <= 1, so the root exists and is
    unique.  Solved by bisection to relative tolerance ``rel_tol``.
    """
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= n_cols")
    if not (1.0 / np.sqrt(m) <= b <= 1.0 + 1e-12):
        raise ValueError("`b` must lie in [1/sqrt(m), 1]")
    n_f = float(n_cols)
    rhs = np.sqrt(m) / b * np.log(np.e * n_cols / m)

    def f(z: float) -> float:
        return z * np.log(np.e * n_f / z)

    lo, hi = 0.0, n_f
    # f(0+) -> 0 < rhs <= f(N) = N, so the bracket is valid from the start.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < rhs:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * hi:
            break
    return 0.5 * (lo + hi)


def omega_cutoff(t: float, m: int, n_cols: int, scale: float = 1.0) -> float:
    """Projection-norm cutoff scale * t * sqrt(m) * log(e*N/m)."""
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= n_cols")
    if t <= 0:
        raise ValueError("`t` must be positive")
    return float(scale * t * np.sqrt(m) * np.log(np.e * n_cols / m))
