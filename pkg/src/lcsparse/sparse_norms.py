"""Submatrix operator norms, restricted isometry deviations, and sparse nets.

The quantities computed here live on an n x N matrix A:

- ``akm(A, k, m)``: the largest spectral norm of a k x m submatrix, maximized
  over all row subsets J of size k and column subsets I of size m.  Exact
  enumeration and an alternating-maximization lower bound are provided.
- ``delta_m(A, m)``: the restricted isometry deviation of A / sqrt(n), i.e.
  the worst eigenvalue deviation of (1/n) A_I^T A_I from the identity over
  all column subsets of size m.
- Threshold and envelope functions (``k_prime``, ``lambda_km``, ``lambda_m``,
  ``g_function``) describing where those norms concentrate.
- The block-size schedule and blockwise quantization used to build sparse
  epsilon-nets with controlled infinity-norm profiles, plus a direct
  sparse-sphere net constructor.

Norm kernels use power iteration on the smaller Gram matrix with residual
certification; dense factorizations are reserved for test oracles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .ensembles import RngStream
from .errors import BudgetExceeded, ConvergenceFailure

# ---------------------------------------------------------------------------
# Power-iteration kernels
# ---------------------------------------------------------------------------

_START_SEED = 0x5EED

_DEFAULT_PAIR_BUDGET = 2_000_000
_DEFAULT_SUBSET_BUDGET = 2_000_000


def _subsets(n: int, k: int) -> np.ndarray:
    """All k-subsets of range(n) in lexicographic order, as an (C, k) array."""
    combos = list(itertools.combinations(range(n), k))
    return np.array(combos, dtype=np.intp).reshape(len(combos), k)


def _start_vectors(dim: int, count: int) -> np.ndarray:
    """Deterministic pseudo-random unit start vectors for power iteration."""
    rng = np.random.default_rng(_START_SEED + dim)
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _gram_batch(mats: np.ndarray) -> np.ndarray:
    """The smaller of B^T B and B B^T for a (P, a, b) stack."""
    a, b = mats.shape[-2], mats.shape[-1]
    if a <= b:
        return mats @ mats.transpose(0, 2, 1)
    return mats.transpose(0, 2, 1) @ mats


def _block2_refine(gram: np.ndarray, tol: float, max_iter: int) -> float:
    """Top eigenvalue of one PSD matrix by 2-block subspace iteration.

    Handles a (near-)degenerate top pair, which stalls plain power
    iteration.  Returns the certified top Ritz value.
    """
    d = gram.shape[0]
    q = min(2, d)
    basis = _start_vectors(d, q).T
    basis, _ = np.linalg.qr(basis)
    theta = 0.0
    for _ in range(max_iter):
        w = gram @ basis
        basis, _ = np.linalg.qr(w)
        small = basis.T @ gram @ basis
        small = 0.5 * (small + small.T)
        evals, evecs = np.linalg.eigh(small)
        theta = float(evals[-1])
        y = basis @ evecs[:, -1]
        res = float(np.linalg.norm(gram @ y - theta * y))
        if res <= tol * max(theta, 1e-300):
            return theta
    raise ConvergenceFailure(
        "2-block subspace iteration did not certify the top eigenvalue",
        last_value=theta,
    )


def _top_eig_gram_batch(
    grams: np.ndarray,
    tol: float = 1e-11,
    max_iter: int = 2000,
    check_every: int = 10,
) -> np.ndarray:
    """Top eigenvalue of each PSD matrix in a (P, d, d) stack.

    Power iteration with residual certification; items that stall (typically
    a near-degenerate top pair) are refined individually by 2-block subspace
    iteration.  Raises :class:`ConvergenceFailure` if an item cannot be
    certified at all.
    """
    p, d = grams.shape[0], grams.shape[1]
    if d == 1:
        return grams[:, 0, 0].copy()
    v = np.broadcast_to(_start_vectors(d, 1)[0], (p, d)).copy()
    lam = np.zeros(p)
    converged = np.zeros(p, dtype=bool)
    for it in range(1, max_iter + 1):
        w = np.einsum("pij,pj->pi", grams, v)
        norms = np.linalg.norm(w, axis=1)
        dead = norms <= 1e-300
        if dead.any():
            # zero Gram: norm is exactly zero
            lam[dead] = 0.0
            converged[dead] = True
            norms[dead] = 1.0
            w[dead] = v[dead]
        v = w / norms[:, None]
        if it % check_every == 0 or it == max_iter:
            gv = np.einsum("pij,pj->pi", grams, v)
            lam = np.einsum("pi,pi->p", v, gv)
            res = np.linalg.norm(gv - lam[:, None] * v, axis=1)
            converged |= res <= tol * np.maximum(lam, 1e-300)
            if converged.all():
                break
    if not converged.all():
        for idx in np.nonzero(~converged)[0]:
            lam[idx] = _block2_refine(grams[idx], tol, max_iter * 5)
    return lam


def _top_singular_batch(mats: np.ndarray, tol: float = 1e-11) -> np.ndarray:
    """Largest singular value of each matrix in a (P, a, b) stack."""
    lam = _top_eig_gram_batch(_gram_batch(mats), tol=tol)
    return np.sqrt(np.maximum(lam, 0.0))


def _top_singular_pair(mat: np.ndarray, tol: float = 1e-11):
    """(sigma, u, v) with sigma the top singular value and u, v unit vectors."""
    a, b = mat.shape
    gram = _gram_batch(mat[None])[0]
    d = gram.shape[0]
    v = _start_vectors(d, 1)[0].copy()
    sigma2 = 0.0
    for it in range(1, 2001):
        w = gram @ v
        nrm = np.linalg.norm(w)
        if nrm <= 1e-300:
            sigma2 = 0.0
            break
        v = w / nrm
        if it % 10 == 0:
            gv = gram @ v
            sigma2 = float(v @ gv)
            if np.linalg.norm(gv - sigma2 * v) <= tol * max(sigma2, 1e-300):
                break
    else:
        sigma2 = _block2_refine(gram, tol, 10000)
        # recover an approximate eigenvector by one inverse-free sweep
        for _ in range(200):
            w = gram @ v
            nrm = np.linalg.norm(w)
            if nrm <= 1e-300:
                break
            v = w / nrm
    sigma = math.sqrt(max(sigma2, 0.0))
    if a <= b:
        left = v
        right = mat.T @ left
        rn = np.linalg.norm(right)
        right = right / rn if rn > 1e-300 else np.zeros(b)
    else:
        right = v
        left = mat @ right
        ln = np.linalg.norm(left)
        left = left / ln if ln > 1e-300 else np.zeros(a)
    return sigma, left, right


def operator_norm(mat: np.ndarray, tol: float = 1e-10) -> float:
    """Spectral norm of a matrix by certified power iteration.

    Iterates on the smaller Gram matrix and certifies through the Rayleigh
    residual; a stalled iteration falls back to a 2-block subspace refinement
    and raises :class:`ConvergenceFailure` if that cannot certify either.

    Parameters
    ----------
    mat : ndarray
        Any non-empty 2-d array.
    tol : float
        Relative residual target for the certification.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.size == 0:
        raise ValueError("`mat` must be a non-empty 2-d array")
    return float(_top_singular_batch(mat[None], tol=tol)[0])


# ---------------------------------------------------------------------------
# Submatrix norm maxima
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubmatrixResult:
    """Outcome of a submatrix-norm search.

    ``exact`` is True only for full enumeration; the alternating search sets
    it False and its value is a lower bound.
    """

    value: float
    row_subset: tuple
    col_subset: tuple
    evaluations: int
    exact: bool


def akm_exact(
    mat: np.ndarray,
    k: int,
    m: int,
    pair_budget: int = _DEFAULT_PAIR_BUDGET,
) -> SubmatrixResult:
    """Largest k x m submatrix spectral norm, by full enumeration.

    Subset pairs are scanned in lexicographic (row, column) order and ties
    resolve to the first maximizer, so the witness is deterministic.

    Raises
    ------
    BudgetExceeded
        If C(n, k) * C(N, m) exceeds ``pair_budget``; use :func:`akm_lower`
        instead at that size.
    """
    mat = np.asarray(mat, dtype=float)
    n, n_cols = mat.shape
    if not 1 <= k <= n:
        raise ValueError("`k` must satisfy 1 <= k <= n")
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= N")
    pairs = math.comb(n, k) * math.comb(n_cols, m)
    if pairs > pair_budget:
        raise BudgetExceeded(
            f"{pairs} subset pairs exceed the budget {pair_budget}; "
            "use akm_lower for a heuristic lower bound"
        )
    rows = _subsets(n, k)
    cols = _subsets(n_cols, m)
    n_col_subsets = cols.shape[0]
    # keep each stacked block of submatrices around 32 MB
    block_rows = max(1, int(4e6 / max(n_col_subsets * k * m, 1)))
    best_val = -np.inf
    best_flat = -1
    for r0 in range(0, rows.shape[0], block_rows):
        rblock = rows[r0 : r0 + block_rows]
        sub = mat[rblock[:, None, :, None], cols[None, :, None, :]]
        vals = _top_singular_batch(sub.reshape(-1, k, m))
        local = int(np.argmax(vals))
        if vals[local] > best_val:
            best_val = float(vals[local])
            best_flat = r0 * n_col_subsets + local
    row_ix = best_flat // n_col_subsets
    col_ix = best_flat % n_col_subsets
    return SubmatrixResult(
        value=best_val,
        row_subset=tuple(int(i) for i in rows[row_ix]),
        col_subset=tuple(int(i) for i in cols[col_ix]),
        evaluations=pairs,
        exact=True,
    )


def akm_lower(
    mat: np.ndarray,
    k: int,
    m: int,
    restarts: int,
    stream: RngStream,
    max_rounds: int = 60,
) -> SubmatrixResult:
    """Alternating-maximization lower bound for the k x m submatrix norm.

    Each restart r draws an initial (J, I) pair from ``stream.offset(r)``,
    then alternates: compute the top singular pair (u, v) of A(J, I), re-pick
    J as the k rows with the largest |A(:, I) v|, re-pick I as the m columns
    with the largest |u^T A(J, :)|, until the pair stabilizes.  The reported
    value is the best over restarts, so it is nondecreasing in ``restarts``
    for a fixed stream.
    """
    mat = np.asarray(mat, dtype=float)
    n, n_cols = mat.shape
    if not 1 <= k <= n:
        raise ValueError("`k` must satisfy 1 <= k <= n")
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= N")
    if restarts < 1:
        raise ValueError("`restarts` must be positive")
    best = SubmatrixResult(-np.inf, (), (), 0, False)
    evaluations = 0
    for r in range(restarts):
        rng = stream.offset(r).generator()
        rows = np.sort(rng.choice(n, size=k, replace=False))
        cols = np.sort(rng.choice(n_cols, size=m, replace=False))
        for _ in range(max_rounds):
            sub = mat[np.ix_(rows, cols)]
            sigma, u, v = _top_singular_pair(sub)
            evaluations += 1
            if sigma > best.value:
                best = SubmatrixResult(
                    float(sigma), tuple(int(i) for i in rows), tuple(int(i) for i in cols), 0, False
                )
            row_scores = np.abs(mat[:, cols] @ v)
            new_rows = np.sort(np.argpartition(-row_scores, k - 1)[:k])
            col_scores = np.abs(u @ mat[np.ix_(new_rows, np.arange(n_cols))])
            new_cols = np.sort(np.argpartition(-col_scores, m - 1)[:m])
            if np.array_equal(new_rows, rows) and np.array_equal(new_cols, cols):
                break
            rows, cols = new_rows, new_cols
    return SubmatrixResult(
        value=best.value,
        row_subset=best.row_subset,
        col_subset=best.col_subset,
        evaluations=evaluations,
        exact=False,
    )


def _profile_onecol(col: np.ndarray) -> np.ndarray:
    """max over |J| = k of the squared norm of col[J], for k = 0..n."""
    sq = np.sort(col**2)[::-1]
    return np.concatenate([[0.0], np.cumsum(sq)])


def _profile_anglesweep(rows: np.ndarray) -> np.ndarray:
    """Exact top-k quadratic-form maxima for 2-column rows, all k at once.

    For unit directions v(theta) the squared projections
    q_i(theta) = <r_i, v>^2 are sinusoids in 2*theta.  Their pointwise order
    changes only at pairwise crossing angles, so on each arc between
    consecutive crossings the top-k index set is constant and the k-sum is a
    single sinusoid whose arc maximum is closed form.  Returns the (n+1,)
    array of max_{|J|=k} lambda_max over J-row Gram sums.
    """
    n = rows.shape[0]
    # q_i(theta) = alpha_i + beta_i cos(2 theta) + gamma_i sin(2 theta)
    alpha = 0.5 * (rows[:, 0] ** 2 + rows[:, 1] ** 2)
    beta = 0.5 * (rows[:, 0] ** 2 - rows[:, 1] ** 2)
    gamma = rows[:, 0] * rows[:, 1]

    ii, jj = np.triu_indices(n, k=1)
    da = alpha[ii] - alpha[jj]
    db = beta[ii] - beta[jj]
    dg = gamma[ii] - gamma[jj]
    amp = np.hypot(db, dg)
    ok = amp > 1e-300
    ratio = np.clip(np.divide(-da, amp, out=np.zeros_like(da), where=ok), -1.0, 1.0)
    cross = ok & (np.abs(da) <= amp)
    phase = np.arctan2(dg, db)
    acos = np.arccos(ratio[cross])
    crossings = np.mod(
        np.concatenate([phase[cross] + acos, phase[cross] - acos]), 2.0 * np.pi
    )
    # close the circle explicitly; 0 and 2*pi must survive as distinct anchors
    theta = np.sort(np.concatenate([crossings, [0.0, 2.0 * np.pi]])) / 2.0
    mids = 0.5 * (theta[:-1] + theta[1:])
    widths = theta[1:] - theta[:-1]
    keep = widths > 1e-15
    mids, lo2, hi2 = mids[keep], 2.0 * theta[:-1][keep], 2.0 * theta[1:][keep]

    # rank the sinusoids on each arc at its midpoint
    q_mid = (
        alpha[None, :]
        + beta[None, :] * np.cos(2.0 * mids)[:, None]
        + gamma[None, :] * np.sin(2.0 * mids)[:, None]
    )
    rank = np.argsort(-q_mid, axis=1)
    s_alpha = np.cumsum(np.take_along_axis(np.broadcast_to(alpha, q_mid.shape), rank, 1), axis=1)
    s_beta = np.cumsum(np.take_along_axis(np.broadcast_to(beta, q_mid.shape), rank, 1), axis=1)
    s_gamma = np.cumsum(np.take_along_axis(np.broadcast_to(gamma, q_mid.shape), rank, 1), axis=1)

    # arc maximum of S_alpha + S_beta cos(2t) + S_gamma sin(2t)
    peak_amp = np.hypot(s_beta, s_gamma)
    peak_at = np.mod(np.arctan2(s_gamma, s_beta), 2.0 * np.pi)
    inside = (peak_at >= lo2[:, None]) & (peak_at <= hi2[:, None])
    end_lo = s_beta * np.cos(lo2)[:, None] + s_gamma * np.sin(lo2)[:, None]
    end_hi = s_beta * np.cos(hi2)[:, None] + s_gamma * np.sin(hi2)[:, None]
    osc = np.where(inside, peak_amp, np.maximum(end_lo, end_hi))
    per_k = (s_alpha + osc).max(axis=0)
    return np.concatenate([[0.0], per_k])


def akm_profile(
    mat: np.ndarray,
    m: int,
    subset_budget: int = 1 << 22,
) -> np.ndarray:
    """Exact A_{k,m} for every k = 0..n at once, as an (n+1,) array.

    For m <= 2 each column support is resolved by an exact direction sweep
    (see :func:`_profile_anglesweep`).  For larger m the Gram matrices of
    all 2^n row subsets are accumulated per support by a bitwise dynamic
    program, subject to ``subset_budget``; supports whose top-k row-norm
    sums cannot beat the running maxima are pruned without enumeration.
    """
    mat = np.asarray(mat, dtype=float)
    n, n_cols = mat.shape
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= N")
    cols = _subsets(n_cols, m)
    best = np.zeros(n + 1)

    if m <= 2:
        for sup in cols:
            rows = mat[:, sup]
            prof = _profile_onecol(rows[:, 0]) if m == 1 else _profile_anglesweep(rows)
            np.maximum.at(best, np.arange(n + 1), prof)
        return np.sqrt(np.maximum(best, 0.0))

    if 2**n > subset_budget:
        raise BudgetExceeded(f"2^{n} row subsets exceed the budget {subset_budget}")
    size = 1 << n
    popcount = np.bitwise_count(np.arange(size, dtype=np.uint64)).astype(np.intp)

    # Pruning bound: lambda_max of a Gram sum is at most its trace, so
    # A_{k,m}(I)^2 <= (sum of the k largest squared row norms on I).
    row_sq = mat**2
    sq_on_support = row_sq[:, cols].sum(axis=2).T  # (n_supports, n)
    sq_sorted = -np.sort(-sq_on_support, axis=1)
    upper = np.concatenate(
        [np.zeros((cols.shape[0], 1)), np.cumsum(sq_sorted, axis=1)], axis=1
    )
    order = np.argsort(-upper[:, n], kind="stable")

    for support_ix in order:
        if np.all(upper[support_ix] <= best):
            continue
        rows = mat[:, cols[support_ix]]  # (n, m)
        gram_flat = np.zeros((size, m, m))
        comp = rows[:, :, None] * rows[:, None, :]
        for bit in range(n):
            stride = 1 << bit
            view = gram_flat.reshape(size // (2 * stride), 2, stride, m, m)
            view[:, 1] = view[:, 0] + comp[bit]
        lam = _top_eig_gram_batch(gram_flat)
        np.maximum.at(best, popcount, lam)
    return np.sqrt(np.maximum(best, 0.0))


# ---------------------------------------------------------------------------
# Restricted isometry deviations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RipDeviation:
    """Worst eigenvalue deviation of the normalized Gram over column subsets.

    ``side`` records whether the top ("top") or bottom ("bottom") eigenvalue
    attains the deviation at the witness subset.
    """

    value: float
    col_subset: tuple
    side: str
    evaluations: int
    exact: bool


def _subset_deviations(scaled_gram: np.ndarray, cols: np.ndarray):
    """Deviation and side for each column subset of a normalized Gram."""
    sub = scaled_gram[cols[:, :, None], cols[:, None, :]]
    evals = np.linalg.eigvalsh(sub)
    top = evals[:, -1] - 1.0
    bottom = 1.0 - evals[:, 0]
    dev = np.maximum(top, bottom)
    side = np.where(top >= bottom, "top", "bottom")
    return dev, side


def delta_m_exact(
    mat: np.ndarray,
    m: int,
    subset_budget: int = _DEFAULT_SUBSET_BUDGET,
) -> RipDeviation:
    """Restricted isometry deviation of A / sqrt(n) over all size-m supports.

    For each column subset I (lexicographic order, first maximizer wins)
    computes the eigenvalue range of (1/n) A_I^T A_I and reports the largest
    of lambda_max - 1 and 1 - lambda_min.
    """
    mat = np.asarray(mat, dtype=float)
    n, n_cols = mat.shape
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= N")
    count = math.comb(n_cols, m)
    if count > subset_budget:
        raise BudgetExceeded(
            f"{count} column subsets exceed the budget {subset_budget}; "
            "use delta_m_lower instead"
        )
    scaled = (mat.T @ mat) / n
    cols = _subsets(n_cols, m)
    best_val = -np.inf
    best_ix = 0
    best_side = "top"
    block = max(1, int(2e6 / (m * m)))
    for c0 in range(0, count, block):
        chunk = cols[c0 : c0 + block]
        dev, side = _subset_deviations(scaled, chunk)
        local = int(np.argmax(dev))
        if dev[local] > best_val:
            best_val = float(dev[local])
            best_ix = c0 + local
            best_side = str(side[local])
    return RipDeviation(
        value=best_val,
        col_subset=tuple(int(i) for i in cols[best_ix]),
        side=best_side,
        evaluations=count,
        exact=True,
    )


def delta_m_lower(
    mat: np.ndarray,
    m: int,
    restarts: int,
    stream: RngStream,
    init: Optional[Sequence[int]] = None,
    max_sweeps: int = 200,
) -> RipDeviation:
    """Greedy local-swap lower bound for the restricted isometry deviation.

    Starts from a random size-m support (or ``init`` on the first restart),
    repeatedly applies the single column swap that most increases the
    deviation, and stops at a local maximum.  Best over restarts.
    """
    mat = np.asarray(mat, dtype=float)
    n, n_cols = mat.shape
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= N")
    if restarts < 1:
        raise ValueError("`restarts` must be positive")
    if init is not None and len(init) != m:
        raise ValueError("`init` must have exactly m column indices")
    scaled = (mat.T @ mat) / n
    best_val = -np.inf
    best_subset: tuple = ()
    best_side = "top"
    evaluations = 0
    for r in range(restarts):
        if r == 0 and init is not None:
            current = np.sort(np.asarray(init, dtype=np.intp))
        else:
            rng = stream.offset(r).generator()
            current = np.sort(rng.choice(n_cols, size=m, replace=False))
        dev, side = _subset_deviations(scaled, current[None, :])
        cur_val, cur_side = float(dev[0]), str(side[0])
        evaluations += 1
        for _ in range(max_sweeps):
            outside = np.setdiff1d(np.arange(n_cols), current)
            cands = []
            for pos in range(m):
                swapped = np.broadcast_to(current, (outside.size, m)).copy()
                swapped[:, pos] = outside
                cands.append(np.sort(swapped, axis=1))
            cands = np.vstack(cands)
            dev, side = _subset_deviations(scaled, cands)
            evaluations += cands.shape[0]
            pick = int(np.argmax(dev))
            if dev[pick] <= cur_val + 1e-15:
                break
            cur_val, cur_side = float(dev[pick]), str(side[pick])
            current = cands[pick]
        if cur_val > best_val:
            best_val = cur_val
            best_subset = tuple(int(i) for i in current)
            best_side = cur_side
    return RipDeviation(
        value=best_val,
        col_subset=best_subset,
        side=best_side,
        evaluations=evaluations,
        exact=False,
    )


# ---------------------------------------------------------------------------
# Threshold and envelope functions
# ---------------------------------------------------------------------------


def entropy_bound(z: float, n: int) -> float:
    """The subset-count exponent z * log(e * n / z), increasing on (0, n]."""
    if z <= 0:
        return 0.0
    return float(z * np.log(np.e * n / z))


def k_prime(m: int, n: int, n_cols: int) -> Optional[int]:
    """Smallest k <= n with k*log(e*n/k) >= m*log(e*N/m), or None.

    None means even k = n fails, i.e. the row side can never carry the
    column-side subset entropy.
    """
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= N")
    if n < 1:
        raise ValueError("`n` must be positive")
    target = entropy_bound(m, n_cols)
    ks = np.arange(1, n + 1, dtype=float)
    vals = ks * np.log(np.e * n / ks)
    hits = np.nonzero(vals >= target)[0]
    if hits.size == 0:
        return None
    return int(hits[0] + 1)


def lambda_km(k: int, m: int, n: int, n_cols: int) -> float:
    """Deviation scale for the k x m submatrix norm of an n x N matrix."""
    if not 1 <= k <= n:
        raise ValueError("`k` must satisfy 1 <= k <= n")
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= N")
    big = max(n_cols, n)
    return float(
        np.sqrt(np.log(np.log(3.0 * m))) * np.sqrt(m) * np.log(np.e * big / m)
        + np.sqrt(k) * np.log(np.e * n / k)
    )


def lambda_m(m: int, n: int, n_cols: int) -> float:
    """Uniform-in-k deviation scale for m-column submatrix norms."""
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= N")
    if n < 1:
        raise ValueError("`n` must be positive")
    big = max(n_cols, n)
    return float(
        np.sqrt(np.log(np.log(3.0 * m)))
        / np.sqrt(np.log(3.0 * m))
        * np.sqrt(m)
        * np.log(np.e * big / m)
    )


def g_function(z: float, m: int, n_cols: int) -> float:
    """Chaining envelope g(z) for row-subset sums at column sparsity m.

    Piecewise: for z < m the envelope is
    sqrt(z*m) / sqrt(log(e^2 m / z)) * log(e*N/m); for z >= m it is
    min(sqrt(z*m) * log(e*N/m), m * log^2(e*N/m)).  The z < m branch is used
    strictly below m; the two branches differ by a bounded factor at z = m.
    """
    if z <= 0:
        raise ValueError("`z` must be positive")
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= N")
    log_nm = np.log(np.e * n_cols / m)
    if z < m:
        return float(np.sqrt(z * m) / np.sqrt(np.log(np.e**2 * m / z)) * log_nm)
    return float(min(np.sqrt(z * m) * log_nm, m * log_nm**2))


# ---------------------------------------------------------------------------
# Block-size schedule
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockSizes:
    """Blockwise sparsity schedule (k_1, ..., k_{s+1}).

    ``sizes[0]`` is the total sparsity k, ``sizes[1]`` equals m, the sizes
    decrease geometrically down to ``sizes[s] = 1`` at the end, and every
    consecutive pair satisfies the entropy-versus-envelope inequality
    k_i log(e n / k_i) <= 20 g(k_{i+1}).
    """

    sizes: tuple
    s: int
    levels: tuple

    def __post_init__(self) -> None:
        if len(self.sizes) != self.s + 1:
            raise ValueError("`sizes` must have length s + 1")


def _solve_entropy(target: float, n: int, rel_tol: float = 1e-12) -> float:
    """Root of z*log(e*n/z) = target on (0, n]; target must be < n."""
    lo, hi = 0.0, float(n)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if entropy_bound(mid, n) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * max(hi, 1.0):
            break
    return 0.5 * (lo + hi)


def choose_block_sizes(k: int, m: int, n: int, n_cols: int) -> BlockSizes:
    """Geometric block-size schedule for sparse-net decompositions.

    Starting from level 1, each level solves the entropy equation
    h(l_i) = 10 * g(l_{i-1}) (with h(z) = z log(e n / z)), stopping at the
    first level that reaches m; if the target ever reaches h's maximum the
    remaining level jumps straight to m.  Block sizes then read the levels
    backwards: k_1 = k, k_i = min(m, ceil(l_{s+1-i})), so k_2 = m and
    k_{s+1} = 1.

    The returned schedule is validated: sizes 2..s lie in
    [m^(1/4)/6, m], the chain inequality k_i log(e n/k_i) <= 20 g(k_{i+1})
    holds for i = 1..s, and the last size is 1.

    Raises
    ------
    ValueError
        If preconditions fail (including k > k' when k' exists).
    RuntimeError
        If a constructed schedule violates its own invariants.
    """
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= N")
    if not 1 <= k <= n:
        raise ValueError("`k` must satisfy 1 <= k <= n")
    if n > n_cols:
        raise ValueError("`n` must not exceed `n_cols`")
    kp = k_prime(m, n, n_cols)
    if kp is not None and k > kp:
        raise ValueError(f"`k` must not exceed the crossover index k' = {kp}")

    levels = [1.0]
    s = None
    if levels[0] >= m:
        s = 1
    max_levels = 64
    while s is None:
        target = 10.0 * g_function(levels[-1], m, n_cols)
        if target >= n:
            levels.append(float(m))
            s = len(levels)
            break
        nxt = _solve_entropy(target, n)
        levels.append(nxt)
        if nxt >= m:
            s = len(levels)
        if len(levels) > max_levels:
            raise RuntimeError("block-size schedule failed to terminate")

    sizes = [int(k)]
    for i in range(2, s + 2):
        sizes.append(int(min(m, math.ceil(levels[s + 1 - i] - 1e-9))))
    sizes = tuple(sizes)

    # invariant validation
    if sizes[-1] != 1:
        raise RuntimeError("schedule must end at block size 1")
    if s >= 2 and sizes[1] != m:
        raise RuntimeError("second block size must equal m")
    low = m**0.25 / 6.0
    for i in range(1, s):
        if not low <= sizes[i] <= m:
            raise RuntimeError(f"block size k_{i + 1} = {sizes[i]} outside [m^(1/4)/6, m]")
    for i in range(s):
        lhs = entropy_bound(sizes[i], n)
        rhs = 20.0 * g_function(sizes[i + 1], m, n_cols)
        if lhs > rhs * (1 + 1e-9):
            raise RuntimeError(
                f"chain inequality fails at i = {i + 1}: {lhs:.6g} > 20 g = {rhs:.6g}"
            )
    return BlockSizes(sizes=sizes, s=s, levels=tuple(levels))


# ---------------------------------------------------------------------------
# Blockwise quantization onto sparse nets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NetDecomposition:
    """Blockwise quantization of a sparse unit vector.

    Attributes
    ----------
    blocks : list of (indices, values) pairs
        Disjoint-support quantized pieces, block i built with effective
        size ``effective_sizes[i]`` (zero-size blocks are empty).
    projection : ndarray
        The sum of the blocks; within k/(2n) of the input in Euclidean norm.
    effective_sizes : tuple
        Sizes after the leading blocks are trimmed so they total exactly k.
    cap_sizes : tuple
        The size k_{i+1} whose inverse square root caps block i's
        coordinates.
    """

    blocks: list
    projection: np.ndarray
    effective_sizes: tuple
    cap_sizes: tuple


def sparse_net_project(x: np.ndarray, sizes: BlockSizes) -> NetDecomposition:
    """Quantize a k-sparse unit vector onto the blockwise lattice net.

    Coordinates are ranked by magnitude; the largest go to the *last* block
    (size k_s), the next largest to block s-1, and so on.  Leading block
    sizes are trimmed so the total equals k.  Block i is rounded toward zero
    onto the lattice of step k_i / (2 n sqrt(k_i)); each coordinate stays
    within the cap 1/sqrt(k_{i+1}) automatically because rounding never
    increases magnitude.

    Guarantees (validated downstream): |x - projection| <= k/(2n), block
    supports are disjoint with |supp| <= k_i, and
    sum_i k_{i+1} * ||pi_i||_inf^2 <= 4.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if x.ndim != 1 or n == 0:
        raise ValueError("`x` must be a non-empty vector")
    k = sizes.sizes[0]
    nrm = np.linalg.norm(x)
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError("`x` must be a unit vector")
    support = np.count_nonzero(x)
    if support > k:
        raise ValueError(f"`x` has {support} nonzeros; at most k = {k} allowed")

    s = sizes.s
    block_sizes = list(sizes.sizes[:s])  # k_1 .. k_s
    cap_sizes = list(sizes.sizes[1 : s + 1])  # k_2 .. k_{s+1}

    # Trim the leading blocks so the effective sizes sum to exactly k.
    tail = 0
    j = s - 1
    while j >= 0:
        if tail + block_sizes[j] >= k:
            break
        tail += block_sizes[j]
        j -= 1
    effective = [0] * s
    effective[j] = k - tail
    for i in range(j + 1, s):
        effective[i] = block_sizes[i]

    order = np.argsort(-np.abs(x), kind="stable")
    blocks = []
    projection = np.zeros(n)
    pos = 0
    # fill from the last block (largest magnitudes) backwards
    assign = [np.empty(0, dtype=np.intp)] * s
    for i in range(s - 1, -1, -1):
        take = effective[i]
        assign[i] = order[pos : pos + take]
        pos += take
    for i in range(s):
        idx = assign[i]
        if idx.size == 0:
            blocks.append((idx, np.empty(0)))
            continue
        step = np.sqrt(effective[i]) / (2.0 * n)
        vals = np.trunc(x[idx] / step) * step
        cap = 1.0 / np.sqrt(cap_sizes[i])
        if np.any(np.abs(vals) > cap + 1e-12):
            raise RuntimeError("quantized block escaped its coordinate cap")
        blocks.append((idx, vals))
        projection[idx] = vals
    return NetDecomposition(
        blocks=blocks,
        projection=projection,
        effective_sizes=tuple(effective),
        cap_sizes=tuple(cap_sizes),
    )


# ---------------------------------------------------------------------------
# Sparse-sphere epsilon nets
# ---------------------------------------------------------------------------


def _sphere_net(m: int, eps: float) -> np.ndarray:
    """Deterministic eps-net of the unit sphere in R^m.

    Farthest-point greedy over a fine normalized lattice with threshold
    0.95 eps; the lattice is eps/20-dense on the sphere, so the union covers
    within eps.  A final prune drops points made redundant by later ones.
    """
    if m == 1:
        return np.array([[1.0], [-1.0]])
    h = eps / (20.0 * np.sqrt(m))
    axis = np.arange(-1.0, 1.0 + h / 2, h)
    grids = np.meshgrid(*([axis] * m), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    norms = np.linalg.norm(pts, axis=1)
    keep = (norms > 0.7) & (norms < 1.3)
    cand = pts[keep] / norms[keep, None]

    threshold = 0.95 * eps
    first = np.zeros(m)
    first[0] = 1.0
    net = [first]
    dist = np.linalg.norm(cand - first, axis=1)
    while True:
        far = int(np.argmax(dist))
        if dist[far] <= threshold:
            break
        net.append(cand[far].copy())
        dist = np.minimum(dist, np.linalg.norm(cand - cand[far], axis=1))
    net = np.array(net)

    if net.shape[0] <= 400:
        # prune points whose candidate cells other points already cover
        all_dist = np.linalg.norm(cand[:, None, :] - net[None, :, :], axis=2)
        alive = np.ones(net.shape[0], dtype=bool)
        for i in range(net.shape[0] - 1, -1, -1):
            alive[i] = False
            rest = all_dist[:, alive]
            if rest.size == 0 or np.any(rest.min(axis=1) > threshold):
                alive[i] = True
        net = net[alive]
    return net


def epsilon_net_sparse_sphere(
    n_cols: int,
    m: int,
    eps: float,
    point_budget: float = 1e7,
) -> np.ndarray:
    """Deterministic eps-net of the m-sparse unit sphere in R^N.

    One net of the m-dimensional unit sphere is built and embedded on every
    size-m coordinate support; exact duplicates across supports are merged.
    Every m-sparse unit vector is within eps of some net point supported on
    a superset of its own support.

    Raises
    ------
    BudgetExceeded
        If the volumetric cardinality bound C(N, m) * (1 + 2/eps)^m exceeds
        ``point_budget``.
    """
    if not 1 <= m <= n_cols:
        raise ValueError("`m` must satisfy 1 <= m <= N")
    if not 0 < eps < 1:
        raise ValueError("`eps` must lie in (0, 1)")
    cap = math.comb(n_cols, m) * (1.0 + 2.0 / eps) ** m
    if cap > point_budget:
        raise BudgetExceeded(
            f"volumetric bound {cap:.3g} exceeds the point budget {point_budget:.3g}"
        )
    base = _sphere_net(m, eps)
    supports = _subsets(n_cols, m)
    out = np.zeros((supports.shape[0] * base.shape[0], n_cols))
    row = 0
    for sup in supports:
        out[row : row + base.shape[0], sup] = base
        row += base.shape[0]
    return np.unique(out, axis=0)


# ---------------------------------------------------------------------------
# Interaction splitting
# ---------------------------------------------------------------------------


def split_interaction_bound(vectors: np.ndarray, subset_budget: int = 1 << 22):
    """Cross-term sum versus the best single cut, by full enumeration.

    For vectors x_1..x_n returns (total, best_cut, best_subset) where
    ``total`` is sum over i != j of <x_i, x_j> and ``best_cut`` maximizes
    sum over i in E, j not in E of <x_i, x_j> over all subsets E.  The
    guaranteed inequality is total <= 4 * best_cut.
    """
    x = np.asarray(vectors, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("`vectors` must be a (n, d) array with n >= 2")
    n = x.shape[0]
    if 2**n > subset_budget:
        raise BudgetExceeded(f"2^{n} subsets exceed the budget {subset_budget}")
    gram = x @ x.T
    total = float(gram.sum() - np.trace(gram))
    size = 1 << n
    masks = ((np.arange(size)[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
    row_tot = gram.sum(axis=1)
    term1 = masks @ row_tot
    term2 = np.einsum("si,ij,sj->s", masks, gram, masks, optimize=True)
    cuts = term1 - term2
    best = int(np.argmax(cuts))
    subset = tuple(int(i) for i in np.nonzero(masks[best])[0])
    return total, float(cuts[best]), subset
