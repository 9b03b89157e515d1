"""Certificates, l1 decoding against an enumeration oracle, phase diagrams."""

import itertools
import math

import numpy as np
import pytest

from lcsparse.ensembles import EnsembleKind, EnsembleSpec, RngStream, sample_matrix
from lcsparse.recovery import (
    _replica_profile_cache,
    basis_pursuit,
    phase_diagram,
    recovery_trial,
    rip_admissible_m,
    rip_certificate,
)
from lcsparse.sparse_norms import delta_m_exact

rng = np.random.default_rng(404)


# ---------------------------------------------------------------------------
# Oracle: minimum-l1 solution by basic-solution enumeration
# ---------------------------------------------------------------------------


def lp_min_l1(mat, y, tol=1e-9):
    """An optimum of min ||x||_1 s.t. mat x = y sits at a basic solution,
    so enumerate all column subsets of size <= n and keep the consistent
    ones with the smallest l1 norm."""
    n, n_cols = mat.shape
    best = None
    for size in range(0, n + 1):
        for cols in itertools.combinations(range(n_cols), size):
            sub = mat[:, cols]
            coef, residual, rank, _ = np.linalg.lstsq(sub, y, rcond=None)
            if np.linalg.norm(sub @ coef - y) > tol * max(1.0, np.linalg.norm(y)):
                continue
            x = np.zeros(n_cols)
            x[list(cols)] = coef
            norm = np.abs(x).sum()
            if best is None or norm < best:
                best = norm
    return best


# ---------------------------------------------------------------------------
# Admissibility scan
# ---------------------------------------------------------------------------


def brute_admissible(n, n_cols, theta, c=1.0):
    budget = c * theta * theta * n / math.log(3.0 / theta)
    best = 0
    for m in range(1, n_cols + 1):
        big = max(n, n_cols)
        lhs = m * math.log(math.log(3.0 * m)) * math.log(3.0 * big / m) ** 2
        if lhs <= budget:
            best = m
    return best


def test_rip_admissible_matches_bruteforce():
    for _ in range(30):
        n = int(rng.integers(4, 5000))
        n_cols = int(rng.integers(n, 10000))
        theta = float(rng.uniform(0.05, 0.9))
        got = rip_admissible_m(n, n_cols, theta)
        assert got["m_admissible"] == brute_admissible(n, n_cols, theta)


def test_rip_admissible_reports_empty_scan():
    got = rip_admissible_m(4, 8, 0.05)
    assert got["m_admissible"] == 0
    assert got["b_m"] is None and got["B_default"] == 1.0


def test_rip_admissible_rejects_bad_theta():
    with pytest.raises(ValueError):
        rip_admissible_m(10, 20, 1.5)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


def test_certificate_bound_recomputes_from_fields():
    spec = EnsembleSpec(EnsembleKind.EXPONENTIAL_PRODUCT, 10)
    st = RngStream(30, 0)
    mat = sample_matrix(spec, 8, st)
    cert = rip_certificate(mat, m=2, theta=0.25, replicas=4, stream=st.offset(8))
    want = 2 * cert.theta + 2 * (cert.akm_value**2 + cert.mean_sq_estimate) / 8
    assert cert.bound == pytest.approx(want, abs=1e-14)
    assert 0 <= cert.k_star <= 8


def test_certificate_replica_cache_shared_across_inputs():
    spec = EnsembleSpec(EnsembleKind.GAUSSIAN_PRODUCT, 9)
    replica_stream = RngStream(77, 1000)
    before = len(_replica_profile_cache)
    certs = []
    for idx in range(3):
        mat = sample_matrix(spec, 6, RngStream(77, idx * 6))
        certs.append(
            rip_certificate(mat, m=2, theta=0.25, replicas=5, stream=replica_stream)
        )
    assert len(_replica_profile_cache) == before + 1
    # all three certificates share the very same replica estimate
    assert len({c.mean_sq_estimate for c in certs}) == 1
    # replicas=0 works once the campaign is cached
    mat = sample_matrix(spec, 6, RngStream(77, 50))
    again = rip_certificate(mat, m=2, theta=0.25, replicas=5, stream=replica_stream)
    assert again.mean_sq_estimate == certs[0].mean_sq_estimate


def test_certificate_requires_replicas_without_cache():
    spec = EnsembleSpec(EnsembleKind.UNIFORM_CUBE, 7)
    st = RngStream(123456, 0)
    mat = sample_matrix(spec, 5, st)
    with pytest.raises(ValueError):
        rip_certificate(mat, m=2, theta=0.25, replicas=0, stream=st.offset(999))


def test_certificate_soundness_small_campaign():
    """The certificate must upper bound the realized deviation nearly always."""
    spec = EnsembleSpec(EnsembleKind.EXPONENTIAL_PRODUCT, 12)
    replica_stream = RngStream(500, 10_000)
    sound = 0
    for idx in range(10):
        st = RngStream(500, idx * 10)
        mat = sample_matrix(spec, 10, st)
        cert = rip_certificate(mat, m=2, theta=0.25, replicas=20,
                               stream=replica_stream, b_level=2.0)
        realized = delta_m_exact(mat.values, 2).value
        sound += cert.bound >= realized
    assert sound >= 9


# ---------------------------------------------------------------------------
# l1 decoding
# ---------------------------------------------------------------------------


def test_basis_pursuit_matches_lp_oracle_on_tiny_instances():
    hits = 0
    for trial in range(20):
        n = int(rng.integers(1, 4))
        n_cols = int(rng.integers(n + 1, 6))
        mat = rng.standard_normal((n, n_cols))
        x0 = np.zeros(n_cols)
        support = rng.choice(n_cols, size=min(n, 2), replace=False)
        x0[support] = rng.standard_normal(len(support))
        y = mat @ x0
        res = basis_pursuit(mat, y, tol=1e-10, max_iter=20000)
        assert res.converged
        want = lp_min_l1(mat, y)
        assert np.abs(res.x).sum() == pytest.approx(want, abs=1e-6)
        assert res.residual <= 1e-6
        hits += 1
    assert hits == 20


def test_basis_pursuit_zero_rhs():
    mat = rng.standard_normal((3, 6))
    res = basis_pursuit(mat, np.zeros(3))
    assert res.converged and np.allclose(res.x, 0.0)


def test_basis_pursuit_input_validation():
    with pytest.raises(ValueError):
        basis_pursuit(rng.standard_normal((5, 3)), np.zeros(5))  # n > N
    with pytest.raises(ValueError):
        basis_pursuit(rng.standard_normal((2, 4)), np.zeros(3))  # bad y length
    bad = np.vstack([np.ones(4), np.ones(4)])  # dependent rows
    with pytest.raises(ValueError):
        basis_pursuit(bad, np.array([1.0, 2.0]))


def test_basis_pursuit_nonconvergence_is_reported_not_raised():
    mat = rng.standard_normal((4, 12))
    y = mat @ rng.standard_normal(12)
    res = basis_pursuit(mat, y, tol=1e-14, max_iter=3)
    assert not res.converged
    assert res.iterations == 3
    assert np.isfinite(res.residual)


# ---------------------------------------------------------------------------
# Planted trials and diagrams
# ---------------------------------------------------------------------------


def test_recovery_trial_deterministic_and_sparse_success():
    spec = EnsembleSpec(EnsembleKind.GAUSSIAN_PRODUCT, 48)
    st = RngStream(8, 4)
    a = recovery_trial(spec, 24, 2, st)
    b = recovery_trial(spec, 24, 2, st)
    assert a == b
    assert a.success and a.rel_error <= 1e-4
    assert len(a.support) == 2


def test_recovery_trial_zero_sparsity():
    spec = EnsembleSpec(EnsembleKind.UNIFORM_CUBE, 16)
    t = recovery_trial(spec, 8, 0, RngStream(1, 0))
    assert t.success and t.rel_error == 0.0 and t.support == ()


def test_recovery_trial_rejects_bad_sparsity():
    spec = EnsembleSpec(EnsembleKind.UNIFORM_CUBE, 16)
    with pytest.raises(ValueError):
        recovery_trial(spec, 8, 17, RngStream(1, 0))


def test_phase_diagram_worker_invariance_and_stderr():
    spec = EnsembleSpec(EnsembleKind.GAUSSIAN_PRODUCT, 32)
    st = RngStream(15, 0)
    one = phase_diagram(spec, 16, [1, 2, 8], 8, st, workers=1)
    four = phase_diagram(spec, 16, [1, 2, 8], 8, st, workers=4)
    assert one.to_dict() == four.to_dict()
    for cell in one.cells:
        rate = cell["rate"]
        assert cell["stderr"] == pytest.approx(
            math.sqrt(rate * (1 - rate) / cell["trials"])
        )
    assert one.admissibility["theta"] == 0.25
