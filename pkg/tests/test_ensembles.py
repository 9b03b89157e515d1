"""Sampler correctness against analytic laws and seeding contracts."""

import math

import numpy as np
import pytest
from scipy import integrate

from lcsparse.ensembles import (
    CUBE_HALF_WIDTH,
    EXPONENTIAL_SCALE,
    EnsembleKind,
    EnsembleSpec,
    RngStream,
    empirical_psi1,
    isotropy_report,
    l1_ball_radius,
    sample_block,
    sample_matrix,
    sample_vector,
)

ALL_KINDS = list(EnsembleKind)


# ---------------------------------------------------------------------------
# Seeding
# ---------------------------------------------------------------------------


def test_stream_determinism():
    spec = EnsembleSpec(EnsembleKind.EXPONENTIAL_PRODUCT, 6)
    a = sample_vector(spec, RngStream(123, 4))
    b = sample_vector(spec, RngStream(123, 4))
    assert np.array_equal(a, b)
    c = sample_vector(spec, RngStream(123, 5))
    assert not np.array_equal(a, c)
    d = sample_vector(spec, RngStream(124, 4))
    assert not np.array_equal(a, d)


def test_matrix_rows_are_per_index_substreams():
    """Row i of a sampled matrix equals the vector drawn at offset i."""
    spec = EnsembleSpec(EnsembleKind.GAUSSIAN_PRODUCT, 5)
    st = RngStream(9, 100)
    mat = sample_matrix(spec, 4, st)
    for i in range(4):
        row = sample_vector(spec, st.offset(i))
        assert np.array_equal(mat.values[i], row)


def test_offset_composes():
    st = RngStream(1, 10)
    assert st.offset(3).offset(4) == st.offset(7)
    assert st.offset(0) == st


def test_sample_block_matches_single_stream_draws():
    spec = EnsembleSpec(EnsembleKind.UNIFORM_CUBE, 3)
    st = RngStream(5, 2)
    block = sample_block(spec, 10, st)
    assert block.shape == (10, 3)
    # one stream, one contiguous draw: repeatable
    again = sample_block(spec, 10, st)
    assert np.array_equal(block, again)


# ---------------------------------------------------------------------------
# Analytic laws
# ---------------------------------------------------------------------------


def test_exponential_coordinate_tail():
    """Variance-one two-sided exponential: P(|E| >= s) = exp(-sqrt(2) s)."""
    spec = EnsembleSpec(EnsembleKind.EXPONENTIAL_PRODUCT, 1)
    draws = sample_block(spec, 200000, RngStream(77, 0)).ravel()
    for s in (0.5, 1.0, 2.0):
        p = math.exp(-math.sqrt(2.0) * s)
        se = math.sqrt(p * (1.0 - p) / draws.size)
        assert abs(np.mean(np.abs(draws) >= s) - p) <= 3.0 * se


def test_exponential_scale_constant():
    assert EXPONENTIAL_SCALE == pytest.approx(1.0 / math.sqrt(2.0))
    # variance of Laplace(b) is 2 b^2
    assert 2.0 * EXPONENTIAL_SCALE**2 == pytest.approx(1.0)


def test_cube_support_and_variance():
    spec = EnsembleSpec(EnsembleKind.UNIFORM_CUBE, 4)
    draws = sample_block(spec, 50000, RngStream(3, 1))
    assert np.all(np.abs(draws) <= CUBE_HALF_WIDTH + 1e-12)
    assert CUBE_HALF_WIDTH == pytest.approx(math.sqrt(3.0))
    assert np.var(draws) == pytest.approx(1.0, abs=0.02)


def test_l1_ball_radius_against_quadrature():
    """Coordinate second moment of the unit-radius simplex body.

    For the unnormalized l1 ball the first coordinate has density
    proportional to (1 - |t|)^(N-1) on [-1, 1]; the scaling radius must
    make the product of radius^2 with that second moment equal one.
    """
    for n_dim in (2, 3, 7):
        num, _ = integrate.quad(lambda t: t * t * (1 - abs(t)) ** (n_dim - 1), -1, 1)
        den, _ = integrate.quad(lambda t: (1 - abs(t)) ** (n_dim - 1), -1, 1)
        second_moment = num / den
        assert l1_ball_radius(n_dim) ** 2 * second_moment == pytest.approx(1.0, rel=1e-10)


def test_l1_ball_draws_stay_in_scaled_ball():
    spec = EnsembleSpec(EnsembleKind.UNIFORM_L1_BALL, 5)
    draws = sample_block(spec, 20000, RngStream(11, 0))
    radius = l1_ball_radius(5)
    norms = np.abs(draws).sum(axis=1)
    assert np.all(norms <= radius * (1 + 1e-12))
    assert np.var(draws) == pytest.approx(1.0, abs=0.03)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_isotropy_all_kinds(kind):
    report = isotropy_report(EnsembleSpec(kind, 8), 40000, RngStream(21, 0))
    assert report.mean_norm < 0.04
    assert report.cov_max_abs_dev < 0.06


def test_psi1_of_exponential_coordinate():
    """E exp(|Z|/c) = 1/(1 - b/c) for Laplace scale b, so the psi1 norm
    (level 2) is exactly 2b = sqrt(2)."""
    spec = EnsembleSpec(EnsembleKind.EXPONENTIAL_PRODUCT, 1)
    draws = sample_block(spec, 100000, RngStream(13, 0)).ravel()
    est = empirical_psi1(draws)
    assert est == pytest.approx(math.sqrt(2.0), abs=0.05)


def test_isotropy_report_deterministic():
    spec = EnsembleSpec(EnsembleKind.EXPONENTIAL_PRODUCT, 4)
    a = isotropy_report(spec, 5000, RngStream(2, 3)).to_dict()
    b = isotropy_report(spec, 5000, RngStream(2, 3)).to_dict()
    assert a == b
