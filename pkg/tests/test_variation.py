import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mtmapelites.core import Archive
from mtmapelites.variation import EmptyArchiveError, VariationParams, iso_line_batch, \
    iso_line_variation, select_parents


def _archive(filled):
    a = Archive(10, 2)
    for t in filled:
        a.insert(t, np.full(2, t / 10), -float(t))
    return a


def test_empty_archive_raises():
    with pytest.raises(EmptyArchiveError):
        select_parents(Archive(3, 2), np.random.default_rng(0))


def test_single_filled_slot_forced():
    a = _archive([4])
    (i, e1), (j, e2) = select_parents(a, np.random.default_rng(0))
    assert i == j == 4
    assert e1.fitness == e2.fitness == -4.0


def test_selection_uniform_over_filled():
    a = _archive(range(10))
    rng = np.random.default_rng(1)
    counts = np.zeros(10)
    for _ in range(100_000):
        (i, _), _ = select_parents(a, rng)
        counts[i] += 1
    np.testing.assert_allclose(counts / 100_000, 0.1, atol=0.01)


def test_selection_independent():
    a = _archive([2, 7])
    rng = np.random.default_rng(2)
    diff = 0
    for _ in range(100_000):
        (i, _), (j, _) = select_parents(a, rng)
        diff += i != j
    assert diff / 100_000 == pytest.approx(0.5, abs=0.01)


def test_zero_strength_is_identity():
    x = np.array([0.1, 0.5, 0.9])
    y = np.array([0.3, 0.2, 0.0])
    child = iso_line_variation(x, y, VariationParams(0.0, 0.0), np.random.default_rng(0))
    np.testing.assert_array_equal(child, x)


def test_equal_parents_only_isotropic():
    x = np.full(4, 0.5)
    rng_a, rng_b = np.random.default_rng(5), np.random.default_rng(5)
    child = iso_line_variation(x, x, VariationParams(0.05, 0.7), rng_a)
    g = rng_b.standard_normal(4)
    np.testing.assert_allclose(child, x + 0.05 * g, rtol=0, atol=1e-15)


def test_line_term_mean():
    rng = np.random.default_rng(11)
    n = 100_000
    x_i = np.array([0.2, 0.5, 0.7])
    x_j = np.array([0.6, 0.4, 0.1])
    kids = iso_line_batch(np.tile(x_i, (n, 1)), np.tile(x_j, (n, 1)),
                          VariationParams(0.0, 1.0), rng, clip=False)
    tol = 3 * np.abs(x_j - x_i) / np.sqrt(n)
    assert np.all(np.abs(kids.mean(axis=0) - x_i) <= tol)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        iso_line_variation(np.zeros(2), np.zeros(3), VariationParams(), np.random.default_rng())


unit_vec = arrays(np.float64, 6, elements=st.floats(0, 1))


@given(unit_vec, unit_vec, st.floats(0, 5), st.floats(0, 5), st.integers(0, 2 ** 32 - 1))
def test_child_clipped(x, y, s1, s2, seed):
    child = iso_line_variation(x, y, VariationParams(s1, s2), np.random.default_rng(seed))
    assert child.shape == x.shape
    assert np.all((child >= 0) & (child <= 1))


@given(unit_vec, unit_vec, st.floats(0.001, 1), st.floats(0.001, 1), st.integers(0, 2 ** 32 - 1))
def test_line_perturbation_is_rank_one(x, y, s1, s2, seed):
    child = iso_line_variation(x, y, VariationParams(s1, s2), np.random.default_rng(seed),
                               clip=False)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(6)
    s = rng.standard_normal((1, 1))[0, 0]
    line = child - x - s1 * g
    np.testing.assert_allclose(line, s2 * s * (y - x), atol=1e-12)
    # parallel to the parent difference: the 2x2 minors all vanish
    d = y - x
    cross = np.outer(line, d) - np.outer(d, line)
    assert np.abs(cross).max() <= 1e-12


def test_deterministic_given_rng():
    x, y = np.full(5, 0.3), np.full(5, 0.6)
    a = iso_line_variation(x, y, VariationParams(), np.random.default_rng(42))
    b = iso_line_variation(x, y, VariationParams(), np.random.default_rng(42))
    assert a.tobytes() == b.tobytes()


def test_params_validation():
    with pytest.raises(ValueError):
        VariationParams(-0.1, 0.2)
    with pytest.raises(ValueError):
        VariationParams(0.1, float("inf"))
