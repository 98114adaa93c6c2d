import pytest
import numpy as np
from fractions import Fraction
from itertools import combinations
from math import comb

from sykchaosanalysis.utils import couplings as cpl
from sykchaosanalysis.utils.errors import ParameterError


def brute_force_overlapping(N, M):
    return [
        (r1, s1, r2, s2)
        for r1, s1, r2, s2 in combinations(range(1, N + 1), 4)
        if s1 - r1 < M and s2 - r2 < M
    ]


def test_qudit_variance_formula():
    assert cpl.qudit_variance(3, 4, 2) == pytest.approx(1.0 / (6 * (16.0 / 3.0) ** 2))
    assert cpl.qudit_variance(2, 5, 3) == pytest.approx(1.0 / (10 * 3.0**3))


def test_sachdev_ye_variance_formula():
    assert cpl.sachdev_ye_variance(3, 4) == pytest.approx(1.0 / (6 * 8 * (2.0 / 3.0) ** 2))


@pytest.mark.parametrize("N", range(6, 42, 2))
def test_overlapping_m2_variance_identity(N):
    rescaled = Fraction(6, N**3) * Fraction(comb(N, 4), comb(N - 2, 2))
    assert cpl.overlapping_m2_variance(N, exact=True) == rescaled
    assert cpl.overlapping_m2_variance(N, exact=True) == Fraction(N - 1, 2 * N**2)


@pytest.mark.parametrize("N", [4, 5])
def test_overlapping_m2_variance_needs_six_majoranas(N):
    with pytest.raises(ParameterError):
        cpl.overlapping_m2_variance(N)


@pytest.mark.parametrize("N", [6, 8, 12, 16])
def test_general_variance_reduces_to_m2(N):
    assert cpl.overlapping_variance(N, 2, 2, exact=True) == cpl.overlapping_m2_variance(N, exact=True)


def test_syk_variance():
    assert cpl.syk_variance(12, 4, exact=True) == Fraction(6, 12**3)
    assert cpl.syk_variance(10, 2) == pytest.approx(0.1)
    with pytest.raises(ParameterError):
        cpl.syk_variance(7, 4)


@pytest.mark.parametrize("M", [2, 3, 4])
@pytest.mark.parametrize("N", [4, 6, 8, 10, 12, 14, 16])
def test_overlapping_support_matches_enumeration(N, M):
    assert cpl.overlapping_support(N, M, 2) == brute_force_overlapping(N, M)


def test_overlapping_m2_count():
    for N in range(4, 24, 2):
        assert len(cpl.overlapping_support(N, 2, 2)) == comb(N - 2, 2)


def test_term_counts_against_syk():
    assert len(cpl.overlapping_support(12, 2, 2)) == 45
    assert len(cpl.syk_support(12, 4)) == 495


def test_full_range_recovers_syk():
    assert cpl.overlapping_support(10, 10, 2) == cpl.syk_support(10, 4)
    restricted = set(cpl.overlapping_support(10, 4, 2))
    assert restricted < set(cpl.syk_support(10, 4))


def test_overlapping_terms_stay_short_range():
    for r1, s1, r2, s2 in cpl.overlapping_support(14, 3, 2):
        assert r1 < s1 < r2 < s2
        assert s1 - r1 < 3 and s2 - r2 < 3


def test_qudit_support_size():
    support = cpl.qudit_support(3, 4, 2)
    assert len(support) == comb(4, 2) * 8**2
    assert support[0] == ((1, 1), (2, 1))


@pytest.mark.parametrize("paulis, count", [((1, 2, 3), 81), ((1, 2), 16)])
def test_clusters_spin_support_size(paulis, count):
    support = cpl.clusters_spin_support(3, 2, paulis)
    assert len(support) == comb(3, 2) * count
    assert all(len(index) == 6 for index in support)


def test_gauged_windows():
    psi = cpl.gauged_cluster_windows(2, 6, "psi")
    # three qubits per cluster: C(3, 2) site pairs times four flavours
    assert len(psi[0]) == 12
    assert (1, 3) in psi[0] and (7, 9) in psi[1]
    chi = cpl.gauged_cluster_windows(2, 4, "chi")
    assert chi[1] == list(combinations(range(5, 9), 2))


def test_gauged_support_couples_distinct_clusters():
    support = cpl.gauged_support(3, 4, "psi")
    assert len(support) == comb(3, 2) * 4 * 4
    assert all(i < j for i, _, _, j, _, _ in support)


def test_counter_gaussians_order_independent():
    indices = cpl.syk_support(10, 4)
    values = cpl.counter_gaussians(7, 3, "original_syk", indices, 1.0)
    permutation = np.random.default_rng(0).permutation(len(indices))
    shuffled = cpl.counter_gaussians(7, 3, "original_syk", [indices[k] for k in permutation], 1.0)
    assert np.array_equal(shuffled, values[permutation])
    subset = cpl.counter_gaussians(7, 3, "original_syk", indices[:10], 1.0)
    assert np.array_equal(subset, values[:10])


def test_counter_gaussians_keys():
    indices = cpl.syk_support(10, 4)
    base = cpl.counter_gaussians(0, 0, "original_syk", indices, 1.0)
    assert not np.array_equal(base, cpl.counter_gaussians(1, 0, "original_syk", indices, 1.0))
    assert not np.array_equal(base, cpl.counter_gaussians(0, 1, "original_syk", indices, 1.0))
    assert not np.array_equal(base, cpl.counter_gaussians(0, 0, "overlapping_clusters_syk", indices, 1.0))
    assert np.array_equal(base, cpl.counter_gaussians(0, 0, "original_syk", indices, 1.0))


def test_counter_gaussians_moments():
    indices = cpl.syk_support(20, 4)
    values = cpl.counter_gaussians(11, 0, "original_syk", indices, 0.25)
    assert values.size == 4845
    assert abs(values.mean()) < 0.05
    assert values.var() == pytest.approx(0.25, rel=0.1)


def test_counter_gaussians_rejects_negative_variance():
    with pytest.raises(ParameterError):
        cpl.counter_gaussians(0, 0, "original_syk", [(1, 2, 3, 4)], -1.0)


def test_counter_gaussians_follow_philox_stream():
    indices = [(1, 2, 3, 4), (2, 3, 5, 8)]
    key = cpl.sample_key(5, 2, "original_syk")
    expected = []
    for code in cpl.index_codes(indices):
        generator = np.random.Generator(np.random.Philox(key=(key << 64) | int(code)))
        expected.append(generator.standard_normal())
    values = cpl.counter_gaussians(5, 2, "original_syk", indices, 4.0)
    np.testing.assert_array_equal(values, 2.0 * np.array(expected))
