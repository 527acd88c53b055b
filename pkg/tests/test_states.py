import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbattery.errors import InvalidArgumentError
from qbattery.states import StateKind, make_coherent, make_fock, make_gibbs, make_state

from conftest import K_SWEEP, all_states


class TestFock:
    @pytest.mark.parametrize("K", [1, 3, 20])
    def test_point_mass(self, K):
        s = make_fock(K)
        p = s.distribution.probabilities
        assert p[K] == 1.0
        assert np.count_nonzero(p) == 1
        assert s.distribution.mean() == K
        assert s.pair_moment == 0
        assert s.number_variance == 0

    @pytest.mark.parametrize("bad", [0, -2, 2.5, True])
    def test_rejects_bad_K(self, bad):
        with pytest.raises(InvalidArgumentError):
            make_fock(bad)


class TestCoherent:
    def test_poisson_weights_K3(self):
        p = make_coherent(3, tail_tol=1e-12).distribution.probabilities
        assert p[0] == pytest.approx(math.exp(-3), rel=1e-13)
        assert p[0] == pytest.approx(0.049787068367863943, rel=1e-13)
        assert p[3] == pytest.approx(27 * math.exp(-3) / 6, rel=1e-13)
        assert p[3] == pytest.approx(0.22404180765538774, rel=1e-13)

    def test_vacuum_limit(self):
        assert make_coherent(1e-9).distribution.probabilities[0] == pytest.approx(1.0, abs=1e-8)

    def test_mean_K100_against_direct_sum(self):
        s = make_coherent(100)
        n = np.arange(s.distribution.probabilities.size)
        direct = [math.exp(-100 + k * math.log(100) - math.lgamma(k + 1)) for k in n]
        assert math.fsum(k * w for k, w in zip(n, direct)) == pytest.approx(100, rel=1e-9)
        assert s.distribution.mean() == pytest.approx(100, rel=1e-9)

    def test_pair_moment_is_K(self):
        s = make_coherent(7.5)
        assert s.pair_moment == 7.5
        assert s.number_variance == 7.5

    def test_amplitudes_square_to_weights(self):
        s = make_coherent(4.0)
        np.testing.assert_allclose(s.amplitudes**2, s.distribution.probabilities, rtol=1e-12, atol=1e-300)

    def test_cutoff_is_minimal(self):
        from scipy import stats

        s = make_coherent(3, tail_tol=1e-12)
        n_max = s.distribution.truncation_index
        assert stats.poisson.sf(n_max, 3) < 1e-12
        assert stats.poisson.sf(n_max - 1, 3) >= 1e-12

    @pytest.mark.parametrize("tol", [0.0, -1e-12, 1e-6])
    def test_tail_tol_range(self, tol):
        with pytest.raises(InvalidArgumentError):
            make_coherent(3, tail_tol=tol)


class TestGibbs:
    def test_K1_weights(self):
        p = make_gibbs(1).distribution.probabilities
        assert p[0] == 0.5
        assert p[1] == 0.25
        np.testing.assert_allclose(p[:10], 0.5 ** (np.arange(10) + 1), rtol=1e-14)

    def test_K3_ground_weight(self):
        assert make_gibbs(3).distribution.probabilities[0] == pytest.approx(0.25, rel=1e-15)

    def test_mean_K20_geometric_oracle(self):
        s = make_gibbs(20)
        N = s.distribution.truncation_index
        r = 20 / 21
        # partial sum of n r^n (1 - r) for n <= N, closed form of the geometric series
        partial = r * (1 - (N + 1) * r**N + N * r ** (N + 1)) / (1 - r)
        assert s.distribution.mean() == pytest.approx(partial, rel=1e-12)
        assert s.distribution.mean() == pytest.approx(20, rel=1e-9)

    def test_tail_reported_not_renormalized(self):
        s = make_gibbs(3)
        d = s.distribution
        assert 0 < d.tail_mass < 1e-12
        assert d.total() == pytest.approx(1 - d.tail_mass, abs=1e-15)

    def test_non_integer_K(self):
        assert make_gibbs(2.5).distribution.mean() == pytest.approx(2.5, rel=1e-9)


@pytest.mark.parametrize("K", K_SWEEP)
def test_distribution_invariants_on_sweep(K):
    for s in all_states(K):
        d = s.distribution
        assert np.all(d.probabilities >= 0)
        assert d.tail_mass < 1e-12
        assert abs(d.total() + d.tail_mass - 1) < 1e-13
        assert d.mean() == pytest.approx(K, rel=1e-9)


@pytest.mark.parametrize("K", K_SWEEP)
def test_sqrt_concavity_bound(K):
    for s in all_states(K):
        assert s.distribution.sqrt_mean() <= math.sqrt(K) + 1e-12


@settings(max_examples=40, deadline=None)
@given(K=st.floats(min_value=0.05, max_value=150), kind=st.sampled_from([StateKind.COHERENT, StateKind.GIBBS]))
def test_invariants_hold_for_any_K(K, kind):
    s = make_state(kind, K)
    d = s.distribution
    assert d.tail_mass < 1e-12
    assert abs(d.total() + d.tail_mass - 1) < 1e-13
    assert d.mean() == pytest.approx(K, rel=1e-9)
    assert d.sqrt_mean() <= math.sqrt(K) * (1 + 1e-12)
    assert d.variance() == pytest.approx(s.number_variance, rel=1e-6)
