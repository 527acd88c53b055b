import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbattery import metrics
from qbattery.analytic import Model, ModelParams
from qbattery.errors import InvalidArgumentError, NumericalIntegrityError
from qbattery.states import make_coherent, make_fock, make_gibbs

from conftest import all_states

QQ = ModelParams(Model.QUBIT_QUBIT, g=0.1)
JC = ModelParams(Model.JAYNES_CUMMINGS, g=0.1)
RWA = ModelParams(Model.OSC_RWA, g=0.1)
CRT = ModelParams(Model.OSC_CRT, g=0.35)
DET_N = ModelParams(Model.DETUNING, g=0.1, delta_omega=-0.5)

# root of tan x = 2x in (pi/2, pi) and sin^2(x)/x there; mpmath findroot at 30 digits
X_TILDE = 1.16556118520721131
Y_TILDE = 0.724611353776708476


class TestTransferredEnergy:
    def test_negative_switch(self):
        assert metrics.transferred_energy(0.6, -0.3, 0.0) == 0.6
        assert metrics.transferred_energy(0.6, -0.3, 5.0) == 0.6

    def test_covered_by_charger(self):
        assert metrics.transferred_energy(0.6, 0.5, 0.8) == pytest.approx(0.6)

    def test_uncovered_debit(self):
        assert metrics.transferred_energy(0.6, 0.9, 0.2) == pytest.approx(-0.1)

    def test_vectorized(self):
        out = metrics.transferred_energy([0.6, 0.6], [0.5, 0.9], [0.8, 0.2])
        np.testing.assert_allclose(out, [0.6, -0.1])

    @settings(max_examples=200)
    @given(
        e_s=st.floats(-10, 10),
        sw=st.floats(-10, 10),
        e_a=st.floats(0, 10),
    )
    def test_never_exceeds_stored(self, e_s, sw, e_a):
        e_t = metrics.transferred_energy(e_s, sw, e_a)
        assert e_t <= e_s
        if sw <= 0:
            assert e_t == e_s


class TestOptimize:
    def test_rabi(self):
        rep = metrics.merits(QQ, None, x_max=2 * math.pi)
        assert rep.time_at_max_energy == pytest.approx(math.pi / 0.2, rel=1e-9)
        assert rep.max_energy == pytest.approx(1.0, rel=1e-12)
        assert rep.power_at_max_energy == pytest.approx(0.2 / math.pi, rel=1e-9)
        assert rep.max_power <= 0.1 * Y_TILDE * (1 + 1e-12)
        assert rep.time_at_max_power * 0.1 == pytest.approx(X_TILDE, abs=1e-7)
        assert rep.max_power / 0.1 == pytest.approx(Y_TILDE, rel=1e-12)

    def test_universal_constants(self):
        rep = metrics.optimize(lambda x: np.sin(x) ** 2, 2 * math.pi)
        assert abs(rep.time_at_max_power - X_TILDE) < 1e-9
        assert abs(rep.max_power - Y_TILDE) < 1e-12
        assert abs(rep.time_at_max_power - 1.16) < 0.01
        assert abs(rep.max_power - 0.72) < 0.01

    def test_earliest_of_equal_peaks(self):
        rep = metrics.optimize(lambda x: np.sin(x) ** 2, 4 * math.pi)
        assert rep.time_at_max_energy == pytest.approx(math.pi / 2, abs=1e-9)

    def test_plateau_returns_earliest(self):
        rep = metrics.optimize(lambda x: np.minimum(np.asarray(x), 1.0), 3.0, n_grid=31)
        assert rep.max_energy == 1.0
        assert rep.time_at_max_energy <= 1.0 + 1e-9

    def test_monotone_window_edge(self):
        rep = metrics.optimize(lambda x: np.asarray(x) ** 2, 2.0)
        assert rep.time_at_max_energy == 2.0
        assert rep.max_energy == 4.0

    def test_non_finite(self):
        with pytest.raises(NumericalIntegrityError):
            metrics.optimize(lambda x: np.full(np.shape(x), np.nan) if np.ndim(x) else math.nan, 1.0)

    def test_bad_window(self):
        with pytest.raises(InvalidArgumentError):
            metrics.optimize(lambda x: x, 0.0)
        with pytest.raises(InvalidArgumentError):
            metrics.optimize(lambda x: x, 1.0, n_grid=2)

    def test_trace_input(self):
        t = np.linspace(0, 2 * math.pi / 0.1, 2001)
        tr = metrics.trace(QQ, None, t)
        rep = metrics.optimize(tr)
        assert rep.max_energy == pytest.approx(1.0, abs=1e-5)
        assert rep.power_at_max_energy <= rep.max_power

    @pytest.mark.parametrize("K", [1, 4, 9, 25])
    def test_jc_fock_scaling(self, K):
        rep = metrics.merits(JC, make_fock(K), x_max=2 * math.pi / math.sqrt(K))
        assert rep.time_at_max_energy * 0.1 * math.sqrt(K) == pytest.approx(math.pi / 2, abs=1e-9)
        assert rep.time_at_max_power * 0.1 * math.sqrt(K) == pytest.approx(X_TILDE, abs=1e-9)
        assert rep.power_at_max_energy <= rep.max_power


class TestQSL:
    def test_formula(self):
        assert metrics.qsl_time(2.0, 2.0) == pytest.approx(math.pi / 4)
        assert metrics.qsl_time(4.0, 0.2) == pytest.approx(2.5 * math.pi)

    @pytest.mark.parametrize("bad", [(0.0, 1.0), (1.0, -1.0)])
    def test_non_positive(self, bad):
        with pytest.raises(InvalidArgumentError):
            metrics.qsl_time(*bad)

    def test_jc_fock(self):
        q = metrics.jc_qsl_inputs(JC, make_fock(9))
        assert q.mean_gap == 9.0
        assert q.std_dev == pytest.approx(0.3)

    def test_jc_coherent(self):
        q = metrics.jc_qsl_inputs(JC, make_coherent(9))
        assert q.std_dev == pytest.approx(3 * math.sqrt(1.01), rel=1e-14)

    def test_jc_gibbs(self):
        q = metrics.jc_qsl_inputs(JC, make_gibbs(2))
        assert q.std_dev == pytest.approx(math.sqrt(6 + 2 * 0.01))

    def test_vacuum_limit(self):
        q = metrics.jc_qsl_inputs(JC, make_coherent(1e-8))
        assert q.std_dev < 1e-3
        assert metrics.qsl_time(q.mean_gap, q.std_dev) > 1e3

    def test_jc_only(self):
        with pytest.raises(InvalidArgumentError):
            metrics.jc_qsl_inputs(RWA, make_fock(1))

    def test_not_for_crt(self):
        with pytest.raises(InvalidArgumentError):
            metrics.qsl_inputs(CRT, make_fock(1))

    def test_jc_fock_saturates(self):
        rep = metrics.merits(JC, make_fock(4), x_max=math.pi)
        assert rep.qsl_time == pytest.approx(2.5 * math.pi)
        assert rep.time_at_max_energy == pytest.approx(rep.qsl_time, rel=1e-9)

    @pytest.mark.parametrize("K", [2, 5, 20])
    def test_rwa_not_saturated(self, K):
        rep = metrics.merits(RWA, make_fock(K), x_max=math.pi)
        assert rep.time_at_max_energy == pytest.approx(math.pi / 0.2, rel=1e-9)
        assert rep.time_at_max_energy > rep.qsl_time


class TestFockDominance:
    @pytest.mark.parametrize("K", [1, 3, 20])
    def test_energy_and_power(self, K):
        x_max = 4 * math.pi / math.sqrt(K)
        fock = metrics.merits(JC, make_fock(K), x_max=x_max, n_grid=4000)
        for other in (make_coherent(K), make_gibbs(K)):
            rep = metrics.merits(JC, other, x_max=x_max, n_grid=4000)
            assert fock.max_energy >= rep.max_energy
            assert fock.max_power >= rep.max_power

    def test_rwa_k_independent_time(self):
        times = {metrics.merits(RWA, make_fock(K), x_max=math.pi).time_at_max_energy for K in (1, 5, 30)}
        assert max(times) - min(times) < 1e-9


class TestTrace:
    def test_rabi_pointwise(self, xgrid):
        tr = metrics.trace(QQ, None, xgrid / 0.1)
        np.testing.assert_allclose(tr.e_s, np.sin(xgrid) ** 2, atol=1e-15)

    def test_single_zero_point(self):
        tr = metrics.trace(RWA, make_fock(3), [0.0])
        assert tr.e_s[0] == 0 and tr.p_s[0] == 0 and tr.e_switch[0] == 0 and tr.e_t[0] == 0
        assert tr.e_a[0] == pytest.approx(3.0)

    @pytest.mark.parametrize("bad", [[], [1.0, 0.5], [-1.0, 1.0], [0.0, np.inf]])
    def test_invalid_grid(self, bad):
        with pytest.raises(InvalidArgumentError):
            metrics.trace(QQ, None, bad)

    def test_jc_fock_period(self):
        K = 20
        x = np.linspace(0, 3 * math.pi, 301)
        tr = metrics.trace(JC, make_fock(K), x / (0.1 * math.sqrt(K)))
        # period pi in sqrt(K) g tau
        np.testing.assert_allclose(tr.e_s[:201], tr.e_s[100:], atol=1e-12)

    @pytest.mark.parametrize(
        "params,charger",
        [(QQ, None), (JC, make_gibbs(3)), (RWA, make_coherent(3)), (DET_N, make_fock(1)), (CRT, make_coherent(3))],
    )
    def test_invariants(self, params, charger, xgrid):
        tr = metrics.trace(params, charger, xgrid / params.g)
        pos = tr.times > 0
        np.testing.assert_allclose(tr.p_s[pos], tr.e_s[pos] / tr.times[pos], rtol=1e-15)
        assert np.all(tr.e_t <= tr.e_s)
        np.testing.assert_array_equal(tr.e_t[tr.e_switch <= 0], tr.e_s[tr.e_switch <= 0])
        if params.model.commuting:
            np.testing.assert_array_equal(tr.e_t, tr.e_s)

    def test_cross_check_flag(self, xgrid):
        tr = metrics.trace(JC, make_fock(2), xgrid / 0.1, cross_check=True)
        assert tr.oracle_deviation["e_s"] < 1e-10


class TestCrossCheck:
    def test_qubit_qubit(self, xgrid):
        rep = metrics.compare_with_oracle(QQ, None, xgrid / 0.1)
        assert rep.passed
        assert max(rep.max_abs.values()) < 1e-10

    def test_jc_gibbs(self, xgrid):
        rep = metrics.compare_with_oracle(JC, make_gibbs(3), xgrid / 0.1)
        assert rep.max_abs["e_s"] <= 1e-6

    def test_detuning_budget(self, xgrid):
        p = ModelParams(Model.DETUNING, g=0.1, delta_omega=0.5)
        rep = metrics.compare_with_oracle(p, make_fock(1), xgrid / 0.1)
        assert rep.tolerance == pytest.approx(1e-6 + 0.1**3 / 0.25 * 2 * math.pi)
        assert rep.passed

    def test_tight_tolerance_fails(self, xgrid):
        rep = metrics.compare_with_oracle(CRT, make_fock(1), xgrid / 0.35, tolerance=1e-16)
        assert not rep.passed
