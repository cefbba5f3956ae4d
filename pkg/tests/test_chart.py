"""Tests for chart construction, validation, decay scanning, and the two
chart-level transformations (conformal rescaling and coordinate scaling)."""

import numpy as np
import pytest

from confmass import exprdsl
from confmass.chart import (
    ChartError,
    End,
    EndSystem,
    MetricChart,
    conformal_rescale,
    decay_scan,
    make_chart,
    metric_jets,
    samples_valid,
    scale_coordinates,
)

ISO = {"11": "(1 + 1/(2*r))^4", "22": "(1 + 1/(2*r))^4", "33": "(1 + 1/(2*r))^4"}


def make_iso(**kw):
    args = dict(n=3, tau=0.99, r_min=1.0, metric=ISO, lee=None)
    args.update(kw)
    return make_chart(**args)


class TestMakeChart:
    def test_basic_construction(self):
        c = make_iso()
        assert c.n == 3
        assert c.tau == 0.99
        assert c.metric_source()["11"] == "(1.0 + 1.0/(2.0*r))^4"

    def test_off_diagonal_symmetrized(self):
        c = make_chart(
            n=3,
            tau=0.75,
            r_min=1.0,
            metric={"11": "1", "22": "1", "33": "1", "12": "0.1*x3/r^2"},
        )
        # g12 and g21 must be the same expression object
        assert c.metric[0][1] is c.metric[1][0]

    def test_dimension_bounds(self):
        with pytest.raises(ChartError):
            make_chart(n=2, tau=0.4, r_min=1.0, metric={"11": "1", "22": "1"})
        with pytest.raises(ChartError):
            make_chart(n=9, tau=4.0, r_min=1.0, metric={})

    def test_tau_window(self):
        # admissible decay rates sit strictly between (n-2)/2 and n-2
        with pytest.raises(ChartError):
            make_iso(tau=0.5)  # not above 1/2
        with pytest.raises(ChartError):
            make_iso(tau=1.0)  # not below 1
        make_iso(tau=0.51)
        make_iso(tau=0.999)

    def test_missing_entries_default_to_flat(self):
        c = make_chart(n=3, tau=0.75, r_min=1.0, metric={"11": "1 + 1/r"})
        assert c.metric_source()["22"] == "1.0"
        assert c.metric_source()["12"] == "0.0"

    def test_duplicate_symmetric_entry_rejected(self):
        with pytest.raises(ChartError):
            make_chart(
                n=3,
                tau=0.75,
                r_min=1.0,
                metric={"12": "0.1*x3/r^2", "21": "0.1*x3/r^2"},
            )

    def test_rejects_unknown_identifier(self):
        with pytest.raises(ChartError):
            make_chart(n=3, tau=0.75, r_min=1.0, metric={"11": "1 + q/r^2"})

    def test_rejects_indefinite_metric(self):
        # the SPD probe on the sphere r = 8 r_min must reject this
        with pytest.raises(ChartError):
            make_chart(n=3, tau=0.75, r_min=1.0, metric={"11": "-1"})

    def test_validate_false_skips_probes(self):
        c = make_chart(n=3, tau=0.75, r_min=1.0, metric={"11": "-1"}, validate=False)
        assert isinstance(c, MetricChart)

    def test_reserved_parameter_names_rejected(self):
        with pytest.raises(ChartError):
            make_iso(params={"r": 1.0})
        with pytest.raises(ChartError):
            make_iso(params={"x1": 1.0})

    def test_params_resolve(self):
        c = make_chart(
            n=3,
            tau=0.99,
            r_min=1.0,
            metric={"11": "(1 + m/(2*r))^4", "22": "(1 + m/(2*r))^4", "33": "(1 + m/(2*r))^4"},
            params={"m": 1.0},
        )
        assert c.params["m"] == 1.0




class TestDecayScan:
    def test_isotropic_passes(self):
        c = make_iso()
        scan = decay_scan(c)
        assert scan.passed
        assert scan.tau_declared == 0.99
        # g - delta decays like 2/r here, so the fitted exponent is near 1
        assert scan.tau_hat == pytest.approx(1.0, abs=0.05)

    def test_flat_chart_is_exactly_flat(self):
        c = make_chart(n=3, tau=0.75, r_min=1.0, metric={})
        scan = decay_scan(c)
        assert scan.exactly_flat and scan.passed
        assert "exactly flat" in scan.summary()

    def test_flags_slow_metric_decay(self):
        # g11 - 1 is constant along rays: exponent 0 < required tau
        c = make_chart(n=3, tau=0.75, r_min=1.0, metric={"11": "2"}, validate=False)
        scan = decay_scan(c)
        assert not scan.passed
        assert not scan.slots["g11"]["passed"]

    def test_flags_slow_lee_decay(self):
        # theta must decay one order faster than the metric: 1/r fails
        c = make_chart(n=3, tau=0.75, r_min=1.0, metric={}, lee=["1/r", "0", "0"])
        scan = decay_scan(c)
        assert not scan.passed
        assert not scan.slots["theta1"]["passed"]
        assert scan.slots["theta2"]["exactly_flat"]


class TestMetricJets:
    def test_spd_enforced(self):
        c = make_chart(
            n=3,
            tau=0.75,
            r_min=1.0,
            metric={"11": "-1", "22": "1", "33": "1"},
            validate=False,
        )
        X = np.array([[5.0], [0.0], [0.0]])
        with pytest.raises(ChartError):
            metric_jets(c, X, order=1)

    def test_samples_valid_respects_r_min(self):
        c = make_iso(r_min=2.0)
        assert samples_valid(c, np.array([[3.0], [0.0], [0.0]]))
        assert not samples_valid(c, np.array([[1.0], [0.0], [0.0]]))

    def test_wrong_coordinate_count_rejected(self):
        c = make_iso()
        with pytest.raises(ChartError):
            metric_jets(c, np.zeros((4, 1)), order=1)

    def test_values_match_plain_evaluation(self):
        c = make_iso()
        X = np.array([[3.0, 0.0], [4.0, 6.0], [0.0, 2.0]])
        fr = metric_jets(c, X, order=1)
        u4 = (1 + 1 / (2 * np.linalg.norm(X, axis=0))) ** 4
        for i in range(3):
            np.testing.assert_allclose(fr.g[i][i].value, u4, rtol=1e-15)
            for j in range(i + 1, 3):
                np.testing.assert_array_equal(fr.g[i][j].value, np.zeros(2))


class TestTransformations:
    def test_conformal_rescale_metric_values(self):
        c = make_iso()
        f = exprdsl.parse("1 + 1/sqrt(r^2 + 1)")
        d = conformal_rescale(c, f)
        pt = np.array([[7.0], [1.0], [-2.0]])
        r = float(np.linalg.norm(pt))
        u4 = (1 + 1 / (2 * r)) ** 4
        fval = 1 + 1 / np.sqrt(r**2 + 1)
        got = float(
            np.atleast_1d(exprdsl.evaluate(d.metric[0][0], pt, params=d.params))[0]
        )
        assert got == pytest.approx(fval * u4, rel=1e-14)

    def test_conformal_rescale_shifts_lee_form(self):
        # the covector picks up -(df)/(2f); for f -> const the shift vanishes
        c = make_iso()
        d = conformal_rescale(c, exprdsl.parse("2"))
        pt = np.array([[4.0], [3.0], [0.0]])
        for i in range(3):
            v = float(
                np.atleast_1d(exprdsl.evaluate(d.lee[i], pt, params=d.params))[0]
            )
            assert v == 0.0

    def test_scale_coordinates_metric_transport(self):
        c = make_iso()
        a = 4.0
        s = scale_coordinates(c, a)
        # g~_ij(z) = g_ij(z / sqrt(a)); check at z = sqrt(a) * z0
        z0 = np.array([[3.0], [0.0], [4.0]])
        z = np.sqrt(a) * z0
        want = float(
            np.atleast_1d(exprdsl.evaluate(c.metric[0][0], z0, params=c.params))[0]
        )
        got = float(
            np.atleast_1d(exprdsl.evaluate(s.metric[0][0], z, params=s.params))[0]
        )
        assert got == pytest.approx(want, rel=1e-15)
        assert s.r_min == pytest.approx(np.sqrt(a) * c.r_min)

    def test_scale_coordinates_rejects_nonpositive(self):
        c = make_iso()
        with pytest.raises(ChartError):
            scale_coordinates(c, 0.0)
        with pytest.raises(ChartError):
            scale_coordinates(c, -2.0)


class TestEndSystem:
    def test_construction(self):
        c = make_iso()
        sys = EndSystem(ends=(End(chart=c, a=1.0), End(chart=c, a=4.0)))
        assert len(sys.ends) == 2
        assert sys.ends[1].a == 4.0
