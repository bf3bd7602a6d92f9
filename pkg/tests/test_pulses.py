import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leakctl.errors import ConfigError, DegenerateTrajectory, SingularAnharmonicity
from leakctl.pulses import (
    GtcParams,
    PulseSchedule,
    Segment,
    drag_fields,
    duration_for_area,
    gtc_schedule,
    pulse_area,
    sine_envelope,
    stirap_pair,
)

OMEGA = 2 * math.pi * 30e6


def test_segment_rejects_negative_duration():
    with pytest.raises(ConfigError):
        Segment(-1.0, lambda t: t)


def test_sine_envelope_area():
    seg = sine_envelope(OMEGA, 20e-9)
    assert pulse_area(seg) == pytest.approx(2 * OMEGA * 20e-9 / math.pi, rel=1e-9)


def test_sine_envelope_validation():
    with pytest.raises(ConfigError):
        sine_envelope(OMEGA, 0.0)
    with pytest.raises(ConfigError):
        sine_envelope(-OMEGA, 1e-9)


@given(st.floats(0.1, 10.0))
@settings(max_examples=30, deadline=None)
def test_duration_for_area_inverts_pulse_area(area):
    dur = duration_for_area(area, OMEGA)
    assert pulse_area(sine_envelope(OMEGA, dur)) == pytest.approx(area, rel=1e-9)


def test_duration_for_area_rejects_negative():
    with pytest.raises(ConfigError):
        duration_for_area(-1.0, OMEGA)


class TestPulseSchedule:
    def test_total_time_and_lookup(self):
        s1 = sine_envelope(OMEGA, 10e-9, phase=0.5)
        s2 = sine_envelope(2 * OMEGA, 20e-9, phase=-0.5)
        sched = PulseSchedule((s1, s2))
        assert sched.total_time == pytest.approx(30e-9)
        amp, phase, det = sched.controls([5e-9, 20e-9])
        assert amp[0] == pytest.approx(OMEGA * math.sin(math.pi * 0.5))
        assert phase[0] == 0.5
        # 20 ns is 10 ns into the second segment
        assert amp[1] == pytest.approx(2 * OMEGA * math.sin(math.pi * 0.5))
        assert phase[1] == -0.5

    def test_zero_duration_segment_skipped(self):
        empty = Segment(0.0, lambda t: np.zeros_like(t))
        live = sine_envelope(OMEGA, 10e-9, phase=1.0)
        sched = PulseSchedule((empty, live))
        amp, phase, _ = sched.controls([5e-9])
        assert amp[0] > 0
        assert phase[0] == 1.0


class TestGtcParams:
    def test_xi2_relation_roundtrip(self):
        p = GtcParams(math.pi / 4, 0.3, 1.5 * math.pi, 0.0, 0.7 * math.pi)
        gamma_back = (p.xi2 - p.xi0) * (math.cos(p.chi1) - math.cos(p.chi3)) / 2.0
        assert abs(gamma_back - p.gamma_g) < 1e-12

    def test_degenerate_polar_angles(self):
        p = GtcParams(0.1, 0.0, 1.0, 0.3 * math.pi, 0.7 * math.pi)
        # cos(0.3 pi) != cos(0.7 pi), fine
        _ = p.xi2
        with pytest.raises(DegenerateTrajectory):
            _ = GtcParams(0.1, 0.0, 1.0, 0.3 * math.pi, 0.3 * math.pi).xi2


def test_stirap_pair_amplitude_ratio():
    theta = 0.6
    tau = math.pi**2 / (2 * OMEGA)
    s01, s12 = stirap_pair(theta, OMEGA, tau)
    t = tau / 3
    ratio = float(s01.envelope(t) / s12.envelope(t))
    assert ratio == pytest.approx(math.tan(theta / 2), rel=1e-12)


def test_stirap_pair_rejects_wrong_area():
    with pytest.raises(ConfigError):
        stirap_pair(0.6, OMEGA, 1.5 * math.pi**2 / (2 * OMEGA))


class TestGtcSchedule:
    def setup_method(self):
        self.p = GtcParams(math.pi / 4, 0.0, 1.5 * math.pi, 0.0, 0.7 * math.pi)
        self.sched = gtc_schedule(self.p, OMEGA)

    def test_five_segments(self):
        assert len(self.sched.segments) == 5

    def test_azimuthal_detuning_law(self):
        # fourth segment is the azimuthal arc at chi3
        seg = self.sched.segments[3]
        assert seg.duration > 0
        t = seg.duration / 3
        det = float(seg.detuning_law(t))
        env = float(seg.envelope(t))
        assert det == pytest.approx(-env * math.tan(self.p.chi3), rel=1e-12)

    def test_polar_segments_have_zero_detuning(self):
        for k in (0, 2, 4):
            seg = self.sched.segments[k]
            if seg.duration == 0:
                continue
            assert float(seg.detuning_law(seg.duration / 2)) == 0.0

    def test_equator_arc_is_degenerate(self):
        with pytest.raises(DegenerateTrajectory):
            gtc_schedule(GtcParams(0.2, 0.0, 1.0, math.pi / 2, 0.7 * math.pi), OMEGA)


class TestDragFields:
    def test_rejects_zero_anharmonicity(self):
        with pytest.raises(SingularAnharmonicity):
            drag_fields(lambda t: t, lambda t: t, lambda t: t, 0.0, 1e-8)

    def test_base_field_orientation(self):
        dur = 20e-9
        alpha = 2 * math.pi * 220e6

        def env(t):
            return OMEGA * np.sin(np.pi * np.asarray(t) / dur)

        def phase(t):
            return np.full_like(np.asarray(t, dtype=float), 0.5)

        def det(t):
            return np.full_like(np.asarray(t, dtype=float), 1e6)

        f = drag_fields(env, phase, det, alpha, dur)
        t = dur / 2
        assert float(f.b_x(t)) == pytest.approx(OMEGA * math.cos(0.5))
        assert float(f.b_y(t)) == pytest.approx(-OMEGA * math.sin(0.5))
        assert float(f.b_z(t)) == pytest.approx(-1e6)
        assert float(f.bd_z(t)) == 0.0

    def test_correction_scales_inversely_with_alpha(self):
        dur = 20e-9

        def env(t):
            return OMEGA * np.sin(np.pi * np.asarray(t) / dur)

        def zero(t):
            return np.zeros_like(np.asarray(t, dtype=float))

        a = 2 * math.pi * 220e6
        f1 = drag_fields(env, zero, zero, a, dur)
        f2 = drag_fields(env, zero, zero, 10 * a, dur)
        t = dur / 3
        assert float(f2.bd_y(t)) == pytest.approx(float(f1.bd_y(t)) / 10, rel=1e-9)
