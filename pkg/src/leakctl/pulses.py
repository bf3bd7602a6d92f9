"""Control waveforms: sine envelopes, Raman drive pairs, the five-segment
geometric-trajectory schedule, and derivative correction fields.

Segment laws are vectorized callables of the segment-local time.  Durations of
zero are legal and denote degenerate (skipped) trajectory segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate

from .errors import ConfigError, DegenerateTrajectory, SingularAnharmonicity

__all__ = [
    "Segment",
    "PulseSchedule",
    "GtcParams",
    "DragFields",
    "sine_envelope",
    "stirap_pair",
    "gtc_schedule",
    "drag_fields",
    "pulse_area",
]


def _const(value: float):
    def law(t):
        return np.full_like(np.asarray(t, dtype=float), value)

    return law


@dataclass(frozen=True)
class Segment:
    """One piecewise control record: envelope / phase / detuning over [0, duration]."""

    duration: float
    envelope: callable  # t -> rad/s
    phase_law: callable = field(default_factory=lambda: _const(0.0))  # t -> rad
    detuning_law: callable = field(default_factory=lambda: _const(0.0))  # t -> rad/s

    def __post_init__(self):
        if self.duration < 0:
            raise ConfigError("segment duration must be nonnegative")


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered list of segments; controls are looked up by absolute time."""

    segments: tuple

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def total_time(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def controls(self, ts):
        """Sample (amplitude, phase, detuning) arrays at absolute times ts."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        bounds = np.cumsum([s.duration for s in self.segments])
        starts = np.concatenate([[0.0], bounds[:-1]])
        amp = np.zeros_like(ts)
        phase = np.zeros_like(ts)
        det = np.zeros_like(ts)
        # searchsorted skips zero-duration segments automatically
        idx = np.clip(np.searchsorted(bounds, ts, side="right"), 0, len(self.segments) - 1)
        for k, seg in enumerate(self.segments):
            sel = idx == k
            if not np.any(sel) or seg.duration == 0:
                continue
            tl = np.clip(ts[sel] - starts[k], 0.0, seg.duration)
            amp[sel] = seg.envelope(tl)
            phase[sel] = seg.phase_law(tl)
            det[sel] = seg.detuning_law(tl)
        return amp, phase, det


@dataclass(frozen=True)
class GtcParams:
    """Closed dressed-state trajectory parameters.

    chi0/xi0 set the starting point on the Bloch sphere, gamma_g the enclosed
    geometric phase, chi1/chi3 the polar angles of the two azimuthal arcs.
    xi2 is derived from the geometric-phase relation.
    """

    chi0: float
    xi0: float
    gamma_g: float
    chi1: float
    chi3: float

    @property
    def xi2(self) -> float:
        denom = math.cos(self.chi1) - math.cos(self.chi3)
        if abs(denom) < 1e-15:
            raise DegenerateTrajectory("cos(chi1) == cos(chi3): xi2 is undefined")
        return self.xi0 + 2.0 * self.gamma_g / denom


@dataclass(frozen=True)
class DragFields:
    """Control-field vector plus its derivative-correction components."""

    b_x: callable
    b_y: callable
    b_z: callable
    bd_x: callable
    bd_y: callable
    bd_z: callable

    def total(self, t):
        return (
            self.b_x(t) + self.bd_x(t),
            self.b_y(t) + self.bd_y(t),
            self.b_z(t) + self.bd_z(t),
        )


def sine_envelope(omega_m: float, duration: float, phase: float = 0.0, detuning: float = 0.0) -> Segment:
    """Half-sine envelope omega_m*sin(pi t/T); area is 2*omega_m*T/pi."""
    if duration <= 0:
        raise ConfigError("sine envelope needs a positive duration")
    if omega_m <= 0:
        raise ConfigError("sine envelope needs a positive peak amplitude")

    def env(t):
        return omega_m * np.sin(np.pi * np.asarray(t, dtype=float) / duration)

    return Segment(duration, env, _const(phase), _const(detuning))


def duration_for_area(area: float, omega_m: float) -> float:
    """Duration a half-sine pulse of peak omega_m needs for the given area."""
    if area < 0:
        raise ConfigError("pulse area must be nonnegative")
    return math.pi * area / (2.0 * omega_m)


def stirap_pair(theta: float, omega_m: float, tau: float):
    """Two drives sharing one envelope with a fixed amplitude ratio.

    The common envelope must carry total area pi (cyclic transfer condition);
    the two returned segments carry sin(theta/2) and cos(theta/2) of it.
    """
    base = sine_envelope(omega_m, tau)
    area = pulse_area(base)
    if abs(area - math.pi) > 1e-6 * math.pi:
        raise ConfigError(
            f"common envelope area {area:.6e} differs from pi; use tau = pi^2/(2*omega_m)"
        )
    s, c = math.sin(theta / 2.0), math.cos(theta / 2.0)

    def env01(t):
        return s * base.envelope(t)

    def env12(t):
        return c * base.envelope(t)

    return (
        Segment(tau, env01, base.phase_law, base.detuning_law),
        Segment(tau, env12, base.phase_law, base.detuning_law),
    )


def _gtc_polar_segment(area: float, omega_m: float, phase: float) -> Segment:
    if area <= 0:
        return Segment(0.0, _const(0.0))
    dur = duration_for_area(area, omega_m)
    seg = sine_envelope(omega_m, dur)
    return Segment(dur, seg.envelope, _const(phase), _const(0.0))


def _gtc_azimuthal_segment(span: float, chi: float, omega_m: float, xi_ref: float) -> Segment:
    """Arc at constant polar angle chi sweeping azimuth by `span` radians."""
    sc = math.sin(chi) * math.cos(chi)
    area = span * sc
    if abs(area) < 1e-15:
        if abs(span) > 1e-12 and abs(math.sin(chi)) > 1e-12:
            # on the equator the azimuth cannot move without pulse area
            raise DegenerateTrajectory(
                f"azimuthal span {span:.3g} requested at chi={chi:.3g} where sin*cos vanishes"
            )
        return Segment(0.0, _const(0.0))
    dur = duration_for_area(abs(area), omega_m)
    env = sine_envelope(omega_m, dur).envelope
    tan_chi = math.tan(chi)

    def phase_law(t):
        t = np.asarray(t, dtype=float)
        running = abs(area) * (1.0 - np.cos(np.pi * t / dur)) / 2.0
        return xi_ref + math.pi + running / sc

    def detuning_law(t):
        return -env(t) * tan_chi

    return Segment(dur, env, phase_law, detuning_law)


def gtc_schedule(p: GtcParams, omega_m: float) -> PulseSchedule:
    """Five-segment schedule tracing the closed dressed-state trajectory.

    Polar segments (1, 3, 5) run at constant phase with zero detuning;
    azimuthal arcs (2, 4) chirp the phase and apply -Omega(t)*tan(chi).
    The second arc's polar angle is taken equal to chi3, matching the
    per-segment detuning list.
    """
    xi2 = p.xi2
    seg1 = _gtc_polar_segment(abs(p.chi0 - p.chi1), omega_m, p.xi0 - math.pi / 2.0)
    seg2 = _gtc_azimuthal_segment(xi2 - p.xi0, p.chi1, omega_m, p.xi0)
    seg3 = _gtc_polar_segment(abs(p.chi3 - p.chi1), omega_m, xi2 + math.pi / 2.0)
    seg4 = _gtc_azimuthal_segment(p.xi0 - xi2, p.chi3, omega_m, xi2)
    seg5 = _gtc_polar_segment(abs(p.chi3 - p.chi0), omega_m, p.xi0 - math.pi / 2.0)
    return PulseSchedule((seg1, seg2, seg3, seg4, seg5))


def drag_fields(envelope, phase, detuning, alpha: float, duration: float) -> DragFields:
    """Derivative correction for a three-level driven qubit.

    The base field is (Omega cos phi, -Omega sin phi, -Delta), with the y sign
    matching a drive Omega e^{i phi}|0><1| + h.c.; the correction is
    -(1/2 alpha) * (-dB_y/dt + B_z B_x, dB_x/dt + B_z B_y, 0), which cancels
    the fast |1>-|2> coupling to first order when the bare |2> level sits at
    +alpha.  Derivatives use central finite differences with step duration/1e4.
    """
    if alpha == 0:
        raise SingularAnharmonicity("derivative correction diverges at alpha = 0")
    h = duration / 1e4

    def bx(t):
        t = np.asarray(t, dtype=float)
        return envelope(t) * np.cos(phase(t))

    def by(t):
        t = np.asarray(t, dtype=float)
        return -envelope(t) * np.sin(phase(t))

    def bz(t):
        t = np.asarray(t, dtype=float)
        return -detuning(t)

    def ddt(f):
        def deriv(t):
            t = np.asarray(t, dtype=float)
            return (f(t + h) - f(t - h)) / (2.0 * h)

        return deriv

    dbx, dby = ddt(bx), ddt(by)

    def bd_x(t):
        return -(-dby(t) + bz(t) * bx(t)) / (2.0 * alpha)

    def bd_y(t):
        return -(dbx(t) + bz(t) * by(t)) / (2.0 * alpha)

    def bd_z(t):
        return np.zeros_like(np.asarray(t, dtype=float))

    return DragFields(bx, by, bz, bd_x, bd_y, bd_z)


def pulse_area(seg: Segment) -> float:
    """Integral of the envelope over the segment (adaptive quadrature)."""
    if seg.duration == 0:
        return 0.0
    val, _ = scipy.integrate.quad(
        lambda t: float(seg.envelope(t)), 0.0, seg.duration, epsabs=0.0, epsrel=1e-10, limit=200
    )
    return float(val)
