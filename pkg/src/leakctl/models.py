"""Time-dependent Hamiltonian builders for the four physical scenarios.

All builders come in two flavors: a public one returning an `Operator` at a
single time (the contract surface) and a private ``*_stack`` one returning an
(n, d, d) array for a whole time grid, which is what the propagators consume.

Frequencies are angular (rad/s) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.special

from .errors import DivergentDuration
from .operators import Operator, matexp
from .pulses import PulseSchedule

__all__ = [
    "OffsetSet",
    "SingleQubitModel",
    "TwoQubitModel",
    "LadderModel",
    "CrosstalkModel",
    "h_single",
    "h_two",
    "h_ladder",
    "h_crosstalk",
    "transform_a1",
    "transform_a2",
    "rotated_h1",
    "rotated_h1_first_order",
    "leakage_defect",
    "iswap_duration",
]

SINGLE_LABELS = ("0", "1", "2")
LADDER_LABELS = ("0", "1", "2", "3")
TWO_QUBIT_LABELS = ("00", "01", "10", "02", "11", "20")
TWO_QUBIT_COMP = ("00", "01", "10", "11")
CROSSTALK_LABELS = tuple(a + b for a in SINGLE_LABELS for b in ("0", "1"))


@dataclass(frozen=True)
class OffsetSet:
    """Static control offsets: fractional amplitude, detuning (rad/s), phase (rad)."""

    amp: float = 0.0
    det: float = 0.0
    phase: float = 0.0

    def as_tuple(self):
        return (self.amp, self.det, self.phase)

    @classmethod
    def zero(cls) -> "OffsetSet":
        return cls()


ZERO_OFFSETS = OffsetSet()


@dataclass(frozen=True)
class SingleQubitModel:
    """Driven three-level transmon in the drive frame.

    The drive is a half-sine Rabi-rate envelope of peak ``omega_m`` over
    ``duration``; a rotation by angle theta needs envelope area theta.
    ``detuning_ratio`` adds a component of the detuning proportional to the
    instantaneous envelope; ``detuning`` is the constant part.  Detunings are
    quoted drive-above-qubit positive, which enters the stack diagonal with
    the opposite sign.
    """

    omega_m: float
    duration: float
    alpha: float
    detuning: float = 0.0
    phase: float = 0.0
    lam: float = math.sqrt(2.0)
    detuning_ratio: float = 0.0
    levels: int = 3

    def envelope(self, ts):
        ts = np.asarray(ts, dtype=float)
        return self.omega_m * np.sin(np.pi * ts / self.duration)

    def controls(self, ts):
        omega = self.envelope(ts)
        phase = np.full_like(omega, self.phase)
        det = self.detuning + self.detuning_ratio * omega
        return omega, phase, det


@dataclass(frozen=True)
class TwoQubitModel:
    """Two capacitively coupled transmons with parametric frequency modulation.

    Interaction-picture Hamiltonian on {00, 01, 10, 02, 11, 20}; the modulation
    index is eps1/nu1 and the drive phase phi1.  delta1 is the (fixed) qubit
    frequency difference.
    """

    g12: float
    alpha1: float
    alpha2: float
    delta1: float
    nu1: float
    eps1: float
    phi1: float

    @property
    def beta1(self) -> float:
        return self.eps1 / self.nu1

    @property
    def delta_t(self) -> float:
        return self.nu1 - self.delta1


@dataclass(frozen=True)
class LadderModel:
    """Four-level ladder driven by two independent tones (0-1 and 1-2)."""

    omega_m: float
    tau: float
    alpha: float
    theta: float = math.pi / 2.0
    det01: float = 0.0
    det12: float = 0.0
    phi01: float = 0.0
    phi12: float = math.pi
    levels: int = 4

    def envelope(self, ts):
        ts = np.asarray(ts, dtype=float)
        return self.omega_m * np.sin(np.pi * ts / self.tau)


@dataclass(frozen=True)
class CrosstalkModel:
    """Three-level target qubit with an always-on ZZ coupling to a spectator."""

    base: SingleQubitModel
    zeta_zz: float
    spectator_init: str = "0"
    schedule: PulseSchedule | None = None  # overrides base controls when present

    def controls(self, ts):
        if self.schedule is not None:
            return self.schedule.controls(ts)
        return self.base.controls(ts)


def _apply_offsets(omega, phase, det, off: OffsetSet):
    return (1.0 + off.amp) * omega, phase + off.phase, det + off.det


# ---------------------------------------------------------------------------
# single qubit


def three_level_stack(omega, phase, det, alpha, lam, include_leak=True):
    """Assemble H(t) stacks from sampled control arrays.

    ``omega`` is the Rabi rate; the coupling matrix element is half of it:
    H = diag(-D/2, D/2, 3D/2 + alpha)
        + (Omega/2) e^{i phi}|0><1| + lam (Omega/2) e^{i phi}|1><2| + h.c.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    n = omega.shape[0]
    h = np.zeros((n, 3, 3), dtype=complex)
    drive = 0.5 * omega * np.exp(1j * phase)
    h[:, 0, 1] = drive
    h[:, 1, 0] = drive.conj()
    if include_leak:
        h[:, 1, 2] = lam * drive
        h[:, 2, 1] = lam * drive.conj()
    h[:, 0, 0] = -det / 2.0
    h[:, 1, 1] = det / 2.0
    h[:, 2, 2] = 1.5 * det + alpha
    return h


def h_single(m: SingleQubitModel, off: OffsetSet, t: float, include_leak: bool = True) -> Operator:
    """Three-level drive-frame Hamiltonian at time t with offsets applied."""
    omega, phase, det = m.controls(np.asarray([t]))
    omega, phase, det = _apply_offsets(omega, phase, det, off)
    h = three_level_stack(omega, phase, -det, m.alpha, m.lam, include_leak)
    return Operator(h[0], SINGLE_LABELS)


def single_qubit_stack_fn(m: SingleQubitModel, off: OffsetSet, include_leak: bool = True):
    def fn(ts):
        omega, phase, det = m.controls(ts)
        omega, phase, det = _apply_offsets(omega, phase, det, off)
        # drive-above-qubit-positive detunings flip sign on the diagonal
        return three_level_stack(omega, phase, -det, m.alpha, m.lam, include_leak)

    fn.dim = 3
    return fn


def schedule_stack_fn(schedule: PulseSchedule, alpha, lam, off: OffsetSet,
                      include_leak: bool = True, amp_scale: float = 1.0,
                      phase_sign: float = 1.0, det_sign: float = 1.0):
    """Three-level stack driven by a PulseSchedule.

    ``amp_scale``/``phase_sign``/``det_sign`` adapt the schedule's sign and
    scaling conventions to the stack's (Rabi-rate envelope, phase on |0><1|,
    detuning entering the diagonal as written).  Dressed-state schedules whose
    detuning laws are written directly for the diagonal keep ``det_sign=1``;
    plain gate schedules quoting drive-above-qubit detunings use ``-1``.
    """

    def fn(ts):
        omega, phase, det = schedule.controls(ts)
        omega, phase, det = _apply_offsets(omega, phase, det, off)
        return three_level_stack(amp_scale * omega, phase_sign * phase,
                                 det_sign * det, alpha, lam, include_leak)

    fn.dim = 3
    return fn


# ---------------------------------------------------------------------------
# two qubits


def two_qubit_stack(m: TwoQubitModel, off: OffsetSet, ts, include_leak=True):
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    g = (1.0 + off.amp) * m.g12
    nu = m.nu1 + off.det
    beta = m.eps1 / nu
    phi = m.phi1 + off.phase
    mod = np.exp(1j * beta * np.cos(nu * ts + phi))
    n = ts.shape[0]
    h = np.zeros((n, 6, 6), dtype=complex)
    # basis order: 00, 01, 10, 02, 11, 20
    c01_10 = g * np.exp(1j * m.delta1 * ts) * mod
    h[:, 1, 2] = c01_10
    h[:, 2, 1] = c01_10.conj()
    if include_leak:
        c02_11 = math.sqrt(2.0) * g * np.exp(1j * (m.delta1 - m.alpha2) * ts) * mod
        c11_20 = math.sqrt(2.0) * g * np.exp(1j * (m.delta1 + m.alpha1) * ts) * mod
        h[:, 3, 4] = c02_11
        h[:, 4, 3] = c02_11.conj()
        h[:, 4, 5] = c11_20
        h[:, 5, 4] = c11_20.conj()
    return h


def h_two(m: TwoQubitModel, off: OffsetSet, t: float, include_leak: bool = True) -> Operator:
    """Exact interaction-picture two-qubit Hamiltonian (no Bessel truncation)."""
    return Operator(two_qubit_stack(m, off, np.asarray([t]), include_leak)[0], TWO_QUBIT_LABELS)


def two_qubit_stack_fn(m: TwoQubitModel, off: OffsetSet, include_leak: bool = True):
    def fn(ts):
        return two_qubit_stack(m, off, ts, include_leak)

    fn.dim = 6
    return fn


def iswap_duration(g12: float, beta1: float) -> float:
    """Gate time solving J1(beta1) * g12 * tau = pi/2."""
    if g12 <= 0 or beta1 <= 0:
        raise DivergentDuration("g12 and beta1 must be positive")
    j1 = float(scipy.special.j1(beta1))
    if j1 <= 0:
        raise DivergentDuration(f"J1({beta1}) <= 0 gives no finite gate time")
    return (math.pi / 2.0) / (j1 * g12)


# ---------------------------------------------------------------------------
# four-level ladder (Raman state transfer)


def ladder_stack(m: LadderModel, off: OffsetSet, ts, include_leak=True):
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    # Rabi-rate envelope; couplings carry half of it, as in the 3-level stack
    env = 0.5 * (1.0 + off.amp) * m.envelope(ts)
    o01 = env * math.sin(m.theta / 2.0)
    o12 = env * math.cos(m.theta / 2.0)
    d01 = m.det01 + off.det
    d12 = m.det12 + off.det
    p01 = m.phi01 + off.phase
    p12 = m.phi12 + off.phase
    n = ts.shape[0]
    h = np.zeros((n, 4, 4), dtype=complex)
    t01 = o01 * np.exp(1j * (p01 - d01 * ts))
    t12 = o12 * np.exp(1j * (p12 - d12 * ts))
    h[:, 0, 1] = t01
    h[:, 1, 2] = t12
    if include_leak:
        a = m.alpha
        # cross-drive of the 0-1 tone onto 1-2 and 2-3, and of the 1-2 tone
        # onto 0-1 and 2-3, with the anharmonicity phase factors
        h[:, 1, 2] += math.sqrt(2.0) * o01 * np.exp(1j * (p01 - (d01 - a) * ts))
        h[:, 2, 3] = math.sqrt(3.0) * o01 * np.exp(1j * (p01 - (d01 - 2 * a) * ts))
        h[:, 0, 1] += o12 / math.sqrt(2.0) * np.exp(1j * (p12 - (d12 - a) * ts))
        h[:, 2, 3] += math.sqrt(1.5) * o12 * np.exp(1j * (p12 - (d12 - 2 * a) * ts))
    h += h.conj().transpose(0, 2, 1)
    return h


def h_ladder(m: LadderModel, off: OffsetSet, t: float, include_leak: bool = True) -> Operator:
    return Operator(ladder_stack(m, off, np.asarray([t]), include_leak)[0], LADDER_LABELS)


def ladder_stack_fn(m: LadderModel, off: OffsetSet, include_leak: bool = True):
    def fn(ts):
        return ladder_stack(m, off, ts, include_leak)

    fn.dim = 4
    return fn


# ---------------------------------------------------------------------------
# crosstalk (3-level target x 2-level spectator)

Z3 = np.diag([1.0, -1.0, 0.0]).astype(complex)  # Pauli Z on the computational levels
SZ = np.diag([1.0, -1.0]).astype(complex)


def crosstalk_stack(m: CrosstalkModel, off: OffsetSet, ts, include_leak=True):
    omega, phase, det = m.controls(ts)
    omega, phase, det = _apply_offsets(omega, phase, det, off)
    h3 = three_level_stack(omega, phase, -det, m.base.alpha, m.base.lam, include_leak)
    h6 = np.kron(h3, np.eye(2, dtype=complex))
    vzz = 0.5 * m.zeta_zz * np.kron(Z3, SZ)
    return h6 + vzz[None, :, :]


def h_crosstalk(m: CrosstalkModel, off: OffsetSet, t: float, include_leak: bool = True) -> Operator:
    return Operator(crosstalk_stack(m, off, np.asarray([t]), include_leak)[0], CROSSTALK_LABELS)


def crosstalk_shifted_base_fn(m: CrosstalkModel, off: OffsetSet, spectator: str,
                              include_leak: bool = True):
    """Effective 3-level stack for a fixed spectator basis state.

    The ZZ term is diagonal in the spectator, so spectator |0> (|1>) just adds
    +zeta/2 (-zeta/2) times Z3 to the target Hamiltonian.
    """
    sign = 1.0 if spectator == "0" else -1.0

    def fn(ts):
        omega, phase, det = m.controls(ts)
        omega, phase, det = _apply_offsets(omega, phase, det, off)
        h = three_level_stack(omega, phase, -det, m.base.alpha, m.base.lam, include_leak)
        return h + (sign * 0.5 * m.zeta_zz) * Z3[None, :, :]

    fn.dim = 3
    return fn


# ---------------------------------------------------------------------------
# diagnostic transformations


def _x1_generator(dx: float, dy: float, dz: float, lam: float = math.sqrt(2.0)) -> np.ndarray:
    x = np.zeros((3, 3), dtype=complex)
    x[0, 0], x[1, 1], x[2, 2] = -dz / 2.0, dz / 2.0, 1.5 * dz
    c = dx + 1j * dy
    x[0, 1] = c
    x[1, 2] = lam * c
    x += np.triu(x, 1).conj().T
    return x


def transform_a1(dx: float, dy: float, dz: float, lam: float = math.sqrt(2.0)) -> Operator:
    """Static single-qubit frame rotation exp(i X1)."""
    return matexp(Operator(_x1_generator(dx, dy, dz, lam), SINGLE_LABELS), 1j)


def _x2_generator(dx: float, dy: float, dz: float) -> np.ndarray:
    # acts on the {02, 11, 20} block of the 6-dim two-qubit basis
    x = np.zeros((6, 6), dtype=complex)
    i02, i11, i20 = 3, 4, 5
    x[i02, i02], x[i11, i11], x[i20, i20] = -dz, dz, 3.0 * dz
    c = dx + 1j * dy
    x[i02, i11] = c
    x[i11, i20] = c
    x += np.triu(x, 1).conj().T
    return x


def transform_a2(dx: float, dy: float, dz: float) -> Operator:
    """Static two-qubit frame rotation exp(i X2) on the leakage block."""
    return matexp(Operator(_x2_generator(dx, dy, dz), TWO_QUBIT_LABELS), 1j)


def rotated_h1(m: SingleQubitModel, dx: float, dy: float, dz: float, t: float,
               include_leak: bool = True) -> Operator:
    """Numerically rotated Hamiltonian A1 H A1^dagger (A1 static, so no dA/dt term)."""
    a = transform_a1(dx, dy, dz, m.lam).entries
    h = h_single(m, ZERO_OFFSETS, t, include_leak).entries
    return Operator(a @ h @ a.conj().T, SINGLE_LABELS)


def rotated_h1_first_order(m: SingleQubitModel, dx: float, dy: float, dz: float, t: float,
                           include_leak: bool = True) -> Operator:
    """First-order expansion H + i[X1, H] of the rotated Hamiltonian."""
    x = _x1_generator(dx, dy, dz, m.lam)
    h = h_single(m, ZERO_OFFSETS, t, include_leak).entries
    return Operator(h + 1j * (x @ h - h @ x), SINGLE_LABELS)


def leakage_defect(a: Operator, h_leak_fn, total_time: float, n_seg: int, comp_idx,
                   samples_per_seg: int = 2000) -> float:
    """Max over equal windows of || P * integral(A^dag H_leak A dt) ||_F.

    ``h_leak_fn`` samples the leakage Hamiltonian stack; ``comp_idx`` selects
    the computational rows of the windowed first-order average.
    """
    amat = a.entries
    comp_idx = list(comp_idx)
    worst = 0.0
    tau = total_time / n_seg
    for k in range(n_seg):
        ts = np.linspace(k * tau, (k + 1) * tau, samples_per_seg)
        stack = h_leak_fn(ts)
        rotated = np.einsum("ij,njk,kl->nil", amat.conj().T, stack, amat)
        integral = np.trapezoid(rotated, ts, axis=0)
        worst = max(worst, float(np.linalg.norm(integral[comp_idx, :], "fro")))
    return worst
