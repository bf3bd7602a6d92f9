"""End-to-end simulation pipelines for each physical scenario.

A Scenario bundles the Hamiltonian factory, gate/transfer target, timing,
integrator defaults, and decoherence operators, so the tune-up layer and the
CLI can ask for a fidelity without repeating any wiring.  Crosstalk variants
carry two Hamiltonian stacks (one per spectator state); fidelities average
over them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .metrics import (
    Channel,
    averaged_fidelity_1q,
    averaged_fidelity_1q_unitary,
    averaged_fidelity_2q,
    iswap_ideal,
    state_fidelity,
    trace_gate_fidelity,
)
from .models import (
    LADDER_LABELS,
    SINGLE_LABELS,
    TWO_QUBIT_LABELS,
    Z3,
    LadderModel,
    OffsetSet,
    SingleQubitModel,
    TwoQubitModel,
    ZERO_OFFSETS,
    iswap_duration,
    ladder_stack_fn,
    schedule_stack_fn,
    single_qubit_stack_fn,
    two_qubit_stack_fn,
)
from .propagation import (
    IntegratorConfig,
    collapse_ops,
    lindblad_evolve,
    propagate_unitary,
    two_qubit_collapse_ops,
)
from .pulses import (
    DragFields,
    GtcParams,
    PulseSchedule,
    drag_fields,
    duration_for_area,
    gtc_schedule,
    sine_envelope,
)
from .units import TWO_PI

__all__ = [
    "PhysicalParams",
    "DEFAULT_PARAMS",
    "Scenario",
    "build_scenario",
    "leak_fidelity",
    "decoherent_fidelity",
    "population_trajectory",
    "gtc_target_block",
    "drag_scenario",
    "NOT_IDEAL",
    "HADAMARD_IDEAL",
    "DEFAULT_GTC_PARAMS",
    "SCENARIO_NAMES",
    "hadamard_schedule",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Device parameters; all angular frequencies in rad/s."""

    omega_m: float = TWO_PI * 30e6
    alpha: float = TWO_PI * 220e6
    kappa1: float = TWO_PI * 2e3
    kappa_phi: float = TWO_PI * 2e3
    g12: float = TWO_PI * 10e6
    alpha1: float = TWO_PI * 220e6
    alpha2: float = TWO_PI * 200e6
    delta1: float = TWO_PI * 500e6
    beta1: float = 1.2
    zeta_zz: float = 0.0


DEFAULT_PARAMS = PhysicalParams()

NOT_IDEAL = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
HADAMARD_IDEAL = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)

DEFAULT_GTC_PARAMS = GtcParams(math.pi / 4.0, 0.0, 1.5 * math.pi, 0.0, 0.7 * math.pi)

SCENARIO_NAMES = ("not", "hadamard", "iswap", "stirap", "gtc", "rabi-crosstalk")

LAM = math.sqrt(2.0)


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str  # gate-1q | gate-2q | transfer
    dim: int
    labels: tuple
    comp_idx: tuple
    ideal: np.ndarray | None
    total_time: float
    n_steps: int
    h_factory: callable  # (off, include_leak) -> tuple of stack fns
    kappa1: float
    kappa_phi: float
    decay_ops: tuple | None  # None: ladder defaults for `dim`
    dephase_ops: tuple | None
    initial_idx: int = 0
    target_idx: int | None = None

    def h_fns(self, off: OffsetSet = ZERO_OFFSETS, include_leak: bool = True):
        return self.h_factory(off, include_leak)

    def collapse(self):
        if self.decay_ops is None or self.dephase_ops is None:
            decay, dephase = collapse_ops(self.dim)
            return (decay,), (dephase,)
        return self.decay_ops, self.dephase_ops


def _zz_shifted(fn, zeta: float, sign: float):
    """Add the spectator-conditioned ZZ energy shift to a 3-level stack."""

    shift = (sign * 0.5 * zeta) * Z3

    def g(ts):
        return fn(ts) + shift[None, :, :]

    g.dim = 3
    return g


def _variant_factory(base_factory, zeta: float):
    """Turn a single-stack factory into spectator-averaged variants."""

    if zeta == 0.0:
        return base_factory

    def factory(off, include_leak):
        (fn,) = base_factory(off, include_leak)
        return (_zz_shifted(fn, zeta, +1.0), _zz_shifted(fn, zeta, -1.0))

    return factory


def hadamard_schedule(omega_m: float) -> PulseSchedule:
    """Half rotation about +y followed by a full bit flip about +x.

    The composite equals the Hadamard up to a global phase; both half-sine
    segments share the peak Rabi rate ``omega_m``.
    """
    t_quarter = duration_for_area(math.pi / 2.0, omega_m)
    t_half = duration_for_area(math.pi, omega_m)
    return PulseSchedule(
        (
            sine_envelope(omega_m, t_quarter, phase=-math.pi / 2.0),
            sine_envelope(omega_m, t_half, phase=0.0),
        )
    )


def _single_qubit_scenario(name: str, p: PhysicalParams, zeta: float) -> Scenario:
    if name in ("not",):
        duration = duration_for_area(math.pi, p.omega_m)
        model = SingleQubitModel(p.omega_m, duration, p.alpha)
        ideal = NOT_IDEAL
        n_steps = 4000

        def base(off, include_leak):
            return (single_qubit_stack_fn(model, off, include_leak),)

    else:
        schedule = hadamard_schedule(p.omega_m)
        duration = schedule.total_time
        ideal = HADAMARD_IDEAL
        n_steps = 6000

        def base(off, include_leak):
            return (
                schedule_stack_fn(
                    schedule, p.alpha, LAM, off, include_leak, det_sign=-1.0
                ),
            )

    return Scenario(
        name=name,
        kind="gate-1q",
        dim=3,
        labels=SINGLE_LABELS,
        comp_idx=(0, 1),
        ideal=ideal,
        total_time=duration,
        n_steps=n_steps,
        h_factory=_variant_factory(base, zeta),
        kappa1=p.kappa1,
        kappa_phi=p.kappa_phi,
        decay_ops=None,
        dephase_ops=None,
    )


def _rabi_hadamard_scenario(p: PhysicalParams, zeta: float) -> Scenario:
    """Single detuned half-sine pulse rotating about (x+z)/sqrt(2) by pi.

    Matching the drive detuning to the instantaneous Rabi rate tilts the
    rotation axis 45 degrees out of the equator; envelope area pi/sqrt(2)
    makes the tilted rotation angle pi, i.e. a Hadamard up to global phase.
    """
    duration = duration_for_area(math.pi / math.sqrt(2.0), p.omega_m)
    model = SingleQubitModel(p.omega_m, duration, p.alpha, detuning_ratio=1.0)

    def base(off, include_leak):
        return (single_qubit_stack_fn(model, off, include_leak),)

    return Scenario(
        name="rabi-crosstalk",
        kind="gate-1q",
        dim=3,
        labels=SINGLE_LABELS,
        comp_idx=(0, 1),
        ideal=HADAMARD_IDEAL,
        total_time=duration,
        n_steps=4000,
        h_factory=_variant_factory(base, zeta),
        kappa1=p.kappa1,
        kappa_phi=p.kappa_phi,
        decay_ops=None,
        dephase_ops=None,
    )


def _iswap_scenario(p: PhysicalParams) -> Scenario:
    nu1 = p.delta1
    model = TwoQubitModel(
        g12=p.g12,
        alpha1=p.alpha1,
        alpha2=p.alpha2,
        delta1=p.delta1,
        nu1=nu1,
        eps1=p.beta1 * nu1,
        phi1=1.5 * math.pi,
    )
    tau = iswap_duration(p.g12, p.beta1)
    decay, dephase = two_qubit_collapse_ops()

    def base(off, include_leak):
        return (two_qubit_stack_fn(model, off, include_leak),)

    return Scenario(
        name="iswap",
        kind="gate-2q",
        dim=6,
        labels=TWO_QUBIT_LABELS,
        comp_idx=(0, 1, 2, 4),
        ideal=iswap_ideal(),
        total_time=tau,
        n_steps=16384,
        h_factory=base,
        kappa1=p.kappa1,
        kappa_phi=p.kappa_phi,
        decay_ops=tuple(decay),
        dephase_ops=tuple(dephase),
        initial_idx=1,
    )


def _stirap_scenario(p: PhysicalParams) -> Scenario:
    # couplings are half the Rabi envelope, so a full bright-state cycle
    # (rotation 2*pi) needs envelope area 2*pi
    tau = duration_for_area(2.0 * math.pi, p.omega_m)
    model = LadderModel(p.omega_m, tau, p.alpha)

    def base(off, include_leak):
        return (ladder_stack_fn(model, off, include_leak),)

    return Scenario(
        name="stirap",
        kind="transfer",
        dim=4,
        labels=LADDER_LABELS,
        comp_idx=(0, 1, 2),
        ideal=None,
        total_time=tau,
        n_steps=8192,
        h_factory=base,
        kappa1=p.kappa1,
        kappa_phi=p.kappa_phi,
        decay_ops=None,
        dephase_ops=None,
        initial_idx=0,
        target_idx=2,
    )


def _gtc_scenario(p: PhysicalParams, gtc: GtcParams, zeta: float) -> Scenario:
    schedule = gtc_schedule(gtc, p.omega_m)

    def base(off, include_leak):
        # the trajectory schedule puts the drive phase on |1><0| and writes
        # its detuning law directly for the diagonal; flip the phase only
        return (
            schedule_stack_fn(
                schedule, p.alpha, LAM, off, include_leak, phase_sign=-1.0
            ),
        )

    return Scenario(
        name="gtc",
        kind="gate-1q",
        dim=3,
        labels=SINGLE_LABELS,
        comp_idx=(0, 1),
        ideal=gtc_target_block(gtc),
        total_time=schedule.total_time,
        n_steps=16000,
        h_factory=_variant_factory(base, zeta),
        kappa1=p.kappa1,
        kappa_phi=p.kappa_phi,
        decay_ops=None,
        dephase_ops=None,
    )


def gtc_target_block(gtc: GtcParams) -> np.ndarray:
    """Closed-form two-level evolution operator of the trajectory."""
    c, s = math.cos(gtc.gamma_g), math.sin(gtc.gamma_g)
    cx, sx = math.cos(gtc.chi0), math.sin(gtc.chi0)
    return np.array(
        [
            [c + 1j * s * cx, 1j * s * sx * np.exp(-1j * gtc.xi0)],
            [1j * s * sx * np.exp(1j * gtc.xi0), c - 1j * s * cx],
        ],
        dtype=complex,
    )


def build_scenario(
    name: str,
    params: PhysicalParams = DEFAULT_PARAMS,
    gtc: GtcParams | None = None,
    zeta: float | None = None,
) -> Scenario:
    zeta = params.zeta_zz if zeta is None else zeta
    if name == "not" or name == "hadamard":
        return _single_qubit_scenario(name, params, zeta)
    if name == "rabi-crosstalk":
        return _rabi_hadamard_scenario(params, zeta)
    if name == "iswap":
        return _iswap_scenario(params)
    if name == "stirap":
        return _stirap_scenario(params)
    if name == "gtc":
        return _gtc_scenario(params, gtc or DEFAULT_GTC_PARAMS, zeta)
    raise ConfigError(f"unknown scenario {name!r}")


def _cfg(sc: Scenario, n_steps=None, method="piecewise-exponential", stride=0):
    return IntegratorConfig(
        n_steps=int(n_steps or sc.n_steps), method=method, sample_stride=stride
    )


def unitary_finals(sc: Scenario, off: OffsetSet = ZERO_OFFSETS, include_leak: bool = True,
                   n_steps=None, method: str = "piecewise-exponential"):
    cfg = _cfg(sc, n_steps, method)
    return [
        propagate_unitary(fn, sc.total_time, cfg).final
        for fn in sc.h_fns(off, include_leak)
    ]


def leak_fidelity(sc: Scenario, off: OffsetSet = ZERO_OFFSETS, include_leak: bool = True,
                  n_steps=None, method: str = "piecewise-exponential",
                  averaged: bool = False) -> float:
    """Closed-system fidelity (trace-gate, or state fidelity for transfers).

    ``averaged=True`` uses the input-state-averaged formula instead of the
    trace formula for single-qubit gates.
    """
    finals = unitary_finals(sc, off, include_leak, n_steps, method)
    vals = []
    for u in finals:
        if sc.kind == "transfer":
            vals.append(float(abs(u[sc.target_idx, sc.initial_idx]) ** 2))
        elif averaged and sc.kind == "gate-1q":
            vals.append(averaged_fidelity_1q_unitary(u, sc.ideal, sc.comp_idx))
        else:
            vals.append(trace_gate_fidelity(u, sc.ideal, sc.comp_idx))
    return float(np.mean(vals))


def _channel(sc: Scenario, fn, n_steps=None) -> Channel:
    decay, dephase = sc.collapse()
    cfg = _cfg(sc, n_steps)

    def evolve(stack):
        return lindblad_evolve(
            fn, stack, sc.kappa1, sc.kappa_phi, sc.total_time, cfg,
            decay_ops=list(decay), dephase_ops=list(dephase),
        ).final

    return Channel.from_evolver(evolve, sc.dim)


def decoherent_fidelity(sc: Scenario, off: OffsetSet = ZERO_OFFSETS, n_steps=None,
                        include_leak: bool = True) -> float:
    """Averaged gate fidelity (or transfer state fidelity) under the master
    equation with the scenario's decoherence rates."""
    fns = sc.h_fns(off, include_leak)
    if sc.kind == "transfer":
        decay, dephase = sc.collapse()
        cfg = _cfg(sc, n_steps)
        vals = []
        for fn in fns:
            rho0 = np.zeros((sc.dim, sc.dim), dtype=complex)
            rho0[sc.initial_idx, sc.initial_idx] = 1.0
            rho = lindblad_evolve(
                fn, rho0, sc.kappa1, sc.kappa_phi, sc.total_time, cfg,
                decay_ops=list(decay), dephase_ops=list(dephase),
            ).final
            vals.append(float(rho[sc.target_idx, sc.target_idx].real))
        return float(np.mean(vals))
    vals = []
    for fn in fns:
        chan = _channel(sc, fn, n_steps)
        if sc.kind == "gate-2q":
            vals.append(averaged_fidelity_2q(chan, sc.ideal, comp_idx=sc.comp_idx))
        else:
            vals.append(averaged_fidelity_1q(chan, sc.ideal, comp_idx=sc.comp_idx))
    return float(np.mean(vals))


def population_trajectory(sc: Scenario, off: OffsetSet = ZERO_OFFSETS,
                          decoherence: bool = False, include_leak: bool = True,
                          n_samples: int = 200, n_steps=None):
    """Level populations over time from the scenario's initial basis state.

    Returns (times, {label: population array}); crosstalk variants are
    averaged.
    """
    n = int(n_steps or sc.n_steps)
    stride = max(1, n // max(1, n_samples))
    cfg = _cfg(sc, n, stride=stride)
    fns = sc.h_fns(off, include_leak)
    pops_acc = None
    times = None
    for fn in fns:
        if decoherence:
            decay, dephase = sc.collapse()
            rho0 = np.zeros((sc.dim, sc.dim), dtype=complex)
            rho0[sc.initial_idx, sc.initial_idx] = 1.0
            res = lindblad_evolve(
                fn, rho0, sc.kappa1, sc.kappa_phi, sc.total_time, cfg,
                decay_ops=list(decay), dephase_ops=list(dephase),
            )
            ts = np.array([t for t, _ in res.samples])
            diag = np.array([np.diag(m).real for _, m in res.samples])
        else:
            res = propagate_unitary(fn, sc.total_time, cfg)
            ts = np.array([t for t, _ in res.samples])
            diag = np.array(
                [np.abs(m[:, sc.initial_idx]) ** 2 for _, m in res.samples]
            )
        ts = np.concatenate([[0.0], ts])
        first = np.zeros(sc.dim)
        first[sc.initial_idx] = 1.0
        diag = np.vstack([first, diag])
        pops_acc = diag if pops_acc is None else pops_acc + diag
        times = ts
    pops_acc = pops_acc / len(fns)
    return times, {l: pops_acc[:, j] for j, l in enumerate(sc.labels)}


# ---------------------------------------------------------------------------
# derivative-corrected comparison scenario

_S_X = np.zeros((3, 3), dtype=complex)
_S_X[0, 1] = _S_X[1, 0] = 1.0
_S_X[1, 2] = _S_X[2, 1] = math.sqrt(2.0)
_S_Y = np.zeros((3, 3), dtype=complex)
_S_Y[1, 0] = 1j
_S_Y[0, 1] = -1j
_S_Y[2, 1] = 1j * math.sqrt(2.0)
_S_Y[1, 2] = -1j * math.sqrt(2.0)
_S_Z = np.diag([1.0, -1.0, -3.0]).astype(complex)
_P2 = np.diag([0.0, 0.0, 1.0]).astype(complex)


def _drag_stack_fn(fields: DragFields, alpha: float, corrected: bool):
    def fn(ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if corrected:
            bx, by, bz = fields.total(ts)
        else:
            bx, by, bz = fields.b_x(ts), fields.b_y(ts), fields.b_z(ts)
        h = 0.5 * (
            bx[:, None, None] * _S_X
            + by[:, None, None] * _S_Y
            + bz[:, None, None] * _S_Z
        )
        # |2> sits at +alpha, matching the three-level stack convention
        return h + alpha * _P2[None, :, :]

    fn.dim = 3
    return fn


def drag_scenario(gate: str, params: PhysicalParams = DEFAULT_PARAMS,
                  corrected: bool = True) -> Scenario:
    """The same single-qubit gate built from the field-vector Hamiltonian
    H = (1/2) B.S + alpha|2><2|, optionally with the derivative correction.

    The field envelope equals the gate's Rabi rate, so both formulations give
    the identical computational-subspace rotation.
    """
    base = _single_qubit_scenario(gate, params, 0.0)
    model_duration = base.total_time
    if gate == "not":

        def envelope(t):
            t = np.asarray(t, dtype=float)
            return params.omega_m * np.sin(np.pi * t / model_duration)

        def phase(t):
            return np.zeros_like(np.asarray(t, dtype=float))

    else:
        schedule = hadamard_schedule(params.omega_m)

        def envelope(t):
            return schedule.controls(t)[0]

        def phase(t):
            return schedule.controls(t)[1]

    def detuning(t):
        return np.zeros_like(np.asarray(t, dtype=float))

    fields = drag_fields(envelope, phase, detuning, params.alpha, model_duration)

    def factory(off, include_leak):
        if off != ZERO_OFFSETS:
            raise ConfigError("the derivative-corrected scenario takes no offsets")
        return (_drag_stack_fn(fields, params.alpha, corrected),)

    return replace(
        base,
        name=f"{gate}-drag" if corrected else f"{gate}-bare",
        h_factory=factory,
    )
