"""Time-ordered unitary propagation and master-equation integration.

The unitary path evaluates the Hamiltonian at step midpoints and multiplies
piecewise exponentials (each computed by batched Hermitian eigendecomposition).
The dissipative path is a fixed-step RK4 integrator operating directly on the
density matrix, with symmetrization each step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, IntegrationError
from .operators import DensityMatrix, Operator

__all__ = [
    "IntegratorConfig",
    "EvolutionResult",
    "propagate_unitary",
    "lindblad_evolve",
    "collapse_ops",
    "two_qubit_collapse_ops",
    "default_steps",
]


@dataclass(frozen=True)
class IntegratorConfig:
    n_steps: int = 2000
    method: str = "piecewise-exponential"  # or "rk4"
    sample_stride: int = 0  # 0: keep no intermediate samples

    def __post_init__(self):
        if self.n_steps < 100:
            raise ConfigError("n_steps must be at least 100")
        if self.method not in ("piecewise-exponential", "rk4"):
            raise ConfigError(f"unknown integration method {self.method!r}")


@dataclass
class EvolutionResult:
    final: np.ndarray
    samples: list = field(default_factory=list)  # list of (t, matrix)
    diagnostics: dict = field(default_factory=dict)

    @property
    def final_operator(self) -> Operator:
        return Operator(self.final)

    @property
    def final_density(self) -> DensityMatrix:
        return DensityMatrix(self.final)


def default_steps(h_fn, total_time: float, floor: int = 2000, probe: int = 257) -> int:
    """Step count 20*T*max||H||/(2pi), rounded up, with a floor."""
    ts = np.linspace(0.0, total_time, probe)
    norms = np.linalg.norm(h_fn(ts), ord=2, axis=(1, 2))
    n = int(math.ceil(20.0 * total_time * float(norms.max()) / (2.0 * math.pi)))
    return max(floor, n)


def _check_finite(mat, what: str):
    if not np.all(np.isfinite(mat.view(float))):
        raise IntegrationError(f"{what} diverged to non-finite values")


def _step_unitaries(h_fn, ts_mid, dt):
    """exp(-i H(t_mid) dt) for every step, via batched eigendecomposition."""
    h = h_fn(ts_mid)
    w, v = np.linalg.eigh(h)
    phase = np.exp(-1j * w * dt)
    return np.einsum("nij,nj,nkj->nik", v, phase, v.conj())


def _ordered_product(us: np.ndarray) -> np.ndarray:
    """Product U_{n-1} ... U_1 U_0 by pairwise (order-preserving) reduction."""
    while us.shape[0] > 1:
        m = us.shape[0] // 2
        paired = np.einsum("nij,njk->nik", us[1 : 2 * m : 2], us[0 : 2 * m : 2])
        if us.shape[0] % 2:
            paired = np.concatenate([paired, us[-1:]], axis=0)
        us = paired
    return us[0]


def propagate_unitary(h_fn, total_time: float, cfg: IntegratorConfig | None = None) -> EvolutionResult:
    """Ordered product of midpoint piecewise exponentials over [0, total_time]."""
    if cfg is None:
        cfg = IntegratorConfig(n_steps=default_steps(h_fn, total_time))
    n = cfg.n_steps
    dt = total_time / n
    samples = []
    if cfg.method == "rk4":
        # dU/dt = -i H U with classic RK4; H needed at 0, dt/2, dt, ...
        hs = h_fn(np.arange(2 * n + 1) * (dt / 2.0))
        u = np.eye(hs.shape[1], dtype=complex)
        for k in range(n):
            h0, h1, h2 = hs[2 * k], hs[2 * k + 1], hs[2 * k + 2]
            k1 = -1j * (h0 @ u)
            k2 = -1j * (h1 @ (u + 0.5 * dt * k1))
            k3 = -1j * (h1 @ (u + 0.5 * dt * k2))
            k4 = -1j * (h2 @ (u + dt * k3))
            u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if cfg.sample_stride > 0 and ((k + 1) % cfg.sample_stride == 0 or k == n - 1):
                samples.append(((k + 1) * dt, u.copy()))
        final = u
    else:
        ts_mid = (np.arange(n) + 0.5) * dt
        us = _step_unitaries(h_fn, ts_mid, dt)
        _check_finite(us, "unitary propagation")
        if cfg.sample_stride > 0:
            u = np.eye(us.shape[1], dtype=complex)
            for k in range(n):
                u = us[k] @ u
                if (k + 1) % cfg.sample_stride == 0 or k == n - 1:
                    samples.append(((k + 1) * dt, u.copy()))
            final = u
        else:
            final = _ordered_product(us)
    _check_finite(final, "unitary propagation")
    defect = float(np.linalg.norm(final.conj().T @ final - np.eye(final.shape[0]), "fro"))
    if defect > 1e-6:
        raise IntegrationError(f"unitarity defect {defect:.2e} exceeds 1e-6")
    return EvolutionResult(final, samples, {"unitarity_defect": defect, "n_steps": n})


def collapse_ops(dim: int):
    """Ladder decay operator sum(sqrt(j+1)|j><j+1|) and dephasing sum(j|j><j|)."""
    if dim < 2:
        raise ConfigError("collapse operators need dim >= 2")
    decay = np.zeros((dim, dim), dtype=complex)
    for j in range(dim - 1):
        decay[j, j + 1] = math.sqrt(j + 1.0)
    dephase = np.diag(np.arange(dim, dtype=float)).astype(complex)
    return Operator(decay), Operator(dephase)


def two_qubit_collapse_ops():
    """Per-transmon collapse operators built on 3x3 tensor 3x3 and projected to
    the working basis {00, 01, 10, 02, 11, 20}."""
    from .models import TWO_QUBIT_LABELS

    decay3, dephase3 = collapse_ops(3)
    eye3 = np.eye(3, dtype=complex)
    full_labels = [a + b for a in "012" for b in "012"]
    keep = [full_labels.index(l) for l in TWO_QUBIT_LABELS]
    out = []
    for op3, on_first in [(decay3.entries, True), (decay3.entries, False),
                          (dephase3.entries, True), (dephase3.entries, False)]:
        big = np.kron(op3, eye3) if on_first else np.kron(eye3, op3)
        out.append(Operator(big[np.ix_(keep, keep)], TWO_QUBIT_LABELS))
    decay_ops, dephase_ops = out[:2], out[2:]
    return decay_ops, dephase_ops


def _dissipator_terms(ops):
    mats = [np.asarray(o.entries if isinstance(o, Operator) else o, dtype=complex) for o in ops]
    return [(m, m.conj().T @ m) for m in mats]


def lindblad_evolve(h_fn, rho0, kappa1: float, kappa_phi: float, total_time: float,
                    cfg: IntegratorConfig | None = None, decay_ops=None, dephase_ops=None,
                    conventional_rates: bool = False) -> EvolutionResult:
    """Fixed-step RK4 integration of the master equation.

    The dissipator prefactor is (1/2)(kappa/2) per channel on the doubled form
    2 L rho L^dag - {L^dag L, rho}, so |1> population decays as exp(-kappa t/2);
    ``conventional_rates=True`` switches to the usual normalization where it
    decays as exp(-kappa t).
    """
    rho = np.asarray(rho0.entries if isinstance(rho0, DensityMatrix) else rho0, dtype=complex)
    single = rho.ndim == 2
    stack = rho[None, :, :] if single else rho.copy()
    dim = stack.shape[-1]
    if decay_ops is None or dephase_ops is None:
        d_decay, d_phase = collapse_ops(dim)
        decay_ops = decay_ops or [d_decay]
        dephase_ops = dephase_ops or [d_phase]
    scale = 1.0 if conventional_rates else 0.5
    channels = [(scale * kappa1, m, mm) for m, mm in _dissipator_terms(decay_ops)]
    channels += [(scale * kappa_phi, m, mm) for m, mm in _dissipator_terms(dephase_ops)]
    channels = [(c, m, mm) for c, m, mm in channels if c != 0.0]

    if cfg is None:
        cfg = IntegratorConfig(n_steps=default_steps(h_fn, total_time))
    n = cfg.n_steps
    dt = total_time / n
    # H at 0, dt/2, dt, ... (2n+1 points) serves all RK4 stages
    hs = h_fn(np.arange(2 * n + 1) * (dt / 2.0))

    def rhs(h, r):
        out = -1j * (h @ r - r @ h)
        for c, m, mm in channels:
            out += c * (m @ r @ m.conj().T - 0.5 * (mm @ r + r @ mm))
        return out

    tr0 = np.trace(stack, axis1=-2, axis2=-1).real.copy()
    samples = []
    max_drift = 0.0
    for k in range(n):
        h0, h1, h2 = hs[2 * k], hs[2 * k + 1], hs[2 * k + 2]
        k1 = rhs(h0, stack)
        k2 = rhs(h1, stack + 0.5 * dt * k1)
        k3 = rhs(h1, stack + 0.5 * dt * k2)
        k4 = rhs(h2, stack + dt * k3)
        stack = stack + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        stack = 0.5 * (stack + stack.conj().transpose(0, 2, 1))
        if cfg.sample_stride > 0 and ((k + 1) % cfg.sample_stride == 0 or k == n - 1):
            samples.append(((k + 1) * dt, stack[0].copy() if single else stack.copy()))
    _check_finite(stack, "master-equation integration")
    drift = np.abs(np.trace(stack, axis1=-2, axis2=-1).real - tr0)
    max_drift = float(drift.max())
    if max_drift > 1e-5:
        raise IntegrationError(f"trace drift {max_drift:.2e} exceeds 1e-5")
    final = stack[0] if single else stack
    return EvolutionResult(final, samples, {"trace_drift": max_drift, "n_steps": n})
