"""Consistency checks on the error-propagator picture.

The error propagator isolates what the leakage terms do on top of the ideal
gate; the windowed first-order residual quantifies how well a static frame
rotation averages those terms away over sub-intervals of the gate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .models import OffsetSet, ZERO_OFFSETS
from .operators import Operator
from .propagation import IntegratorConfig, propagate_unitary
from .scenarios import Scenario

__all__ = ["MagnusReport", "error_propagator", "magnus_residual"]


@dataclass(frozen=True)
class MagnusReport:
    """Windowed first-order leakage residuals of a candidate frame rotation."""

    n_seg: int
    residuals: tuple
    max_residual: float


def error_propagator(sc: Scenario, off: OffsetSet = ZERO_OFFSETS,
                     n_steps=None) -> np.ndarray:
    """U_err(T) = U_target(T)^dagger U_full(T) for the scenario's first stack.

    The target propagator evolves under the same offsets with the leakage
    terms removed, so U_err collects exactly the effect of leakage.
    """
    cfg = IntegratorConfig(n_steps=int(n_steps or sc.n_steps))
    (full,) = sc.h_fns(off, include_leak=True)[:1]
    (targ,) = sc.h_fns(off, include_leak=False)[:1]
    u_full = propagate_unitary(full, sc.total_time, cfg).final
    u_targ = propagate_unitary(targ, sc.total_time, cfg).final
    return u_targ.conj().T @ u_full


def magnus_residual(sc: Scenario, a: Operator, n_seg: int,
                    off: OffsetSet = ZERO_OFFSETS,
                    samples_per_seg: int = 2000) -> MagnusReport:
    """First-order leakage average per time window under frame rotation ``a``.

    Splits [0, T] into ``n_seg`` equal windows and computes
    ||P integral(A^dag H_leak A dt)||_F on each, where H_leak is the
    difference between the full and leakage-free Hamiltonian stacks and P
    keeps the computational rows.
    """
    if not 1 <= int(n_seg) <= 64:
        raise ConfigError("n_seg must lie in [1, 64]")
    n_seg = int(n_seg)
    amat = np.asarray(a.entries if isinstance(a, Operator) else a, dtype=complex)
    if amat.shape != (sc.dim, sc.dim):
        raise ConfigError(f"frame rotation must be {sc.dim}x{sc.dim} for scenario {sc.name!r}")
    (full,) = sc.h_fns(off, include_leak=True)[:1]
    (targ,) = sc.h_fns(off, include_leak=False)[:1]
    comp = list(sc.comp_idx)
    tau = sc.total_time / n_seg
    residuals = []
    for k in range(n_seg):
        ts = np.linspace(k * tau, (k + 1) * tau, samples_per_seg)
        leak = full(ts) - targ(ts)
        rotated = np.einsum("ij,njk,kl->nil", amat.conj().T, leak, amat)
        integral = np.trapezoid(rotated, ts, axis=0)
        residuals.append(float(np.linalg.norm(integral[comp, :], "fro")))
    return MagnusReport(n_seg, tuple(residuals), max(residuals))
