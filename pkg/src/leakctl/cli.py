"""Experiment runner: JSON configs in, CSV tables and JSON summaries out.

Every summary embeds the fully resolved configuration (all frequencies in
rad/s) plus the tool version, so downstream plotting needs nothing but the
output files.  CSV output uses a fixed column order, 12 significant digits,
UTF-8, and LF line endings, making identical configs produce byte-identical
files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, IntegrationError, LeakctlError
from .framework import error_propagator, magnus_residual
from .models import OffsetSet, ZERO_OFFSETS
from .operators import Operator
from .pulses import GtcParams
from .scenarios import (
    DEFAULT_GTC_PARAMS,
    PhysicalParams,
    build_scenario,
    decoherent_fidelity,
    leak_fidelity,
    population_trajectory,
)
from .tuneup import (
    PARAMETERS,
    CalibrationError,
    SweepSpec,
    fit_quadratic,
    gtc_crosstalk_study,
    optimize_offsets,
    quantize_offsets,
    robustness_grid,
    scenario_objective,
    sweep,
)
from .units import parse_angular, parse_phase

__all__ = ["main"]

SIM_SCENARIOS = ("not", "hadamard", "iswap", "stirap", "gtc")
ALL_SCENARIOS = SIM_SCENARIOS + ("drag", "robustness", "framework")

_PARAM_FIELDS = {
    "omega_m": parse_angular,
    "alpha": parse_angular,
    "kappa1": parse_angular,
    "kappa_phi": parse_angular,
    "g12": parse_angular,
    "alpha1": parse_angular,
    "alpha2": parse_angular,
    "delta1": parse_angular,
    "beta1": float,
    "zeta_zz": parse_angular,
}

_GTC_FIELDS = ("chi0", "xi0", "gamma_g", "chi1", "chi3")


def _reject_unknown(block: dict, allowed, where: str):
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}")


def _parse_params(block) -> PhysicalParams:
    if not isinstance(block, dict):
        raise ConfigError("'params' must be an object")
    _reject_unknown(block, _PARAM_FIELDS, "'params'")
    return PhysicalParams(**{k: _PARAM_FIELDS[k](v) for k, v in block.items()})


def _parse_offsets(block):
    if block == "optimize":
        return "optimize"
    if not isinstance(block, dict):
        raise ConfigError("'offsets' must be an object or the string \"optimize\"")
    _reject_unknown(block, PARAMETERS, "'offsets'")
    return OffsetSet(
        amp=float(block.get("amp", 0.0)),
        det=parse_angular(block.get("det", 0.0)),
        phase=parse_phase(block.get("phase", 0.0)),
    )


def _parse_gtc(block) -> GtcParams:
    if not isinstance(block, dict):
        raise ConfigError("'gtc' must be an object")
    _reject_unknown(block, _GTC_FIELDS, "'gtc'")
    defaults = {f: getattr(DEFAULT_GTC_PARAMS, f) for f in _GTC_FIELDS}
    defaults.update({k: parse_phase(v) for k, v in block.items()})
    return GtcParams(**defaults)


def _parse_sweep_block(block) -> dict:
    if not isinstance(block, dict):
        raise ConfigError("'sweep' must be an object")
    _reject_unknown(block, ("parameter", "lo", "hi", "n_points"), "'sweep'")
    for key in ("parameter", "lo", "hi"):
        if key not in block:
            raise ConfigError(f"'sweep' needs a {key!r} key")
    parameter = block["parameter"]
    parse = {"amp": float, "det": parse_angular, "phase": parse_phase}.get(parameter)
    if parse is None:
        raise ConfigError(f"unknown sweep parameter {parameter!r}")
    return {
        "parameter": parameter,
        "lo": parse(block["lo"]),
        "hi": parse(block["hi"]),
        "n_points": int(block.get("n_points", 41)),
    }


def _parse_calibration(block) -> dict:
    if not isinstance(block, dict):
        raise ConfigError("'calibration' must be an object")
    _reject_unknown(block, ("eps_amp", "eps_det", "eps_phase", "n_points"), "'calibration'")
    return {
        "eps_amp": float(block.get("eps_amp", 0.0)),
        "eps_det": parse_angular(block.get("eps_det", 0.0)),
        "eps_phase": parse_phase(block.get("eps_phase", 0.0)),
        "n_points": int(block.get("n_points", 5)),
    }


def _parse_quantize(block) -> dict:
    if not isinstance(block, dict):
        raise ConfigError("'quantize' must be an object")
    _reject_unknown(block, ("amp_res", "det_res", "phase_res"), "'quantize'")
    return {
        "amp_res": float(block.get("amp_res", 0.0)),
        "det_res": parse_angular(block.get("det_res", 0.0)),
        "phase_res": parse_phase(block.get("phase_res", 0.0)),
    }


def _parse_study(block) -> dict:
    if not isinstance(block, dict):
        raise ConfigError("'study' must be an object")
    _reject_unknown(block, ("zeta_max", "n_zeta", "decoherence"), "'study'")
    return {
        "zeta_max": parse_angular(block.get("zeta_max", "2pi*2MHz")),
        "n_zeta": int(block.get("n_zeta", 41)),
        "decoherence": bool(block.get("decoherence", True)),
    }


_TOP_KEYS = (
    "scenario", "params", "offsets", "decoherence", "n_steps", "method",
    "zeta", "gate", "gtc", "sweep", "calibration", "quantize", "study",
    "n_seg", "seed_grid", "out",
)


class ExperimentConfig:
    """Validated experiment description loaded from a JSON file."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        _reject_unknown(raw, _TOP_KEYS, "config")
        if "scenario" not in raw:
            raise ConfigError("config needs a 'scenario' key")
        self.scenario = raw["scenario"]
        if self.scenario not in ALL_SCENARIOS:
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; choose from {ALL_SCENARIOS}"
            )
        self.params = _parse_params(raw.get("params", {}))
        self.offsets = _parse_offsets(raw.get("offsets", {}))
        self.decoherence = bool(raw.get("decoherence", False))
        self.n_steps = int(raw["n_steps"]) if "n_steps" in raw else None
        self.method = raw.get("method", "piecewise-exponential")
        self.zeta = parse_angular(raw["zeta"]) if "zeta" in raw else None
        self.gate = raw.get("gate", "not")
        self.gtc = _parse_gtc(raw.get("gtc", {}))
        self.sweep = _parse_sweep_block(raw["sweep"]) if "sweep" in raw else None
        self.calibration = _parse_calibration(raw.get("calibration", {}))
        self.quantize = _parse_quantize(raw.get("quantize", {}))
        self.study = _parse_study(raw.get("study", {}))
        self.n_seg = int(raw.get("n_seg", 8))
        self.seed_grid = int(raw.get("seed_grid", 7))
        self.out = raw.get("out", ".")
        if self.gate not in SIM_SCENARIOS:
            raise ConfigError(f"unknown gate {self.gate!r}; choose from {SIM_SCENARIOS}")

    def resolved(self) -> dict:
        """Plain-number view of the full configuration for the summary."""
        off = self.offsets
        return {
            "scenario": self.scenario,
            "params": {f: getattr(self.params, f) for f in _PARAM_FIELDS},
            "offsets": "optimize" if off == "optimize" else {
                "amp": off.amp, "det": off.det, "phase": off.phase,
            },
            "decoherence": self.decoherence,
            "n_steps": self.n_steps,
            "method": self.method,
            "zeta": self.zeta,
            "gate": self.gate,
            "gtc": {f: getattr(self.gtc, f) for f in _GTC_FIELDS},
            "sweep": self.sweep,
            "calibration": self.calibration,
            "quantize": self.quantize,
            "study": self.study,
            "n_seg": self.n_seg,
            "seed_grid": self.seed_grid,
            "out": self.out,
        }


def _load_config(args) -> ExperimentConfig:
    path = getattr(args, "config", None) or getattr(args, "config_flag", None)
    if path is None:
        raise ConfigError("no config file given (positional argument or --config)")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    cfg = ExperimentConfig(raw)
    if getattr(args, "steps", None):
        cfg.n_steps = int(args.steps)
    if getattr(args, "seed_grid", None):
        cfg.seed_grid = int(args.seed_grid)
    if getattr(args, "out", None):
        cfg.out = args.out
    return cfg


def _default_sweep_config(args) -> ExperimentConfig:
    """Build a config from sweep flags alone when no file is given."""
    raw = {"scenario": args.scenario or "not"}
    cfg = ExperimentConfig(raw)
    if getattr(args, "steps", None):
        cfg.n_steps = int(args.steps)
    if getattr(args, "out", None):
        cfg.out = args.out
    return cfg


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_summary(path: Path, cfg: ExperimentConfig, results: dict):
    doc = {
        "tool": "leakctl",
        "version": __version__,
        "config": cfg.resolved(),
        "results": results,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
    )


def _scenario(cfg: ExperimentConfig, name=None):
    return build_scenario(
        name or cfg.scenario, cfg.params, gtc=cfg.gtc, zeta=cfg.zeta
    )


def _off_dict(off: OffsetSet) -> dict:
    return {"amp": off.amp, "det": off.det, "phase": off.phase}


def _resolve_offsets(cfg: ExperimentConfig, sc, threads):
    """(offsets, optimization result or None) honoring \"optimize\"."""
    if cfg.offsets != "optimize":
        return cfg.offsets, None
    opt = optimize_offsets(
        scenario_objective(sc, n_steps=cfg.n_steps),
        seed_grid=cfg.seed_grid, threads=threads,
    )
    return opt.offsets, opt


# ---------------------------------------------------------------------------
# subcommands


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    if cfg.scenario not in SIM_SCENARIOS:
        raise ConfigError(f"'run' needs a simulation scenario, not {cfg.scenario!r}")
    sc = _scenario(cfg)
    off, opt = _resolve_offsets(cfg, sc, args.threads)
    results = {
        "f_uncorrected": leak_fidelity(sc, ZERO_OFFSETS, n_steps=cfg.n_steps, averaged=sc.kind == "gate-1q"),
        "f_sso": leak_fidelity(sc, off, n_steps=cfg.n_steps, averaged=sc.kind == "gate-1q"),
        "offsets": _off_dict(off),
    }
    if opt is not None:
        results["optimization"] = {
            "origin_value": opt.origin_value, "n_evaluations": opt.n_evaluations,
        }
    if cfg.decoherence:
        results["f_uncorrected_decoherent"] = decoherent_fidelity(sc, ZERO_OFFSETS, n_steps=cfg.n_steps)
        results["f_sso_decoherent"] = decoherent_fidelity(sc, off, n_steps=cfg.n_steps)
    ts, pops = population_trajectory(
        sc, off, decoherence=cfg.decoherence, n_steps=cfg.n_steps
    )
    out = Path(cfg.out)
    header = ["time"] + [f"p{l}" for l in sc.labels]
    rows = [[t] + [pops[l][k] for l in sc.labels] for k, t in enumerate(ts)]
    _write_csv(out / f"{cfg.scenario}_trajectory.csv", header, rows)
    results["trajectory_csv"] = f"{cfg.scenario}_trajectory.csv"
    results["final_populations"] = {l: float(pops[l][-1]) for l in sc.labels}
    _write_summary(out / f"{cfg.scenario}_summary.json", cfg, results)
    return 0


def _sweep_spec_from(cfg: ExperimentConfig, args, fixed: OffsetSet) -> SweepSpec:
    block = cfg.sweep
    if args.param:
        parse = {"amp": float, "det": parse_angular, "phase": parse_phase}[args.param] \
            if args.param in PARAMETERS else None
        if parse is None:
            raise ConfigError(f"unknown sweep parameter {args.param!r}")
        if args.lo is None or args.hi is None:
            raise ConfigError("sweep needs --lo and --hi with --param")
        block = {
            "parameter": args.param,
            "lo": parse(args.lo),
            "hi": parse(args.hi),
            "n_points": int(args.n or 41),
        }
    if block is None:
        raise ConfigError("sweep needs a 'sweep' config block or --param/--lo/--hi flags")
    return SweepSpec(
        block["parameter"], block["lo"], block["hi"], block["n_points"], fixed=fixed
    )


def _cmd_sweep(args) -> int:
    cfg = _load_config(args) if (args.config or args.config_flag) else _default_sweep_config(args)
    if args.scenario:
        if args.scenario not in SIM_SCENARIOS:
            raise ConfigError(f"'sweep' needs a simulation scenario, not {args.scenario!r}")
        cfg.scenario = args.scenario
    if cfg.scenario not in SIM_SCENARIOS:
        raise ConfigError(f"'sweep' needs a simulation scenario, not {cfg.scenario!r}")
    sc = _scenario(cfg)
    fixed = cfg.offsets if cfg.offsets != "optimize" else ZERO_OFFSETS
    spec = _sweep_spec_from(cfg, args, fixed)
    objective = scenario_objective(sc, decoherence=cfg.decoherence, n_steps=cfg.n_steps)
    points = sweep(objective, spec, threads=args.threads)
    out = Path(cfg.out)
    name = "_".join(spec.names())
    rows = [
        [p.offsets.amp, p.offsets.det, p.offsets.phase, p.value, p.ok] for p in points
    ]
    _write_csv(out / f"{cfg.scenario}_sweep_{name}.csv",
               ["amp", "det", "phase", "fidelity", "ok"], rows)
    results = {"sweep_csv": f"{cfg.scenario}_sweep_{name}.csv",
               "n_points": len(points),
               "n_failed": sum(not p.ok for p in points)}
    if len(spec.names()) == 1:
        par = spec.names()[0]
        try:
            fit = fit_quadratic(
                par, [getattr(p.offsets, par) for p in points], [p.value for p in points]
            )
            results["fit"] = {
                "parameter": par, "a": fit.a, "b": fit.b, "c": fit.c,
                "residual_rms": fit.residual_rms,
            }
        except LeakctlError as exc:
            results["fit"] = {"error": str(exc)}
    _write_summary(out / f"{cfg.scenario}_sweep_{name}_summary.json", cfg, results)
    return 0


def _cmd_optimize(args) -> int:
    cfg = _load_config(args)
    if cfg.scenario not in SIM_SCENARIOS:
        raise ConfigError(f"'optimize' needs a simulation scenario, not {cfg.scenario!r}")
    sc = _scenario(cfg)
    opt = optimize_offsets(
        scenario_objective(sc, decoherence=cfg.decoherence, n_steps=cfg.n_steps),
        seed_grid=cfg.seed_grid, threads=args.threads,
    )
    results = {
        "offsets": _off_dict(opt.offsets),
        "fidelity": opt.value,
        "origin_fidelity": opt.origin_value,
        "n_evaluations": opt.n_evaluations,
    }
    q = cfg.quantize
    if any(q.values()):
        qoff = quantize_offsets(opt.offsets, q["amp_res"], q["det_res"], q["phase_res"])
        results["quantized_offsets"] = _off_dict(qoff)
        results["quantized_fidelity"] = (
            decoherent_fidelity(sc, qoff, n_steps=cfg.n_steps) if cfg.decoherence
            else leak_fidelity(sc, qoff, n_steps=cfg.n_steps, averaged=sc.kind == "gate-1q")
        )
    _write_summary(Path(cfg.out) / f"{cfg.scenario}_optimize_summary.json", cfg, results)
    return 0


def _cmd_robustness(args) -> int:
    cfg = _load_config(args)
    gate = cfg.gate if cfg.scenario in ("robustness", "drag", "framework") else cfg.scenario
    sc = _scenario(cfg, gate)
    off, _ = _resolve_offsets(cfg, sc, args.threads)
    cal = cfg.calibration
    err = CalibrationError(cal["eps_amp"], cal["eps_det"], cal["eps_phase"])
    rows = robustness_grid(
        scenario_objective(sc, decoherence=True, n_steps=cfg.n_steps),
        off, err, n_points=cal["n_points"], threads=args.threads,
    )
    out = Path(cfg.out)
    table = [[ea, ed, ep, pt.value, pt.ok] for ea, ed, ep, pt in rows]
    _write_csv(out / f"{gate}_robustness.csv",
               ["eps_amp", "eps_det", "eps_phase", "fidelity", "ok"], table)
    finite = [pt.value for *_, pt in rows if pt.ok]
    results = {
        "robustness_csv": f"{gate}_robustness.csv",
        "offsets": _off_dict(off),
        "min_fidelity": min(finite),
        "max_fidelity": max(finite),
        "n_points": len(rows),
    }
    _write_summary(out / f"{gate}_robustness_summary.json", cfg, results)
    return 0


def _cmd_gtc(args) -> int:
    cfg = _load_config(args)
    study = cfg.study
    off = None if cfg.offsets == "optimize" else cfg.offsets
    rows = gtc_crosstalk_study(
        cfg.params, cfg.gtc,
        zeta_max=study["zeta_max"], n_zeta=study["n_zeta"],
        off_gtc=off, off_rabi=off if off == ZERO_OFFSETS else None,
        n_steps=cfg.n_steps, seed_grid=cfg.seed_grid, threads=args.threads,
        decoherence=study["decoherence"],
    )
    out = Path(cfg.out)
    header = ["zeta", "f_gtc", "f_rabi", "excess_gtc", "excess_rabi"]
    _write_csv(out / "gtc_crosstalk.csv", header, [[r[h] for h in header] for r in rows])
    results = {
        "crosstalk_csv": "gtc_crosstalk.csv",
        "f_gtc_zeta0": rows[0]["f_gtc"],
        "f_rabi_zeta0": rows[0]["f_rabi"],
        "ordering_holds": all(
            r["excess_gtc"] <= r["excess_rabi"] + 1e-12 for r in rows[1:]
        ),
    }
    _write_summary(out / "gtc_crosstalk_summary.json", cfg, results)
    return 0


def _cmd_drag(args) -> int:
    from .tuneup import drag_compare

    cfg = _load_config(args)
    gate = cfg.gate if cfg.scenario in ("drag", "robustness", "framework") else cfg.scenario
    off = None if cfg.offsets == "optimize" else cfg.offsets
    if off == ZERO_OFFSETS:
        off = None
    cmp = drag_compare(
        gate, cfg.params, off_sso=off, n_steps=cfg.n_steps,
        seed_grid=cfg.seed_grid, threads=args.threads,
    )
    results = {
        "gate": cmp.gate,
        "f_uncorrected": cmp.f_uncorrected,
        "f_drag": cmp.f_drag,
        "f_sso": cmp.f_sso,
        "offsets": _off_dict(cmp.offsets),
    }
    _write_summary(Path(cfg.out) / f"drag_{gate}_summary.json", cfg, results)
    return 0


def _cmd_framework(args) -> int:
    cfg = _load_config(args)
    gate = cfg.gate if cfg.scenario in ("framework", "robustness", "drag") else cfg.scenario
    sc = _scenario(cfg, gate)
    off = cfg.offsets if cfg.offsets != "optimize" else ZERO_OFFSETS
    u_err = error_propagator(sc, off, n_steps=cfg.n_steps)
    comp = list(sc.comp_idx)
    block = u_err[np.ix_(comp, comp)]
    phase = np.exp(-1j * np.angle(np.trace(block)))
    block_defect = float(np.linalg.norm(phase * block - np.eye(len(comp)), "fro"))
    unitarity = float(
        np.linalg.norm(u_err.conj().T @ u_err - np.eye(u_err.shape[0]), "fro")
    )
    report = magnus_residual(sc, Operator(np.eye(sc.dim)), cfg.n_seg, off)
    results = {
        "gate": gate,
        "offsets": _off_dict(off),
        "error_propagator_block_defect": block_defect,
        "error_propagator_unitarity_defect": unitarity,
        "magnus": {
            "n_seg": report.n_seg,
            "residuals": list(report.residuals),
            "max_residual": report.max_residual,
        },
    }
    _write_summary(Path(cfg.out) / f"framework_{gate}_summary.json", cfg, results)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser, config_required: bool = True):
    p.add_argument("config", nargs="?" if not config_required else None,
                   default=None, help="JSON experiment config")
    p.add_argument("--config", dest="config_flag", default=None,
                   help="JSON experiment config (alternative to the positional)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: LEAKCTL_THREADS or 1)")
    p.add_argument("--seed-grid", dest="seed_grid", type=int, default=None,
                   help="optimizer seed grid points per axis (odd)")
    p.add_argument("--steps", type=int, default=None,
                   help="override the integrator step count")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leakctl",
        description="Leakage-suppression simulations with static parameter offsets.",
    )
    parser.add_argument("--version", action="version", version=f"leakctl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    handlers = {
        "run": ("simulate a scenario and dump its population trajectory", _cmd_run),
        "sweep": ("sweep one offset axis and fit a parabola", _cmd_sweep),
        "optimize": ("find the best static offsets", _cmd_optimize),
        "robustness": ("fidelity grid over calibration errors", _cmd_robustness),
        "gtc": ("trajectory-gate vs Rabi crosstalk study", _cmd_gtc),
        "drag": ("derivative correction vs static offsets", _cmd_drag),
        "framework": ("error-propagator and residual diagnostics", _cmd_framework),
    }
    for name, (help_text, fn) in handlers.items():
        p = sub.add_parser(name, help=help_text)
        _add_common(p, config_required=False)
        if name == "sweep":
            p.add_argument("--scenario", default=None, choices=SIM_SCENARIOS)
            p.add_argument("--param", default=None, choices=PARAMETERS)
            p.add_argument("--lo", default=None)
            p.add_argument("--hi", default=None)
            p.add_argument("--n", type=int, default=None)
        p.set_defaults(handler=fn)
    return parser


def _join_value_flags(argv):
    """Fold ``--lo -0.15pi`` into ``--lo=-0.15pi`` so argparse does not
    mistake a negative value for an option."""
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        if tok in ("--lo", "--hi") and k + 1 < len(argv):
            out.append(f"{tok}={argv[k + 1]}")
            k += 2
        else:
            out.append(tok)
            k += 1
    return out


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = _build_parser().parse_args(_join_value_flags(list(argv)))
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"leakctl: config error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"leakctl: integration error: {exc}", file=sys.stderr)
        return 3
    except LeakctlError as exc:
        print(f"leakctl: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
