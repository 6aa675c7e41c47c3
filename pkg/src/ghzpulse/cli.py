"""Command line front end: design, verify, and report on coupling pulses.

Subcommands
    design       solve a pulse design problem from a config file
    evolve       closed-system verification run with fidelity report
    open-evolve  dissipative verification run (one or both dissipator bases)
    wigner       phase-space map of a saved state's mode
    reproduce    emit the data behind the reference figures
    report       pretty-print a run report

Configs are single JSON documents with explicit units in the field names
(GHz and ns are linear-frequency user-facing units; everything internal is
angular).  Exit codes: 0 success, 1 numerical failure, 2 config error.
Outputs are byte-identical for identical configs except for the timing
block inside report.json.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import default_wigner_axes, fidelity, wigner, wigner_marginals
from .designer import (
    DesignProblem,
    DesignResult,
    design_photonic,
    design_qubit,
    design_qubit_minimax,
)
from .dynamics import EvolutionConfig, LindbladConfig, lindblad_evolve, free_frame_rotation
from .errors import ConfigError, ConvergenceError, IntegrationError, TruncationError
from .functionals import gate_trajectories
from .hilbert import (
    DensityMatrix,
    ModeSpec,
    QubitSpec,
    basis_state,
    displaced_mode_dim,
    make_layout,
    partial_trace,
    VACUUM_MODE_DIM,
)
from .io import load_state, read_json, save_state, write_csv, write_json
from .pulses import FourierPulse
from .recipes import (
    FIGURE_RECIPES,
    GHZ_B_TARGET,
    GHZ_K_TERMS,
    convention_ledger,
    evolve_norm_clean,
    _pulse_trajectory_columns,
)
from .targets import HADAMARD_LIKE_Y, photonic_ghz_target, qubit_ghz_state, rotated_photonic_ghz
from .hilbert import StateVector

TWO_PI = 2.0 * math.pi

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["system", "pulse", "target"],
    "properties": {
        "system": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n_qubits", "n_modes"],
            "properties": {
                "n_qubits": {"type": "integer", "minimum": 0},
                "n_modes": {"type": "integer", "minimum": 0},
                "qubit_frequency_ghz": {"type": "number", "exclusiveMinimum": 0},
                "mode_frequency_ghz": {"type": "number", "exclusiveMinimum": 0},
                "mode_truncation": {"type": "integer", "minimum": 2},
                "max_dim": {"type": "integer", "minimum": 1},
            },
        },
        "pulse": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t_f_ns"],
            "properties": {
                "t_f_ns": {"type": "number", "exclusiveMinimum": 0},
                "k_terms": {"type": "integer", "minimum": 1},
                "coefficients_rad_per_s": {
                    "type": "array", "items": {"type": "number"}, "minItems": 1,
                },
            },
        },
        "target": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {
                    "enum": ["photonic_ghz", "rotated_photonic_ghz", "qubit_ghz"]
                },
                "d_max": {"type": "number", "minimum": 0},
                "theta_target_rad": {"type": "number"},
            },
        },
        "dissipation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kappa_per_s": {"type": "number", "minimum": 0},
                "t1_us": {"type": "number", "exclusiveMinimum": 0},
                "t2_us": {"type": "number", "exclusiveMinimum": 0},
                "dissipator_basis": {
                    "enum": ["energy-eigenbasis", "z-basis-literal"]
                },
                "both_bases": {"type": "boolean"},
            },
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt_ps": {"type": "number", "exclusiveMinimum": 0},
                "frame": {"enum": ["interaction", "lab"]},
                "record_stride": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "dim_cap": {"type": "integer", "minimum": 1},
            },
        },
    },
}

_DEFAULTS = {
    "system": {"qubit_frequency_ghz": 10.0, "mode_frequency_ghz": 6.6},
    "dissipation": {
        "kappa_per_s": 1.0e6, "t1_us": 40.0, "t2_us": 40.0,
        "dissipator_basis": "energy-eigenbasis", "both_bases": False,
    },
    "run": {"frame": "interaction", "seed": 0},
}


def load_config(path) -> dict:
    import jsonschema

    cfg = read_json(path)
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema violation: {exc.message}") from exc
    merged = {k: dict(v) for k, v in _DEFAULTS.items()}
    for block, values in cfg.items():
        merged.setdefault(block, {})
        merged[block].update(values)
    return merged


def _layout_from_config(cfg):
    sysb = cfg["system"]
    w_q = TWO_PI * 1e9 * sysb["qubit_frequency_ghz"]
    w_m = TWO_PI * 1e9 * sysb["mode_frequency_ghz"]
    trunc = sysb.get("mode_truncation")
    if trunc is None:
        kind = cfg["target"]["kind"]
        if kind == "qubit_ghz":
            trunc = VACUUM_MODE_DIM
        else:
            trunc = displaced_mode_dim(cfg["target"].get("d_max", 0.0))
    return make_layout(
        [QubitSpec(w_q)] * sysb["n_qubits"],
        [ModeSpec(w_m, trunc)] * sysb["n_modes"],
        max_dim=sysb.get("max_dim", int(4e6)),
    )


def _mode_omega(cfg) -> float:
    return TWO_PI * 1e9 * cfg["system"]["mode_frequency_ghz"]


def _design_problem(cfg) -> DesignProblem:
    t_f = cfg["pulse"]["t_f_ns"] * 1e-9
    omega = _mode_omega(cfg)
    kind = cfg["target"]["kind"]
    if kind in ("photonic_ghz", "rotated_photonic_ghz"):
        k_default = math.ceil(omega * t_f / math.pi) + 3
        return DesignProblem(
            kind="photonic", omega=omega, t_f=t_f,
            k_terms=cfg["pulse"].get("k_terms", k_default),
            d_max=cfg["target"].get("d_max", 1.0),
        )
    theta = cfg["target"].get("theta_target_rad")
    return DesignProblem(
        kind="qubit", omega=omega, t_f=t_f,
        k_terms=cfg["pulse"].get("k_terms", GHZ_K_TERMS),
        theta_target=GHZ_B_TARGET if theta is None else theta,
    )


def _solve_design(cfg) -> DesignResult:
    problem = _design_problem(cfg)
    if problem.kind == "photonic":
        return design_photonic(problem)
    if cfg["target"].get("theta_target_rad") is None:
        return design_qubit_minimax(problem)
    return design_qubit(problem)


def _pulse_from_config(cfg):
    t_f = cfg["pulse"]["t_f_ns"] * 1e-9
    coeffs = cfg["pulse"].get("coefficients_rad_per_s")
    if coeffs is not None:
        return FourierPulse(tuple(coeffs), t_f), None
    design = _solve_design(cfg)
    return design.pulse, design


def _design_payload(design: DesignResult) -> dict:
    return json.loads(design.to_json())


def _write_design_outputs(cfg, design: DesignResult, outdir: Path) -> None:
    omega = _mode_omega(cfg)
    (outdir / "pulse.json").write_text(design.pulse.to_json() + "\n", encoding="utf-8")
    write_json(outdir / "design.json", _design_payload(design))
    ts, g, g_c, g_c_dot, beta = _pulse_trajectory_columns(design.pulse, omega)
    write_csv(outdir / "pulse_trajectory.csv",
              ["t_s", "g_rad_per_s", "g_c_rad_per_s", "g_c_dot_rad_per_s2", "beta_rad"],
              [ts, g, g_c, g_c_dot, beta])
    tr = gate_trajectories(design.pulse, omega, n_samples=801)
    write_csv(outdir / "functionals.csv",
              ["t_s", "re_alpha", "im_alpha", "re_a", "im_a", "re_b", "im_b"],
              [tr.times, tr.alpha.real, tr.alpha.imag, tr.gate_a.real,
               tr.gate_a.imag, tr.gate_b.real, tr.gate_b.imag])


def _report(cfg, payload: dict, elapsed: float, basis=None, frame=None) -> dict:
    report = {
        "tool_version": __version__,
        "config": cfg,
        "conventions": convention_ledger(
            dissipator_basis=basis or cfg["dissipation"]["dissipator_basis"],
            frame=frame or cfg["run"]["frame"],
        ),
        "timing": {"elapsed_s": elapsed},
    }
    report.update(payload)
    return report


def cmd_design(cfg, outdir: Path) -> int:
    t0 = time.perf_counter()
    outdir.mkdir(parents=True, exist_ok=True)
    design = _solve_design(cfg)
    _write_design_outputs(cfg, design, outdir)
    write_json(outdir / "report.json",
               _report(cfg, {"design": _design_payload(design)}, time.perf_counter() - t0))
    return 0 if design.converged else 1


def _target_state(cfg, layout):
    kind = cfg["target"]["kind"]
    if kind == "photonic_ghz":
        return photonic_ghz_target(layout, cfg["target"].get("d_max", 1.0))
    if kind == "rotated_photonic_ghz":
        return rotated_photonic_ghz(layout, cfg["target"].get("d_max", 1.0))
    return qubit_ghz_state(layout, conjugate_phase=True)


def _fidelity_block(cfg, layout, state) -> dict:
    kind = cfg["target"]["kind"]
    if kind == "qubit_ghz":
        f_stated = fidelity(state, qubit_ghz_state(layout, conjugate_phase=False)).value
        f_conj = fidelity(state, qubit_ghz_state(layout, conjugate_phase=True)).value
        return {
            "value": max(f_stated, f_conj),
            "stated_phase": f_stated,
            "conjugate_phase": f_conj,
        }
    if kind == "rotated_photonic_ghz":
        # The evolved state reaches the unrotated cat; the local y rotation
        # is applied in software before scoring against the rotated target.
        if isinstance(state, StateVector):
            psi = np.tensordot(HADAMARD_LIKE_Y, state.tensor_view(), axes=([1], [0]))
            state = StateVector(psi.reshape(-1), layout, normalize=True)
        f = fidelity(state, _target_state(cfg, layout)).value
        return {"value": f, "local_y_rotation_applied": True}
    f = fidelity(state, _target_state(cfg, layout)).value
    return {"value": f}


def cmd_evolve(cfg, outdir: Path, keep_state: bool = False) -> int:
    t0 = time.perf_counter()
    outdir.mkdir(parents=True, exist_ok=True)
    layout = _layout_from_config(cfg)
    pulse, design = _pulse_from_config(cfg)
    if design is not None:
        _write_design_outputs(cfg, design, outdir)
    psi0 = basis_state(layout, [0] * layout.n_factors)
    rec = evolve_norm_clean(
        layout, pulse, psi0, pulse.t_f,
        frame=cfg["run"]["frame"],
        record_stride=cfg["run"].get("record_stride"),
    )
    n_q = layout.n_qubits
    prob_cols = [rec.qubit_probs[:, i] for i in range(2**n_q)]
    prob_names = [
        "p_" + format(i, f"0{n_q}b").replace("0", "g").replace("1", "e")
        for i in range(2**n_q)
    ] if n_q else ["p_total"]
    write_csv(outdir / "populations.csv", ["t_s"] + prob_names, [rec.times] + prob_cols)
    obs_cols, obs_names = [rec.times, rec.norms], ["t_s", "norm"]
    for m in range(layout.n_modes):
        obs_names += [f"re_a{m}", f"im_a{m}"]
        obs_cols += [rec.mode_amps[:, m].real, rec.mode_amps[:, m].imag]
    write_csv(outdir / "observables.csv", obs_names, obs_cols)
    if keep_state:
        save_state(outdir / "final_state.npz", rec.final_state)
    payload = {"fidelity": _fidelity_block(cfg, layout, rec.final_state)}
    if design is not None:
        payload["design"] = _design_payload(design)
    write_json(outdir / "report.json", _report(cfg, payload, time.perf_counter() - t0))
    return 0


def cmd_open_evolve(cfg, outdir: Path) -> int:
    t0 = time.perf_counter()
    outdir.mkdir(parents=True, exist_ok=True)
    layout = _layout_from_config(cfg)
    pulse, design = _pulse_from_config(cfg)
    diss = cfg["dissipation"]
    bases = (
        ["energy-eigenbasis", "z-basis-literal"]
        if diss["both_bases"] else [diss["dissipator_basis"]]
    )
    frame = cfg["run"].get("frame", "lab")
    if frame == "interaction" and cfg["run"].get("frame") is None:
        frame = "lab"
    kappa = diss["kappa_per_s"]
    gamma = 1.0 / (diss["t1_us"] * 1e-6)
    gamma_phi = 1.0 / (diss["t2_us"] * 1e-6)
    _, dt_cap = EvolutionConfig(t_f=pulse.t_f, frame="lab").resolve_steps(layout)
    dt = cfg["run"].get("dt_ps", None)
    dt = dt * 1e-12 if dt is not None else dt_cap / 4.0
    results = {}
    for basis in bases:
        lindblad = LindbladConfig(
            kappa=(kappa,) * layout.n_modes,
            gamma=(gamma,) * layout.n_qubits,
            gamma_phi=(gamma_phi,) * layout.n_qubits,
            dissipator_basis=basis,
        )
        rho0 = basis_state(layout, [0] * layout.n_factors).projector()
        rec = lindblad_evolve(
            layout, pulse, rho0,
            EvolutionConfig(t_f=pulse.t_f, frame="lab", dt=dt),
            lindblad, dim_cap=cfg["run"].get("dim_cap", 4096),
        )
        u0 = free_frame_rotation(layout, pulse.t_f)
        rho_int = u0.conj().T @ rec.final_state.matrix @ u0
        rho_int = DensityMatrix(0.5 * (rho_int + rho_int.conj().T), layout, validate=False)
        results[basis] = _fidelity_block(cfg, layout, rho_int)
        results[basis]["trace"] = float(rec.norms[-1])
    payload = {"fidelity_by_basis": results}
    if design is not None:
        payload["design"] = _design_payload(design)
    write_json(outdir / "report.json",
               _report(cfg, payload, time.perf_counter() - t0, basis=",".join(bases), frame="lab"))
    return 0


def cmd_wigner(state_path, outdir: Path, mode_index: int = 0,
               half_width: float = None, n_points: int = 201) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    state = load_state(state_path)
    layout = state.layout
    rho = partial_trace(state, [layout.mode_factor(mode_index)])
    if half_width is None:
        mean_n = float(np.real(np.trace(rho.matrix @ np.diag(np.arange(rho.dim)))))
        half_width = math.sqrt(mean_n) + 3.0
    xs = np.linspace(-half_width, half_width, n_points)
    grid = wigner(rho, xs, xs.copy())
    p_x, p_p = wigner_marginals(grid)
    xg, pg = np.meshgrid(grid.xs, grid.ps, indexing="ij")
    write_csv(outdir / "wigner.csv", ["x", "p", "w"],
              [xg.reshape(-1), pg.reshape(-1), grid.values.reshape(-1)])
    np.save(outdir / "wigner.npy", grid.values)
    write_csv(outdir / "marginal_x.csv", ["x", "p_x"], [grid.xs, p_x])
    write_csv(outdir / "marginal_p.csv", ["p", "p_p"], [grid.ps, p_p])
    return 0


def cmd_reproduce(figure: str, outdir: Path) -> int:
    try:
        recipe = FIGURE_RECIPES[figure]
    except KeyError:
        raise ConfigError(
            f"unknown figure {figure!r}; choose from {sorted(FIGURE_RECIPES)}"
        ) from None
    outdir.mkdir(parents=True, exist_ok=True)
    recipe(outdir)
    return 0


def cmd_report(path) -> int:
    report = read_json(path)
    print(f"tool version: {report.get('tool_version', '?')}")
    for key in ("design", "fidelity", "fidelity_by_basis"):
        if key in report:
            print(f"{key}: {json.dumps(report[key], sort_keys=True, indent=2)}")
    conv = report.get("conventions", {})
    print("conventions:")
    for k in sorted(conv):
        print(f"  {k}: {conv[k]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghzpulse",
        description="Design and verify longitudinal-coupling pulses for "
                    "fast entangled-state generation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("design", "evolve", "open-evolve"):
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON config file")
        p.add_argument("-o", "--outdir", default=".", help="output directory")
        if name == "evolve":
            p.add_argument("--save-state", action="store_true",
                           help="dump the final state to final_state.npz")

    p = sub.add_parser("wigner")
    p.add_argument("state", help="state dump (.npz) from evolve --save-state")
    p.add_argument("-o", "--outdir", default=".")
    p.add_argument("--mode", type=int, default=0)
    p.add_argument("--half-width", type=float, default=None)
    p.add_argument("--n-points", type=int, default=201)

    p = sub.add_parser("reproduce")
    p.add_argument("figure", help="one of " + ", ".join(sorted(FIGURE_RECIPES)))
    p.add_argument("-o", "--outdir", default=".")

    p = sub.add_parser("report")
    p.add_argument("path", help="report.json to summarize")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "design":
            return cmd_design(load_config(args.config), Path(args.outdir))
        if args.command == "evolve":
            return cmd_evolve(load_config(args.config), Path(args.outdir),
                              keep_state=args.save_state)
        if args.command == "open-evolve":
            return cmd_open_evolve(load_config(args.config), Path(args.outdir))
        if args.command == "wigner":
            return cmd_wigner(args.state, Path(args.outdir), args.mode,
                              args.half_width, args.n_points)
        if args.command == "reproduce":
            return cmd_reproduce(args.figure, Path(args.outdir))
        if args.command == "report":
            return cmd_report(args.path)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, ConvergenceError, TruncationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
