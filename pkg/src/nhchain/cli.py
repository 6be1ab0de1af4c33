"""Command-line interface: config ingestion, figure presets, file emission.

Subcommands:

* ``run <config.json>``     -- execute the experiment described by a config
* ``preset <name>``         -- canned experiments (fig2 | fig3 | fig4 | fig5)
* ``spectrum <config.json>``-- shortcut for a spectrum run

Every run writes, into one output directory: the fully resolved config
(JSON), one or more CSVs (17 significant digits, so reruns are
byte-identical), one or more SVG plots, and a manifest listing all files
with SHA-256 hashes.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import (
    DEFAULT_SEED,
    IntegratorConfig,
    NumericError,
    ObservableSeries,
    default_dt,
    propagate,
    run_convergence_experiment,
)
from .model import ChainParams, ModelError, SiteState, build_hamiltonian
from .quench import PulseSchedule, QuenchPlan, run_switch_experiment
from .spectral import ConvergenceError, SpectralError, numeric_spectrum
from .svgplot import render_line_plot

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "emit_svg", "run_preset", "main"]

EXPERIMENTS = ("spectrum", "convergence", "probability", "switch")
PRESETS = ("fig2", "fig3", "fig4", "fig5")
CONVERGENCE_KINDS = ("point", "gaussian", "tophat", "random")

# ratio omega/J -> (V at J=1, half_width)
PROBABILITY_SWEEP = ((0.01, 2e-4, 100), (0.1, 0.02, 50), (0.4, 0.32, 30))


class ConfigError(ValueError):
    """Malformed config document, unknown key, or out-of-range value."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    J: float
    V: float
    M: int
    tail_tol: float
    count: int
    t_end: float
    dt: float
    record_stride: int
    seed: int
    initial_kind: str
    initial_center: int
    initial_width: float
    delta: float
    t_relax: float
    initial_level: str

    def chain_params(self) -> ChainParams:
        return ChainParams(J=self.J, V=self.V, half_width=self.M, tail_tol=self.tail_tol)

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt, record_stride=self.record_stride)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"


def _require(condition: bool, key: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"config key '{key}': {message}")


def _resolve(raw: dict) -> ExperimentConfig:
    known = {
        "experiment", "J", "V", "M", "tail_tol", "count", "t_end", "dt",
        "record_stride", "seed", "initial_kind", "initial_center",
        "initial_width", "delta", "t_relax", "initial_level",
    }
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown config key '{key}'")

    experiment = raw.get("experiment")
    _require(experiment in EXPERIMENTS, "experiment", f"must be one of {EXPERIMENTS}, got {experiment!r}")

    def number(key, default, minimum=None, exclusive=True):
        value = raw.get(key, default)
        _require(isinstance(value, (int, float)) and not isinstance(value, bool),
                 key, f"must be a number, got {value!r}")
        value = float(value)
        _require(math.isfinite(value), key, "must be finite")
        if minimum is not None:
            if exclusive:
                _require(value > minimum, key, f"must be > {minimum}, got {value!r}")
            else:
                _require(value >= minimum, key, f"must be >= {minimum}, got {value!r}")
        return value

    def integer(key, default, minimum):
        value = raw.get(key, default)
        _require(isinstance(value, int) and not isinstance(value, bool),
                 key, f"must be an integer, got {value!r}")
        _require(value >= minimum, key, f"must be >= {minimum}, got {value!r}")
        return value

    J = number("J", 1.0, minimum=0.0)
    V = number("V", 2e-4, minimum=0.0)
    M = integer("M", 100, minimum=1)
    tail_tol = number("tail_tol", 1e-13, minimum=0.0)
    count = integer("count", 12, minimum=1)
    _require(count <= 2 * M + 1, "count", f"must be <= chain dimension {2 * M + 1}")
    seed = integer("seed", DEFAULT_SEED, minimum=0)

    default_t_end = {"spectrum": 0.0, "convergence": 600.0, "probability": 200.0, "switch": 0.0}
    t_end = number("t_end", default_t_end[experiment], minimum=0.0, exclusive=False)

    params = ChainParams(J=J, V=V, half_width=M, tail_tol=tail_tol)
    dt = number("dt", default_dt(params), minimum=0.0)

    delta = number("delta", 0.02, minimum=0.0)
    t_relax = number("t_relax", 600.0, minimum=0.0, exclusive=False)

    horizon = t_end if experiment != "switch" else delta + t_relax
    auto_stride = max(1, int(round(horizon / dt)) // 2000) if horizon > 0 else 1
    record_stride = integer("record_stride", auto_stride, minimum=1)

    initial_kind = raw.get("initial_kind", "gaussian")
    _require(initial_kind in CONVERGENCE_KINDS, "initial_kind",
             f"must be one of {CONVERGENCE_KINDS}, got {initial_kind!r}")
    initial_center = integer("initial_center", 0, minimum=-M)
    _require(abs(initial_center) <= M, "initial_center", f"must satisfy |center| <= {M}")
    initial_width = number("initial_width", 10.0, minimum=0.0)
    initial_level = raw.get("initial_level", "g")
    _require(initial_level in ("g", "e"), "initial_level",
             f"must be 'g' or 'e', got {initial_level!r}")

    return ExperimentConfig(
        experiment=experiment, J=J, V=V, M=M, tail_tol=tail_tol, count=count,
        t_end=t_end, dt=dt, record_stride=record_stride, seed=seed,
        initial_kind=initial_kind, initial_center=initial_center,
        initial_width=initial_width, delta=delta, t_relax=t_relax,
        initial_level=initial_level,
    )


def parse_config(text: str) -> ExperimentConfig:
    """Parse a JSON config; unknown keys and bad values are hard errors."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON config: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    try:
        return _resolve(raw)
    except ModelError as exc:
        raise ConfigError(str(exc)) from exc


def emit_svg(series, style: dict | None = None) -> str:
    """Render an ObservableSeries (or several) to a self-contained SVG.

    ``series`` is either one ObservableSeries or a list of tuples
    (label, ObservableSeries, column) where column is 'P', 'norm2' or
    'F_<target>'.  ``style`` keys: columns, labels, xlabel, ylabel, title.
    """
    style = style or {}
    xlabel = style.get("xlabel", "time (1/J)")

    def column(one: ObservableSeries, name: str):
        if name == "P":
            return one.prob
        if name == "norm2":
            return one.norm2
        if name.startswith("F_") and name[2:] in one.fidelities:
            return one.fidelities[name[2:]]
        raise ModelError(f"unknown series column {name!r}")

    if isinstance(series, ObservableSeries):
        if len(series) == 0:
            raise ModelError("cannot plot an empty series")
        names = style.get("columns") or (
            [f"F_{name}" for name in series.targets] if series.targets else ["P"]
        )
        labels = style.get("labels") or names
        curves = [(lab, series.times, column(series, nm)) for lab, nm in zip(labels, names)]
        ylabel = style.get("ylabel", ", ".join(names))
    else:
        if not series:
            raise ModelError("cannot plot an empty series list")
        curves = [(label, one.times, column(one, name)) for label, one, name in series]
        ylabel = style.get("ylabel", "value")
    return render_line_plot(curves, xlabel=xlabel, ylabel=ylabel, title=style.get("title", ""))


# ---------------------------------------------------------------------------
# file emission

def _write_text(path: Path, text: str) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(text)


def _profile_csv(state: SiteState) -> str:
    lines = ["l,re_amp,im_amp,abs2"]
    for l, amp in zip(state.sites(), state.amplitudes):
        lines.append(f"{l},{amp.real:.17g},{amp.imag:.17g},{abs(amp) ** 2:.17g}")
    return "\n".join(lines) + "\n"


def _spectrum_csv(spec) -> str:
    lines = ["m,branch,re_energy,im_energy,residual"]
    for mode in spec.modes:
        lines.append(
            f"{mode.m},{mode.branch},{mode.energy.real:.17g},"
            f"{mode.energy.imag:.17g},{mode.residual:.17g}"
        )
    return "\n".join(lines) + "\n"


def _finish_run(outdir: Path, cfg_json: str, files: dict[str, str]) -> list[Path]:
    """Write config, payload files and the hash manifest; return all paths."""
    outdir.mkdir(parents=True, exist_ok=True)
    written = {"config.json": cfg_json}
    written.update(files)
    for name, text in written.items():
        _write_text(outdir / name, text)
    manifest = {
        "outputs": [
            {
                "name": name,
                "sha256": hashlib.sha256(text.encode()).hexdigest(),
                "bytes": len(text.encode()),
            }
            for name, text in sorted(written.items())
        ]
    }
    _write_text(outdir / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    return [outdir / name for name in written] + [outdir / "manifest.json"]


# ---------------------------------------------------------------------------
# experiment runners

def _run_spectrum(cfg: ExperimentConfig, outdir: Path) -> list[Path]:
    params = cfg.chain_params()
    spec = numeric_spectrum(build_hamiltonian(params), count=cfg.count)
    ladder = [(mode.m, mode.branch, mode.energy) for mode in spec.modes]
    plus = [(m, E) for m, branch, E in ladder if branch == "+"]
    minus = [(m, E) for m, branch, E in ladder if branch == "-"]
    curves = []
    if plus:
        curves.append(("Re E (+ branch)", [m for m, _ in plus], [E.real for _, E in plus]))
    if minus:
        curves.append(("Re E (- branch)", [m for m, _ in minus], [E.real for _, E in minus]))
    curves.append(("Im E", [m for m, _, _ in ladder], [E.imag for _, _, E in ladder]))
    svg = render_line_plot(curves, xlabel="mode index m", ylabel="energy (J)",
                           title="spectral ladder")
    return _finish_run(outdir, cfg.to_json(), {"spectrum.csv": _spectrum_csv(spec), "ladder.svg": svg})


def _run_convergence(cfg: ExperimentConfig, outdir: Path) -> list[Path]:
    params = cfg.chain_params()
    results = run_convergence_experiment(
        CONVERGENCE_KINDS, params, cfg.t_end, cfg.integrator(),
        seed=cfg.seed, center=cfg.initial_center, width=cfg.initial_width,
    )
    files: dict[str, str] = {}
    from .dynamics import make_initial_state

    for kind in CONVERGENCE_KINDS:
        state = make_initial_state(kind, params, center=cfg.initial_center,
                                   width=cfg.initial_width, seed=cfg.seed)
        files[f"profile_{kind}.csv"] = _profile_csv(state)
        files[f"fidelity_{kind}.csv"] = results[kind].to_csv()
    spec = numeric_spectrum(build_hamiltonian(params), count=2)
    ground, _ = spec.stable_pair()
    files["profile_ground.csv"] = _profile_csv(ground.right_vector)
    files["fidelity.svg"] = emit_svg(
        [(kind, results[kind], "F_g") for kind in CONVERGENCE_KINDS],
        {"ylabel": "F_g(t)", "title": "convergence to the ground mode"},
    )
    return _finish_run(outdir, cfg.to_json(), files)


def _probability_series(cfg: ExperimentConfig) -> ObservableSeries:
    params = cfg.chain_params()
    h = build_hamiltonian(params)
    spec = numeric_spectrum(h, count=2)
    ground, excited = spec.stable_pair()
    amps = (ground.right_vector.amplitudes + excited.right_vector.amplitudes) / math.sqrt(2.0)
    state = SiteState(amps, params.half_width, label="(g+e)/sqrt2").normalized()
    series = ObservableSeries()
    propagate(h, state, cfg.t_end, cfg.integrator(), series=series)
    return series


def _run_probability(cfg: ExperimentConfig, outdir: Path) -> list[Path]:
    series = _probability_series(cfg)
    files = {
        "probability.csv": series.to_csv(),
        "probability.svg": emit_svg(series, {"columns": ["P"], "ylabel": "P(t)",
                                             "title": "Dirac probability"}),
    }
    return _finish_run(outdir, cfg.to_json(), files)


def _run_probability_sweep(cfg: ExperimentConfig, outdir: Path, threads: int) -> list[Path]:
    """Three-ratio probability comparison (the fig4 preset)."""
    sub_configs = []
    for ratio, V, M in PROBABILITY_SWEEP:
        raw = {"experiment": "probability", "J": cfg.J, "V": V, "M": M,
               "t_end": cfg.t_end, "seed": cfg.seed, "tail_tol": cfg.tail_tol}
        sub_configs.append((ratio, _resolve(raw)))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        series_list = list(pool.map(lambda item: _probability_series(item[1]), sub_configs))
    files: dict[str, str] = {}
    for (ratio, _), series in zip(sub_configs, series_list):
        files[f"probability_ratio_{ratio:g}.csv"] = series.to_csv()
    files["probability.svg"] = emit_svg(
        [(f"omega/J = {ratio:g}", series, "P")
         for (ratio, _), series in zip(sub_configs, series_list)],
        {"ylabel": "P(t)", "title": "Dirac probability vs dissipation scale"},
    )
    resolved = {
        "sweep": [dataclasses.asdict(sub) for _, sub in sub_configs],
        "base": dataclasses.asdict(cfg),
    }
    return _finish_run(outdir, json.dumps(resolved, indent=2, sort_keys=True) + "\n", files)


def _run_switch(cfg: ExperimentConfig, outdir: Path) -> list[Path]:
    params = cfg.chain_params()
    plan = QuenchPlan(
        params=params,
        schedule=PulseSchedule(delta=cfg.delta),
        t_relax=cfg.t_relax,
        config=cfg.integrator(),
    )
    series = run_switch_experiment(plan, initial=cfg.initial_level)
    sidecar = {
        "delta": cfg.delta,
        "mu": plan.schedule.mu,
        "hardness_ratio": plan.schedule.hardness_ratio(params),
        "t_relax": cfg.t_relax,
        "initial_level": cfg.initial_level,
        "dt_pulse": plan.resolved_dt_pulse(),
        "chain": {"J": cfg.J, "V": cfg.V, "M": cfg.M},
    }
    files = {
        "switch.csv": series.to_csv(),
        "switch_plan.json": json.dumps(sidecar, indent=2, sort_keys=True) + "\n",
        "switch.svg": emit_svg(series, {"columns": ["F_g", "F_e"],
                                        "labels": ["F_g(t)", "F_e(t)"],
                                        "ylabel": "fidelity",
                                        "title": "pulse-driven level switch"}),
    }
    return _finish_run(outdir, cfg.to_json(), files)


def run_config(cfg: ExperimentConfig, outdir: Path, threads: int = 1) -> list[Path]:
    runner = {
        "spectrum": _run_spectrum,
        "convergence": _run_convergence,
        "probability": _run_probability,
        "switch": _run_switch,
    }[cfg.experiment]
    return runner(cfg, outdir)


PRESET_CONFIGS = {
    "fig2": {"experiment": "spectrum", "J": 1.0, "V": 2e-4, "M": 100, "count": 12},
    "fig3": {"experiment": "convergence", "J": 1.0, "V": 2e-4, "M": 100, "t_end": 600.0},
    "fig4": {"experiment": "probability", "J": 1.0, "V": 2e-4, "M": 100, "t_end": 200.0},
    "fig5": {"experiment": "switch", "J": 1.0, "V": 2e-4, "M": 100,
             "delta": 0.02, "t_relax": 600.0},
}


def run_preset(name: str, outdir: Path, seed: int | None = None, threads: int = 1) -> list[Path]:
    """Execute one canned figure experiment into ``outdir``."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; expected one of {PRESETS}")
    raw = dict(PRESET_CONFIGS[name])
    if seed is not None:
        raw["seed"] = seed
    cfg = _resolve(raw)
    if name == "fig4":
        return _run_probability_sweep(cfg, outdir, threads)
    return run_config(cfg, outdir, threads)


# ---------------------------------------------------------------------------
# entry point

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nhchain",
                                     description="dissipative-chain two-level simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in ("run", "preset", "spectrum"):
        p = sub.add_parser(command)
        if command == "preset":
            p.add_argument("name", choices=PRESETS)
        else:
            p.add_argument("config", type=Path)
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            outdir = args.out or Path("runs") / args.name
            paths = run_preset(args.name, outdir, seed=args.seed, threads=args.threads)
        else:
            raw = json.loads(args.config.read_text())
            if not isinstance(raw, dict):
                raise ConfigError("config must be a JSON object")
            if args.command == "spectrum":
                raw.setdefault("experiment", "spectrum")
                if raw["experiment"] != "spectrum":
                    raise ConfigError("the spectrum subcommand needs experiment == 'spectrum'")
            if args.seed is not None:
                raw["seed"] = args.seed
            cfg = _resolve(raw)
            outdir = args.out or Path("runs") / cfg.experiment
            paths = run_config(cfg, outdir, threads=args.threads)
        for path in paths:
            print(path)
        return 0
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON config: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ModelError, SpectralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericError, ConvergenceError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
