"""Time evolution under the dissipative chain and the derived observables.

States are propagated without renormalization: the returned amplitudes are
the raw decaying ones, except that an overall factor is split off into
``SiteState.log_scale`` if the norm would otherwise underflow.  Two
propagation routes exist and serve as mutual checks: a fixed-step 4th-order
Runge-Kutta integrator on the tridiagonal matrix, and direct expansion in a
full numeric eigenbasis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Hamiltonian, ChainParams, ModelError, SiteState
from .spectral import Spectrum, SpectralError, dirac_overlap

__all__ = [
    "NumericError",
    "IntegratorConfig",
    "ExpansionCoefficients",
    "ObservableSeries",
    "DEFAULT_SEED",
    "default_dt",
    "make_initial_state",
    "propagate",
    "eigen_propagate",
    "expansion_coefficients",
    "fidelity",
    "dirac_probability",
    "run_convergence_experiment",
]

DEFAULT_SEED = 223
UNDERFLOW_GUARD = 1e-150
STATE_KINDS = ("point", "gaussian", "tophat", "random")


class NumericError(RuntimeError):
    """Integration failure (instability, NaN/overflow, bad step size)."""

    def __init__(self, message: str, failure_time: float | None = None):
        super().__init__(message)
        self.failure_time = failure_time


RK4_STABILITY_FACTOR = 2.5


def stability_limit(h: Hamiltonian) -> float:
    """Largest stable dt for the explicit integrator on this matrix.

    The classical RK4 stability region reaches about 2.8 along both the
    real (decay) and imaginary (oscillation) axes; 2.5 leaves margin.
    Accuracy-motivated defaults (``default_dt``) are much stricter.
    """
    return RK4_STABILITY_FACTOR / h.spectral_radius_estimate()


def default_dt(params: ChainParams) -> float:
    """Default step: 0.02/J, reduced when the potential edge is stiff."""
    radius = max(2.0 * params.J, params.V * params.half_width**2) + params.omega
    return min(0.02 / params.J, 0.5 / radius)


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration parameters.

    ``method`` is 'rk4' (default) or 'eigen'; the latter expands in a full
    numeric spectrum supplied to ``propagate``.  ``record_stride`` thins
    the recorded observable mesh; ``snapshot_stride`` > 0 additionally
    stores full state snapshots on that stride.
    """

    dt: float
    method: str = "rk4"
    record_stride: int = 1
    snapshot_stride: int = 0

    def __post_init__(self) -> None:
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise NumericError(f"dt must be positive and finite, got {self.dt!r}")
        if self.method not in ("rk4", "eigen"):
            raise NumericError(f"unknown method {self.method!r}")
        if self.record_stride < 1 or self.snapshot_stride < 0:
            raise NumericError("record_stride must be >= 1, snapshot_stride >= 0")


class ObservableSeries:
    """Time-stamped record of norms, probability and fidelities.

    Fidelity targets are registered at construction (name -> normalized
    state) and evaluated at every recorded time.  Serializes to CSV with
    columns: time, norm2, P, then one F_<name> column per target, all at
    17 significant digits.
    """

    def __init__(self, targets: dict[str, SiteState] | None = None):
        self.targets: dict[str, SiteState] = dict(targets or {})
        for name, target in self.targets.items():
            if not target.is_normalized(tol=1e-8):
                raise ModelError(f"fidelity target {name!r} is not Dirac-normalized")
        self.times: list[float] = []
        self.norm2: list[float] = []
        self.prob: list[float] = []
        self.fidelities: dict[str, list[float]] = {name: [] for name in self.targets}
        self.snapshots: list[tuple[float, SiteState]] = []

    def __len__(self) -> int:
        return len(self.times)

    def record(self, t: float, state: SiteState, snapshot: bool = False) -> None:
        if self.times:
            if t == self.times[-1]:
                return
            if t < self.times[-1]:
                raise ModelError(f"times must be strictly increasing, got {t} after {self.times[-1]}")
        n2 = state.norm2()
        if not math.isfinite(n2) or n2 < 0:
            raise NumericError(f"non-finite norm at t={t}", failure_time=t)
        self.times.append(float(t))
        self.norm2.append(n2)
        self.prob.append(n2 * n2)
        for name, target in self.targets.items():
            value = fidelity(target, state)
            if not 0.0 <= value <= 1.0 + 1e-12:
                raise NumericError(f"fidelity out of [0, 1] at t={t}: {value}", failure_time=t)
            self.fidelities[name].append(min(value, 1.0))
        if snapshot:
            self.snapshots.append((float(t), state))

    def column_names(self) -> list[str]:
        return ["time", "norm2", "P"] + [f"F_{name}" for name in self.targets]

    def columns(self) -> list[np.ndarray]:
        cols = [np.asarray(self.times), np.asarray(self.norm2), np.asarray(self.prob)]
        cols.extend(np.asarray(self.fidelities[name]) for name in self.targets)
        return cols

    def to_csv(self) -> str:
        if not self.times:
            raise ModelError("cannot serialize an empty series")
        lines = [",".join(self.column_names())]
        for row in zip(*self.columns()):
            lines.append(",".join(f"{value:.17g}" for value in row))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ExpansionCoefficients:
    """Per-mode coefficients of a state in a biorthogonal eigenbasis."""

    values: np.ndarray
    spectrum: Spectrum

    def reconstruction(self) -> np.ndarray:
        vectors = np.column_stack([m.right_vector.amplitudes for m in self.spectrum.modes])
        return vectors @ self.values


def make_initial_state(
    kind: str,
    params: ChainParams,
    center: int = 0,
    width: float = 10.0,
    seed: int | None = None,
) -> SiteState:
    """Dirac-normalized initial state of one of the four stock profiles.

    point: delta at ``center``; gaussian: exp(-(l-c)^2/(2 w^2)); tophat:
    flat on |l-c| <= w; random: uniform [0, 1) real amplitudes drawn from
    ``seed`` (required, for reproducibility).
    """
    if kind not in STATE_KINDS:
        raise ModelError(f"unknown initial state kind {kind!r}; expected one of {STATE_KINDS}")
    if abs(center) > params.half_width:
        raise ModelError(f"center {center} outside the lattice (|center| <= {params.half_width})")
    l = params.sites()
    if kind == "point":
        amps = np.zeros(params.dimension, dtype=complex)
        amps[center + params.half_width] = 1.0
    elif kind == "gaussian":
        if width <= 0:
            raise ModelError(f"width must be > 0, got {width}")
        amps = np.exp(-((l - center) ** 2) / (2.0 * width**2)).astype(complex)
    elif kind == "tophat":
        if width <= 0:
            raise ModelError(f"width must be > 0, got {width}")
        amps = (np.abs(l - center) <= width).astype(complex)
    else:
        if seed is None:
            raise ModelError("random initial state requires an explicit seed")
        rng = np.random.default_rng(seed)
        amps = rng.random(params.dimension).astype(complex)
    state = SiteState(amps, params.half_width, label=f"{kind} initial state")
    return state.normalized()


def _apply_h(diagonal: np.ndarray, off: float, y: np.ndarray) -> np.ndarray:
    out = diagonal * y
    out[:-1] += off * y[1:]
    out[1:] += off * y[:-1]
    return out


def propagate(
    h: Hamiltonian,
    state: SiteState,
    t_span,
    config: IntegratorConfig,
    series: ObservableSeries | None = None,
    spectrum: Spectrum | None = None,
) -> SiteState:
    """Evolve ``state`` under dpsi/dt = -i H psi on a uniform mesh.

    ``t_span`` is (t0, t1) or a bare end time (then t0 = 0).  The state is
    returned raw (decaying), with any underflow-prevention factor recorded
    in ``log_scale``.  With ``method='eigen'`` a full ``spectrum`` of the
    same matrix must be supplied and the evolution is the exact mode
    expansion; this is the oracle the integrator is tested against.
    """
    t0, t1 = (0.0, float(t_span)) if np.isscalar(t_span) else (float(t_span[0]), float(t_span[1]))
    if t1 < t0:
        raise NumericError(f"t_span end {t1} precedes start {t0}")
    if h.dimension != state.dimension:
        raise ModelError(f"dimension mismatch: H is {h.dimension}, state is {state.dimension}")
    if t1 == t0:
        if series is not None:
            series.record(t0, state)
        return state

    if config.method == "eigen":
        return _propagate_eigen(h, state, t0, t1, config, series, spectrum)

    limit = stability_limit(h)
    if config.dt > limit:
        raise NumericError(
            f"dt = {config.dt:g} exceeds the stability limit {limit:g} for this matrix"
        )

    n_steps = max(1, round((t1 - t0) / config.dt))
    dt = (t1 - t0) / n_steps
    diagonal = h.diagonal
    off = h.off_diagonal
    y = state.amplitudes.copy()
    log_scale = state.log_scale

    def record(step: int) -> None:
        if series is None:
            return
        t = t0 + step * dt
        snap = config.snapshot_stride > 0 and step % config.snapshot_stride == 0
        series.record(t, SiteState(y, h.half_width, label=state.label, log_scale=log_scale), snap)

    record(0)
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(1, n_steps + 1):
        k1 = -1j * _apply_h(diagonal, off, y)
        k2 = -1j * _apply_h(diagonal, off, y + half * k1)
        k3 = -1j * _apply_h(diagonal, off, y + half * k2)
        k4 = -1j * _apply_h(diagonal, off, y + dt * k3)
        y = y + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        if step % 32 == 0 or step == n_steps:
            raw = float(np.vdot(y, y).real)
            if not math.isfinite(raw):
                raise NumericError(
                    f"non-finite amplitudes at t = {t0 + step * dt:g}", failure_time=t0 + step * dt
                )
            if 0.0 < raw < UNDERFLOW_GUARD**2:
                norm = math.sqrt(raw)
                y /= norm
                log_scale += math.log(norm)
        if step % config.record_stride == 0 or step == n_steps:
            record(step)
    return SiteState(y, h.half_width, label=state.label, log_scale=log_scale)


def _propagate_eigen(h, state, t0, t1, config, series, spectrum) -> SiteState:
    if spectrum is None:
        raise NumericError("method 'eigen' requires a full spectrum")
    if len(spectrum) != h.dimension:
        raise NumericError(
            f"eigen expansion needs all {h.dimension} modes, spectrum has {len(spectrum)}"
        )
    coeffs = expansion_coefficients(state, spectrum)
    energies = spectrum.energies()
    vectors = np.column_stack([m.right_vector.amplitudes for m in spectrum.modes])

    n_steps = max(1, round((t1 - t0) / config.dt))
    dt = (t1 - t0) / n_steps
    final = state
    if series is not None:
        series.record(t0, state)
    steps = [
        s for s in range(1, n_steps + 1) if s % config.record_stride == 0 or s == n_steps
    ] if series is not None else [n_steps]
    for step in steps:
        t = t0 + step * dt
        y = vectors @ (coeffs.values * np.exp(-1j * energies * (t - t0)))
        final = SiteState(y, h.half_width, label=state.label, log_scale=state.log_scale)
        if series is not None:
            snap = config.snapshot_stride > 0 and step % config.snapshot_stride == 0
            series.record(t, final, snap)
    return final


def eigen_propagate(spectrum: Spectrum, h: Hamiltonian, state: SiteState, t: float) -> SiteState:
    """Single-time exact mode-expansion evolution (the integrator oracle)."""
    cfg = IntegratorConfig(dt=max(t, 1.0), method="eigen")
    return propagate(h, state, (0.0, t), cfg, spectrum=spectrum)


def expansion_coefficients(state: SiteState, spec: Spectrum) -> ExpansionCoefficients:
    """Coefficients c_n = <left_n|state> in the biorthogonal basis."""
    if any(mode.left_vector is None for mode in spec.modes):
        raise SpectralError("spectrum has no left vectors; cannot expand")
    values = np.array(
        [dirac_overlap(mode.left_vector, state) for mode in spec.modes], dtype=complex
    )
    return ExpansionCoefficients(values=values, spectrum=spec)


def fidelity(target: SiteState, evolved: SiteState) -> float:
    """|<target|evolved>|^2 with the evolved state renormalized.

    Scale-invariant in both arguments, so the split-off ``log_scale``
    factors drop out; always in [0, 1].
    """
    denom = evolved.raw_norm2() * target.raw_norm2()
    if denom == 0.0:
        raise ModelError("fidelity undefined for a zero state")
    overlap = np.vdot(target.amplitudes, evolved.amplitudes)
    return float(abs(overlap) ** 2 / denom)


def dirac_probability(state: SiteState) -> float:
    """Square of the Dirac norm-squared, (sum |psi(l)|^2)^2."""
    n2 = state.norm2()
    return n2 * n2


def run_convergence_experiment(
    kinds,
    params: ChainParams,
    t_end: float,
    config: IntegratorConfig | None = None,
    seed: int = DEFAULT_SEED,
    center: int = 0,
    width: float = 10.0,
) -> dict[str, ObservableSeries]:
    """Propagate each stock initial state and track fidelity to |g> and |e>.

    The targets are the two slowest-decaying numeric eigenmodes of the
    chain.  Returns one series per requested kind.
    """
    from .spectral import numeric_spectrum  # local import to avoid a cycle at import time
    from .model import build_hamiltonian

    h = build_hamiltonian(params)
    spec = numeric_spectrum(h, count=2)
    ground, excited = spec.stable_pair()
    targets = {"g": ground.right_vector, "e": excited.right_vector}
    if config is None:
        config = IntegratorConfig(dt=default_dt(params))

    results: dict[str, ObservableSeries] = {}
    for kind in kinds:
        initial = make_initial_state(kind, params, center=center, width=width, seed=seed)
        series = ObservableSeries(targets=targets)
        propagate(h, initial, t_end, config, series=series)
        results[kind] = series
    return results
