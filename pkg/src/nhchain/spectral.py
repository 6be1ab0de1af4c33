"""Eigenmodes of the dissipative chain.

Two routes are provided and cross-checked in the tests:

* closed-form Hermite-Gaussian modes valid for V << J, with complex scale
  alpha = exp(-i*pi/8) * (V/J)**(1/4) and energies
  E_m^+ = (2m+1)*omega - 2J - 2i*m*omega,  E_m^- = 2J - (2m+1)*omega - 2i*m*omega;
* dense numerical diagonalization of the truncated tridiagonal matrix,
  returning biorthonormalized left/right pairs.

Because the matrix is complex symmetric, the left eigenvector of a right
vector v is the elementwise conjugate of v up to the scaling that enforces
<left|right> = 1; right vectors are kept Dirac-normalized so they can be
used directly as fidelity targets.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .model import ChainParams, Hamiltonian, SiteState

__all__ = [
    "SpectralError",
    "ConvergenceError",
    "AnalyticModeParams",
    "EigenMode",
    "Spectrum",
    "hermite_polynomial",
    "mode_scale",
    "normalization_constant",
    "analytic_wavefunction",
    "analytic_energy",
    "numeric_spectrum",
    "biorthogonality_matrix",
    "dirac_overlap",
    "spectrum_table",
]

HERMITE_MAX_DEGREE = 60


class SpectralError(ValueError):
    """Invalid spectral request (bad mode index, missing vectors, ...)."""


class ConvergenceError(RuntimeError):
    """Eigensolve did not meet the requested residual tolerance."""

    def __init__(self, message: str, worst_residual: float):
        super().__init__(message)
        self.worst_residual = worst_residual


def hermite_polynomial(m: int, z):
    """Physicists' Hermite polynomial H_m(z) by the three-term recurrence.

    Accepts scalar or array ``z`` (real or complex).  ``m`` is capped at
    60 to stay clear of overflow in the recurrence over the supported
    parameter range.
    """
    if not isinstance(m, (int, np.integer)) or m < 0:
        raise SpectralError(f"mode index must be a nonnegative integer, got {m!r}")
    if m > HERMITE_MAX_DEGREE:
        raise SpectralError(f"mode index {m} exceeds the supported maximum {HERMITE_MAX_DEGREE}")
    z = np.asarray(z, dtype=complex)
    h_prev = np.ones_like(z)
    if m == 0:
        return h_prev if h_prev.ndim else complex(h_prev)
    h = 2.0 * z
    for k in range(1, m):
        h, h_prev = 2.0 * z * h - 2.0 * k * h_prev, h
    return h if h.ndim else complex(h)


def mode_scale(params: ChainParams) -> complex:
    """Complex Gaussian scale alpha = exp(-i*pi/8) * (V/J)**(1/4)."""
    return cmath.exp(-1j * math.pi / 8.0) * (params.V / params.J) ** 0.25


@dataclass(frozen=True)
class AnalyticModeParams:
    """Scale and normalization data for one closed-form mode."""

    alpha: complex
    norm_constant: float
    m: int
    branch: str


def normalization_constant(m: int, params: ChainParams, rtol: float = 1e-10) -> float:
    """Normalization N_m from the continuum integral.

    N_m^-2 = integral of H_m(alpha*x) * H_m(conj(alpha)*x) * exp(-Re(alpha^2)*x^2) dx,
    evaluated by Gauss-Legendre on [-X, X] with X = 8/sqrt(Re(alpha^2)),
    doubling the point count until the relative change drops below rtol.
    The integrand is |H_m(alpha*x)|^2 * exp(...) for real x, so the result
    is real and positive.
    """
    alpha = mode_scale(params)
    decay = (alpha * alpha).real
    cutoff = 8.0 / math.sqrt(decay)
    previous = None
    points = 64
    while points <= 65536:
        nodes, weights = np.polynomial.legendre.leggauss(points)
        x = cutoff * nodes
        h = hermite_polynomial(m, alpha * x)
        integrand = (h * hermite_polynomial(m, np.conj(alpha) * x)).real * np.exp(-decay * x * x)
        value = cutoff * float(weights @ integrand)
        if previous is not None and abs(value - previous) <= rtol * abs(value):
            return 1.0 / math.sqrt(value)
        previous = value
        points *= 2
    raise ConvergenceError("normalization quadrature did not converge", float("nan"))


def analytic_wavefunction(m: int, branch: str, params: ChainParams) -> SiteState:
    """Closed-form mode sampled on the lattice.

    Branch '+' is N_m * exp(-alpha^2 l^2 / 2) * H_m(alpha*l); branch '-' is
    its sitewise conjugate with the (-1)**l stagger.  Not Dirac-normalized:
    N_m comes from the continuum integral (callers renormalize discrete
    vectors before fidelity use).
    """
    if branch not in ("+", "-"):
        raise SpectralError(f"branch must be '+' or '-', got {branch!r}")
    alpha = mode_scale(params)
    norm = normalization_constant(m, params)
    l = params.sites().astype(float)
    psi_plus = norm * np.exp(-0.5 * alpha * alpha * l * l) * hermite_polynomial(m, alpha * l)
    if branch == "+":
        amps = psi_plus
    else:
        signs = 1.0 - 2.0 * (np.abs(params.sites()) % 2)
        amps = signs * np.conj(psi_plus)
    return SiteState(amps, params.half_width, label=f"analytic m={m} branch={branch}")


def analytic_energy(m: int, branch: str, params: ChainParams) -> complex:
    """Closed-form energy of mode (m, branch)."""
    if branch == "+":
        return (2 * m + 1) * params.omega - 2.0 * params.J - 2j * m * params.omega
    if branch == "-":
        return 2.0 * params.J - (2 * m + 1) * params.omega - 2j * m * params.omega
    raise SpectralError(f"branch must be '+' or '-', got {branch!r}")


@dataclass(frozen=True)
class EigenMode:
    """One spectral solution with biorthonormalized left/right vectors.

    ``m``/``branch`` are ladder labels assigned by nearest closed-form
    energy; branch is 'u' (unassigned) when no closed-form energy is
    within omega/2.  ``degenerate`` flags membership in a cluster of
    eigenvalues closer than 10*tol.
    """

    m: int
    branch: str
    energy: complex
    right_vector: SiteState
    left_vector: SiteState
    residual: float
    degenerate: bool = False


@dataclass(frozen=True)
class Spectrum:
    """Modes sorted by descending Im(E), ties by ascending Re(E)."""

    modes: tuple
    params: ChainParams

    def __len__(self) -> int:
        return len(self.modes)

    def energies(self) -> np.ndarray:
        return np.array([mode.energy for mode in self.modes])

    def stable_pair(self, imag_tol: float | None = None) -> tuple[EigenMode, EigenMode]:
        """The two slowest-decaying modes (ground, excited).

        Ground is the one with negative real energy (-(2J - omega)),
        excited the positive one.  On the lattice their energies are real
        only up to a small V-dependent correction (Im E = V/16 + O(V^2)),
        so realness is checked only when ``imag_tol`` is given.
        """
        leading = self.modes[:2]
        if len(leading) < 2:
            raise SpectralError("spectrum holds fewer than two modes")
        if imag_tol is not None:
            for mode in leading:
                if abs(mode.energy.imag) > imag_tol:
                    raise SpectralError(
                        f"leading mode energy {mode.energy} is not real within {imag_tol}"
                    )
        ground, excited = sorted(leading, key=lambda mode: mode.energy.real)
        return ground, excited


def _sort_key(energy: complex) -> tuple:
    return (-energy.imag, energy.real)


def _ladder_labels(params: ChainParams, max_m: int) -> list[tuple[int, str, complex]]:
    labels = []
    for m in range(max_m + 1):
        for branch in ("+", "-"):
            labels.append((m, branch, analytic_energy(m, branch, params)))
    return labels


def _params_from_hamiltonian(h: Hamiltonian) -> ChainParams | None:
    """Recover (J, V, M) from a bare-chain matrix; None if it is not one."""
    mid = h.half_width
    omega = h.diagonal[mid].imag
    J = -h.off_diagonal
    if J <= 0 or omega <= 0:
        return None
    V = omega - h.diagonal[mid + 1].imag
    if V <= 0:
        return None
    expected = 1j * (omega - V * (np.arange(-mid, mid + 1, dtype=float) ** 2))
    if not np.allclose(expected, h.diagonal, rtol=0.0, atol=1e-12 * max(1.0, abs(V) * mid**2)):
        return None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ChainParams(J=J, V=V, half_width=mid)


def numeric_spectrum(h: Hamiltonian, count: int, tol: float = 1e-8) -> Spectrum:
    """Diagonalize the chain and return the slowest-decaying modes.

    Dense diagonalization (dimension <= a few hundred in practice).  The
    ``count`` modes with the largest Im(E) are selected; if the cut would
    split a pair related by E -> -conj(E), the partner is pulled in as
    well, so the result can hold up to one extra mode.  Right vectors are
    Dirac-normalized with a deterministic phase (largest-magnitude entry
    made real positive); left vectors are conjugates of the right ones,
    rescaled so <left|right> = 1.
    """
    if count < 1 or count > h.dimension:
        raise SpectralError(f"count must be in [1, {h.dimension}], got {count}")
    if tol <= 0:
        raise SpectralError(f"tol must be > 0, got {tol}")

    dense = h.to_dense()
    eigenvalues, right = scipy.linalg.eig(dense)
    order = sorted(range(len(eigenvalues)), key=lambda i: _sort_key(eigenvalues[i]))

    selected = list(order[:count])
    selected_set = set(selected)
    # Close the selection under E -> -conj(E) pairing at the cut.
    for i in list(selected):
        partner_energy = -np.conj(eigenvalues[i])
        if abs(eigenvalues[i].real) <= tol:
            continue
        if any(abs(eigenvalues[j] - partner_energy) <= 1e-8 for j in selected_set):
            continue
        candidates = [
            j for j in order[count : count + 4] if abs(eigenvalues[j] - partner_energy) <= 1e-8
        ]
        if candidates:
            selected.append(candidates[0])
            selected_set.add(candidates[0])
    selected.sort(key=lambda i: _sort_key(eigenvalues[i]))

    params = _params_from_hamiltonian(h)
    labels = _ladder_labels(params, min(HERMITE_MAX_DEGREE, h.half_width)) if params else []
    label_gate = params.omega / 2.0 if params else 0.0

    h_norm = float(np.abs(h.diagonal).max() + 2.0 * abs(h.off_diagonal))
    modes = []
    worst = 0.0
    for i in selected:
        energy = complex(eigenvalues[i])
        v = right[:, i]
        v = v / np.linalg.norm(v)
        pivot = int(np.argmax(np.abs(v)))
        phase = v[pivot] / abs(v[pivot])
        v = v / phase
        residual = float(np.linalg.norm(h.matvec(v.copy()) - energy * v))
        worst = max(worst, residual)

        self_product = complex(v @ v)
        if abs(self_product) < 1e-10:
            left = np.conj(v)
            degenerate = True
        else:
            left = np.conj(v) / np.conj(self_product)
            degenerate = False
        degenerate = degenerate or any(
            j != i and abs(eigenvalues[j] - energy) < 10.0 * tol for j in selected
        )

        m_label, branch_label = -1, "u"
        if labels:
            best = min(labels, key=lambda item: abs(item[2] - energy))
            if abs(best[2] - energy) <= label_gate:
                m_label, branch_label = best[0], best[1]

        modes.append(
            EigenMode(
                m=m_label,
                branch=branch_label,
                energy=energy,
                right_vector=SiteState(v, h.half_width, label=f"numeric E={energy:.6g}"),
                left_vector=SiteState(left, h.half_width, label=f"numeric left E={energy:.6g}"),
                residual=residual,
                degenerate=degenerate,
            )
        )

    if worst > tol * max(1.0, h_norm):
        raise ConvergenceError(
            f"worst eigenpair residual {worst:.3e} exceeds tolerance", worst
        )
    return Spectrum(modes=tuple(modes), params=params)


def dirac_overlap(a: SiteState, b: SiteState) -> complex:
    """Ordinary conjugate-linear inner product sum(conj(a) * b)."""
    if a.dimension != b.dimension:
        raise SpectralError(f"length mismatch: {a.dimension} vs {b.dimension}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def biorthogonality_matrix(spec: Spectrum) -> np.ndarray:
    """Entry (a, b) = |<left_a|right_b>|; identity for a converged spectrum."""
    n = len(spec.modes)
    out = np.empty((n, n))
    for a, mode_a in enumerate(spec.modes):
        for b, mode_b in enumerate(spec.modes):
            out[a, b] = abs(dirac_overlap(mode_a.left_vector, mode_b.right_vector))
    return out


def spectrum_table(spec: Spectrum) -> str:
    """Plain-text table: one mode per row, columns m branch ReE ImE residual."""
    lines = ["m branch re_energy im_energy residual"]
    for mode in spec.modes:
        lines.append(
            f"{mode.m} {mode.branch} {mode.energy.real:.17g} "
            f"{mode.energy.imag:.17g} {mode.residual:.17g}"
        )
    return "\n".join(lines) + "\n"
