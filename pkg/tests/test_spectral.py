import cmath
import math
import warnings

import numpy as np
import pytest

from nhchain.model import ChainParams, SiteState, apply_parity, build_hamiltonian
from nhchain.spectral import (
    SpectralError,
    Spectrum,
    analytic_energy,
    analytic_wavefunction,
    biorthogonality_matrix,
    dirac_overlap,
    hermite_polynomial,
    mode_scale,
    normalization_constant,
    numeric_spectrum,
    spectrum_table,
)


def hermite_series(m, z):
    """Independent oracle: direct series expansion of H_m."""
    total = 0.0 + 0.0j
    for k in range(m // 2 + 1):
        total += ((-1) ** k / (math.factorial(k) * math.factorial(m - 2 * k))) * (2 * z) ** (
            m - 2 * k
        )
    return math.factorial(m) * total


def test_hermite_base_cases():
    assert hermite_polynomial(0, 2.7 + 1j) == 1.0
    assert hermite_polynomial(1, 0.0) == 0.0
    assert hermite_polynomial(2, 1.0) == 2.0  # 4z^2 - 2


def test_hermite_against_series_oracle():
    for m in (3, 5, 11):
        z = 0.3 + 0.1j
        assert hermite_polynomial(m, z) == pytest.approx(hermite_series(m, z), rel=1e-12)


def test_hermite_guard():
    with pytest.raises(SpectralError):
        hermite_polynomial(61, 0.5)
    with pytest.raises(SpectralError):
        hermite_polynomial(-1, 0.5)


def test_mode_scale(params_small_ratio):
    alpha = mode_scale(params_small_ratio)
    assert cmath.phase(alpha) == pytest.approx(-math.pi / 8.0, abs=1e-12)
    assert abs(alpha) == pytest.approx((2e-4) ** 0.25, abs=1e-12)


def test_normalization_constant_closed_form(params_small_ratio):
    p = params_small_ratio
    closed = (p.V / (2.0 * p.J * math.pi**2)) ** 0.125
    assert closed == pytest.approx(0.2375267529243298, rel=1e-12)
    assert normalization_constant(0, p) == pytest.approx(closed, rel=1e-10)


def test_normalization_quadrature_stable(params_small_ratio):
    coarse = normalization_constant(2, params_small_ratio, rtol=1e-10)
    fine = normalization_constant(2, params_small_ratio, rtol=1e-13)
    assert abs(coarse - fine) < 1e-10


def test_ground_wavefunction_matches_closed_form(params_small_ratio):
    p = params_small_ratio
    psi = analytic_wavefunction(0, "+", p)
    l = p.sites().astype(float)
    n0 = (p.V / (2.0 * p.J * math.pi**2)) ** 0.125
    closed = n0 * np.exp(-p.omega * l * l / (2.0 * p.J)) * np.exp(1j * p.omega * l * l / (2.0 * p.J))
    assert np.abs(psi.amplitudes - closed).max() < 1e-12


def test_minus_branch_is_staggered_conjugate(params_small_ratio):
    plus = analytic_wavefunction(0, "+", params_small_ratio)
    minus = analytic_wavefunction(0, "-", params_small_ratio)
    assert np.abs(apply_parity(plus).amplitudes - np.conj(minus.amplitudes)).max() < 1e-12


def test_odd_mode_vanishes_at_center(params_small_ratio):
    psi = analytic_wavefunction(1, "+", params_small_ratio)
    assert psi.amplitudes[params_small_ratio.half_width] == 0.0


def test_analytic_energies(params_small_ratio):
    p = params_small_ratio
    assert analytic_energy(0, "+", p) == pytest.approx(-1.99 + 0j, abs=1e-14)
    assert analytic_energy(0, "-", p) == pytest.approx(+1.99 + 0j, abs=1e-14)
    assert analytic_energy(1, "+", p) == pytest.approx(-1.97 - 0.02j, abs=1e-14)
    with pytest.raises(SpectralError):
        analytic_energy(0, "x", p)


def test_numeric_spectrum_contract(h_small_ratio, spectrum12):
    spec = spectrum12
    assert len(spec) >= 12
    scale = 4.0  # rough matrix norm
    for mode in spec.modes:
        assert mode.residual <= 1e-8 * scale
        # left vector satisfies the conjugate-transpose eigenproblem
        u = mode.left_vector.amplitudes
        defect = np.linalg.norm(
            np.conj(h_small_ratio.to_dense()).T @ u - np.conj(mode.energy) * u
        ) / np.linalg.norm(u)
        assert defect <= 1e-8 * scale
        assert abs(dirac_overlap(mode.left_vector, mode.right_vector) - 1.0) < 1e-10
        assert mode.right_vector.is_normalized(tol=1e-10)
    # sorted by descending Im, ties by ascending Re
    keys = [(-m.energy.imag, m.energy.real) for m in spec.modes]
    assert keys == sorted(keys)
    # E -> -conj(E) partners both present
    energies = spec.energies()
    for e in energies:
        if abs(e.real) > 1e-8:
            assert np.min(np.abs(energies - (-np.conj(e)))) < 1e-8


def test_numeric_spectrum_validation(h_small_ratio):
    with pytest.raises(SpectralError):
        numeric_spectrum(h_small_ratio, 0)
    with pytest.raises(SpectralError):
        numeric_spectrum(h_small_ratio, 1000)
    with pytest.raises(SpectralError):
        numeric_spectrum(h_small_ratio, 2, tol=0.0)


def test_leading_pair_and_labels(spectrum12, params_small_ratio):
    ground, excited = spectrum12.stable_pair()
    assert ground.energy.real == pytest.approx(-1.99, abs=0.05 * 0.01)
    assert excited.energy.real == pytest.approx(+1.99, abs=0.05 * 0.01)
    assert (ground.m, ground.branch) == (0, "+")
    assert (excited.m, excited.branch) == (0, "-")
    labels = {(m.m, m.branch) for m in spectrum12.modes}
    assert {(m, b) for m in range(6) for b in "+-"} <= labels


def test_analytic_numeric_energy_agreement(spectrum12, params_small_ratio):
    p = params_small_ratio
    for mode in spectrum12.modes:
        if 0 <= mode.m <= 3:
            assert abs(mode.energy - analytic_energy(mode.m, mode.branch, p)) <= 0.05 * p.omega


def test_imaginary_parts_semi_negative_after_shift(spectrum12, params_small_ratio):
    for mode in spectrum12.modes:
        assert mode.energy.imag <= params_small_ratio.omega + 1e-7


def test_biorthogonality_matrix(spectrum12):
    mat = biorthogonality_matrix(spectrum12)
    n = len(spectrum12)
    assert np.abs(np.diag(mat) - 1.0).max() < 1e-10
    off = mat - np.diag(np.diag(mat))
    assert off.max() < 1e-8


def test_biorthogonality_single_mode(spectrum12):
    single = Spectrum(modes=(spectrum12.modes[0],), params=spectrum12.params)
    mat = biorthogonality_matrix(single)
    assert mat.shape == (1, 1)
    assert mat[0, 0] == pytest.approx(1.0, abs=1e-10)


def test_dirac_overlap_basics(stable_modes):
    ground, excited = stable_modes
    assert dirac_overlap(ground.right_vector, ground.right_vector).real == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(SpectralError):
        dirac_overlap(ground.right_vector, SiteState(np.ones(3, dtype=complex), 1))


def test_stable_modes_dirac_orthogonal_small_ratio(stable_modes, params_small_ratio):
    ground, excited = stable_modes
    assert abs(dirac_overlap(excited.right_vector, ground.right_vector)) < 1e-12
    # same statement from the closed forms (alternating Gaussian sum)
    g = analytic_wavefunction(0, "+", params_small_ratio).normalized()
    e = analytic_wavefunction(0, "-", params_small_ratio).normalized()
    assert abs(dirac_overlap(e, g)) < 1e-12


def test_orthogonality_breaks_at_large_ratio(params_large_ratio):
    g = analytic_wavefunction(0, "+", params_large_ratio).normalized()
    e = analytic_wavefunction(0, "-", params_large_ratio).normalized()
    assert abs(dirac_overlap(e, g)) > 1e-3
    spec = numeric_spectrum(build_hamiltonian(params_large_ratio), 2)
    ground, excited = spec.stable_pair()
    assert abs(dirac_overlap(excited.right_vector, ground.right_vector)) > 1e-3


def test_ansatz_degrades_at_large_ratio(params_large_ratio):
    p = params_large_ratio
    h = build_hamiltonian(p)
    psi = analytic_wavefunction(1, "+", p)
    residual = np.linalg.norm(h.matvec(psi.amplitudes) - analytic_energy(1, "+", p) * psi.amplitudes)
    residual /= np.linalg.norm(psi.amplitudes)
    assert residual > 1e-2  # ansatz no longer an eigenvector
    spec = numeric_spectrum(h, 4)
    deviations = [
        abs(m.energy - analytic_energy(m.m, m.branch, p)) / abs(m.energy)
        for m in spec.modes
        if m.branch in "+-"
    ]
    assert max(deviations) > 0.01


def test_spectrum_table_format(spectrum12):
    table = spectrum_table(spectrum12)
    lines = table.strip().split("\n")
    assert lines[0].split() == ["m", "branch", "re_energy", "im_energy", "residual"]
    assert len(lines) == len(spectrum12) + 1
    first = lines[1].split()
    assert first[0] == "0" and first[1] in "+-"
