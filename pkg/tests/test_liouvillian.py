"""Dissipators, generator structure, propagation and steady states."""
import math
from dataclasses import replace

import numpy as np
import pytest

import helpers
from cavity_raman import (
    CollapseChannel,
    DomainError,
    ModelParams,
    NonUniqueSteadyState,
    build_liouvillian,
    lindblad_dissipator,
    n_thermal,
    phonon_channels,
    propagate,
    steady_state,
    trace_distance,
)
from cavity_raman.liouvillian import cavity_annihilation, vec
from cavity_raman.model import G1_0, G2_0, G2_1
from reference_values import PHOTON_NUMBER_REF, STEADY_POPULATIONS_REF

TWO_PI = 2.0 * math.pi


def _index(row, col):
    # Column stacking: matrix entry (row, col) sits at row + 4 col.
    return row + 4 * col


def test_cavity_dissipator_population_elements():
    channel = CollapseChannel(cavity_annihilation(), TWO_PI * 53.7)
    dis = lindblad_dissipator(channel)
    drain = _index(G2_1, G2_1)
    fill = _index(G2_0, G2_0)
    assert dis[drain, drain] == pytest.approx(-TWO_PI * 53.7, rel=1e-15)
    assert dis[fill, drain] == pytest.approx(TWO_PI * 53.7, rel=1e-15)


def test_dissipator_trace_preserving_on_random_channels():
    rng = np.random.default_rng(3)
    probe = vec(np.eye(4)).conj()
    for _ in range(100):
        op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        dis = lindblad_dissipator(CollapseChannel(op, rng.uniform(0.1, 10.0)))
        worst = np.max(np.abs(probe @ dis))
        assert worst <= 1e-12 * np.max(np.abs(dis))


def test_generator_trace_preserving_on_random_params():
    rng = np.random.default_rng(5)
    probe = vec(np.eye(4)).conj()
    for _ in range(50):
        gen = build_liouvillian(helpers.random_valid_params(rng))
        assert np.max(np.abs(probe @ gen)) <= 1e-12 * np.max(np.abs(gen))


def test_generator_without_dissipation_conserves_purity(paper_params):
    closed = replace(
        paper_params,
        kappa=0.0,
        gamma1=0.0,
        gamma2=0.0,
        gamma_flip=0.0,
        phonon_alpha1=0.0,
        phonon_alpha2=0.0,
    )
    gen = build_liouvillian(closed)
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[0, 0] = 1.0
    for t in (0.13, 1.7, 9.2):
        rho_t = propagate(gen, rho0, t)
        purity = np.trace(rho_t @ rho_t).real
        assert purity == pytest.approx(1.0, abs=1e-9)


def test_propagate_pure_cavity_decay():
    params = ModelParams(
        g=0.0,
        omega_drive=0.0,
        gamma1=0.0,
        gamma2=0.0,
        gamma_flip=0.0,
        phonon_alpha1=0.0,
        phonon_alpha2=0.0,
    )
    gen = build_liouvillian(params)
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[G2_1, G2_1] = 1.0
    for t in (0.001, 0.005, 0.02):
        rho_t = propagate(gen, rho0, t)
        expected = math.exp(-TWO_PI * params.kappa * t)
        assert rho_t[G2_1, G2_1].real == pytest.approx(expected, rel=1e-9)
        assert rho_t[G2_0, G2_0].real == pytest.approx(1.0 - expected, rel=1e-9)


def test_propagate_reaches_steady_state(paper_params):
    gen = build_liouvillian(paper_params)
    target = np.diag(steady_state(gen)).real
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[0, 0] = 1.0
    # Horizon from the computed spectral gap; e^-16 leaves margin under 1e-6.
    gap = -np.sort(np.linalg.eigvals(gen).real)[::-1][1]
    pops = np.diag(propagate(gen, rho0, 16.0 / gap)).real
    assert np.max(np.abs(pops - target)) < 1e-6
    # Ten reshuffling times gets close but not all the way; pin the scale.
    pops_short = np.diag(propagate(gen, rho0, 10.0 / paper_params.gamma_flip)).real
    assert np.max(np.abs(pops_short - target)) < 1e-5


def test_propagate_validates_inputs(paper_params):
    gen = build_liouvillian(paper_params)
    good = np.eye(4, dtype=complex) / 4.0
    with pytest.raises(DomainError):
        propagate(gen, good, -1.0)
    bad = np.zeros((4, 4), dtype=complex)
    bad[0, 1] = 1.0
    bad[0, 0] = 1.0
    with pytest.raises(DomainError):
        propagate(gen, bad, 1.0)


def test_propagate_preserves_density_matrix_structure():
    rng = np.random.default_rng(17)
    for _ in range(10):
        gen = build_liouvillian(helpers.random_valid_params(rng))
        rho0 = np.zeros((4, 4), dtype=complex)
        rho0[0, 0] = 1.0
        rho_t = propagate(gen, rho0, rng.uniform(0.01, 30.0))
        assert np.trace(rho_t).real == pytest.approx(1.0, abs=1e-10)
        assert np.max(np.abs(rho_t - rho_t.conj().T)) < 1e-12
        assert np.min(np.linalg.eigvalsh(rho_t)) > -1e-10


def test_steady_state_against_reference(paper_params):
    rho = steady_state(build_liouvillian(paper_params))
    pops = np.diag(rho).real
    for value, expected in zip(pops, STEADY_POPULATIONS_REF):
        assert value == pytest.approx(expected, rel=1e-9)
    assert rho[G2_1, G2_1].real == pytest.approx(PHOTON_NUMBER_REF, rel=1e-9)


def test_steady_state_trapped_without_couplings():
    params = ModelParams(
        g=0.0, omega_drive=0.0, phonon_alpha1=0.0, phonon_alpha2=0.0
    )
    rho = steady_state(build_liouvillian(params))
    expected = np.zeros((4, 4), dtype=complex)
    expected[G1_0, G1_0] = 1.0
    assert np.max(np.abs(rho - expected)) < 1e-12


def test_steady_state_degenerate_kernel_raises():
    params = ModelParams(
        kappa=0.0,
        gamma1=0.0,
        gamma2=0.0,
        gamma_flip=0.0,
        phonon_alpha1=0.0,
        phonon_alpha2=0.0,
    )
    with pytest.raises(NonUniqueSteadyState):
        steady_state(build_liouvillian(params))


def test_no_reverse_ground_flip(paper_params):
    gen = build_liouvillian(paper_params)
    # Population flow |g1,0> -> |g2,0> has no direct incoherent channel.
    assert gen[_index(G2_0, G2_0), _index(G1_0, G1_0)] == 0.0


def test_raman_funnel_monotone_without_reshuffling(paper_params):
    gen = build_liouvillian(replace(paper_params, gamma_flip=0.0))
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[0, 0] = 1.0
    trapped = [
        propagate(gen, rho0, t)[G2_0, G2_0].real
        for t in np.linspace(0.0, 200.0, 41)
    ]
    assert np.all(np.diff(trapped) > -1e-12)


def test_phonon_channels_zero_temperature_and_zero_coupling(paper_params):
    cold = phonon_channels(replace(paper_params, kT=0.0))
    # Upward channels first in each pair; both must be switched off.
    assert cold[0].rate == 0.0
    assert cold[2].rate == 0.0
    assert cold[1].rate > 0.0
    silent = phonon_channels(
        replace(paper_params, phonon_alpha1=0.0, phonon_alpha2=0.0)
    )
    assert all(channel.rate == 0.0 for channel in silent)


def test_phonon_detailed_balance(paper_params):
    channels = phonon_channels(paper_params)
    occupation = n_thermal(paper_params.delta_laser, paper_params.kT)
    boltzmann = math.exp(-paper_params.delta_laser / paper_params.kT)
    for up, down in (channels[0:2], channels[2:4]):
        ratio = up.rate / down.rate
        assert ratio == pytest.approx(occupation / (1.0 + occupation), rel=1e-12)
        assert ratio == pytest.approx(boltzmann, rel=1e-12)
    assert channels[0].rate / channels[1].rate == pytest.approx(0.5155, abs=1e-4)


def test_phonon_dressed_splittings(paper_params):
    laser = phonon_channels(paper_params, lambda_mode="laser")
    dressed = phonon_channels(paper_params, lambda_mode="dressed")
    # Exact splittings sit slightly off the detuning, so every rate moves.
    for a, b in zip(laser, dressed):
        assert a.rate != b.rate
        assert abs(a.rate / b.rate - 1.0) < 0.05


def test_trace_distance_extremes():
    rho_a = np.zeros((4, 4), dtype=complex)
    rho_a[0, 0] = 1.0
    rho_b = np.zeros((4, 4), dtype=complex)
    rho_b[1, 1] = 1.0
    assert trace_distance(rho_a, rho_a) == 0.0
    assert trace_distance(rho_a, rho_b) == pytest.approx(1.0, abs=1e-14)
