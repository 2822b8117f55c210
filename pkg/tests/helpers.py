"""Shared test utilities: random operating points and a time-domain
spectrum oracle that avoids the eigendecomposition machinery.
"""
import numpy as np
import scipy.linalg

from cavity_raman import ModelParams, steady_state
from cavity_raman.liouvillian import cavity_annihilation, vec

TWO_PI = 2.0 * np.pi


def random_valid_params(rng: np.random.Generator) -> ModelParams:
    """Draw one parameter set inside the model's validity envelope.

    Couplings stay an order of magnitude under the detuning and the
    ground-state reshuffling well under the cavity linewidth, so every
    draw satisfies both regime flags and keeps the two narrow emission
    lines classifiable.
    """
    delta = rng.uniform(30.0, 100.0)
    return ModelParams(
        g=rng.uniform(0.3, delta / 25.0),
        kappa=rng.uniform(25.0, 80.0),
        omega_drive=rng.uniform(0.8, delta / 12.0),
        delta_laser=delta,
        delta_cavity=delta + rng.uniform(-15.0, 15.0),
        gamma1=rng.uniform(0.01, 0.2),
        gamma2=rng.uniform(0.01, 0.2),
        gamma_flip=rng.uniform(0.05, 1.5),
        kT=rng.uniform(40.0, 160.0),
        phonon_alpha1=rng.uniform(0.1, 2.0),
        phonon_alpha2=rng.uniform(0.1, 2.0),
        phonon_n=rng.uniform(0.0, 1.0),
    )


def correlation_series(gen: np.ndarray, dt: float, n_steps: int):
    """<a^dag(tau) a> on a uniform grid by repeated propagator steps.

    One expm call, then matrix-vector products; no eigendecomposition
    anywhere, so this is an independent route to the same correlation the
    spectrum module diagonalizes.
    """
    a_op = cavity_annihilation()
    rho_ss = steady_state(gen)
    step = scipy.linalg.expm(gen * dt)
    state = vec(a_op @ rho_ss)
    probe = vec(a_op).conj()
    taus = np.arange(n_steps + 1) * dt
    series = np.empty(n_steps + 1, dtype=complex)
    for k in range(n_steps + 1):
        if k:
            state = step @ state
        series[k] = probe @ state
    return taus, series


def windowed_transform(taus, series, nu, kappa):
    """Finite-horizon transform of a correlation series, flux-normalized.

    Trapezoid quadrature of g1(tau) exp(-i 2 pi nu tau) over the sampled
    horizon, scaled like the mode mixture so the two routes are directly
    comparable.
    """
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    kernel = np.exp(-1j * TWO_PI * np.outer(nu, taus))
    integral = np.trapezoid(kernel * series[None, :], taus, axis=1)
    return TWO_PI**2 * kappa * integral.real / np.pi


def windowed_mode_sum(lambdas, residues, nu, kappa, horizon):
    """The eigendecomposition route cut off at the same finite horizon.

    Identical analytic window as :func:`windowed_transform`, so any
    disagreement between the two is numerics, not truncation of slowly
    decaying lines.
    """
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    denom = 1j * TWO_PI * nu[:, None] - lambdas[None, :]
    window = 1.0 - np.exp((lambdas[None, :] - 1j * TWO_PI * nu[:, None]) * horizon)
    values = np.sum((residues[None, :] * window / denom).real, axis=1) / np.pi
    return TWO_PI**2 * kappa * values
