"""Independent cross-checks: full photon ladder and direct ODE integrations.

Nothing here reuses the truncated four-state machinery beyond the generic
superoperator algebra, so agreement between these routines and the fast
paths is a real consistency statement, not a tautology.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import liouvillian as lv
from . import model
from .errors import DomainError, StiffnessFailure
from .model import ModelParams

TWO_PI = 2.0 * math.pi

_RTOL = 1e-10
_ATOL = 1e-12

LEVELS = ("g1", "g2", "e")


@dataclass(frozen=True)
class LadderBasis:
    """Product basis emitter x photon number, |level, n> with n <= n_max."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise DomainError(f"need at least one photon level, got n_max={self.n_max}")

    @property
    def dim(self) -> int:
        return 3 * (self.n_max + 1)

    def index(self, level: str, n: int) -> int:
        if level not in LEVELS:
            raise DomainError(f"unknown level {level!r}")
        if not 0 <= n <= self.n_max:
            raise DomainError(f"photon number {n} outside 0..{self.n_max}")
        return LEVELS.index(level) * (self.n_max + 1) + n

    def labels(self) -> list[str]:
        return [f"|{level},{n}>" for level in LEVELS for n in range(self.n_max + 1)]


def _ladder_hamiltonian(params: ModelParams, basis: LadderBasis) -> np.ndarray:
    """Drive, Jaynes-Cummings coupling and detunings on the full ladder, GHz."""
    delta2 = params.delta_laser - params.delta_cavity
    h = np.zeros((basis.dim, basis.dim), dtype=complex)
    for n in range(basis.n_max + 1):
        h[basis.index("g1", n), basis.index("g1", n)] = n * delta2
        h[basis.index("g2", n), basis.index("g2", n)] = n * delta2
        h[basis.index("e", n), basis.index("e", n)] = params.delta_laser + n * delta2
        e_n = basis.index("e", n)
        g1_n = basis.index("g1", n)
        h[e_n, g1_n] = params.omega_drive / 2.0
        h[g1_n, e_n] = params.omega_drive / 2.0
        if n < basis.n_max:
            g2_up = basis.index("g2", n + 1)
            h[e_n, g2_up] = params.g * math.sqrt(n + 1)
            h[g2_up, e_n] = params.g * math.sqrt(n + 1)
    return h


def _ladder_collapse(params: ModelParams, basis: LadderBasis) -> list[lv.CollapseChannel]:
    dim = basis.dim
    a_full = np.zeros((dim, dim), dtype=complex)
    decay1 = np.zeros((dim, dim), dtype=complex)
    decay2 = np.zeros((dim, dim), dtype=complex)
    flip = np.zeros((dim, dim), dtype=complex)
    for n in range(basis.n_max + 1):
        if n >= 1:
            for level in LEVELS:
                a_full[basis.index(level, n - 1), basis.index(level, n)] = math.sqrt(n)
        decay1[basis.index("g1", n), basis.index("e", n)] = 1.0
        decay2[basis.index("g2", n), basis.index("e", n)] = 1.0
        flip[basis.index("g1", n), basis.index("g2", n)] = 1.0
    return [
        lv.CollapseChannel(a_full, TWO_PI * params.kappa),
        lv.CollapseChannel(decay1, TWO_PI * params.gamma1),
        lv.CollapseChannel(decay2, TWO_PI * params.gamma2),
        lv.CollapseChannel(flip, TWO_PI * params.gamma_flip),
    ]


def _embed_truncated(op4: np.ndarray, basis: LadderBasis) -> np.ndarray:
    """Place a truncated-basis operator at its four ladder positions."""
    positions = [
        basis.index("g1", 0),
        basis.index("g2", 0),
        basis.index("g2", 1),
        basis.index("e", 0),
    ]
    full = np.zeros((basis.dim, basis.dim), dtype=complex)
    for row4, row in enumerate(positions):
        for col4, col in enumerate(positions):
            full[row, col] = op4[row4, col4]
    return full


def ladder_liouvillian(
    params: ModelParams,
    n_max: int = 3,
    dressed_mode: str = "exact",
    lambda_mode: str = "laser",
) -> tuple[np.ndarray, LadderBasis]:
    """Master-equation generator on the untruncated photon ladder, 1/ns.

    The thermal jump operators live between dressed states defined inside
    the single-excitation manifold, so they are embedded at the matching
    four ladder positions.
    """
    basis = LadderBasis(n_max)
    gen = lv.hamiltonian_superoperator(_ladder_hamiltonian(params, basis))
    for channel in _ladder_collapse(params, basis):
        gen += lv.lindblad_dissipator(channel)
    if params.phonon_alpha1 > 0.0 or params.phonon_alpha2 > 0.0:
        dressed = model.dressed_states(params, mode=dressed_mode)
        for channel in lv.phonon_channels(params, dressed, lambda_mode):
            gen += lv.lindblad_dissipator(
                lv.CollapseChannel(_embed_truncated(channel.operator, basis), channel.rate)
            )
    return gen, basis


def full_ladder_steady_state(
    params: ModelParams,
    n_max: int = 3,
    dressed_mode: str = "exact",
    lambda_mode: str = "laser",
) -> tuple[np.ndarray, LadderBasis, float]:
    """Steady state on the full ladder plus the weight outside the truncation.

    The last element of the return triple sums the populations the
    four-state model discards: every n >= 2 state together with |g1,1> and
    |e,1>.
    """
    gen, basis = ladder_liouvillian(params, n_max, dressed_mode, lambda_mode)
    rho = lv.steady_state(gen)
    kept = {
        basis.index("g1", 0),
        basis.index("g2", 0),
        basis.index("g2", 1),
        basis.index("e", 0),
    }
    excess = float(
        sum(rho[j, j].real for j in range(basis.dim) if j not in kept)
    )
    return rho, basis, excess


def truncation_error(
    params: ModelParams,
    n_max: int = 3,
    dressed_mode: str = "exact",
    lambda_mode: str = "laser",
) -> float:
    """Trace distance between truncated and full-ladder steady states.

    The ladder state is restricted to the four kept basis states and
    renormalized before comparing.
    """
    rho_full, basis, _ = full_ladder_steady_state(params, n_max, dressed_mode, lambda_mode)
    positions = [
        basis.index("g1", 0),
        basis.index("g2", 0),
        basis.index("g2", 1),
        basis.index("e", 0),
    ]
    restricted = rho_full[np.ix_(positions, positions)]
    restricted = restricted / np.trace(restricted).real

    gen4 = lv.build_liouvillian(params, dressed_mode=dressed_mode, lambda_mode=lambda_mode)
    rho4 = lv.steady_state(gen4)
    return lv.trace_distance(rho4, restricted)


def ladder_convergence(
    params: ModelParams,
    n_max: int = 3,
    dressed_mode: str = "exact",
    lambda_mode: str = "laser",
) -> float:
    """Trace distance between ladder steady states at n_max and n_max + 1,
    both restricted to the smaller ladder."""
    rho_a, basis_a, _ = full_ladder_steady_state(params, n_max, dressed_mode, lambda_mode)
    rho_b, basis_b, _ = full_ladder_steady_state(params, n_max + 1, dressed_mode, lambda_mode)
    positions = [basis_b.index(level, n) for level in LEVELS for n in range(n_max + 1)]
    restricted = rho_b[np.ix_(positions, positions)]
    restricted = restricted / np.trace(restricted).real
    return lv.trace_distance(rho_a, restricted)


def _integrate(rhs, y0, t_grid, what: str) -> np.ndarray:
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2:
        raise DomainError("time grid must hold at least two points")
    if t_grid[0] < 0.0 or np.min(np.diff(t_grid)) <= 0.0:
        raise DomainError("time grid must be nonnegative and strictly increasing")
    solution = solve_ivp(
        rhs,
        (0.0, float(t_grid[-1])),
        y0,
        method="RK45",
        t_eval=t_grid,
        rtol=_RTOL,
        atol=_ATOL,
    )
    if not solution.success:
        raise StiffnessFailure(f"{what}: {solution.message}")
    return solution.y


def bare_lambda_evolve(
    omega: float,
    delta: float,
    gamma: float,
    gamma_tot: float,
    t_grid: np.ndarray,
    gamma_dephase: float | None = None,
) -> np.ndarray:
    """Populations of the bare driven three-level emitter on ``t_grid``.

    Integrates the coupled equations for the drive coherence, the excited
    population and both ground populations, with ``gamma`` the decay into
    the target state, ``gamma_tot`` the total excited-state decay and
    ``gamma_dephase`` the dipole decoherence rate (defaults to
    gamma_tot / 2).  All rates and frequencies in GHz, times in ns.
    Returns an array of shape (len(t_grid), 3) with columns
    (initial ground, target ground, excited).  The initial ground
    population is integrated explicitly rather than inferred from the
    trace, so probability conservation stays a meaningful check on the
    result.
    """
    if gamma < 0.0 or gamma_tot <= 0.0:
        raise DomainError("gamma must be nonnegative and gamma_tot positive")
    if gamma > gamma_tot:
        raise DomainError(f"gamma={gamma} cannot exceed gamma_tot={gamma_tot}")
    if gamma_dephase is None:
        gamma_dephase = gamma_tot / 2.0
    if gamma_dephase <= 0.0:
        raise DomainError("dephasing rate must be positive")

    w_drive = TWO_PI * omega
    w_delta = TWO_PI * delta
    w_gamma = TWO_PI * gamma
    w_tot = TWO_PI * gamma_tot
    w_deph = TWO_PI * gamma_dephase

    def rhs(_t, y):
        p1, _p2, p3, re13, im13 = y
        return (
            (w_tot - w_gamma) * p3 + w_drive * im13,
            w_gamma * p3,
            -w_tot * p3 - w_drive * im13,
            w_delta * im13 - w_deph * re13,
            -w_delta * re13 - w_deph * im13 - 0.5 * w_drive * (p1 - p3),
        )

    y = _integrate(rhs, np.array([1.0, 0.0, 0.0, 0.0, 0.0]), t_grid, "bare emitter")
    return y[:3, :].T


@dataclass(frozen=True)
class AdiabaticReport:
    """Worst-case disagreement between exact and eliminated dynamics."""

    max_population_error: float
    max_excited_population: float


def adiabatic_populations(
    omega: float,
    g: float,
    delta: float,
    t_grid: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Transfer populations with and without eliminating the excited state.

    Integrates the lossless three-amplitude Schroedinger dynamics starting
    from the driven ground state, and the effective two-state model with
    light shifts -omega^2/(4 delta), -g^2/delta and coupling
    -omega g / (2 delta).  Returns (exact target population, effective
    target population, exact excited population) on ``t_grid``.
    """
    if delta == 0.0:
        raise DomainError("adiabatic elimination is undefined at zero detuning")
    w_drive = TWO_PI * omega
    w_g = TWO_PI * g
    w_delta = TWO_PI * delta

    def rhs_exact(_t, y):
        c1 = y[0] + 1j * y[1]
        c2 = y[2] + 1j * y[3]
        c3 = y[4] + 1j * y[5]
        d1 = -1j * (w_drive / 2.0) * c3
        d2 = -1j * w_g * c3
        d3 = -1j * (w_delta * c3 + (w_drive / 2.0) * c1 + w_g * c2)
        return (d1.real, d1.imag, d2.real, d2.imag, d3.real, d3.imag)

    shift1 = w_drive**2 / (4.0 * w_delta)
    shift2 = w_g**2 / w_delta
    coupling = w_drive * w_g / (2.0 * w_delta)

    def rhs_effective(_t, y):
        b1 = y[0] + 1j * y[1]
        b2 = y[2] + 1j * y[3]
        d1 = 1j * (shift1 * b1 + coupling * b2)
        d2 = 1j * (shift2 * b2 + coupling * b1)
        return (d1.real, d1.imag, d2.real, d2.imag)

    exact = _integrate(
        rhs_exact, np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]), t_grid, "exact amplitudes"
    )
    effective = _integrate(
        rhs_effective, np.array([1.0, 0.0, 0.0, 0.0]), t_grid, "effective amplitudes"
    )
    p_exact = exact[2] ** 2 + exact[3] ** 2
    p_effective = effective[2] ** 2 + effective[3] ** 2
    p_excited = exact[4] ** 2 + exact[5] ** 2
    return p_exact, p_effective, p_excited


def adiabatic_error(
    omega: float,
    g: float,
    delta: float,
    t_grid: np.ndarray,
) -> AdiabaticReport:
    """Validity report for the excited-state elimination; see
    :func:`adiabatic_populations`."""
    p_exact, p_effective, p_excited = adiabatic_populations(omega, g, delta, t_grid)
    return AdiabaticReport(
        max_population_error=float(np.max(np.abs(p_exact - p_effective))),
        max_excited_population=float(np.max(p_excited)),
    )
