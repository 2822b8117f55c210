"""System parameters, truncated basis, Hamiltonian and dressed states.

Every frequency crossing a module boundary is an ordinary frequency in GHz
(nu = omega / 2pi); times are in ns.  Dynamical code multiplies by 2pi
internally wherever angular frequencies are required, so decay at rate
kappa GHz empties the cavity as exp(-2*pi*kappa*t).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import DegenerateSpectrum, DomainError

# Boltzmann constant over Planck constant, GHz per kelvin.
K_B_GHZ_PER_K = 20.8366

# Fixed ordering of the truncated basis, shared by every module.
BASIS_LABELS = ("|g1,0>", "|g2,0>", "|g2,1>", "|e,0>")
G1_0, G2_0, G2_1, E_0 = range(4)
DIM = 4

# The drive and the cavity couple only these three states; |g2,0> talks to
# the rest of the basis through dissipation alone.
COHERENT_BLOCK = (G1_0, G2_1, E_0)

# phonon_n is exempt: the spectral density alpha * delta**n stays positive
# for any real exponent, and exponent fits need a neighborhood around 0.
_RATE_FIELDS = (
    "g",
    "kappa",
    "omega_drive",
    "gamma1",
    "gamma2",
    "gamma_flip",
    "kT",
    "delta_g",
    "phonon_alpha1",
    "phonon_alpha2",
)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the driven emitter-cavity system.

    Parameters
    ----------
    g : float
        Emitter-cavity coupling on the |e,0> <-> |g2,1> transition, GHz.
    kappa : float
        Cavity field energy decay rate, GHz.
    omega_drive : float
        Rabi frequency of the classical drive on |g1,0> <-> |e,0>, GHz.
    delta_laser, delta_cavity : float
        Drive and cavity detunings from their respective transitions, GHz.
        May be negative.
    gamma1, gamma2 : float
        Spontaneous decay rates of |e> into |g1> and |g2>, GHz.
    gamma_flip : float
        Incoherent ground-state reshuffling rate |g2> -> |g1|, GHz.  There
        is no reverse channel.
    kT : float
        Thermal energy of the phonon bath divided by h, GHz.
    delta_g : float
        Ground-state splitting, GHz.  Bookkeeping only; it does not enter
        the rotating-frame dynamics.
    phonon_alpha1, phonon_alpha2 : float
        Spectral-density prefactors for the two phonon-assisted channels,
        GHz / GHz**phonon_n.
    phonon_n : float
        Exponent of the power-law phonon spectral density.

    Defaults reproduce the reference operating point used throughout the
    test suite.
    """

    g: float = 0.80
    kappa: float = 53.7
    omega_drive: float = 2.58
    delta_laser: float = 55.0
    delta_cavity: float = 55.0
    gamma1: float = 0.046
    gamma2: float = 0.046
    gamma_flip: float = 0.8
    kT: float = 83.0
    delta_g: float = 544.0
    phonon_alpha1: float = 1.0
    phonon_alpha2: float = 1.0
    phonon_n: float = 0.31

    def __post_init__(self):
        for name in fields(self):
            value = getattr(self, name.name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise DomainError(f"{name.name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise DomainError(f"{name.name} must be finite, got {value!r}")
            object.__setattr__(self, name.name, float(value))
        for name in _RATE_FIELDS:
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} must be nonnegative, got {getattr(self, name)}")

    @property
    def adiabatic_valid(self) -> bool:
        """True when both couplings sit an order of magnitude below the detuning."""
        return max(self.omega_drive / 2.0, self.g) < self.delta_laser / 10.0

    @property
    def truncation_valid(self) -> bool:
        """True when ground-state reshuffling is slow against cavity decay."""
        return self.gamma_flip < self.kappa / 10.0


def n_thermal(delta: float, kT: float) -> float:
    """Bose occupation 1 / (exp(delta/kT) - 1) at splitting ``delta``.

    Both arguments in GHz; requires delta > 0 and kT > 0.
    """
    if delta <= 0.0:
        raise DomainError(f"n_thermal needs delta > 0, got {delta}")
    if kT <= 0.0:
        raise DomainError(f"n_thermal needs kT > 0, got {kT}")
    return 1.0 / math.expm1(delta / kT)


def build_hamiltonian(params: ModelParams) -> np.ndarray:
    """Rotating-frame Hamiltonian on the truncated basis, entries in GHz."""
    h = np.zeros((DIM, DIM), dtype=complex)
    h[E_0, E_0] = params.delta_laser
    h[G2_1, G2_1] = params.delta_laser - params.delta_cavity
    h[E_0, G1_0] = params.omega_drive / 2.0
    h[G1_0, E_0] = params.omega_drive / 2.0
    h[E_0, G2_1] = params.g
    h[G2_1, E_0] = params.g
    return h


@dataclass(frozen=True)
class DressedStates:
    """Eigenstates of the coherent block, labelled by excited-state content.

    ``plus`` carries the largest |e,0> weight, ``dark`` the smallest, and
    ``minus`` the rest.  Vectors live in the full four-state basis with an
    exactly zero |g2,0> component.  Frequencies are GHz in the drive frame.
    """

    plus: np.ndarray
    minus: np.ndarray
    dark: np.ndarray
    omega_plus: float
    omega_minus: float
    omega_dark: float


def _embed(block_vec: np.ndarray) -> np.ndarray:
    full = np.zeros(DIM, dtype=complex)
    for component, index in zip(block_vec, COHERENT_BLOCK):
        full[index] = component
    return full


def dressed_states(params: ModelParams, mode: str = "exact") -> DressedStates:
    """Diagonalize the driven three-state block.

    ``mode="exact"`` diagonalizes the coherent 3x3 block numerically and is
    valid at any coupling.  ``mode="perturbative"`` returns the leading-order
    large-detuning expressions instead; the plus state is then intentionally
    unnormalized (norm 1 + O((g/delta)^2)) to match that expansion.
    """
    delta = params.delta_laser
    if delta == 0.0:
        raise DomainError("dressed states are undefined at zero laser detuning")
    half_drive = params.omega_drive / 2.0
    g = params.g

    if mode == "perturbative":
        rabi = math.hypot(g, half_drive)
        if rabi == 0.0:
            raise DegenerateSpectrum("dressed labelling undefined with no couplings")
        plus = _embed(np.array([half_drive / delta, g / delta, 1.0]))
        minus = _embed(np.array([half_drive / rabi, g / rabi, -rabi / delta]))
        dark = _embed(np.array([g / rabi, -half_drive / rabi, 0.0]))
        shift = rabi**2 / delta
        return DressedStates(
            plus=plus,
            minus=minus,
            dark=dark,
            omega_plus=delta + shift,
            omega_minus=-shift,
            omega_dark=0.0,
        )
    if mode != "exact":
        raise DomainError(f"unknown dressed-state mode {mode!r}")

    h = build_hamiltonian(params)
    block = h[np.ix_(COHERENT_BLOCK, COHERENT_BLOCK)].real
    vals, vecs = np.linalg.eigh(block)
    gaps = np.diff(np.sort(vals))
    if np.any(gaps < 1e-9):
        raise DegenerateSpectrum(
            f"dressed frequencies separated by less than 1e-9 GHz: {vals}"
        )

    # Branch labels follow excited-state weight; the block index of |e,0>
    # within COHERENT_BLOCK is 2.
    weight = np.abs(vecs[2, :]) ** 2
    order = np.argsort(weight)
    i_dark, i_minus, i_plus = order

    def canonical(column: np.ndarray) -> np.ndarray:
        anchor = np.argmax(np.abs(column))
        if column[anchor].real < 0.0:
            column = -column
        return _embed(column)

    return DressedStates(
        plus=canonical(vecs[:, i_plus]),
        minus=canonical(vecs[:, i_minus]),
        dark=canonical(vecs[:, i_dark]),
        omega_plus=float(vals[i_plus]),
        omega_minus=float(vals[i_minus]),
        omega_dark=float(vals[i_dark]),
    )
