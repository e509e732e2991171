"""Operating-point utilities for a current-biased Josephson phase qubit.

Scalar formulas only: equilibrium phase, plasma frequency, the harmonic-well
level ladder and the two-level qubit Hamiltonian. All quantities are SI.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

# CODATA exact values (SI).
HBAR = 1.054571817e-34  # J*s
ECHARGE = 1.602176634e-19  # C


@dataclass(frozen=True)
class PhaseQubitParams:
    """Junction operating parameters.

    Attributes
    ----------
    critical_current : float
        Junction critical current I_c in amperes.
    bias_current : float
        Bias current I_e in amperes; the qubit operates on 0 <= I_e <= I_c.
    capacitance : float
        Junction capacitance C in farads.
    """

    critical_current: float
    bias_current: float
    capacitance: float

    def __post_init__(self):
        if self.critical_current <= 0:
            raise ValueError("critical current must be positive")
        if self.capacitance <= 0:
            raise ValueError("capacitance must be positive")
        if not 0 <= self.bias_current <= self.critical_current:
            raise ValueError(
                "bias current must satisfy 0 <= I_e <= I_c "
                f"(got I_e={self.bias_current}, I_c={self.critical_current})"
            )
        if self.josephson_energy / self.charging_energy < 100:
            warnings.warn(
                "E_J/E_C < 100: outside the phase-qubit regime E_C << E_J",
                stacklevel=2,
            )

    @property
    def charging_energy(self) -> float:
        """Electrostatic energy scale E_C = (2e)^2 / (2C), joules."""
        return (2 * ECHARGE) ** 2 / (2 * self.capacitance)

    @property
    def josephson_energy(self) -> float:
        """Josephson energy E_J = (hbar / 2e) * I_c, joules."""
        return HBAR / (2 * ECHARGE) * self.critical_current

    @property
    def josephson_frequency(self) -> float:
        """omega_J = sqrt(2 e I_c / (hbar C)), rad/s."""
        return np.sqrt(2 * ECHARGE * self.critical_current
                       / (HBAR * self.capacitance))


def equilibrium_phase(params: PhaseQubitParams) -> float:
    """Phase phi_0 of the potential minimum, from I_e = I_c sin(phi_0).

    Returns the stationary point in [0, pi/2].
    """
    return float(np.arcsin(params.bias_current / params.critical_current))


def plasma_frequency(params: PhaseQubitParams) -> float:
    """Small-oscillation frequency at the bottom of the tilted well.

    omega_p = omega_J * (1 - (I_e/I_c)^2)^(1/4); monotone decreasing in the
    bias current, equal to omega_J at zero bias and zero at critical bias.
    """
    ratio = params.bias_current / params.critical_current
    return float(params.josephson_frequency * (1 - ratio**2) ** 0.25)


def harmonic_levels(params: PhaseQubitParams, k_max: int) -> list[float]:
    """Equidistant well levels E_k = hbar * omega_p * (k + 1/2), k = 0..k_max.

    The real well is anharmonic (levels compress toward the barrier top); the
    harmonic ladder is what this toolkit models, and the anharmonicity is only
    relevant as the reason the two bottom levels are addressable.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    omega_p = plasma_frequency(params)
    return [HBAR * omega_p * (k + 0.5) for k in range(k_max + 1)]


def qubit_hamiltonian(epsilon: float) -> np.ndarray:
    """Two-level Hamiltonian -eps/2 * sigma_z in the {|0>, |1>} basis.

    ``epsilon`` is the level splitting E_1 - E_0. With |0> = (1, 0) the ground
    state sits at -eps/2 and the excited state at +eps/2 (with
    sigma_z = diag(1, -1), |0> is the +1 eigenvector of sigma_z, so the
    literal -eps/2 * sigma_z assigns exactly these energies).
    """
    return np.diag([-epsilon / 2, +epsilon / 2]).astype(complex)


def physics_report(params: PhaseQubitParams, k_max: int = 3) -> dict:
    """JSON-ready summary of the operating point, used by the CLI."""
    return {
        "phi0": equilibrium_phase(params),
        "omega_J": params.josephson_frequency,
        "omega_p": plasma_frequency(params),
        "levels": harmonic_levels(params, k_max),
    }
