"""Unitary gates for capacitively coupled phase qubits.

Single-qubit rotations use the convention R_a(alpha) = exp(-i alpha sigma_a/2).
Two-qubit basis order is |00>, |01>, |10>, |11> with |ab> = |a> (x) |b>; the
first tensor factor is the left (control) qubit.

The capacitive coupling H = hbar*(g/2)*(|01><10| + |10><01|) generates a
one-parameter family of unitaries in the pulse phase gt; gt = pi gives i-SWAP
and gt = pi/2 its square root (SQISW below). CNOT is reproduced, up to a
global phase, by the standard two-SQiSW sandwich of single-qubit rotations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import dagger
from .phase_qubit import HBAR

ID2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

CNOT_MATRIX = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """A labelled unitary matrix (2x2 or 4x4)."""

    matrix: np.ndarray
    label: str

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("gate matrix must be square")
        resid = np.max(np.abs(dagger(m) @ m - np.eye(m.shape[0])))
        if resid > 1e-12:
            raise ValueError(f"gate '{self.label}' is not unitary (residual {resid:.3e})")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def rotation_gate(axis: str, alpha: float) -> Gate:
    """Bloch-sphere rotation exp(-i alpha sigma_axis / 2), axis in {x, y}."""
    if axis not in ("x", "y"):
        raise ValueError(f"rotation axis must be 'x' or 'y', got {axis!r}")
    return Gate(_rotation_matrix(axis, alpha, sign=-1), f"R{axis}({alpha:g})")


def _rotation_matrix(axis: str, alpha: float, sign: int) -> np.ndarray:
    # sign=-1 is the package convention exp(-i a sigma/2); +1 is the mirrored
    # convention kept around only for the decomposition self-check.
    sigma = _PAULI[axis]
    return np.cos(alpha / 2) * ID2 + sign * 1j * np.sin(alpha / 2) * sigma


def interaction_hamiltonian(g: float) -> np.ndarray:
    """Capacitive-coupling Hamiltonian hbar*(g/2)*(|01><10| + |10><01|).

    4x4 Hermitian with exactly two nonzero entries; eigenvalues are
    {+hbar g/2, -hbar g/2, 0, 0}.
    """
    h = np.zeros((4, 4), dtype=complex)
    h[1, 2] = h[2, 1] = HBAR * g / 2
    return h


def interaction_unitary(gt: float) -> Gate:
    """Evolution generated by the capacitive coupling for pulse phase gt.

    Closed form: identity on |00>, |11>; the central 2x2 block rotates
    |01>, |10> with cos(gt/2) on the diagonal and -i sin(gt/2) off it.
    Equals exp(-i H_int t / hbar) for gt = g*t.
    """
    if gt < 0:
        raise ValueError("pulse phase gt must be >= 0")
    c, s = np.cos(gt / 2), np.sin(gt / 2)
    m = np.array(
        [[1, 0, 0, 0],
         [0, c, -1j * s, 0],
         [0, -1j * s, c, 0],
         [0, 0, 0, 1]], dtype=complex)
    return Gate(m, f"U_int({gt:g})")


def iswap() -> Gate:
    """i-SWAP: the full pi pulse, |01> -> -i|10>, |10> -> -i|01>."""
    return Gate(interaction_unitary(np.pi).matrix, "iSWAP")


def sqiswap() -> Gate:
    """Square root of i-SWAP: the half-duration pulse gt = pi/2."""
    return Gate(interaction_unitary(np.pi / 2).matrix, "SQiSW")


def global_phase_residual(product: np.ndarray, target: np.ndarray) -> tuple[float, complex]:
    """Max entrywise deviation of ``product @ target^dagger`` from a phase.

    The phase is fitted from the first diagonal entry of the product with
    modulus above 0.5 (phase-blind norms would hide sign errors; this keeps
    the residual interpretable). Returns ``(residual, phase)``.
    """
    d = np.asarray(product) @ dagger(target)
    phase = None
    for k in range(d.shape[0]):
        if abs(d[k, k]) > 0.5:
            phase = d[k, k] / abs(d[k, k])
            break
    if phase is None:
        return float("inf"), 1.0 + 0j
    resid = float(np.max(np.abs(d - phase * np.eye(d.shape[0]))))
    return resid, complex(phase)


def cnot_product(rotation_sign: int = -1) -> np.ndarray:
    """The two-SQiSW CNOT decomposition evaluated as a matrix product.

    Factors left to right (leftmost acts last on the state):

        (Ry(-pi/2) (x) I) (Rx(pi/2) (x) Rx(-pi/2)) SQiSW (Rx(pi) (x) I)
        SQiSW (Ry(pi/2) (x) I)

    ``rotation_sign`` selects exp(sign * i * alpha * sigma / 2) for every
    rotation factor, so both sign conventions can be checked.
    """
    rx = lambda a: _rotation_matrix("x", a, rotation_sign)
    ry = lambda a: _rotation_matrix("y", a, rotation_sign)
    sq = sqiswap().matrix
    return (np.kron(ry(-np.pi / 2), ID2)
            @ np.kron(rx(np.pi / 2), rx(-np.pi / 2))
            @ sq
            @ np.kron(rx(np.pi), ID2)
            @ sq
            @ np.kron(ry(np.pi / 2), ID2))


def cnot_via_sqiswap() -> Gate:
    """CNOT (control = first qubit) built from two SQiSW pulses and rotations.

    The decomposition is checked against the canonical CNOT up to a global
    phase, trying the package rotation convention exp(-i a sigma/2) first and
    the mirrored one second; the matching convention is recorded in the gate
    label. Raises ``RuntimeError`` if neither matches, which would indicate a
    construction bug rather than bad input.
    """
    for sign in (-1, +1):
        product = cnot_product(sign)
        resid, _ = global_phase_residual(product, CNOT_MATRIX)
        if resid < 1e-10:
            return Gate(product, f"CNOT via SQiSW [rotation sign {sign:+d}]")
    raise RuntimeError(
        "SQiSW-based CNOT decomposition does not match CNOT under either "
        "rotation sign convention")


def cnot() -> Gate:
    """Canonical CNOT with the first qubit as control."""
    return Gate(CNOT_MATRIX, "CNOT")


def identity_gate(n_qubits: int = 2) -> Gate:
    return Gate(np.eye(2**n_qubits, dtype=complex), f"I{2**n_qubits}")


def gate_by_name(name: str) -> Gate:
    """Look up one of the named two-qubit gates used by campaigns and the CLI."""
    builders = {
        "sqiswap": sqiswap,
        "iswap": iswap,
        "cnot": cnot,
        "identity": lambda: identity_gate(2),
    }
    if name not in builders:
        raise ValueError(
            f"unknown gate {name!r} (valid: {', '.join(sorted(builders))})")
    return builders[name]()
