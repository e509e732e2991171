"""Quantum process representations: Kraus sets, chi matrices, basis changes.

A channel on an S-dimensional system is represented either as a Kraus set
{E_k} acting by rho -> sum_k E_k rho E_k^dagger, or as its chi matrix: stack
each E_k into a column e_k by column-stacking, collect them into a matrix e,
and form ee^dagger. For a trace-preserving channel ee^dagger has trace S; the
stored :class:`ChiMatrix` is always renormalized to UNIT trace, which is the
normalization the fidelity formula expects. The chi matrix is the channel's
state under the Choi-Jamiolkowski correspondence, and trace preservation
shows up as: tracing out the second (row-index) tensor factor leaves I_S / S.

Chi matrices carry a basis tag. "natural" means the matrix-unit basis implied
by plain column stacking; "pauli" means the Hilbert-Schmidt-orthonormal set
{I/sqrt2, sigma_x/sqrt2, -i sigma_y/sqrt2, sigma_z/sqrt2} and its tensor
powers, with the basis change chi' = U0^dagger chi U0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gates import ID2, SIGMA_X, SIGMA_Y, SIGMA_Z, Gate
from .linalg import (
    dagger,
    is_hermitian,
    partial_trace_second,
    tensor,
    unvec,
    vec,
)


class NotCompletelyPositiveError(ValueError):
    """A chi matrix has an eigenvalue below the round-off floor."""


@dataclass(frozen=True)
class KrausSet:
    """Ordered transformation elements of an operator-sum channel."""

    dim: int
    elements: tuple

    def __post_init__(self):
        elems = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        object.__setattr__(self, "elements", elems)
        if len(elems) < 1:
            raise ValueError("a Kraus set needs at least one element")
        for e in elems:
            if e.shape != (self.dim, self.dim):
                raise ValueError(
                    f"Kraus elements must be {self.dim}x{self.dim}, got {e.shape}")

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class ChiMatrix:
    """Unit-trace, Hermitian, positive-semidefinite process matrix."""

    dim: int
    matrix: np.ndarray
    basis: str = "natural"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        d2 = self.dim * self.dim
        if m.shape != (d2, d2):
            raise ValueError(f"chi matrix must be {d2}x{d2}, got {m.shape}")
        if self.basis not in ("natural", "pauli"):
            raise ValueError(f"unknown chi basis {self.basis!r}")
        if not is_hermitian(m, tol=1e-12):
            raise ValueError("chi matrix must be Hermitian within 1e-12")
        if abs(np.trace(m).real - 1.0) > 1e-12:
            raise ValueError(f"chi trace must be 1, got {np.trace(m).real!r}")
        w = np.linalg.eigvalsh(m)
        if w.min() < -1e-10:
            raise NotCompletelyPositiveError(
                f"chi has eigenvalue {w.min():.3e} < -1e-10: not completely positive")

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def tp_residual(self) -> float:
        """Frobenius distance of Tr_second(chi * S) from the identity."""
        reduced = partial_trace_second(self.matrix * self.dim, self.dim, self.dim)
        return float(np.linalg.norm(reduced - np.eye(self.dim)))


@dataclass(frozen=True)
class ProcessBasis:
    """Hilbert-Schmidt-orthonormal operator basis with its change matrix.

    ``change_matrix`` has vec(B_j) as its j-th column and is unitary, so
    moving a natural-basis chi into this basis is chi' = U0^dagger chi U0.
    """

    dim: int
    operators: tuple
    change_matrix: np.ndarray


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing admixture on top of a base unitary.

    kind "none" leaves the gate ideal; "depolarizing" replaces the output
    with the maximally mixed state with probability p.
    """

    kind: str
    unitary: Gate
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "depolarizing"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0,1]")


def apply_channel(k: KrausSet, rho: np.ndarray) -> np.ndarray:
    """Operator-sum action: rho -> sum_k E_k rho E_k^dagger."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (k.dim, k.dim):
        raise ValueError(f"state must be {k.dim}x{k.dim}, got {rho.shape}")
    out = np.zeros_like(rho)
    for e in k.elements:
        out += e @ rho @ dagger(e)
    return out


def check_trace_preserving(k: KrausSet, tol: float = 1e-10) -> tuple[bool, float]:
    """Whether sum_k E_k^dagger E_k == I, plus the Frobenius residual."""
    acc = sum(dagger(e) @ e for e in k.elements)
    residual = float(np.linalg.norm(acc - np.eye(k.dim)))
    return residual < tol, residual


def kraus_root(k: KrausSet) -> np.ndarray:
    """The S^2 x m matrix e whose columns are the column-stacked elements."""
    return np.column_stack([vec(e) for e in k.elements])


def chi_from_kraus(k: KrausSet) -> ChiMatrix:
    """Build the unit-trace chi matrix ee^dagger / Tr(ee^dagger).

    The raw ee^dagger of a trace-preserving channel has trace S; rank is at
    most the number of elements, so a single unitary gives a rank-1 chi.
    """
    e = kraus_root(k)
    raw = e @ dagger(e)
    return ChiMatrix(k.dim, raw / np.trace(raw).real, "natural")


def kraus_from_chi(chi: ChiMatrix, cutoff: float = 1e-12) -> KrausSet:
    """Extract a canonical Kraus set (at most S^2 elements) from a chi matrix.

    Eigendecomposes chi * S (restoring the raw trace-S normalization) and
    keeps eigenvector columns with eigenvalue above ``cutoff``, scaled by the
    square-rooted eigenvalues. Round trip through :func:`chi_from_kraus`
    reproduces the input.
    """
    if chi.basis != "natural":
        raise ValueError("Kraus extraction needs a natural-basis chi")
    w, v = np.linalg.eigh(chi.matrix * chi.dim)
    if w.min() < -1e-10:
        raise NotCompletelyPositiveError(
            f"chi has eigenvalue {w.min():.3e} < -1e-10")
    elements = []
    for j in range(len(w) - 1, -1, -1):  # largest eigenvalue first
        if w[j] > cutoff:
            elements.append(unvec(np.sqrt(w[j]) * v[:, j], chi.dim, chi.dim))
    return KrausSet(chi.dim, tuple(elements))


def unitary_remix(k: KrausSet, u: np.ndarray) -> KrausSet:
    """Replace the elements by the columns of e @ u for unitary u (m x m).

    The chi matrix is invariant under this gauge freedom.
    """
    u = np.asarray(u, dtype=complex)
    m = len(k.elements)
    if u.shape != (m, m):
        raise ValueError(f"remix unitary must be {m}x{m}, got {u.shape}")
    if np.max(np.abs(dagger(u) @ u - np.eye(m))) > 1e-12:
        raise ValueError("remix matrix is not unitary")
    e_new = kraus_root(k) @ u
    return KrausSet(k.dim, tuple(unvec(e_new[:, j], k.dim, k.dim)
                                 for j in range(m)))


# Single-qubit operator basis; the third element is real by construction.
_PAULI_TYPE_1Q = (
    ID2 / np.sqrt(2),
    SIGMA_X / np.sqrt(2),
    -1j * SIGMA_Y / np.sqrt(2),
    SIGMA_Z / np.sqrt(2),
)


def pauli_basis(n_qubits: int) -> ProcessBasis:
    """Pauli-type operator basis for 1 or 2 qubits.

    Single qubit: I/sqrt2, sigma_x/sqrt2, -i sigma_y/sqrt2, sigma_z/sqrt2 in
    that order. Multi-qubit: all ordered tensor products, lexicographic in the
    factor indices (16 operators for two qubits). The set is Hilbert-Schmidt
    orthonormal, so the change matrix with columns vec(B_j) is unitary.
    """
    if n_qubits not in (1, 2):
        raise ValueError("pauli_basis supports 1 or 2 qubits")
    ops = _PAULI_TYPE_1Q
    for _ in range(n_qubits - 1):
        ops = tuple(tensor(a, b) for a in ops for b in _PAULI_TYPE_1Q)
    u0 = np.column_stack([vec(b) for b in ops])
    return ProcessBasis(2**n_qubits, ops, u0)


def change_basis(chi: ChiMatrix, basis: ProcessBasis) -> ChiMatrix:
    """Move a chi matrix between the natural and Pauli-type representations.

    A natural-basis input comes back tagged "pauli" (chi' = U0^dagger chi U0);
    a "pauli" input comes back in the natural basis (the inverse map). Trace,
    eigenvalues and fidelities are preserved either way.
    """
    if basis.dim != chi.dim:
        raise ValueError(
            f"basis dimension {basis.dim} does not match chi dimension {chi.dim}")
    u0 = basis.change_matrix
    if chi.basis == "natural":
        return ChiMatrix(chi.dim, dagger(u0) @ chi.matrix @ u0, "pauli")
    return ChiMatrix(chi.dim, u0 @ chi.matrix @ dagger(u0), "natural")


def chi_of_gate(gate: Gate) -> ChiMatrix:
    """Rank-1 chi matrix of an ideal unitary gate."""
    v = vec(gate.matrix)
    return ChiMatrix(gate.dim, np.outer(v, v.conj()) / gate.dim, "natural")


def maximally_mixed_chi(dim: int) -> ChiMatrix:
    """Chi of the fully depolarizing channel rho -> I/S (white noise)."""
    d2 = dim * dim
    return ChiMatrix(dim, np.eye(d2, dtype=complex) / d2, "natural")


def noisy_chi(model: NoiseModel) -> ChiMatrix:
    """Chi matrix of a depolarized gate.

    The state-level mixture rho -> p I/S + (1-p) U rho U^dagger maps exactly
    to the affine chi mixture (1-p) chi_U + p I/(S^2): channel mixing is
    affine in the (unit-trace) chi representation.
    """
    chi_u = chi_of_gate(model.unitary)
    if model.kind == "none":
        return chi_u
    p = model.p
    mixed = (1 - p) * chi_u.matrix + p * maximally_mixed_chi(model.unitary.dim).matrix
    return ChiMatrix(model.unitary.dim, mixed, "natural")


def depolarized_chi(gate: Gate, p: float) -> ChiMatrix:
    """Shorthand for :func:`noisy_chi` with a depolarizing model."""
    if p == 0:
        return chi_of_gate(gate)
    return noisy_chi(NoiseModel("depolarizing", gate, p))


def free_parameter_count(dim: int) -> int:
    """Free real parameters of a full-rank trace-preserving chi: S^4 - S^2."""
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    return dim**4 - dim**2


def random_tp_kraus(dim: int, m: int, rng: np.random.Generator) -> KrausSet:
    """Random trace-preserving Kraus set with m elements.

    Draws a Haar-ish random isometry from dim to dim*m via QR of a complex
    Gaussian matrix and slices it into blocks; sum_k E_k^dagger E_k = I holds
    by construction.
    """
    g = rng.standard_normal((dim * m, dim)) + 1j * rng.standard_normal((dim * m, dim))
    q, _ = np.linalg.qr(g)
    return KrausSet(dim, tuple(q[i * dim:(i + 1) * dim, :] for i in range(m)))
