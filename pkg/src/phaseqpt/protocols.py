"""Tomography protocols: input-state sets, measurement POVMs, design operators.

Two built-in protocols, both available for one or two qubits:

* "standard" prepares the four states |0>, |1>, (|0>+|1>)/sqrt2,
  (|0>+i|1>)/sqrt2 per qubit and, for each of those states s, measures the
  binary POVM {|s><s|, I - |s><s|} per qubit (tensored across qubits).
* "tetrahedron" prepares the four states whose Bloch vectors point at the
  vertices (1,1,1)/sqrt3, (1,-1,-1)/sqrt3, (-1,1,-1)/sqrt3, (-1,-1,1)/sqrt3
  and measures the matching symmetric four-outcome POVM {|t_i><t_i| / 2} per
  qubit. Any global rotation of the tetrahedron is statistically equivalent;
  this orientation is fixed purely for reproducibility.

The measurement side mirrors the geometry of the input side in both cases, so
the two protocols get equally rich design matrices and the accuracy
comparison between them isolates the input/measurement geometry itself.

Each (input rho, effect M) pair yields a design operator A = rho.T (x) M;
for a unit-trace chi the outcome probability is p = S * Tr(A chi). A protocol
is informationally complete when the design operators span the full
S^4-dimensional real space of Hermitian matrices, which holds for both
built-ins at one and two qubits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import tensor_product


@dataclass(frozen=True)
class BlochState:
    """Pure qubit state with its Bloch vector, ket and projector."""

    bloch: tuple
    ket: np.ndarray
    projector: np.ndarray


def _state_from_ket(ket: np.ndarray) -> BlochState:
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    proj = np.outer(ket, ket.conj())
    bloch = (
        float(np.real(2 * proj[1, 0])),   # <sigma_x>
        float(np.imag(2 * proj[1, 0])),   # <sigma_y> = 2 Im(rho_10)
        float(np.real(proj[0, 0] - proj[1, 1])),
    )
    return BlochState(bloch, ket, proj)


def _state_from_bloch(x: float, y: float, z: float) -> BlochState:
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    phi = np.arctan2(y, x)
    ket = np.array([np.cos(theta / 2),
                    np.exp(1j * phi) * np.sin(theta / 2)], dtype=complex)
    state = _state_from_ket(ket)
    return BlochState((x, y, z), state.ket, state.projector)


def standard_states() -> list[BlochState]:
    """|0>, |1>, (|0>+|1>)/sqrt2, (|0>+i|1>)/sqrt2, in that order.

    Bloch vectors: +z, -z, +x, +y.
    """
    kets = [
        np.array([1, 0], dtype=complex),
        np.array([0, 1], dtype=complex),
        np.array([1, 1], dtype=complex) / np.sqrt(2),
        np.array([1, 1j], dtype=complex) / np.sqrt(2),
    ]
    return [_state_from_ket(k) for k in kets]


def tetrahedron_states() -> list[BlochState]:
    """Four states at the vertices of a regular tetrahedron on the Bloch sphere.

    Pairwise Bloch dot products are all -1/3 and the vectors sum to zero, so
    the scaled projectors {|t_i><t_i| / 2} form a POVM.
    """
    vertices = np.array(
        [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float
    ) / np.sqrt(3)
    return [_state_from_bloch(*v) for v in vertices]


def product_inputs(states: list[BlochState], n_qubits: int) -> list[np.ndarray]:
    """All ordered tensor products of the single-qubit input projectors."""
    if n_qubits not in (1, 2):
        raise ValueError("protocols support 1 or 2 qubits")
    rhos = [s.projector for s in states]
    if n_qubits == 1:
        return list(rhos)
    return [tensor_product(a, b) for a in rhos for b in rhos]


@dataclass(frozen=True)
class Protocol:
    """Immutable tomography design, safe to share across worker processes.

    ``design`` stacks A_r = rho.T (x) M for every (input, effect) pair in
    input-major, then POVM-group, then outcome order. ``design_flat`` holds
    A_r.T.ravel() per row so that probabilities are one matrix-vector product:
    S * (design_flat @ chi.ravel()).real.
    """

    name: str
    n_qubits: int
    inputs: tuple
    effect_groups: tuple
    design: np.ndarray
    design_flat: np.ndarray
    group_sizes: tuple
    design_rank: int
    informationally_complete: bool

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def n_configs(self) -> int:
        """Number of (input, POVM group) configurations."""
        return len(self.inputs) * len(self.effect_groups)

    @property
    def outcomes_per_config(self) -> np.ndarray:
        """Outcome count of each configuration, in design order."""
        return np.tile(np.asarray(self.group_sizes, dtype=int), len(self.inputs))

    @property
    def config_offsets(self) -> np.ndarray:
        """Start index of each configuration inside the flat outcome axis."""
        sizes = self.outcomes_per_config
        return np.concatenate([[0], np.cumsum(sizes)[:-1]])


def _single_qubit_effect_groups(name: str) -> list[list[np.ndarray]]:
    if name == "standard":
        return [[s.projector, np.eye(2, dtype=complex) - s.projector]
                for s in standard_states()]
    return [[s.projector / 2 for s in tetrahedron_states()]]


def _hermitian_real_vector(m: np.ndarray) -> np.ndarray:
    """Embed a Hermitian d x d matrix into R^(d^2) isometrically."""
    d = m.shape[0]
    iu = np.triu_indices(d, k=1)
    return np.concatenate([
        np.real(np.diag(m)),
        np.sqrt(2) * np.real(m[iu]),
        np.sqrt(2) * np.imag(m[iu]),
    ])


@lru_cache(maxsize=8)
def build_protocol(name: str, n_qubits: int = 2) -> Protocol:
    """Assemble a named protocol with its design operators precomputed."""
    if name not in ("standard", "tetrahedron"):
        raise ValueError(f"unknown protocol {name!r} (valid: standard, tetrahedron)")
    if n_qubits not in (1, 2):
        raise ValueError("protocols support 1 or 2 qubits")

    states = standard_states() if name == "standard" else tetrahedron_states()
    inputs = product_inputs(states, n_qubits)

    groups1 = _single_qubit_effect_groups(name)
    if n_qubits == 1:
        groups = [list(g) for g in groups1]
    else:
        groups = [[tensor_product(ma, mb) for ma in ga for mb in gb]
                  for ga in groups1 for gb in groups1]

    design = np.array([
        tensor_product(rho.T, m)
        for rho in inputs
        for group in groups
        for m in group
    ])
    design_flat = np.ascontiguousarray(
        design.transpose(0, 2, 1).reshape(design.shape[0], -1))

    dim = 2**n_qubits
    herm = np.array([_hermitian_real_vector(a) for a in design])
    rank = int(np.linalg.matrix_rank(herm, tol=1e-8))

    return Protocol(
        name=name,
        n_qubits=n_qubits,
        inputs=tuple(inputs),
        effect_groups=tuple(tuple(g) for g in groups),
        design=design,
        design_flat=design_flat,
        group_sizes=tuple(len(g) for g in groups),
        design_rank=rank,
        informationally_complete=rank == dim**4,
    )


def allocate_shots(total_shots: int, n_configs: int) -> np.ndarray:
    """Split a shot budget equally across configurations.

    The remainder goes to the earliest configurations, one extra shot each.
    """
    if total_shots < 0:
        raise ValueError("total_shots must be >= 0")
    base, rem = divmod(int(total_shots), n_configs)
    shots = np.full(n_configs, base, dtype=int)
    shots[:rem] += 1
    return shots


def protocol_summary(protocol: Protocol) -> dict:
    """JSON-ready description of a protocol, used by the CLI."""
    states = (standard_states() if protocol.name == "standard"
              else tetrahedron_states())
    return {
        "name": protocol.name,
        "n_qubits": protocol.n_qubits,
        "bloch_vectors": [list(s.bloch) for s in states],
        "n_inputs": len(protocol.inputs),
        "n_povm_groups": len(protocol.effect_groups),
        "outcomes_per_group": list(protocol.group_sizes),
        "n_configs": protocol.n_configs,
        "design_rank": protocol.design_rank,
        "informationally_complete": protocol.informationally_complete,
    }
