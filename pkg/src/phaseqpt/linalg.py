"""Dense complex linear-algebra primitives shared by the whole toolkit.

Everything here operates on plain ``numpy`` arrays. One convention is load
bearing and used consistently across the package: matrices are vectorized by
COLUMN STACKING, i.e. the second column of a matrix goes under the first one.
Under that convention ``vec(A X B) == kron(B.T, A) @ vec(X)``, which is what
makes process matrices built from stacked operator columns compatible with
outcome-probability formulas of the form ``Tr[(rho.T (x) M) chi]``.

All matrices are small (side <= 16 in this package), so everything is dense
and eigendecomposition-based.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

# Eigenvalues in [-EIG_CLAMP, 0) are treated as round-off and clamped to zero;
# anything more negative is a genuine positivity violation.
EIG_CLAMP = 1e-10


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(m).conj().T


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - dagger(m))) <= tol


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices.

    The result has shape ``(a.rows * b.rows, a.cols * b.cols)`` and satisfies
    the mixed-product rule ``(A (x) B) @ (C (x) D) == (A @ C) (x) (B @ D)``.
    """
    return np.kron(np.asarray(a), np.asarray(b))


def tensor(*matrices: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of matrices, left to right."""
    return reduce(np.kron, (np.asarray(m) for m in matrices))


def vec(m: np.ndarray) -> np.ndarray:
    """Stack the columns of ``m`` into one vector (first column on top).

    For ``[[a, c], [b, d]]`` the result is ``(a, b, c, d)``. The index of the
    vectorized space factors as (column index) (x) (row index), so entry
    ``m[i, j]`` lands at position ``j * rows + i``.
    """
    return np.asarray(m).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`: rebuild a ``rows x cols`` matrix.

    Raises ``ValueError`` when the vector length does not match.
    """
    v = np.asarray(v).reshape(-1)
    if v.size != rows * cols:
        raise ValueError(
            f"cannot unvec length-{v.size} vector into {rows}x{cols} matrix"
        )
    return v.reshape((rows, cols), order="F")


def partial_trace_second(m: np.ndarray, dim_first: int, dim_second: int) -> np.ndarray:
    """Trace out the second tensor factor of a square matrix.

    ``m`` must act on a space of dimension ``dim_first * dim_second`` with the
    first factor varying slowest. The total trace is preserved:
    ``Tr(result) == Tr(m)``, and ``partial_trace_second(A (x) B) == A * Tr(B)``.
    """
    m = np.asarray(m)
    d = dim_first * dim_second
    if m.shape != (d, d):
        raise ValueError(
            f"expected a {d}x{d} matrix for dims ({dim_first},{dim_second}), "
            f"got shape {m.shape}"
        )
    return np.trace(m.reshape(dim_first, dim_second, dim_first, dim_second),
                    axis1=1, axis2=3)


def psd_sqrt(m: np.ndarray, tol: float = EIG_CLAMP) -> np.ndarray:
    """Hermitian square root of a positive-semidefinite matrix.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero (round-off from upstream
    simulation); eigenvalues below ``-tol`` raise ``ValueError`` because they
    indicate a genuinely non-positive input rather than numerical dust.
    """
    m = np.asarray(m)
    if not is_hermitian(m):
        raise ValueError("psd_sqrt requires a Hermitian matrix")
    w, v = np.linalg.eigh(m)
    if w.min() < -tol:
        raise ValueError(f"matrix is not PSD: smallest eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    # eigensolver dust below 1e-14 of the top eigenvalue would turn into
    # O(1e-8) artifacts under the square root; treat it as exactly zero
    if w.max() > 0:
        w[w < 1e-14 * w.max()] = 0.0
    return (v * np.sqrt(w)) @ dagger(v)


def matrix_to_json(m: np.ndarray) -> dict:
    """Serialize a matrix to ``{rows, cols, re, im}`` in column-stacking order."""
    m = np.asarray(m, dtype=complex)
    v = vec(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [float(x) for x in v.real],
        "im": [float(x) for x in v.imag],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    """Inverse of :func:`matrix_to_json`."""
    rows, cols = int(obj["rows"]), int(obj["cols"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if re.size != rows * cols or im.size != rows * cols:
        raise ValueError("re/im length does not match rows*cols")
    return unvec(re + 1j * im, rows, cols)
