"""Forward simulation of tomography counts and maximum-likelihood inversion.

The forward model: for a unit-trace chi matrix and a design operator
A = rho.T (x) M, the outcome probability is p = S * Tr(A chi). Counts are
multinomial per (input, POVM) configuration with the shot budget split
equally across configurations.

The inverse problem maximizes the multinomial log-likelihood
L(chi) = sum_r k_r log p_r(chi) over completely positive, trace-preserving
chi matrices. The iteration used here conjugates the current estimate with
the likelihood-gradient operator R = sum_r (k_r / p_r) A_r and renormalizes
with the partial-trace Lagrange factor:

    chi  <-  (C^(-1/2) (x) I) R chi R (C^(-1/2) (x) I),
    C = Tr_second(R chi R),

which keeps the iterate exactly trace-preserving and positive semidefinite
at every step. A step is accepted only if it does not decrease the
log-likelihood; otherwise the update operator is diluted toward the identity
(R -> I + eps R) and retried, so the recorded likelihood trace is
non-decreasing by construction. The fixed points of the undiluted map are
exactly the stationary points of the constrained likelihood.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .channels import ChiMatrix
from .linalg import dagger, partial_trace_second, psd_sqrt
from .protocols import Protocol, allocate_shots, build_protocol

# Probabilities are clamped at this floor inside logs; a structural zero with
# a nonzero count would otherwise produce -inf.
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class CountsRecord:
    """Measured (or synthesized) outcome counts for one experiment.

    ``counts`` is flat in design order (input-major, then POVM group, then
    outcome) and sums to ``shots_per_config`` within each configuration.
    Counts may be non-integral: feeding exact expected counts N * p is the
    standard consistency probe for the estimator.
    """

    protocol_name: str
    n_qubits: int
    shots_per_config: np.ndarray
    counts: np.ndarray
    seed: int
    total_shots: int

    def protocol(self) -> Protocol:
        return build_protocol(self.protocol_name, self.n_qubits)


@dataclass(frozen=True)
class MleOptions:
    max_iterations: int = 2000
    rel_tol: float = 1e-10
    init_noise: float = 1e-3
    init_seed: int | None = None  # default: derived from the counts seed


@dataclass
class ReconstructionResult:
    chi_hat: ChiMatrix
    log_likelihood: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    tp_residual: float = 0.0


def outcome_probabilities(chi: ChiMatrix, protocol: Protocol) -> np.ndarray:
    """Probabilities for every (input, outcome) pair, flat in design order.

    Values are clamped to [0, 1]; each POVM group sums to 1 for a
    trace-preserving chi.
    """
    if chi.dim != protocol.dim:
        raise ValueError(
            f"chi dimension {chi.dim} does not match protocol dimension {protocol.dim}")
    if chi.basis != "natural":
        raise ValueError("outcome probabilities need a natural-basis chi")
    p = protocol.dim * np.real(protocol.design_flat @ chi.matrix.ravel())
    return np.clip(p, 0.0, 1.0)


def simulate_counts(chi: ChiMatrix, protocol: Protocol, total_shots: int,
                    seed: int) -> CountsRecord:
    """Draw one multinomial sample per configuration, reproducibly.

    The shot budget is split equally across configurations (remainder to the
    earliest ones); identical seeds give identical counts.
    """
    p = outcome_probabilities(chi, protocol)
    shots = allocate_shots(total_shots, protocol.n_configs)
    rng = np.random.default_rng(seed)
    counts = np.zeros(len(p), dtype=float)
    offsets = protocol.config_offsets
    sizes = protocol.outcomes_per_config
    for c in range(protocol.n_configs):
        sl = slice(offsets[c], offsets[c] + sizes[c])
        pr = p[sl]
        total = pr.sum()
        counts[sl] = rng.multinomial(shots[c], pr / total if total > 0 else
                                     np.full(sizes[c], 1 / sizes[c]))
    return CountsRecord(protocol.name, protocol.n_qubits, shots, counts,
                        seed, int(total_shots))


def exact_counts(chi: ChiMatrix, protocol: Protocol,
                 total_shots: float = 1e9) -> CountsRecord:
    """Noise-free counts round(N * p): the consistency limit of the sampler."""
    p = outcome_probabilities(chi, protocol)
    shots = allocate_shots(int(total_shots), protocol.n_configs)
    expected = np.repeat(shots, protocol.outcomes_per_config)
    counts = np.round(expected * _per_config_normalized(p, protocol))
    return CountsRecord(protocol.name, protocol.n_qubits, shots, counts,
                        0, int(total_shots))


def _per_config_normalized(p: np.ndarray, protocol: Protocol) -> np.ndarray:
    out = p.astype(float).copy()
    offsets, sizes = protocol.config_offsets, protocol.outcomes_per_config
    for c in range(protocol.n_configs):
        sl = slice(offsets[c], offsets[c] + sizes[c])
        s = out[sl].sum()
        if s > 0:
            out[sl] /= s
    return out


def _tp_normalize(chi_raw: np.ndarray, dim: int) -> np.ndarray:
    """Restore Tr_second(chi_raw) == I by conjugating with C^(-1/2) (x) I."""
    c = partial_trace_second(chi_raw, dim, dim)
    w, v = np.linalg.eigh((c + dagger(c)) / 2)
    c_isqrt = (v * (1.0 / np.sqrt(np.maximum(w, 1e-300)))) @ dagger(v)
    lam = np.kron(c_isqrt, np.eye(dim))
    out = lam @ chi_raw @ lam
    return (out + dagger(out)) / 2


def _initial_chi(dim: int, noise: float, seed: int) -> np.ndarray:
    """Maximally mixed chi (raw trace S) plus a small random Hermitian kick.

    The perturbation breaks symmetry-induced stationary points; it is clipped
    back to PSD and renormalized to exact trace preservation.
    """
    d2 = dim * dim
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((d2, d2)) + 1j * rng.standard_normal((d2, d2))
    h = (h + dagger(h)) / 2
    chi = np.eye(d2, dtype=complex) / dim + noise * h
    w, v = np.linalg.eigh(chi)
    chi = (v * np.clip(w, 0.0, None)) @ dagger(v)
    return _tp_normalize(chi, dim)


class _Likelihood:
    """Multinomial log-likelihood machinery shared by loop and polish.

    Works on the raw (trace-S) chi iterate; the weights are normalized to sum
    one, which leaves the update operator's fixed points unchanged and keeps
    the likelihood at O(1) where float increments stay resolvable.
    """

    def __init__(self, k_norm: np.ndarray, design_flat: np.ndarray, dim: int):
        self.k_norm = k_norm
        self.design_flat = design_flat
        self.dim = dim
        self.identity = np.eye(dim * dim)

    def probabilities(self, chi_raw: np.ndarray) -> np.ndarray:
        return np.maximum(np.real(self.design_flat @ chi_raw.ravel()), _LOG_FLOOR)

    def value(self, p: np.ndarray) -> float:
        return float(np.dot(self.k_norm, np.log(p)))

    def _try(self, chi, r_step):
        chi_new = _tp_normalize(r_step @ chi @ r_step, self.dim)
        p_new = self.probabilities(chi_new)
        return chi_new, p_new, self.value(p_new)

    def ascend(self, chi, p, ll, max_steps: int, rel_tol: float,
               trace: list | None = None, scale: float = 1.0):
        """Monotone ascent: accept a step only if the likelihood does not
        decrease. When the full conjugation overshoots, the update operator
        is diluted toward the identity; when it succeeds, it is squared as
        long as that helps (repeated squaring turns the slow multiplicative
        approach to near-boundary optima into geometric progress). Returns
        (chi, p, ll, steps, converged).
        """
        d2 = self.dim * self.dim
        steps = 0
        converged = False
        for steps in range(1, max_steps + 1):
            w = np.where(self.k_norm > 0, self.k_norm / p, 0.0)
            # design_flat rows hold A_r.T, so this sum comes back transposed
            r = ((w @ self.design_flat).reshape(d2, d2)).T
            r = (r + r.conj().T) / 2

            best = None
            chi_new, p_new, ll_new = self._try(chi, r)
            if ll_new >= ll:
                best = (chi_new, p_new, ll_new)
                r_pow, power = r, 1
                while power < 256 and np.linalg.norm(r_pow) < 1e100:
                    r_pow = r_pow @ r_pow
                    power *= 2
                    cand = self._try(chi, r_pow)
                    if cand[2] > best[2]:
                        best = cand
                    else:
                        break
            else:
                eps = 0.5
                while eps >= 1e-6:
                    cand = self._try(chi, self.identity + eps * r)
                    if cand[2] >= ll:
                        best = cand
                        break
                    eps /= 4
            if best is None:
                converged = True  # no improving step at float resolution
                steps -= 1
                break

            gain = best[2] - ll
            chi, p, ll = best
            if trace is not None:
                trace.append(ll * scale)
            if gain < rel_tol * abs(ll):
                converged = True
                break
        return chi, p, ll, steps, converged


def _truncation_polish(lik: _Likelihood, chi, p, ll, rel_tol: float):
    """Try dropping trailing eigenvalues of the estimate.

    Multiplicative updates approach rank-deficient optima only at a 1/k
    crawl, so a stalled iterate can carry spurious eigenvalues orders of
    magnitude above the true ones. Every near-degenerate truncation rank is
    re-optimized for a while (truncation cannot regrow rank: the update
    conjugates) and the best result is adopted only if it ends at least as
    likely as the untruncated iterate, which leaves genuinely full-rank
    estimates untouched.
    """
    w, v = np.linalg.eigh(chi)
    top = w.max()
    seen_ranks = set()
    best = None
    for tau in (1e-3, 1e-4, 1e-5, 1e-6, 1e-8, 1e-10):
        w_cut = np.where(w >= tau * top, w, 0.0)
        rank = np.count_nonzero(w_cut)
        if rank == np.count_nonzero(w > 0) or rank in seen_ranks:
            continue
        seen_ranks.add(rank)
        chi_t = _tp_normalize((v * w_cut) @ v.conj().T, lik.dim)
        p_t = lik.probabilities(chi_t)
        ll_t = lik.value(p_t)
        # only near-degenerate truncations are worth re-optimizing
        if ll_t < ll - 1e-6 * abs(ll):
            continue
        chi_t, p_t, ll_t, _, _ = lik.ascend(chi_t, p_t, ll_t,
                                            max_steps=1000,
                                            rel_tol=rel_tol * 1e-2)
        if ll_t >= ll and (best is None or ll_t > best[2]):
            best = (chi_t, p_t, ll_t)
    if best is None:
        return chi, p, ll, False
    return best[0], best[1], best[2], True


def mle_reconstruct(counts: CountsRecord, protocol: Protocol,
                    options: MleOptions | None = None) -> ReconstructionResult:
    """Constrained maximum-likelihood estimate of the chi matrix.

    The returned estimate is completely positive by construction (every
    update is a Hermitian conjugation) and trace-preserving up to round-off.
    The stored log-likelihood trace is non-decreasing; iteration stops when
    the relative likelihood gain drops below ``rel_tol``, when no diluted
    step can improve it (converged at float resolution), or at
    ``max_iterations`` (returned with ``converged=False``). A final
    rank-truncation polish handles boundary optima and is kept only when it
    does not lower the likelihood.
    """
    opts = options or MleOptions()
    if counts.protocol_name != protocol.name or counts.n_qubits != protocol.n_qubits:
        raise ValueError("counts record does not belong to this protocol")
    k = np.asarray(counts.counts, dtype=float)
    if k.shape != (protocol.design.shape[0],):
        raise ValueError("counts length does not match the protocol design")
    k_total = k.sum()
    if k_total <= 0:
        raise ValueError("need at least one nonzero count to reconstruct")
    if not protocol.informationally_complete:
        warnings.warn(
            "protocol is not informationally complete: the maximum-likelihood "
            "estimate exists but is not unique", stacklevel=2)

    dim = protocol.dim
    lik = _Likelihood(k / k_total, protocol.design_flat, dim)

    init_seed = opts.init_seed if opts.init_seed is not None else counts.seed
    chi = _initial_chi(dim, opts.init_noise, init_seed)
    p = lik.probabilities(chi)
    ll = lik.value(p)
    trace = [ll * k_total]

    chi, p, ll, iterations, converged = lik.ascend(
        chi, p, ll, opts.max_iterations, opts.rel_tol,
        trace=trace, scale=k_total)

    chi, p, ll, polished = _truncation_polish(lik, chi, p, ll, opts.rel_tol)
    if polished:
        trace.append(ll * k_total)

    # the TP renormalization keeps the trace at S only to within its own
    # numerical accuracy; rescale so the stored unit-trace invariant is exact
    chi = chi * (dim / np.trace(chi).real)
    tp_resid = float(np.linalg.norm(
        partial_trace_second(chi, dim, dim) - np.eye(dim)))
    chi_hat = ChiMatrix(dim, chi / dim, "natural")
    return ReconstructionResult(chi_hat, trace, iterations, converged, tp_resid)


def process_fidelity(chi: ChiMatrix, chi0: ChiMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(chi0) chi sqrt(chi0)))^2 between
    unit-trace chi matrices.

    Symmetric in its arguments, 1 exactly when they coincide, and equal to
    <u| chi |u> when chi0 = |u><u| is rank one.
    """
    if chi.dim != chi0.dim:
        raise ValueError("chi dimensions differ")
    if chi.basis != chi0.basis:
        raise ValueError("chi matrices are in different bases")
    root = psd_sqrt(chi0.matrix)
    inner = root @ chi.matrix @ root
    w = np.linalg.eigvalsh((inner + dagger(inner)) / 2)
    # sqrt amplifies eigensolver dust (sqrt(1e-16) = 1e-8 per spurious mode),
    # so drop eigenvalues that are negligible relative to the largest
    w = np.clip(w, 0.0, None)
    if w.max() > 0:
        w[w < 1e-14 * w.max()] = 0.0
    return float(np.sum(np.sqrt(w)) ** 2)
