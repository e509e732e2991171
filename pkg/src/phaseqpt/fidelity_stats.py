"""Monte Carlo fidelity-loss campaigns and their summary statistics.

A campaign repeats the simulate -> reconstruct -> fidelity pipeline R times
per protocol for a fixed noisy gate and shot budget, producing samples of the
fidelity loss dF = 1 - F between the reconstructed and the true chi matrix.

Asymptotically dF is distributed as a weighted sum of squared standard
normals, sum_j d_j xi_j^2 with d_j >= 0 (a generalized chi-square), whose
mean is sum d_j and variance 2 sum d_j^2. The fitter here matches the first
two sample moments and exposes the implied effective number of degrees of
freedom nu = 2 * mean^2 / variance, the quantitative hook for comparing a
campaign against the parameter count of the model.

Campaign runs are embarrassingly parallel; each run derives its own seed from
the base seed so results are reproducible and independent of worker count.
The environment variable QPT_THREADS bounds the number of worker processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import ChiMatrix, depolarized_chi
from .gates import gate_by_name
from .protocols import build_protocol
from .tomography import (
    MleOptions,
    exact_counts,
    mle_reconstruct,
    process_fidelity,
    simulate_counts,
)


@dataclass(frozen=True)
class CampaignConfig:
    """Settings for one Monte Carlo campaign."""

    gate: str
    noise_p: float
    protocols: tuple = ("standard", "tetrahedron")
    shots: int = 100_000
    runs: int = 200
    base_seed: int = 42
    n_qubits: int = 2
    mle: MleOptions = field(default_factory=MleOptions)
    exact: bool = False  # feed expected counts instead of sampling

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not 0.0 <= self.noise_p <= 1.0:
            raise ValueError("p must lie in [0,1]")


@dataclass(frozen=True)
class FidelitySample:
    """One reconstruction outcome: fidelity loss plus bookkeeping."""

    run_index: int
    fidelity: float
    dF: float
    seed: int
    converged: bool
    iterations: int


def true_chi(gate_name: str, noise_p: float) -> ChiMatrix:
    """Chi matrix of the named gate under depolarizing noise of weight p."""
    return depolarized_chi(gate_by_name(gate_name), noise_p)


def _single_run(args: tuple) -> tuple:
    """One simulate -> reconstruct -> fidelity pipeline (worker function)."""
    (gate_name, noise_p, protocol_name, n_qubits, shots, seed, run_index,
     opts, exact) = args
    protocol = build_protocol(protocol_name, n_qubits)
    chi0 = true_chi(gate_name, noise_p)
    if exact:
        counts = exact_counts(chi0, protocol, shots)
    else:
        counts = simulate_counts(chi0, protocol, shots, seed)
    result = mle_reconstruct(counts, protocol, opts)
    fid = process_fidelity(result.chi_hat, chi0)
    d_f = min(max(1.0 - fid, 0.0), 1.0)
    return (protocol_name, run_index,
            FidelitySample(run_index, fid, d_f, seed,
                           result.converged, result.iterations))


def worker_count() -> int:
    """Parallel workers for campaigns: QPT_THREADS, else the CPU count."""
    env = os.environ.get("QPT_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def run_campaign(config: CampaignConfig,
                 n_workers: int | None = None) -> dict:
    """Run the campaign; returns {protocol name: [FidelitySample, ...]}.

    Run i uses seed base_seed + i, for every protocol; samples come back
    ordered by run index whatever the execution order was. Non-convergence of
    a reconstruction is recorded on its sample, not raised.
    """
    workers = worker_count() if n_workers is None else max(1, n_workers)
    tasks = [
        (config.gate, config.noise_p, name, config.n_qubits, config.shots,
         config.base_seed + i, i, config.mle, config.exact)
        for name in config.protocols
        for i in range(config.runs)
    ]
    if workers == 1 or len(tasks) == 1:
        raw = [_single_run(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_single_run, tasks, chunksize=chunk))
    out: dict = {name: {} for name in config.protocols}
    for name, idx, sample in raw:
        out[name][idx] = sample
    return {name: [runs[i] for i in sorted(runs)] for name, runs in out.items()}


@dataclass(frozen=True)
class Gx2Coeffs:
    """Coefficients d_j of a generalized chi-square sum_j d_j xi_j^2."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if any(c < 0 for c in coeffs):
            raise ValueError("generalized chi-square coefficients must be >= 0")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def effective_dof(self) -> float:
        """nu = 2 * mean^2 / variance; equals j_max when all d_j are equal."""
        mean, var = gx2_moments(self)
        return 2 * mean**2 / var if var > 0 else float(len(self.coefficients))


def gx2_moments(c: Gx2Coeffs) -> tuple[float, float]:
    """(mean, variance) = (sum d_j, 2 sum d_j^2)."""
    d = np.asarray(c.coefficients, dtype=float)
    return float(d.sum()), float(2 * np.sum(d**2))


def gx2_sample(c: Gx2Coeffs, n: int, seed: int) -> np.ndarray:
    """Draw n samples of sum_j d_j xi_j^2 with xi_j iid standard normal."""
    if n < 0:
        raise ValueError("n must be >= 0")
    out = np.zeros(n, dtype=float)
    rng = np.random.default_rng(seed)
    for d in c.coefficients:
        out += d * rng.standard_normal(n) ** 2
    return out


def gx2_fit(samples, j_max: int) -> Gx2Coeffs:
    """Fit coefficients to the first two sample moments.

    Uses n = min(j_max, ceil(nu)) coefficients where nu = 2 m^2 / v is the
    effective dof implied by the sample mean m and variance v. With n >= nu
    the fit is exact for both moments: n - 1 equal coefficients plus one
    distinct one. When j_max < nu that variance is unreachable with j_max
    nonnegative coefficients, so the fit matches the mean only (all equal).
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two samples to fit")
    if x.min() < -1e-12:
        raise ValueError("fidelity-loss samples must be non-negative")
    m = float(x.mean())
    v = float(x.var(ddof=1))
    if v <= 0 or m <= 0:
        raise ValueError("degenerate samples: zero mean or zero variance")

    nu = 2 * m**2 / v
    n = min(int(j_max), max(1, math.ceil(nu)))
    if n == 1 or n < nu:
        return Gx2Coeffs((m / n,) * n)
    # two-group exact match: (n-1) coefficients at a, one at b = m - (n-1) a
    disc = (n - 1) * (n * v / 2 - m**2)
    a = (m * (n - 1) - math.sqrt(max(disc, 0.0))) / ((n - 1) * n)
    b = m - (n - 1) * a
    return Gx2Coeffs((a,) * (n - 1) + (b,))


def empirical_density(samples, bins: int,
                      upper: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Normalized histogram over [0, max sample]; returns (centers, density).

    The density integrates to one. ``upper`` overrides the top edge so that
    two sample sets can share a binning.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("cannot bin an empty sample set")
    top = float(x.max() if upper is None else upper)
    if top <= 0:
        top = 1.0
    density, edges = np.histogram(x, bins=bins, range=(0.0, top), density=True)
    centers = (edges[:-1] + edges[1:]) / 2
    return centers, density


def compare_protocols(samples_std, samples_tet, n_boot: int = 1000,
                      seed: int = 0) -> dict:
    """Mean fidelity-loss ratio standard/tetrahedron with a bootstrap CI.

    Percentile bootstrap over ``n_boot`` resamples of both sets; a ratio
    above 1 means the tetrahedron protocol reconstructs more accurately for
    the same total shot budget.
    """
    a = np.asarray([s.dF if isinstance(s, FidelitySample) else s
                    for s in samples_std], dtype=float)
    b = np.asarray([s.dF if isinstance(s, FidelitySample) else s
                    for s in samples_tet], dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both sample sets must be nonempty")
    mean_std, mean_tet = float(a.mean()), float(b.mean())
    rng = np.random.default_rng(seed)
    ratios = np.empty(n_boot)
    for i in range(n_boot):
        ra = a[rng.integers(0, a.size, a.size)].mean()
        rb = b[rng.integers(0, b.size, b.size)].mean()
        ratios[i] = ra / rb if rb > 0 else np.inf
    lo, hi = np.percentile(ratios, [2.5, 97.5])
    return {
        "mean_std": mean_std,
        "mean_tet": mean_tet,
        "ratio": mean_std / mean_tet if mean_tet > 0 else float("inf"),
        "ci_low": float(lo),
        "ci_high": float(hi),
    }
