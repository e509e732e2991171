"""End-to-end acceptance suite.

Each test prints one PASS/FAIL line with the measured numbers (run pytest
with ``-s`` to see them as they complete). The two campaign-scale checks are
marked ``slow``; together they take tens of minutes at desk scale.
"""

import json

import numpy as np
import pytest
import scipy.linalg

from phaseqpt.channels import (
    chi_from_kraus,
    chi_of_gate,
    depolarized_chi,
    free_parameter_count,
    kraus_from_chi,
    random_tp_kraus,
    unitary_remix,
)
from phaseqpt.cli import main as cli_main
from phaseqpt.fidelity_stats import (
    CampaignConfig,
    Gx2Coeffs,
    compare_protocols,
    gx2_fit,
    gx2_sample,
    run_campaign,
)
from phaseqpt.gates import (
    CNOT_MATRIX,
    cnot_product,
    cnot_via_sqiswap,
    global_phase_residual,
    interaction_hamiltonian,
    interaction_unitary,
    sqiswap,
)
from phaseqpt.linalg import partial_trace_second, vec
from phaseqpt.phase_qubit import HBAR
from phaseqpt.protocols import build_protocol
from phaseqpt.tomography import (
    MleOptions,
    exact_counts,
    mle_reconstruct,
    process_fidelity,
)


def _report(num: int, name: str, ok: bool, detail: str) -> None:
    print(f"\n[criterion {num}] {'PASS' if ok else 'FAIL'} {name}: {detail}")


def test_criterion_1_gate_algebra():
    sq = sqiswap().matrix
    half_then_half = np.max(np.abs(sq @ sq - interaction_unitary(np.pi).matrix))

    g = 2 * np.pi * 25e6
    expm_resid = 0.0
    for gt in (0.37, np.pi / 2, np.pi, 4.2):
        target = scipy.linalg.expm(-1j * interaction_hamiltonian(g) * (gt / g) / HBAR)
        expm_resid = max(expm_resid,
                         float(np.max(np.abs(interaction_unitary(gt).matrix - target))))

    # ordered convention search: exp(-i a sigma/2) first, mirrored second
    convention = None
    cnot_resid = float("inf")
    for sign in (-1, +1):
        resid, _ = global_phase_residual(cnot_product(sign), CNOT_MATRIX)
        if resid < 1e-10:
            convention, cnot_resid = sign, resid
            break
    label = cnot_via_sqiswap().label

    ok = half_then_half < 1e-12 and expm_resid < 1e-12 and cnot_resid < 1e-10
    _report(1, "gate algebra", ok,
            f"sqiswap^2 residual {half_then_half:.2e}, "
            f"expm residual {expm_resid:.2e}, "
            f"cnot residual {cnot_resid:.2e} under rotation sign "
            f"{convention:+d} ({label})")
    assert half_then_half < 1e-12
    assert expm_resid < 1e-12
    assert cnot_resid < 1e-10
    assert convention == -1


def test_criterion_2_chi_structure():
    chi = chi_of_gate(sqiswap())
    w = np.sort(chi.eigenvalues())
    rank_one = abs(w[-1] - 1.0) < 1e-12 and w[-2] < 1e-12
    unit_trace = abs(np.trace(chi.matrix).real - 1.0) < 1e-12
    reduced = partial_trace_second(chi.matrix * 4, 4, 4)
    tp_resid = float(np.linalg.norm(reduced - np.eye(4)))

    rng = np.random.default_rng(2024)
    base = kraus_from_chi(depolarized_chi(sqiswap(), 0.5))
    m = len(base)
    remix_dev = 0.0
    for _ in range(100):
        g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        q, r = np.linalg.qr(g)
        u = q * (np.diag(r) / np.abs(np.diag(r)))
        remixed = chi_from_kraus(unitary_remix(base, u))
        remix_dev = max(remix_dev, float(np.max(np.abs(
            remixed.matrix - depolarized_chi(sqiswap(), 0.5).matrix))))

    ok = rank_one and unit_trace and tp_resid < 1e-10 and remix_dev < 1e-12
    _report(2, "chi structure", ok,
            f"eigenvalues (top two) {w[-1]:.12f}/{w[-2]:.2e}, "
            f"trace-preservation residual {tp_resid:.2e}, "
            f"worst remix deviation over 100 draws {remix_dev:.2e}")
    assert rank_one and unit_trace
    assert tp_resid < 1e-10
    assert remix_dev < 1e-12


def test_criterion_3_depolarized_fidelity():
    chi0 = chi_of_gate(sqiswap())
    chi_p = depolarized_chi(sqiswap(), 0.5)
    # independent oracle: rank-1 reduction F = <u| chi |u>, no matrix roots
    u = vec(sqiswap().matrix) / 2
    oracle = float(np.real(u.conj() @ chi_p.matrix @ u))
    fid = process_fidelity(chi0, chi_p)

    ok = abs(oracle - 0.53125) < 1e-12 and abs(fid - 0.53125) < 1e-10
    _report(3, "depolarized fidelity", ok,
            f"oracle {oracle!r}, matrix-root path {fid!r}, expected 0.53125")
    assert abs(oracle - 0.53125) < 1e-12
    assert abs(fid - 0.53125) < 1e-10


def test_criterion_4_parameter_count():
    count = free_parameter_count(4)
    _report(4, "free parameter count", count == 240, f"S=4 gives {count}")
    assert count == 240


def test_criterion_5_mle_consistency():
    rng = np.random.default_rng(99)
    options = MleOptions(max_iterations=100_000, rel_tol=1e-15)
    worst = 0.0
    monotone = True
    for trial in range(20):
        chi = chi_from_kraus(random_tp_kraus(2, 4, rng))
        for name in ("standard", "tetrahedron"):
            protocol = build_protocol(name, 1)
            counts = exact_counts(chi, protocol, 1e9)
            result = mle_reconstruct(counts, protocol, options)
            worst = max(worst, 1.0 - process_fidelity(result.chi_hat, chi))
            trace = result.log_likelihood
            monotone = monotone and all(b >= a for a, b in zip(trace, trace[1:]))

    ok = worst < 1e-6 and monotone
    _report(5, "estimator consistency", ok,
            f"worst 1-F over 20 channels x 2 protocols = {worst:.2e}, "
            f"all likelihood traces monotone = {monotone}")
    assert worst < 1e-6
    assert monotone


@pytest.mark.slow
def test_criterion_6_risk_scaling():
    shots_grid = [25_000, 50_000, 100_000, 200_000]
    means = []
    for shots in shots_grid:
        cfg = CampaignConfig(gate="sqiswap", noise_p=0.5,
                             protocols=("tetrahedron",), shots=shots,
                             runs=200, base_seed=42)
        samples = run_campaign(cfg)["tetrahedron"]
        means.append(float(np.mean([s.dF for s in samples])))
    slope = float(np.polyfit(np.log(shots_grid), np.log(means), 1)[0])

    ok = -1.25 <= slope <= -0.75
    _report(6, "risk scaling", ok,
            "mean dF " + ", ".join(f"{m:.4f}@{n}" for m, n in zip(means, shots_grid))
            + f"; log-log slope {slope:.3f} (band [-1.25, -0.75])")
    assert -1.25 <= slope <= -0.75


@pytest.mark.slow
def test_criterion_7_protocol_comparison():
    cfg = CampaignConfig(gate="sqiswap", noise_p=0.5, shots=100_000,
                         runs=200, base_seed=42)
    samples = run_campaign(cfg)
    report = compare_protocols(samples["standard"], samples["tetrahedron"])
    ratio, lo, hi = report["ratio"], report["ci_low"], report["ci_high"]
    in_band = 1.5 <= ratio <= 3.5

    ok = ratio > 1 and lo > 1
    _report(7, "protocol comparison", ok,
            f"mean dF standard {report['mean_std']:.4f} / tetrahedron "
            f"{report['mean_tet']:.4f}; ratio {ratio:.3f}, 95% CI "
            f"[{lo:.3f}, {hi:.3f}]; reproduction band [1.5, 3.5] "
            f"{'contains' if in_band else 'does NOT contain'} the point "
            f"estimate (reference value 2.5 at ten-times larger samples)")
    assert ratio > 1
    assert lo > 1


def test_criterion_8_gx2_machinery():
    coeffs = Gx2Coeffs((1.0,) * 240)
    x = gx2_sample(coeffs, 1_000_000, seed=314)
    mean_err = abs(x.mean() - 240) / 240
    var_err = abs(x.var() - 480) / 480
    fitted = gx2_fit(x, j_max=240)
    dof_err = abs(fitted.effective_dof - 240) / 240

    ok = mean_err < 0.01 and var_err < 0.02 and dof_err < 0.05
    _report(8, "generalized chi-square machinery", ok,
            f"sample mean {x.mean():.2f} (err {mean_err:.2%}), variance "
            f"{x.var():.1f} (err {var_err:.2%}), fitted effective dof "
            f"{fitted.effective_dof:.1f} (err {dof_err:.2%})")
    assert mean_err < 0.01
    assert var_err < 0.02
    assert dof_err < 0.05


def test_criterion_9_determinism(tmp_path):
    outputs = []
    for tag in ("first", "second"):
        out_dir = tmp_path / tag
        config = tmp_path / f"{tag}.json"
        config.write_text(json.dumps({
            "gate": "sqiswap",
            "noise": {"kind": "depolarizing", "p": 0.5},
            "protocol": "both",
            "shots": 2000,
            "runs": 3,
            "seed": 5,
            "bins": 8,
            "output_dir": str(out_dir),
        }))
        assert cli_main(["compare", "--config", str(config)]) == 0
        outputs.append({name: (out_dir / name).read_bytes()
                        for name in ("samples.csv", "density.csv", "summary.json")})

    identical = all(outputs[0][k] == outputs[1][k] for k in outputs[0])
    _report(9, "byte-identical campaign outputs", identical,
            "samples.csv, density.csv, summary.json identical across "
            f"invocations = {identical}")
    assert identical
