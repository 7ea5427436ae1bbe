import math

import numpy as np
import pytest
from scipy import stats
from scipy.linalg import expm

from daqc.dqc import pair_pauli, step_program
from daqc.executor import run_sdaqc
from daqc.models import CouplingProfile, build_ising, build_xz_target
from daqc.noise import (
    FIELD_AXES,
    NoiseSpec,
    _draws,
    _flip_index,
    _noisy_free_block,
    ideal_fidelity,
    monte_carlo_fidelity,
    noisy_analog_block,
    noisy_dqc_gate,
    run_fidelities,
    run_rng,
    summarize,
    write_raw_csv,
)
from daqc.pauli import PAULI, basis_state, evolve, local_operator
from daqc.xz import compile_xz


@pytest.fixture(scope="module")
def case():
    N = 3
    target = build_xz_target(N, CouplingProfile("polynomial", J=0.5, alpha=0.5))
    resource = build_ising(N, CouplingProfile("polynomial", J=0.5, alpha=2.5))
    sched = compile_xz(target, resource, 1.0, 4)
    psi0 = basis_state(N, "dud")
    return target, resource, sched, psi0, evolve(target, 1.0, psi0)


# noise parameters --------------------------------------------------------------


def test_spec_defaults_and_validation():
    spec = NoiseSpec(r_b=0.7)
    assert spec.r_s == pytest.approx(1.4)
    assert spec.jitter_std("sdaqc") == pytest.approx(2 * spec.jitter_std("bdaqc"))
    assert spec.field_half_width == pytest.approx(spec.r_u * spec.dt / 2)
    for bad in ({"sigma_d": -1}, {"dt": 0.0}, {"runs": 0}):
        with pytest.raises(ValueError):
            NoiseSpec(**bad)
    with pytest.raises(ValueError):
        spec.jitter_std("dqc")


def test_run_streams_are_independent_of_batching():
    a = run_rng(3, 17).normal(size=5)
    assert np.array_equal(a, run_rng(3, 17).normal(size=5))
    assert not np.array_equal(a, run_rng(3, 18).normal(size=5))
    spec = NoiseSpec(seed=3)
    whole = _draws(0, 10, spec, ["sdaqc"] * 4, 3)
    part = _draws(6, 4, spec, ["sdaqc"] * 4, 3)
    assert np.array_equal(whole[0][6:], part[0]) and np.array_equal(whole[1][6:], part[1])


# draw statistics ----------------------------------------------------------------------


def test_jitter_is_gaussian_with_requested_width():
    spec = NoiseSpec(seed=1)
    for mode in ("bdaqc", "sdaqc"):
        delta, _ = _draws(0, 20_000, spec, [mode] * 5, 3)
        flat = delta.ravel()
        assert np.std(flat) == pytest.approx(spec.jitter_std(mode), rel=0.05)
        assert abs(np.mean(flat)) < 5 * spec.jitter_std(mode) / math.sqrt(flat.size)
        assert stats.normaltest(flat).pvalue > 1e-3
    b, _ = _draws(0, 20_000, spec, ["bdaqc"], 3)
    s, _ = _draws(0, 20_000, spec, ["sdaqc"], 3)
    assert np.var(s) / np.var(b) == pytest.approx(4.0, rel=0.05)
    assert spec.jitter_std("bdaqc") == pytest.approx(spec.r_b * spec.dt)


def test_field_is_uniform_per_qubit_axis_block():
    spec = NoiseSpec(seed=2)
    _, dB = _draws(0, 2000, spec, ["sdaqc"] * 3, 4)
    assert dB.shape == (2000, 3, 4, 3)
    h = spec.field_half_width
    assert np.all(np.abs(dB) <= h)
    assert np.std(dB) == pytest.approx(h / math.sqrt(3), rel=0.05)
    # different qubits and axes are not correlated
    assert abs(np.corrcoef(dB[:, 0, 0, 0], dB[:, 0, 1, 0])[0, 1]) < 0.1
    assert abs(np.corrcoef(dB[:, 0, 0, 0], dB[:, 0, 0, 1])[0, 1]) < 0.1


def test_noisy_gate_fidelity_is_high():
    spec = NoiseSpec()
    rng = np.random.default_rng(4)
    ideal = expm(1j * math.pi / 4 * pair_pauli("Z", "Z"))
    fids = [abs(np.trace(ideal.conj().T @ noisy_dqc_gate("ZZ", spec, rng)) / 4) ** 2 for _ in range(2000)]
    assert min(fids) > 0.99
    assert np.mean(fids) == pytest.approx(1 - (math.pi / 4 * spec.sigma_d) ** 2, abs=1e-4)


def test_dense_channels_are_unitary():
    spec = NoiseSpec(r_u=0.5)
    rng = np.random.default_rng(5)
    resource = build_ising(3, 1.0)
    for u in (noisy_dqc_gate("XZ", spec, rng), noisy_analog_block(0.7, spec, "sdaqc", rng, resource)):
        assert np.allclose(u.conj().T @ u, np.eye(len(u)), atol=1e-12)
    with pytest.raises(ValueError):
        noisy_analog_block(-0.1, spec, "sdaqc", rng, resource)


# the batched analog kernel ------------------------------------------------------------


def test_batched_free_block_matches_dense_exponential():
    n = 3
    resource = build_ising(n, CouplingProfile("polynomial", J=1.0, alpha=1.5))
    diag = resource.diagonal()
    flips, bits = _flip_index(n)
    rng = np.random.default_rng(6)
    runs = 4
    for half_width in (4e-6, 1e-3):
        delta = rng.normal(0, 0.004, runs)
        dB = rng.uniform(-half_width, half_width, size=(runs, n, 3))
        psi = rng.normal(size=(8, runs)) + 1j * rng.normal(size=(8, runs))
        out = _noisy_free_block(psi, diag, 0.9, 1, delta, dB, flips, bits)
        for r in range(runs):
            G = (0.9 + delta[r]) * resource.matrix()
            for q in range(n):
                for g, axis in enumerate(FIELD_AXES):
                    G = G + dB[r, q, g] * local_operator({q: PAULI[axis]}, n)
            ref = expm(1j * G) @ psi[:, r]
            # the kernel drops only second-order field terms
            assert np.max(np.abs(out[:, r] - ref)) <= 50 * (n * 3 * half_width) ** 2 * np.linalg.norm(psi[:, r])


# Monte Carlo ---------------------------------------------------------------------------


def test_zero_noise_reproduces_ideal(case):
    target, resource, sched, psi0, exact = case
    spec = NoiseSpec.noiseless(runs=3)
    for mode in ("sdaqc", "bdaqc"):
        fids = run_fidelities(mode, spec, psi0, exact, schedule=sched, dt=0.004)
        assert np.allclose(fids, ideal_fidelity(mode, sched, psi0, exact, dt=0.004), atol=1e-12)
    prog = step_program(target, 0.25, "direct-ATA")
    fids = run_fidelities("dqc", spec, psi0, exact, program=prog, n_T=4, n_qubits=3)
    assert np.allclose(fids, ideal_fidelity("dqc", None, psi0, exact, program=prog, n_T=4, n_qubits=3), atol=1e-12)


def test_results_are_deterministic_and_thread_independent(case):
    _, _, sched, psi0, exact = case
    spec = NoiseSpec(seed=11, runs=600)
    a = run_fidelities("sdaqc", spec, psi0, exact, schedule=sched)
    b = run_fidelities("sdaqc", spec, psi0, exact, schedule=sched, threads=3)
    assert np.array_equal(a, b)
    c = run_fidelities("sdaqc", NoiseSpec(seed=12, runs=600), psi0, exact, schedule=sched)
    assert not np.array_equal(a, c)


def test_noise_lowers_fidelity_on_average(case):
    _, _, sched, psi0, exact = case
    ideal = float(abs(np.vdot(exact, run_sdaqc(sched, psi0))) ** 2)
    fids = run_fidelities("sdaqc", NoiseSpec(seed=0, runs=400), psi0, exact, schedule=sched)
    assert np.mean(fids) < ideal


def test_standard_error_shrinks_like_inverse_sqrt_runs(case):
    _, _, sched, psi0, exact = case
    errs = []
    for runs in (100, 400, 1600):
        fids = run_fidelities("sdaqc", NoiseSpec(seed=5, runs=runs), psi0, exact, schedule=sched)
        errs.append(summarize("sdaqc", 4, fids).stderr)
    slope = np.polyfit(np.log([100, 400, 1600]), np.log(errs), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.1)


def test_monte_carlo_driver_and_csv(case, tmp_path):
    target, resource, _, psi0, _ = case
    res = monte_carlo_fidelity(target, resource, 1.0, [2, 4], NoiseSpec(runs=20), psi0, modes=("sdaqc", "dqc"))
    assert [(r.mode, r.n_T) for r in res] == [("sdaqc", 2), ("dqc", 2), ("sdaqc", 4), ("dqc", 4)]
    assert all(0 <= r.mean <= 1 and len(r.fidelities) == 20 for r in res)
    path = tmp_path / "raw.csv"
    write_raw_csv(path, res)
    lines = path.read_text().splitlines()
    assert lines[0] == "mode,n_T,run,fidelity" and len(lines) == 1 + 4 * 20
