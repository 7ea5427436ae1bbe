"""Golden checks run by ``daqc verify``: reference tables plus oracle equivalences, at least one per module."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from . import dqc, executor, golden, ising, mbody, models, noise, pauli, xz
from .schedule import AnalogBlock, RotationLayer, Schedule, QubitRotation

PERTURBATIONS = ("sign-matrix", "cz-phase", "golden-sign", "decomposition")


@dataclass
class Check:
    name: str
    module: str
    passed: bool
    detail: str


def _rng(seed=0):
    return np.random.default_rng(seed)


def _random_zz(n, rng, topology="ATA"):
    return models.SpinHamiltonian(n, {models.two_body_word(n, j, k): rng.uniform(-1, 1)
                                      for j, k in models.pair_list(n, topology)})


# -- individual checks: each returns (passed, detail) ------------------------------------------


def check_propagator(perturb):
    rng = _rng(1)
    words = ["XZIY", "ZZII", "IYXI", "XXXX", "IIIZ"]
    H = pauli.SpinHamiltonian(4, {w: rng.normal() for w in words})
    err = float(np.max(np.abs(pauli.propagator(H, 0.7) - expm(1j * 0.7 * H.matrix()))))
    return err <= 1e-12, f"max |exp(iHt) - expm| = {err:.2e}"


def check_coupling_profiles(perturb):
    p = models.CouplingProfile("polynomial", J=0.5, alpha=2.5)
    e = models.CouplingProfile("exponential", J=0.5)
    ok = math.isclose(p.coupling(1, 3), 0.5 / 2**2.5) and math.isclose(e.coupling(1, 2), 0.5) \
        and math.isclose(e.coupling(1, 3), 0.5 * math.exp(-1))
    n_terms = models.mbody_term_count(5, 4)
    ok = ok and n_terms == len(models.mbody_words(5, 4)) == 9 * 4 + 27 * 3 + 81 * 2
    return ok, f"profiles and {n_terms} four-body chain terms"


def check_sign_table(perturb):
    M = ising.sign_matrix(3)
    expected = np.array([[1, -1, -1], [-1, 1, -1], [-1, -1, 1]])
    return bool(np.array_equal(M, expected)), "three-qubit sign table"


def check_sign_spectrum(perturb):
    worst = 0.0
    for N in range(3, 11):
        M = ising.sign_matrix(N)
        if perturb == "sign-matrix":
            M = M.copy()
            M[0, 1] = -M[0, 1]
            M[1, 0] = -M[1, 0]
        l1, l2, l3 = ising.sign_eigenvalues(N)
        K = N * (N - 1) // 2
        expected = np.sort([l1] + [l2] * (N - 1) + [l3] * (K - N))
        worst = max(worst, float(np.max(np.abs(np.sort(np.linalg.eigvalsh(M)) - expected))))
    det4 = float(np.linalg.det(ising.sign_matrix(4)))
    return worst <= 1e-9 and abs(det4) < 1e-9, f"max eigenvalue error {worst:.2e}, det(M_4) = {det4:.1e}"


def check_ising_exact(perturb):
    rng = _rng(2)
    worst = 0.0
    for N in (3, 5):
        for profile in ("homogeneous", "polynomial"):
            target = _random_zz(N, rng)
            resource = models.build_ising(N, models.CouplingProfile(profile, J=1.0, alpha=1.5))
            sched = ising.compile_ising(target, resource, 0.8)
            u = executor.schedule_unitary(sched)
            worst = max(worst, pauli.phase_aligned_distance(u, pauli.propagator(target, 0.8)))
    return worst <= 1e-9, f"max deviation {worst:.2e}"


def check_remediation(perturb):
    t = np.array([0.3, -0.2, 0.5, 0.1, 0.25, -0.05])
    shifted, extra, signs, strategy = ising.remediate_negative_times(t, 4, eigenvalue=-2.0)
    ok = strategy == "eigenvector-shift" and shifted.min() >= 0 and extra > 0
    return ok, f"strategy {strategy}, bare block {extra:.3g}"


def check_cz(perturb):
    rng = _rng(3)
    worst = 0.0
    for phi in rng.uniform(-math.pi, math.pi, 10):
        u = executor.schedule_unitary(ising.cz_gadget(1, 2, phi))
        if perturb == "cz-phase":
            u = u @ np.diag([1, 1, 1, np.exp(1e-3j)])
        worst = max(worst, pauli.phase_aligned_distance(u, np.diag([1, 1, 1, np.exp(-2j * phi)])))
    return worst <= 1e-10, f"max deviation from diag(1,1,1,e^(-2i phi)) {worst:.2e}"


def check_xz_reconstruction(perturb):
    N = 5
    target = models.build_xz_target(N, models.CouplingProfile("polynomial", J=0.5, alpha=0.5))
    angles = xz.default_angles(N)
    strengths = xz.solve_pair_strengths(angles, xz.xz_couplings(target))
    rec = xz.reconstruct_xz(angles, xz.set_hamiltonians(N, strengths))
    err = rec.max_abs_difference(target)
    return err <= 1e-10, f"four-set reconstruction error {err:.2e}"


def check_golden_tables(perturb):
    res = golden.check_golden_tables(seed=11)
    worst = max(res["H1"]["max_deviation"], res["H2"]["max_deviation"])
    if perturb == "golden-sign":
        theta = _rng(4).uniform(0, 2 * np.pi, golden.N_SITES)
        g = _rng(5).uniform(-1, 1, golden.N_SITES - 1)
        H = golden.expansion(-theta, g, golden.H1_GENERATORS)
        ref = golden.expansion(theta, g, golden.H1_GENERATORS)
        worst = max(worst, H.max_abs_difference(ref))
    n_typos = len(res["H1"]["typos"]) + len(res["H2"]["typos"])
    return worst <= 1e-10, f"max coefficient deviation {worst:.2e}; {n_typos} tabulated entries corrected"


def check_mbody_conjugation(perturb):
    n = 4
    rng = _rng(6)
    H = pauli.SpinHamiltonian(n, {models.two_body_word(n, j, j + 1): rng.normal() for j in range(1, n)})
    gens = {1: 0.37, 3: -0.81}
    fast = mbody.conjugated_block(H, gens)
    O = sum(phi * pauli.word_matrix(mbody.oxx_word(n, j)) for j, phi in gens.items())
    dense = expm(-1j * O) @ H.matrix() @ expm(1j * O)
    err = float(np.max(np.abs(fast.matrix() - dense)))
    return err <= 1e-12, f"conjugated chain vs dense {err:.2e}"


def check_bdaqc_commuting(perturb):
    n = 3
    resource = models.build_ising(n, 1.0)
    sched = Schedule(n, resource)
    for t, phi in ((0.3, 0.4), (0.2, -1.1), (0.5, 0.7)):
        sched.add_layer(RotationLayer({0: QubitRotation((0, 0, 1), phi), 2: QubitRotation((0, 0, 1), -phi)}))
        sched.blocks.append(AnalogBlock(t))
    sched.add_layer(RotationLayer({1: QubitRotation((0, 0, 1), 0.9)}))
    a = executor.schedule_unitary(sched, "sdaqc")
    b = executor.schedule_unitary(sched, "bdaqc", dt=0.05)
    err = float(np.max(np.abs(a - b)))
    return err <= 1e-12, f"commuting banged vs stepwise {err:.2e}"


def check_bang_estimate(perturb):
    HI = 0.8 * np.kron(pauli.Z, pauli.Z)
    HR = 1.3 * np.kron(pauli.X, pauli.I2)
    ratios = []
    for dt in (1e-2, 5e-3):
        be = executor.bang_error_estimate(HI, HR, dt)
        ratios.append(be.measured_interior / be.bch_estimate)
    ok = all(abs(r - 1) < 0.05 for r in ratios)
    return ok, "measured centred-pulse error / leading term = " + ", ".join(f"{r:.3f}" for r in ratios)


def check_dqc_decomposition(perturb):
    worst = 0.0
    for (mu, nu), rel in zip(models.XZ_AXES, dqc.verify_decompositions().values()):
        phi = 0.61
        C = np.kron(pauli.PAULI[rel.correction[0]], pauli.PAULI[rel.correction[1]])
        seq = C @ dqc.textbook_sequence(mu, nu, rel.sign * phi)
        if perturb == "decomposition":
            seq = dqc.textbook_sequence(mu, nu, phi)
        target = expm(1j * phi * dqc.pair_pauli(mu, nu))
        worst = max(worst, pauli.phase_aligned_distance(seq, target))
    return worst <= 1e-12, f"corrected pi/4 decomposition error {worst:.2e}"


def check_dqc_swap(perturb):
    n = 3
    target = models.build_xz_target(n, models.CouplingProfile("polynomial", J=0.5, alpha=0.5))
    psi0 = pauli.basis_state(n, "dud")
    a, _ = dqc.run_dqc_baseline(target, 1.0, 3, "direct-ATA", psi0=psi0)
    b, _ = dqc.run_dqc_baseline(target, 1.0, 3, "nn-swap", psi0=psi0)
    err = 1.0 - pauli.fidelity(a, b)
    return err <= 1e-12, f"swap-routed vs direct program infidelity {err:.2e}"


def check_noise_free_limit(perturb):
    n = 3
    target = models.build_xz_target(n, models.CouplingProfile("polynomial", J=0.5, alpha=0.5))
    resource = models.build_ising(n, models.CouplingProfile("polynomial", J=0.5, alpha=2.5))
    psi0 = pauli.basis_state(n, "dud")
    sched = xz.compile_xz(target, resource, 1.0, 3)
    spec = noise.NoiseSpec.noiseless(runs=2)
    noisy = noise.noisy_sdaqc(sched, psi0, spec, 0, 2)
    ideal = executor.run_sdaqc(sched, psi0)
    err = float(np.max(np.abs(noisy - ideal[:, None])))
    return err <= 1e-12, f"zero-noise Monte Carlo vs ideal {err:.2e}"


def check_noise_determinism(perturb):
    spec = noise.NoiseSpec(seed=123, runs=3)
    a = noise.noisy_dqc_gate("XZ", spec, noise.run_rng(123, 0))
    b = noise.noisy_dqc_gate("XZ", spec, noise.run_rng(123, 0))
    return bool(np.array_equal(a, b)), "fixed seed gives bit-identical noisy gate"


def check_presets(perturb):
    from .config import PRESETS, load_config

    for name in PRESETS:
        load_config(name)
    return True, f"{len(PRESETS)} presets parse and validate"


CHECKS: list[tuple[str, str, Callable]] = [
    ("pauli.propagator", "pauli-core", check_propagator),
    ("models.coupling_profiles", "hamiltonian-models", check_coupling_profiles),
    ("ising.sign_table", "ising-compiler", check_sign_table),
    ("ising.sign_spectrum", "ising-compiler", check_sign_spectrum),
    ("ising.exactness", "ising-compiler", check_ising_exact),
    ("ising.remediation", "ising-compiler", check_remediation),
    ("ising.cz_gadget", "ising-compiler", check_cz),
    ("xz.reconstruction", "xz-compiler", check_xz_reconstruction),
    ("mbody.golden_tables", "mbody-compiler", check_golden_tables),
    ("mbody.conjugation", "mbody-compiler", check_mbody_conjugation),
    ("executor.bdaqc_commuting", "executor", check_bdaqc_commuting),
    ("executor.bang_estimate", "executor", check_bang_estimate),
    ("executor.dqc_decomposition", "executor", check_dqc_decomposition),
    ("executor.dqc_swap_routing", "executor", check_dqc_swap),
    ("noise.zero_noise_limit", "noise-engine", check_noise_free_limit),
    ("noise.determinism", "noise-engine", check_noise_determinism),
    ("cli.presets", "bench-cli", check_presets),
]


def run_checks(perturb: str | None = None) -> list[Check]:
    if perturb is not None and perturb not in PERTURBATIONS:
        raise ValueError(f"unknown perturbation {perturb!r}")
    out = []
    for name, module, fn in CHECKS:
        try:
            ok, detail = fn(perturb)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(Check(name, module, bool(ok), detail))
    return out


def modules_covered(checks: list[Check]) -> set[str]:
    return {c.module for c in checks}
