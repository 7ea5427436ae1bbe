import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from daqc.errors import NoRemediation, SingularGeneratorSet, ZeroResourceCoupling
from daqc.executor import schedule_unitary
from daqc.ising import (
    compile_ising,
    cz_gadget,
    pair_index,
    pair_unindex,
    remediate_negative_times,
    sign_eigenvalues,
    sign_matrix,
    solve_block_times,
)
from daqc.models import CouplingProfile, build_ising, pair_list, two_body_word
from daqc.pauli import SpinHamiltonian, phase_aligned_distance, propagator, word_matrix


def random_zz(n, rng, topology="ATA"):
    return SpinHamiltonian(n, {two_body_word(n, j, k): rng.uniform(-1, 1) for j, k in pair_list(n, topology)})


# indexing and the sign matrix -------------------------------------------------------


def test_pair_index_examples():
    assert [pair_index(1, 2, 3), pair_index(1, 3, 3), pair_index(2, 3, 3)] == [1, 2, 3]
    assert pair_index(2, 3, 5) == 5
    with pytest.raises(ValueError):
        pair_index(3, 3, 5)
    with pytest.raises(ValueError):
        pair_unindex(11, 5)


@settings(max_examples=8, deadline=None)
@given(st.integers(2, 10))
def test_pair_index_round_trip_and_order(N):
    labels = [pair_index(n, m, N) for n, m in pair_list(N)]
    assert labels == list(range(1, N * (N - 1) // 2 + 1))
    assert all(pair_unindex(pair_index(n, m, N), N) == (n, m) for n, m in pair_list(N))


def test_sign_matrix_three_qubit_table():
    assert np.array_equal(sign_matrix(3), [[1, -1, -1], [-1, 1, -1], [-1, -1, 1]])


def test_sign_matrix_five_qubit_spectrum():
    w = np.sort(np.linalg.eigvalsh(sign_matrix(5)))
    assert np.allclose(w, [-2] * 5 + [4] * 5)
    assert sign_eigenvalues(5) == (-2.0, -2.0, 4.0)


@pytest.mark.parametrize("N", range(3, 11))
def test_sign_matrix_structure(N):
    M = sign_matrix(N)
    assert np.array_equal(M, M.T) and np.all(np.diag(M) == 1) and set(np.unique(M)) <= {-1.0, 1.0}
    lam1 = sign_eigenvalues(N)[0]
    ones = np.ones(len(M))
    assert np.allclose(M @ ones, lam1 * ones)
    assert (abs(np.linalg.det(M)) < 1e-6) == (N == 4)


# block times ----------------------------------------------------------------------


def test_block_times_homogeneous_target_three_qubits():
    rep = solve_block_times([1.0, 1.0, 1.0], 1.0, 1.0)
    assert np.allclose(rep.times, [-1, -1, -1])


def test_block_times_single_pair_target():
    rep = solve_block_times([1.0, 0.0, 0.0], 1.0, 1.0)
    assert np.allclose(rep.times, [0, -0.5, -0.5])
    assert rep.residual <= 1e-10


def test_block_times_singular_at_four():
    with pytest.raises(SingularGeneratorSet):
        solve_block_times(np.ones(6), 1.0)


# remediation ------------------------------------------------------------------------


def test_remediation_homogeneous_three_qubits():
    t, extra, signs, strategy = remediate_negative_times([-1.0, -1.0, -1.0], 3)
    assert strategy == "eigenvector-shift"
    assert np.allclose(t, 0) and extra == pytest.approx(1.0)


def test_remediation_single_pair_three_qubits():
    t, extra, signs, strategy = remediate_negative_times([0.0, -0.5, -0.5], 3)
    assert np.allclose(t, [0.5, 0, 0]) and extra == pytest.approx(0.5)
    # the shifted times plus the bare block reproduce the couplings (1, 0, 0)
    assert np.allclose(sign_matrix(3) @ t + extra, [1, 0, 0])


def test_remediation_noop_and_failure():
    t, extra, signs, strategy = remediate_negative_times([0.2, 0.0, 0.4], 3)
    assert strategy == "none" and extra == 0 and np.allclose(t, [0.2, 0, 0.4])
    with pytest.raises(NoRemediation):
        remediate_negative_times(np.r_[-0.1, np.ones(20)], 7)
    t, extra, signs, strategy = remediate_negative_times(np.r_[-0.1, np.ones(20)], 7, allow_sign_inversion=True)
    assert strategy == "sign-inversion" and signs[0] == -1 and t.min() >= 0


def test_period_wrap_for_seven_qubits():
    rng = np.random.default_rng(7)
    resource = build_ising(7, 1.0)
    for _ in range(20):
        target = random_zz(7, rng)
        sched = compile_ising(target, resource, 1.0, allow_sign_inversion=False)
        if sched.report.t_min < 0:
            break
    assert sched.report.strategy == "period-wrap"
    assert all(b.duration >= 0 for b in sched.analog_blocks)
    assert sched.report.shifted_times.max() < 2 * math.pi
    assert phase_aligned_distance(schedule_unitary(sched), propagator(target, 1.0)) <= 1e-9


def test_inhomogeneous_seven_qubits_needs_sign_inversion():
    rng = np.random.default_rng(8)
    resource = build_ising(7, CouplingProfile("polynomial", J=1.0, alpha=1.5))
    target = random_zz(7, rng)
    with pytest.raises(NoRemediation):
        compile_ising(target, resource, 1.0, allow_sign_inversion=False)
    sched = compile_ising(target, resource, 1.0)
    assert sched.report.strategy == "sign-inversion"
    assert any(b.sign == -1 for b in sched.analog_blocks)
    assert phase_aligned_distance(schedule_unitary(sched), propagator(target, 1.0)) <= 1e-9


def test_remediation_adds_time():
    rng = np.random.default_rng(9)
    resource = build_ising(5, CouplingProfile("polynomial", J=1.0, alpha=2.5))
    for _ in range(20):
        sched = compile_ising(random_zz(5, rng), resource, 1.0)
        if sched.report.t_min < 0:
            break
    rep = sched.report
    assert rep.extra_bare_time > 0
    assert sched.analog_time == pytest.approx(rep.total_analog_time)
    assert rep.total_analog_time > float(np.sum(rep.times))


# compilation ------------------------------------------------------------------------


def test_compile_three_qubits_homogeneous_exact():
    rng = np.random.default_rng(1)
    target = random_zz(3, rng)
    sched = compile_ising(target, build_ising(3, 1.0), 0.9)
    assert phase_aligned_distance(schedule_unitary(sched), propagator(target, 0.9)) <= 1e-10


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([3, 5, 6, 7]), st.sampled_from(["homogeneous", "polynomial"]), st.integers(0, 10_000),
       st.floats(0.1, 3.0))
def test_compile_exact_property(N, kind, seed, t_F):
    target = random_zz(N, np.random.default_rng(seed))
    resource = build_ising(N, CouplingProfile(kind, J=1.0, alpha=1.5))
    sched = compile_ising(target, resource, t_F)
    assert all(b.duration >= 0 for b in sched.analog_blocks)
    assert sched.n_analog <= N * (N - 1) // 2 + 1
    assert phase_aligned_distance(schedule_unitary(sched), propagator(target, t_F)) <= 1e-9


def test_generic_target_uses_one_block_per_pair():
    # with or without the shift (which empties one block and adds a bare one) the count is K
    rng = np.random.default_rng(3)
    for N in (3, 5, 6):
        for kind in ("homogeneous", "polynomial"):
            resource = build_ising(N, CouplingProfile(kind, J=1.0, alpha=2.5))
            sched = compile_ising(random_zz(N, rng), resource, 1.0)
            assert sched.n_analog == N * (N - 1) // 2


def test_identity_compilation():
    resource = build_ising(5, CouplingProfile("polynomial", J=1.0, alpha=2.5))
    sched = compile_ising(resource, resource, 0.7)
    assert phase_aligned_distance(schedule_unitary(sched), propagator(resource, 0.7)) <= 1e-10


def test_four_qubits_needs_fallback():
    rng = np.random.default_rng(4)
    target = random_zz(4, rng)
    resource = build_ising(4, 1.0)
    with pytest.raises(SingularGeneratorSet, match="N=4"):
        compile_ising(target, resource, 1.0)
    sched = compile_ising(target, resource, 1.0, allow_fallback=True)
    assert sched.report.fallback and sched.report.warnings
    assert phase_aligned_distance(schedule_unitary(sched), propagator(target, 1.0)) <= 1e-9


def test_nearest_neighbour_reduced_generator_set():
    rng = np.random.default_rng(5)
    for N in (3, 4, 6):
        target = random_zz(N, rng, "NN")
        resource = build_ising(N, CouplingProfile("polynomial", J=1.0, alpha=2.0), "NN")
        sched = compile_ising(target, resource, 1.0)
        assert sched.n_analog <= N - 1
        assert all(len(layer.rotations) <= N for layer in sched.layers)
        assert phase_aligned_distance(schedule_unitary(sched), propagator(target, 1.0)) <= 1e-10


def test_all_to_all_target_on_chain_resource_rejected():
    with pytest.raises(ZeroResourceCoupling):
        compile_ising(random_zz(4, np.random.default_rng(0)), build_ising(4, 1.0, "NN"), 1.0)


def test_zero_resource_coupling_rejected():
    resource = build_ising(3, CouplingProfile("explicit", table={(1, 2): 1.0, (1, 3): 0.0, (2, 3): 1.0}))
    target = build_ising(3, 1.0)
    with pytest.raises(ZeroResourceCoupling):
        compile_ising(target, resource, 1.0)


def test_non_zz_input_rejected():
    with pytest.raises(ValueError):
        compile_ising(SpinHamiltonian(3, {"XXI": 1.0}), build_ising(3, 1.0))


def test_report_serialises():
    import json

    sched = compile_ising(random_zz(5, np.random.default_rng(2)), build_ising(5, 1.0), 1.0)
    doc = json.loads(json.dumps(sched.report.to_dict()))
    assert doc["n_qubits"] == 5 and len(doc["times"]) == 10


# CZ gadget --------------------------------------------------------------------------


def test_cz_at_quarter_turn_is_cz():
    u = schedule_unitary(cz_gadget(1, 2, math.pi / 2))
    assert phase_aligned_distance(u, np.diag([1, 1, 1, -1])) <= 1e-10


def test_cz_at_zero_is_identity():
    assert phase_aligned_distance(schedule_unitary(cz_gadget(1, 2, 0.0)), np.eye(4)) <= 1e-12


def test_cz_embedded_in_five_qubits():
    phi = 0.83
    u = schedule_unitary(cz_gadget(2, 5, phi, n_qubits=5))
    # |11> on qubits 2 and 5 picks up e^{-2i phi}
    proj = (np.eye(32) - word_matrix("IZIII")) @ (np.eye(32) - word_matrix("IIIIZ")) / 4
    expected = np.eye(32) + (np.exp(-2j * phi) - 1) * proj
    assert phase_aligned_distance(u, expected) <= 1e-10


def test_cz_needs_distinct_qubits():
    with pytest.raises(ValueError):
        cz_gadget(2, 2, 0.3)
