import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from daqc.errors import SingularPairSystem
from daqc.executor import run_sdaqc, schedule_unitary
from daqc.models import XZ_AXES, CouplingProfile, build_ising, build_xz_target, pair_list, two_body_word
from daqc.pauli import SpinHamiltonian, basis_state, evolve, fidelity, local_operator, phase_aligned_distance, propagator
from daqc.schedule import RotationLayer
from daqc.xz import (
    compile_xz,
    default_angles,
    reconstruct_xz,
    rotation_layer,
    set_hamiltonians,
    solve_pair_strengths,
    xz_couplings,
)


def random_xz(n, rng):
    return SpinHamiltonian(n, {two_body_word(n, j, k, mu, nu): rng.uniform(-1, 1)
                               for j, k in pair_list(n) for mu, nu in XZ_AXES})


def loglog_slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def test_default_angle_values():
    th = default_angles(5)
    assert th[0, 0] == pytest.approx(math.pi / 4)
    assert th[3, 0] == pytest.approx(math.pi)
    assert np.allclose(th[:, 0], [math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi])
    assert abs(th[0, 0] - th[0, 1]) == pytest.approx(math.pi / 12)
    assert th.shape == (4, 5)


def test_identical_angle_sets_are_singular():
    angles = np.tile(default_angles(3)[:1], (4, 1))
    target = random_xz(3, np.random.default_rng(0))
    with pytest.raises(SingularPairSystem):
        solve_pair_strengths(angles, xz_couplings(target))
    with pytest.raises(SingularPairSystem):
        compile_xz(target, build_ising(3, 1.0), 1.0, 1, angles=angles)


def test_reconstruction_reference_target():
    N = 5
    target = build_xz_target(N, CouplingProfile("polynomial", J=0.5, alpha=0.5))
    angles = default_angles(N)
    parts = set_hamiltonians(N, solve_pair_strengths(angles, xz_couplings(target)))
    assert reconstruct_xz(angles, parts).max_abs_difference(target) <= 1e-10
    # the same identity as dense matrices
    dense = sum(local_operator(rotation_layer(angles, s).ops(), N) @ parts[s].matrix()
                @ local_operator(rotation_layer(angles, s).ops(), N) for s in range(4))
    assert np.max(np.abs(dense - target.matrix())) <= 1e-10


def test_zz_only_target_reconstructs():
    N = 4
    target = build_ising(N, CouplingProfile("polynomial", J=1.0, alpha=1.0))
    angles = default_angles(N)
    parts = set_hamiltonians(N, solve_pair_strengths(angles, xz_couplings(target)))
    assert reconstruct_xz(angles, parts).max_abs_difference(target) <= 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_reconstruction_random_targets_and_angles(seed):
    rng = np.random.default_rng(seed)
    N = 4
    target = random_xz(N, rng)
    angles = default_angles(N) + rng.uniform(-0.05, 0.05, size=(4, N))
    parts = set_hamiltonians(N, solve_pair_strengths(angles, xz_couplings(target)))
    assert reconstruct_xz(angles, parts).max_abs_difference(target) <= 1e-9


def test_rotation_layers_are_reflections():
    angles = default_angles(4)
    for s in range(4):
        R = local_operator(rotation_layer(angles, s).ops(), 4)
        assert np.allclose(R, R.conj().T, atol=1e-12)
        assert np.allclose(R @ R, np.eye(16), atol=1e-12)


def test_non_xz_terms_rejected():
    with pytest.raises(ValueError):
        xz_couplings(SpinHamiltonian(3, {"YZI": 1.0}))


def test_pure_zz_target_exact_for_any_steps():
    rng = np.random.default_rng(1)
    target = SpinHamiltonian(4, {two_body_word(4, j, k): rng.uniform(-1, 1) for j, k in pair_list(4)})
    resource = build_ising(4, CouplingProfile("polynomial", J=1.0, alpha=1.5))
    for n_T in (1, 3):
        u = schedule_unitary(compile_xz(target, resource, 0.8, n_T, allow_fallback=True))
        assert phase_aligned_distance(u, propagator(target, 0.8)) <= 1e-9


def test_convergence_first_order_and_symmetrized():
    rng = np.random.default_rng(2)
    N = 3
    target = random_xz(N, rng)
    resource = build_ising(N, CouplingProfile("polynomial", J=1.0, alpha=2.5))
    psi0 = basis_state(N, "dud")
    exact = evolve(target, 1.0, psi0)
    n_values = [5, 10, 20, 40, 100]
    first = [1 - fidelity(run_sdaqc(compile_xz(target, resource, 1.0, n), psi0), exact) for n in n_values]
    sym = [1 - fidelity(run_sdaqc(compile_xz(target, resource, 1.0, n, symmetrized=True), psi0), exact)
           for n in n_values]
    assert first[-1] < 1e-2 and all(np.diff(first) < 0)
    assert loglog_slope(n_values, first) <= -1
    assert loglog_slope(n_values, sym) <= -2
    # infidelity bounded by c / n_T with the constant taken at the smallest n_T
    c = first[0] * n_values[0]
    assert all(f <= c / n for f, n in zip(first, n_values))


def test_schedule_structure_per_step():
    N = 5
    target = build_xz_target(N, CouplingProfile("polynomial", J=0.5, alpha=0.5))
    resource = build_ising(N, CouplingProfile("polynomial", J=0.5, alpha=2.5))
    sched = compile_xz(target, resource, 2.0, 3)
    assert len(sched.step_slices()) == 3
    # four sets of N(N-1)/2 sandwiched blocks per step
    assert sched.report.blocks_per_step() == 2 * N * (N - 1)
    assert sched.n_analog == 3 * 2 * N * (N - 1)
    # adjacent single-qubit layers are merged into one
    kinds = [isinstance(b, RotationLayer) for b in sched.blocks]
    assert not any(a and b for a, b in zip(kinds, kinds[1:]))
    assert sched.report.to_dict()["blocks_per_step"] == 40


def test_invalid_step_count():
    with pytest.raises(ValueError):
        compile_xz(random_xz(3, np.random.default_rng(0)), build_ising(3, 1.0), 1.0, 0)
