import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from daqc.models import (
    CouplingProfile,
    build_ising,
    build_mbody_target,
    build_xz_target,
    hamiltonian_from_json,
    mbody_term_count,
    mbody_words,
    pair_list,
)
from daqc.pauli import support


def test_homogeneous_ising_three_qubits():
    H = build_ising(3, 1.0)
    assert H.terms == {"ZZI": 1.0, "ZIZ": 1.0, "IZZ": 1.0}


def test_polynomial_and_exponential_couplings():
    p = build_ising(5, CouplingProfile("polynomial", J=1.0, alpha=2.5))
    e = build_ising(5, CouplingProfile("exponential", J=1.0))
    assert p.coefficient("ZIZII") == pytest.approx(1 / 2**2.5)
    assert p.coefficient("ZIZII") == pytest.approx(0.17678, abs=1e-5)
    assert e.coefficient("ZIZII") == pytest.approx(math.exp(-1))
    assert e.coefficient("ZZIII") == pytest.approx(1.0)
    assert e.coefficient("ZIIZI") == pytest.approx(math.exp(-4))


def test_ising_term_counts_and_nn_support():
    for n in range(2, 9):
        assert len(build_ising(n, 1.0)) == n * (n - 1) // 2
        nn = build_ising(n, 1.0, "NN")
        assert len(nn) == n - 1
        assert all(support(w)[1] - support(w)[0] == 1 for w in nn.terms)
    with pytest.raises(ValueError):
        build_ising(1, 1.0)


def test_physical_ion_flag_restricts_alpha():
    CouplingProfile("polynomial", alpha=2.5, physical_ion=True)
    with pytest.raises(ValueError):
        CouplingProfile("polynomial", alpha=3.5, physical_ion=True)
    CouplingProfile("polynomial", alpha=3.5)


def test_explicit_profile_and_round_trip():
    prof = CouplingProfile("explicit", table={(1, 2): 0.3, (2, 3): -0.4})
    H = build_ising(3, prof)
    assert H.coefficient("ZZI") == 0.3 and H.coefficient("IZZ") == -0.4 and H.coefficient("ZIZ") == 0
    again = CouplingProfile.from_dict(prof.to_dict())
    assert build_ising(3, again) == H
    with pytest.raises(ValueError):
        CouplingProfile("explicit")
    with pytest.raises(ValueError):
        CouplingProfile("gaussian")


def test_xz_target_reference_configuration():
    H = build_xz_target(5, CouplingProfile("polynomial", J=0.5, alpha=0.5))
    assert len(H) == 40 == 4 * 5 * 4 // 2
    assert H.coefficient("XXIII") == pytest.approx(0.5)
    assert H.coefficient("XIIIZ") == pytest.approx(0.5 / 2)


def test_xz_target_zz_only_reduces_to_ising():
    H = build_xz_target(2, {("z", "z"): CouplingProfile("homogeneous", J=1.0)})
    assert H.terms == {"ZZ": 1.0}
    with pytest.raises(ValueError):
        build_xz_target(3, {("y", "z"): CouplingProfile()})


@settings(max_examples=9, deadline=None)
@given(st.integers(2, 10))
def test_xz_count_matches_enumeration(n):
    H = build_xz_target(n, CouplingProfile("polynomial", J=1.0, alpha=1.0))
    assert len(H) == 4 * len(pair_list(n))


def test_mbody_term_counts():
    assert mbody_term_count(4) == 9 * 3 + 27 * 2 + 81 == 162
    for n in range(4, 11):
        words = mbody_words(n)
        assert len(words) == len(set(words)) == mbody_term_count(n)
        assert len(words) == 9 * (n - 1) + 27 * (n - 2) + 81 * (n - 3)
        for w in words:
            s = support(w)
            assert s == tuple(range(s[0], s[-1] + 1)) and 2 <= len(s) <= 4


def test_mbody_explicit_single_word():
    H = build_mbody_target(5, 4, coefficients={"XXXXI": 1.0}).pruned()
    assert H.terms == {"XXXXI": 1.0}
    with pytest.raises(ValueError):
        build_mbody_target(5, 4, coefficients={"XIXII": 1.0})
    with pytest.raises(ValueError):
        build_mbody_target(3, 4, seed=0)


def test_mbody_seeded_random_is_reproducible():
    a = build_mbody_target(6, 4, seed=12)
    b = build_mbody_target(6, 4, seed=12)
    c = build_mbody_target(6, 4, seed=13)
    assert a == b and a != c
    assert all(-1 <= v <= 1 for v in a.terms.values())


def test_hamiltonian_from_json_forms():
    explicit = hamiltonian_from_json({"n_qubits": 2, "terms": [{"coeff": 0.5, "word": "ZX"}]})
    assert explicit.coefficient("ZX") == 0.5
    short = hamiltonian_from_json({"n_qubits": 3, "model": "ising", "profile": {"kind": "homogeneous", "J": 2.0}})
    assert short == build_ising(3, 2.0)
    with pytest.raises(ValueError):
        hamiltonian_from_json({"n_qubits": 3, "model": "heisenberg"})


def test_built_hamiltonians_are_hermitian():
    for H in (build_xz_target(3, CouplingProfile("polynomial", alpha=0.5)), build_mbody_target(4, 4, seed=1)):
        m = H.matrix()
        assert np.allclose(m, m.conj().T)
