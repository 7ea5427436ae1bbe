"""Purely digital baseline: every two-body term as fixed pi/4 entangling gates plus local rotations.

A term ``exp(i phi s_mu^j s_nu^k)`` is built from two gates ``exp(i pi/4 s_mu^j s_nu^k)``
around a local ``sigma_y^j`` rotation.  The textbook five-factor sequence

    e^{i pi/4 Y_j} e^{i pi/4 P} e^{i phi Y_j} e^{i pi/4 P} e^{-i pi/4 Y_j}

is a local Pauli times ``exp(-i phi P)`` rather than ``exp(+i phi P)``;
:func:`decomposition_relation` determines the exact sign and local correction
numerically and the gate programs use the corrected sequence.

Only entangling gates are charged time: ``(pi/4) / |gbar_jk|`` on the pair they act on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .models import XZ_AXES, two_body_word
from .pauli import PAULI, SpinHamiltonian, apply_local, apply_two_qubit, basis_state, phase_aligned_distance
from .xz import xz_couplings

QUARTER = math.pi / 4
MODES = ("direct-ATA", "nn-swap", "optimised")


def _exp_pauli(p: np.ndarray, a: float) -> np.ndarray:
    """``exp(i a P)`` for a Pauli (or Pauli product) ``P`` with ``P^2 = 1``."""
    return math.cos(a) * np.eye(p.shape[0]) + 1j * math.sin(a) * p


def pair_pauli(mu: str, nu: str) -> np.ndarray:
    return np.kron(PAULI[mu], PAULI[nu])


def textbook_sequence(mu: str, nu: str, phi: float) -> np.ndarray:
    """The five-factor sequence as a 4x4 matrix (qubit ``j`` first)."""
    P = pair_pauli(mu, nu)
    Yj = np.kron(PAULI["Y"], np.eye(2))
    g = _exp_pauli(P, QUARTER)
    return _exp_pauli(Yj, QUARTER) @ g @ _exp_pauli(Yj, phi) @ g @ _exp_pauli(Yj, -QUARTER)


@dataclass(frozen=True)
class Relation:
    """``exp(i phi P) = phase * C * sequence(sign * phi)`` with ``C`` the local Pauli ``correction``."""

    mu: str
    nu: str
    sign: int
    correction: str
    phase: complex
    deviation: float


@lru_cache(maxsize=None)
def decomposition_relation(mu: str, nu: str) -> Relation:
    """Find the sign and local Pauli correction that make the sequence exact."""
    P = pair_pauli(mu, nu)
    probes = (0.37, -1.21, 2.05)
    best = None
    for sign in (+1, -1):
        for a in "IXYZ":
            for b in "IXYZ":
                C = np.kron(PAULI[a], PAULI[b])
                dev, phase = 0.0, None
                for phi in probes:
                    lhs = _exp_pauli(P, phi)
                    rhs = C @ textbook_sequence(mu, nu, sign * phi)
                    ov = np.vdot(rhs.ravel(), lhs.ravel())
                    ph = ov / abs(ov) if abs(ov) > 1e-12 else 1.0
                    if phase is None:
                        phase = ph
                    dev = max(dev, float(np.max(np.abs(lhs - phase * rhs))))
                if best is None or dev < best.deviation:
                    best = Relation(mu, nu, sign, a + b, complex(phase), dev)
    if best.deviation > 1e-12:
        raise RuntimeError(f"no local Pauli correction makes the {mu}{nu} sequence exact")
    return best


# ---------------------------------------------------------------------------
# gate programs


@dataclass(frozen=True)
class Gate:
    """Either a pi/4 entangling gate ``exp(i pi/4 s_a^j s_b^k)`` (``kind='pi4'``) or local unitaries."""

    kind: str
    qubits: tuple[int, ...]
    axes: str = ""
    ops: tuple = ()

    def local_ops(self) -> dict[int, np.ndarray]:
        return dict(self.ops)


def _local(ops: dict[int, np.ndarray]) -> Gate:
    return Gate("local", tuple(sorted(ops)), ops=tuple(sorted(ops.items(), key=lambda kv: kv[0])))


def term_program(j: int, k: int, mu: str, nu: str, phi: float) -> list[Gate]:
    """Gates for ``exp(i phi s_mu^j s_nu^k)`` on 0-based qubits, first gate first."""
    rel = decomposition_relation(mu, nu)
    Y = PAULI["Y"]
    prog = [
        _local({j: _exp_pauli(Y, -QUARTER)}),
        Gate("pi4", (j, k), mu + nu),
        _local({j: _exp_pauli(Y, rel.sign * phi)}),
        Gate("pi4", (j, k), mu + nu),
        _local({j: _exp_pauli(Y, QUARTER)}),
    ]
    corr = {q: PAULI[a] for q, a in zip((j, k), rel.correction) if a != "I"}
    if corr:
        prog.append(_local(corr))
    return prog


def swap_program(j: int, k: int) -> list[Gate]:
    """SWAP as ``exp(i pi/4 (XX + YY + ZZ))`` (three commuting pi/4 gates, exact up to phase)."""
    return [Gate("pi4", (j, k), "XX"), Gate("pi4", (j, k), "YY"), Gate("pi4", (j, k), "ZZ")]


def _pair_program(j: int, k: int, phis: list[tuple[str, str, float]], route: str) -> list[Gate]:
    """Terms on 1-based pair ``(j, k)``; ``route='swap'`` first walks ``j`` next to ``k``."""
    a, b = j - 1, k - 1
    prog: list[Gate] = []
    moves = []
    if route == "swap":
        moves = [(q, q + 1) for q in range(a, b - 1)]
        for q0, q1 in moves:
            prog.extend(swap_program(q0, q1))
        a = b - 1
    for mu, nu, phi in phis:
        if phi != 0.0:
            prog.extend(term_program(a, b, mu, nu, phi))
    for q0, q1 in reversed(moves):
        prog.extend(swap_program(q0, q1))
    return prog


def gate_time(gate: Gate, resource: SpinHamiltonian) -> float:
    if gate.kind != "pi4":
        return 0.0
    j, k = sorted(gate.qubits)
    g = resource.coefficient(two_body_word(resource.n_qubits, j + 1, k + 1))
    if g == 0.0:
        return math.inf
    return QUARTER / abs(g)


def _route(j: int, k: int, phis, resource: SpinHamiltonian, mode: str) -> str:
    if k == j + 1 or mode == "direct-ATA":
        return "direct"
    if mode == "nn-swap":
        return "swap"
    direct = sum(gate_time(gt, resource) for gt in _pair_program(j, k, phis, "direct"))
    swapped = sum(gate_time(gt, resource) for gt in _pair_program(j, k, phis, "swap"))
    return "swap" if swapped < direct else "direct"


def step_program(target: SpinHamiltonian, t_T: float, mode: str = "direct-ATA",
                 resource: SpinHamiltonian | None = None) -> list[Gate]:
    """One first-order Trotter step of ``exp(+i t_T H_XZ)``; terms ordered by pair, then XX, XZ, ZX, ZZ."""
    if mode not in MODES:
        raise ValueError(f"unknown DQC mode {mode!r}")
    if mode == "optimised" and resource is None:
        raise ValueError("the optimised routing needs the resource couplings")
    prog: list[Gate] = []
    for (j, k), vec in xz_couplings(target).items():
        phis = [(mu, nu, float(g) * t_T) for (mu, nu), g in zip(XZ_AXES, vec)]
        prog.extend(_pair_program(j, k, phis, _route(j, k, phis, resource, mode) if resource is not None
                                  else ("direct" if mode == "direct-ATA" or k == j + 1 else "swap")))
    return prog


def gate_unitary(gate: Gate) -> np.ndarray:
    return _exp_pauli(pair_pauli(gate.axes[0], gate.axes[1]), QUARTER)


def run_program(program: list[Gate], psi: np.ndarray, n_qubits: int) -> np.ndarray:
    for gate in program:
        if gate.kind == "pi4":
            psi = apply_two_qubit(gate_unitary(gate), gate.qubits[0], gate.qubits[1], psi, n_qubits)
        else:
            psi = apply_local(gate.local_ops(), psi, n_qubits)
    return psi


@dataclass
class DQCAccounting:
    mode: str
    n_T: int
    gates_per_step: int
    time_per_step: float
    swaps_per_step: int
    relations: dict = field(default_factory=dict)

    @property
    def total_time(self) -> float:
        return self.time_per_step * self.n_T

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n_T": self.n_T,
            "gates_per_step": self.gates_per_step,
            "time_per_step": self.time_per_step,
            "swaps_per_step": self.swaps_per_step,
            "total_time": self.total_time,
            "relations": self.relations,
        }


def dqc_accounting(target: SpinHamiltonian, resource: SpinHamiltonian, n_T: int = 1,
                   mode: str = "direct-ATA") -> DQCAccounting:
    """Entangling-gate count and time per Trotter step (local rotations are not charged)."""
    prog = step_program(target, 1.0 / max(n_T, 1), mode, resource)
    pi4 = [g for g in prog if g.kind == "pi4"]
    swaps = sum(1 for g in pi4 if g.axes == "YY")
    rel = {mu + nu: {"sign": decomposition_relation(mu, nu).sign,
                     "correction": decomposition_relation(mu, nu).correction} for mu, nu in XZ_AXES}
    return DQCAccounting(mode, n_T, len(pi4), float(sum(gate_time(g, resource) for g in pi4)), swaps, rel)


def run_dqc_baseline(
    target: SpinHamiltonian,
    t_F: float,
    n_T: int,
    mode: str = "direct-ATA",
    resource: SpinHamiltonian | None = None,
    psi0: np.ndarray | None = None,
) -> tuple[np.ndarray, DQCAccounting | None]:
    """Exact execution of ``n_T`` digital Trotter steps; accounting needs ``resource``."""
    if n_T < 1:
        raise ValueError("n_T must be at least 1")
    n = target.n_qubits
    if psi0 is None:
        psi0 = basis_state(n, 0)
    prog = step_program(target, t_F / n_T, mode, resource)
    psi = np.asarray(psi0, dtype=complex).copy()
    for _ in range(n_T):
        psi = run_program(prog, psi, n)
    acc = dqc_accounting(target, resource, n_T, mode) if resource is not None else None
    return psi, acc


def verify_decompositions() -> dict[str, Relation]:
    """Relations for the four XZ axis pairs, each checked to machine precision."""
    return {mu + nu: decomposition_relation(mu, nu) for mu, nu in XZ_AXES}


def naive_swap_check() -> float:
    """Distance (up to phase) of ``e^{i pi/4 XX} e^{i pi/4 YY}`` from SWAP; nonzero means it is not a SWAP."""
    u = _exp_pauli(pair_pauli("X", "X"), QUARTER) @ _exp_pauli(pair_pauli("Y", "Y"), QUARTER)
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    return phase_aligned_distance(u, swap)
