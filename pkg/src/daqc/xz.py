"""Two-body XZ targets from four rotated ZZ evolutions per Trotter step.

Conjugating ``Z_j Z_k`` with the reflections ``R_w = cos(theta_w/2) Z + sin(theta_w/2) X``
gives ``(C_j Z + S_j X)(C_k Z + S_k X)``, so four angle sets ``s = 1..4``
with ZZ strengths ``g^(s)_jk`` reproduce every ``g^{mu nu}_jk`` through a 4x4
linear system per pair (rows XX, XZ, ZX, ZZ; columns s).
"""
from __future__ import annotations

import math

import numpy as np

from .errors import SingularPairSystem
from .ising import compile_ising
from .models import XZ_AXES, pair_list, two_body_word
from .pauli import SpinHamiltonian, conjugate_local, support
from .schedule import RotationLayer, Schedule, reflection_layer

N_SETS = 4
PAIR_COND_MAX = 1e8
SYMMETRIC_ORDER = (0, 1, 2, 3, 3, 2, 1, 0)


def default_angles(n_qubits: int) -> np.ndarray:
    """``theta[s-1, w-1] = s pi w / (2 (w + 1))``."""
    if n_qubits < 2:
        raise ValueError("need at least two qubits")
    s = np.arange(1, N_SETS + 1)[:, None]
    w = np.arange(1, n_qubits + 1)[None, :]
    return s * np.pi * w / (2.0 * (w + 1))


def pair_matrix(angles: np.ndarray, j: int, k: int) -> np.ndarray:
    """4x4 map from set strengths ``g^(s)`` to ``(g^XX, g^XZ, g^ZX, g^ZZ)`` for 1-based pair ``(j, k)``."""
    tj, tk = angles[:, j - 1], angles[:, k - 1]
    Sj, Cj, Sk, Ck = np.sin(tj), np.cos(tj), np.sin(tk), np.cos(tk)
    return np.array([Sj * Sk, Sj * Ck, Cj * Sk, Cj * Ck])


def rotation_layer(angles: np.ndarray, s: int) -> RotationLayer:
    """Reflection layer of set ``s`` (0-based) on every qubit."""
    row = angles[s]
    return reflection_layer({q: (math.sin(th / 2), 0.0, math.cos(th / 2)) for q, th in enumerate(row)})


def xz_couplings(target: SpinHamiltonian) -> dict[tuple[int, int], np.ndarray]:
    """Per-pair ``(g^XX, g^XZ, g^ZX, g^ZZ)`` of an XZ target (1-based pairs)."""
    N = target.n_qubits
    out: dict[tuple[int, int], np.ndarray] = {}
    allowed = {two_body_word(N, j, k, mu, nu) for j, k in pair_list(N) for mu, nu in XZ_AXES}
    for w, c in target.items():
        if c != 0 and support(w) and w not in allowed:
            raise ValueError(f"term {w} is not an XX/XZ/ZX/ZZ pair coupling")
    for j, k in pair_list(N):
        vec = np.array([target.coefficient(two_body_word(N, j, k, mu, nu)) for mu, nu in XZ_AXES])
        if np.any(vec != 0):
            out[(j, k)] = vec
    return out


def check_angles(angles: np.ndarray, pairs) -> dict[tuple[int, int], float]:
    """Condition number of every pair system; raises if any exceeds the limit."""
    conds = {}
    for j, k in pairs:
        A = pair_matrix(angles, j, k)
        cond = float(np.linalg.cond(A))
        if not np.isfinite(cond) or cond > PAIR_COND_MAX:
            raise SingularPairSystem(f"pair ({j},{k}) system is singular for the chosen angles (cond={cond:.3g})")
        conds[(j, k)] = cond
    return conds


def solve_pair_strengths(angles: np.ndarray, couplings: dict[tuple[int, int], np.ndarray]) -> dict:
    """``g^(s)_jk`` for each pair, with the reconstruction residual checked."""
    check_angles(angles, couplings.keys())
    out = {}
    for (j, k), rhs in couplings.items():
        A = pair_matrix(angles, j, k)
        g = np.linalg.solve(A, rhs)
        if np.max(np.abs(A @ g - rhs)) > 1e-10 * max(1.0, np.max(np.abs(rhs))):
            raise SingularPairSystem(f"pair ({j},{k}) solve residual too large")
        out[(j, k)] = g
    return out


def set_hamiltonians(n_qubits: int, strengths: dict) -> list[SpinHamiltonian]:
    """The four ZZ Hamiltonians ``H_ZZ^(s)``."""
    return [
        SpinHamiltonian(n_qubits, {two_body_word(n_qubits, j, k): float(g[s]) for (j, k), g in strengths.items()})
        for s in range(N_SETS)
    ]


def reconstruct_xz(angles: np.ndarray, parts: list[SpinHamiltonian]) -> SpinHamiltonian:
    """``sum_s R^(s) H^(s) R^(s)`` expanded in the Pauli basis."""
    n = parts[0].n_qubits
    total = SpinHamiltonian(n)
    for s, H in enumerate(parts):
        total = total + conjugate_local(H, rotation_layer(angles, s).ops())
    return total.pruned(1e-13)


def compile_xz(
    target: SpinHamiltonian,
    resource: SpinHamiltonian,
    t_F: float,
    n_T: int,
    angles: np.ndarray | None = None,
    symmetrized: bool = False,
    allow_fallback: bool = False,
    allow_sign_inversion: bool = True,
) -> Schedule:
    """First-order (or symmetrised) Trotter schedule for ``exp(+i t_F H_XZ)``."""
    if n_T < 1:
        raise ValueError("n_T must be at least 1")
    N = target.n_qubits
    if angles is None:
        angles = default_angles(N)
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (N_SETS, N):
        raise ValueError(f"angle table must have shape (4, {N})")
    couplings = xz_couplings(target)
    t_T = t_F / n_T
    if couplings and all(not np.any(vec[:3]) for vec in couplings.values()):
        # a pure ZZ target commutes with itself: one exact Ising schedule per step
        sub = compile_ising(target, resource, t_T, allow_fallback=allow_fallback,
                            allow_sign_inversion=allow_sign_inversion)
        sched = Schedule(N, resource, meta={"compiler": "xz", "shortcut": "ising", "t_F": t_F, "n_T": n_T,
                                            "symmetrized": symmetrized, "angles": angles.tolist()})
        for _ in range(n_T):
            sched.mark_step()
            sched.extend(sub)
        sched.report = XZReport(angles, {}, {0: sub.report}, {})
        return sched
    strengths = solve_pair_strengths(angles, couplings)
    parts = set_hamiltonians(N, strengths)
    order = SYMMETRIC_ORDER if symmetrized else tuple(range(N_SETS))
    t_block = t_T / 2 if symmetrized else t_T
    subs = {}
    for s in set(order):
        subs[s] = compile_ising(parts[s], resource, t_block, allow_fallback=allow_fallback,
                                allow_sign_inversion=allow_sign_inversion)
    layers = [rotation_layer(angles, s) for s in range(N_SETS)]

    sched = Schedule(N, resource, meta={
        "compiler": "xz", "t_F": t_F, "n_T": n_T, "symmetrized": symmetrized,
        "angles": angles.tolist(),
    })
    for _ in range(n_T):
        sched.mark_step()
        for s in order:
            sched.add_layer(layers[s])
            sched.extend(subs[s])
            sched.add_layer(layers[s])
    sched.report = XZReport(angles, strengths, {s: subs[s].report for s in subs}, check_angles(angles, couplings))
    return sched


class XZReport:
    def __init__(self, angles, strengths, set_reports, conditions):
        self.angles = angles
        self.strengths = strengths
        self.set_reports = set_reports
        self.conditions = conditions

    def blocks_per_step(self) -> int:
        return sum(r.n_blocks for r in self.set_reports.values())

    def to_dict(self) -> dict:
        return {
            "angles": np.asarray(self.angles).tolist(),
            "strengths": {f"{j},{k}": g.tolist() for (j, k), g in self.strengths.items()},
            "pair_conditions": {f"{j},{k}": c for (j, k), c in self.conditions.items()},
            "sets": {str(s + 1): r.to_dict() for s, r in self.set_reports.items()},
            "blocks_per_step": self.blocks_per_step(),
        }
