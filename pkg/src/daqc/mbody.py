"""Nearest-neighbour Hamiltonians with up to M-body terms from conjugated ZZ blocks.

A piece of the construction is

    R^(l) exp(-i O_c^(k)) H_ZZ(g) exp(+i O_c^(k)) R^(l)

where ``O_c^(k) = sum_j Phi_j^(k) X_j X_{j+1}`` runs over the generator set ``c``
(pairs starting every ``period`` sites), ``H_ZZ(g)`` is a chain Ising model with
free strengths and ``R^(l)`` is a layer of single-qubit reflections.  With all
angles fixed the Pauli coefficients of the sum of pieces are linear in the
strengths, so matching a target is a least-squares problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RankDeficient
from .ising import compile_ising
from .models import mbody_term_count, mbody_words, two_body_word
from .pauli import AXES, SpinHamiltonian, conjugate_by_pauli_rotation, support
from .schedule import QubitRotation, RotationLayer, Schedule, reflection_layer

RESIDUAL_TOL = 1e-8
N_PHASE_SETS = 4
# 3^M layers make every four-site block of the map square and badly conditioned;
# twice as many keeps the strengths (and the Trotter error) an order of magnitude smaller
ROTATION_OVERSAMPLING = 2
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
HADAMARD_AXIS = (math.sin(math.pi / 4), 0.0, math.cos(math.pi / 4))


# ---------------------------------------------------------------------------
# generator sets and phases


def set_period(body: int) -> int:
    """Spacing of XX generators inside one set (0 means no conjugation is needed)."""
    if body not in (2, 3, 4):
        raise ValueError("only M in {2, 3, 4} is supported")
    return {2: 0, 3: 3, 4: 2}[body]


def generator_pairs(n_qubits: int, period: int, c: int) -> list[int]:
    """1-based first qubits ``j`` of the XX generators ``(j, j+1)`` in set ``c`` (0-based)."""
    return [j for j in range(c + 1, n_qubits, period)]


def default_phases(n_qubits: int) -> np.ndarray:
    """``phases[k-1, j-1]``: ``2 pi k / 3`` on sites 1, 2 (mod 4) and ``2 pi k / 5`` on sites 3, 4 (mod 4)."""
    k = np.arange(1, N_PHASE_SETS + 1)[:, None]
    j = np.arange(1, n_qubits + 1)[None, :]
    return np.where((j - 1) % 4 < 2, 2 * np.pi * k / 3, 2 * np.pi * k / 5)


def oxx_word(n_qubits: int, j: int) -> str:
    return two_body_word(n_qubits, j, j + 1, "X", "X")


def conjugated_block(H_zz: SpinHamiltonian, generators: dict[int, float]) -> SpinHamiltonian:
    """``exp(-i O) H exp(+i O)`` with ``O = sum_j Phi_j X_j X_{j+1}`` (1-based ``j`` -> ``Phi_j``)."""
    firsts = sorted(generators)
    for a, b in zip(firsts[:-1], firsts[1:]):
        if b - a < 2:
            raise ValueError(f"XX generators starting at {a} and {b} overlap")
    out = H_zz
    for j in firsts:
        out = conjugate_by_pauli_rotation(out, oxx_word(H_zz.n_qubits, j), generators[j])
    return out.pruned(1e-15)


# ---------------------------------------------------------------------------
# rotation layers


def sphere_points(count: int) -> np.ndarray:
    """Fibonacci-spiral points on the unit sphere."""
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(1.0 - z * z)
    phi = GOLDEN_ANGLE * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def default_rotation_axes(n_qubits: int, count: int) -> np.ndarray:
    """``axes[l, q]``: qubit ``q`` walks the spiral with its own stride so layers are not correlated."""
    pts = sphere_points(count)
    strides = [s for s in range(1, count) if math.gcd(s, count) == 1]
    axes = np.empty((count, n_qubits, 3))
    for q in range(n_qubits):
        stride = strides[(5 * q + 1) % len(strides)]
        idx = (np.arange(count) * stride + 7 * q) % count
        axes[:, q, :] = pts[idx]
    return axes


def reflection_transfer(axes: np.ndarray) -> np.ndarray:
    """``(n.sigma) sigma_a (n.sigma) = sum_b T[a, b] sigma_b`` with ``T = 2 n n^T - 1``."""
    outer = 2.0 * axes[..., :, None] * axes[..., None, :]
    return outer - np.eye(3)


# ---------------------------------------------------------------------------
# the linear map


@dataclass
class MBodyPlan:
    n_qubits: int
    body: int
    period: int
    phases: np.ndarray
    axes: np.ndarray
    words: list[str]
    columns: list[tuple[int, int, int, int]]
    A: np.ndarray
    strengths: np.ndarray | None = None
    rank: int = 0
    residual: float = float("nan")
    warnings: list[str] = field(default_factory=list)

    @property
    def n_rotations(self) -> int:
        return self.axes.shape[0]

    @property
    def n_sets(self) -> int:
        return max(1, self.period)

    def set_generators(self, c: int, k: int) -> dict[int, float]:
        if self.period == 0:
            return {}
        return {j: float(self.phases[k, j - 1]) for j in generator_pairs(self.n_qubits, self.period, c)}

    def piece_strengths(self) -> dict[tuple[int, int, int], np.ndarray]:
        """Bond strengths per ``(l, c, k)``, skipping pieces that are identically zero."""
        out = {}
        if self.strengths is None:
            return out
        nb = self.n_qubits - 1
        for start in range(0, len(self.columns), nb):
            l, c, k, _ = self.columns[start]
            g = self.strengths[start:start + nb]
            if np.any(np.abs(g) > 1e-14):
                out[(l, c, k)] = g
        return out

    def reconstruct(self) -> SpinHamiltonian:
        coeffs = self.A @ self.strengths
        return SpinHamiltonian(self.n_qubits, dict(zip(self.words, coeffs))).pruned(1e-14)

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "body": self.body,
            "period": self.period,
            "phases": self.phases.tolist(),
            "rotation_axes": self.axes.tolist(),
            "n_unknowns": len(self.columns),
            "n_equations": len(self.words),
            "rank": self.rank,
            "residual": self.residual,
            "n_pieces": len(self.piece_strengths()),
            "warnings": list(self.warnings),
        }


def _word_rows(n_qubits: int, body: int) -> dict[tuple[int, int], int]:
    """First row of each ``(start, size)`` block in the :func:`mbody_words` ordering."""
    rows, r = {}, 0
    for m in range(2, body + 1):
        for start in range(n_qubits - m + 1):
            rows[(start, m)] = r
            r += 3**m
    return rows


def build_linear_map(
    n_qubits: int,
    body: int = 4,
    phases: np.ndarray | None = None,
    axes: np.ndarray | None = None,
    phase_sets: int = N_PHASE_SETS,
    n_rotations: int | None = None,
) -> MBodyPlan:
    """Matrix ``A`` from piece strengths to the Pauli coefficients of contiguous words."""
    if n_qubits < body:
        raise ValueError(f"need N >= M (got N={n_qubits}, M={body})")
    period = set_period(body)
    if phases is None:
        phases = default_phases(n_qubits)
    phases = np.asarray(phases, dtype=float)[:phase_sets]
    if axes is None:
        if n_rotations is None:
            n_rotations = ROTATION_OVERSAMPLING * 3**body
        axes = default_rotation_axes(n_qubits, n_rotations)
    axes = np.asarray(axes, dtype=float)
    norms = np.linalg.norm(axes, axis=-1)
    if np.max(np.abs(norms - 1.0)) > 1e-12:
        raise ValueError("rotation axes must be unit vectors")
    L = axes.shape[0]
    words = mbody_words(n_qubits, body)
    rows = _word_rows(n_qubits, body)
    transfer = reflection_transfer(axes)  # (L, N, 3, 3)

    n_sets = max(1, period)
    k_count = phases.shape[0] if period else 1
    columns = []
    blocks = []
    for c in range(n_sets):
        for k in range(k_count):
            gens = {} if period == 0 else {j: float(phases[k, j - 1]) for j in generator_pairs(n_qubits, period, c)}
            for j in range(1, n_qubits):
                base = conjugated_block(SpinHamiltonian(n_qubits, {two_body_word(n_qubits, j, j + 1): 1.0}), gens)
                col = np.zeros((len(words), L))
                for w, coeff in base.items():
                    sites = support(w)
                    start, m = sites[0], len(sites)
                    if m > body or sites[-1] - start + 1 != m:
                        raise RankDeficient(f"conjugated word {w} leaves the contiguous M-body space")
                    vec = np.full((L, 1), coeff)
                    for q in sites:
                        a = AXES.index(w[q])
                        vec = (vec[:, :, None] * transfer[:, q, a, None, :]).reshape(L, -1)
                    r0 = rows[(start, m)]
                    col[r0:r0 + 3**m, :] += vec.T
                blocks.append(((c, k, j), col))
    A = np.empty((len(words), L * len(blocks)))
    idx = 0
    for l in range(L):
        for (c, k, j), col in blocks:
            A[:, idx] = col[:, l]
            columns.append((l, c, k, j))
            idx += 1
    return MBodyPlan(n_qubits, body, period, phases, axes, words, columns, A)


def solve_plan(plan: MBodyPlan, target: SpinHamiltonian) -> MBodyPlan:
    """Minimum-norm strengths reproducing ``target``; raises if the map cannot reach it."""
    allowed = set(plan.words)
    for w, c in target.items():
        if c != 0 and w not in allowed:
            raise ValueError(f"target term {w} is not a contiguous term of size <= {plan.body}")
    b = np.array([target.coefficient(w) for w in plan.words])
    x, _, rank, sv = np.linalg.lstsq(plan.A, b, rcond=None)
    plan.rank = int(rank)
    plan.strengths = x
    plan.residual = float(np.max(np.abs(plan.A @ x - b))) if b.size else 0.0
    scale = max(1.0, float(np.max(np.abs(b)))) if b.size else 1.0
    if plan.residual > RESIDUAL_TOL * scale:
        raise RankDeficient(
            f"rotation set spans rank {rank} of {len(plan.words)} target terms (residual {plan.residual:.3e}); "
            "choose different rotation axes or phases"
        )
    if rank < len(plan.words):
        plan.warnings.append(f"map rank {rank} < {len(plan.words)} terms; target happens to lie in its range")
    return plan


def coverage(H: SpinHamiltonian, n_qubits: int, body: int = 4) -> dict[tuple[int, int], bool]:
    """Whether each contiguous window ``(start, size)`` (0-based start) carries a term of ``H``."""
    hit = {(s, m): False for m in range(2, body + 1) for s in range(n_qubits - m + 1)}
    for w, c in H.items():
        if abs(c) < 1e-14:
            continue
        sites = support(w)
        if sites and sites[-1] - sites[0] + 1 == len(sites) and (sites[0], len(sites)) in hit:
            hit[(sites[0], len(sites))] = True
    return hit


def assemble_H0(n_qubits: int, strengths: dict[tuple[int, int], np.ndarray], phases: np.ndarray | None = None,
                body: int = 4) -> SpinHamiltonian:
    """``sum_k sum_c exp(-i O_c^(k)) H_ZZ^(c,k) exp(+i O_c^(k))`` for bond strengths keyed by ``(c, k)``."""
    period = set_period(body)
    if phases is None:
        phases = default_phases(n_qubits)
    total = SpinHamiltonian(n_qubits)
    for (c, k), g in strengths.items():
        H = SpinHamiltonian(n_qubits, {two_body_word(n_qubits, j, j + 1): float(g[j - 1]) for j in range(1, n_qubits)})
        gens = {} if period == 0 else {j: float(phases[k, j - 1]) for j in generator_pairs(n_qubits, period, c)}
        total = total + conjugated_block(H, gens)
    return total.pruned(1e-15)


# ---------------------------------------------------------------------------
# schedule


def _is_chain_zz(target: SpinHamiltonian) -> bool:
    for w, c in target.items():
        if c == 0:
            continue
        s = support(w)
        if len(s) != 2 or s[1] - s[0] != 1 or w[s[0]] != "Z" or w[s[1]] != "Z":
            return False
    return True


def _reduce_phase(phi: float) -> float:
    """``exp(-i phi XX)`` only depends on ``phi`` modulo ``pi`` up to a sign."""
    return phi - math.pi * round(phi / math.pi)


def _oxx_schedule(n_qubits: int, gens: dict[int, float], sign: int, resource: SpinHamiltonian) -> Schedule:
    """``exp(-i sign O)`` as Hadamard-type reflections around a compiled chain ZZ evolution."""
    zz = SpinHamiltonian(n_qubits, {two_body_word(n_qubits, j, j + 1): -sign * _reduce_phase(p)
                                    for j, p in gens.items()})
    had = reflection_layer({q: HADAMARD_AXIS for q in range(n_qubits)})
    sched = Schedule(n_qubits, resource)
    sched.add_layer(had)
    sched.extend(compile_ising(zz, resource, 1.0))
    sched.add_layer(had)
    return sched


def compile_mbody(
    target: SpinHamiltonian,
    resource: SpinHamiltonian,
    t_F: float,
    n_T: int = 1,
    body: int = 4,
    phases: np.ndarray | None = None,
    axes: np.ndarray | None = None,
    plan: MBodyPlan | None = None,
    symmetrized: bool = False,
) -> Schedule:
    """Trotter schedule for ``exp(+i t_F H_target)`` built from rotated, conjugated chain ZZ pieces.

    With ``symmetrized`` each step runs the pieces for half the step time and
    then again in reverse order, which keeps the analog time per step unchanged.
    """
    if n_T < 1:
        raise ValueError("n_T must be at least 1")
    N = target.n_qubits
    if _is_chain_zz(target):
        sched = compile_ising(target, resource, t_F)
        sched.meta.update({"compiler": "mbody", "shortcut": "ising", "n_T": n_T})
        return sched
    if plan is None:
        plan = build_linear_map(N, body, phases, axes)
    solve_plan(plan, target)
    t_T = t_F / n_T
    t_piece = t_T / 2 if symmetrized else t_T

    oxx_cache: dict[tuple[int, int], tuple[Schedule, Schedule]] = {}
    pieces = []
    for (l, c, k), g in plan.piece_strengths().items():
        piece = Schedule(N, resource)
        refl = RotationLayer({q: QubitRotation(tuple(plan.axes[l, q]), math.pi) for q in range(N)})
        gens = plan.set_generators(c, k)
        piece.add_layer(refl)
        if gens:
            if (c, k) not in oxx_cache:
                # applied first: exp(+i O); applied last: exp(-i O)
                oxx_cache[(c, k)] = (_oxx_schedule(N, gens, -1, resource), _oxx_schedule(N, gens, +1, resource))
            piece.extend(oxx_cache[(c, k)][0])
        zz = SpinHamiltonian(N, {two_body_word(N, j, j + 1): float(g[j - 1]) for j in range(1, N)})
        piece.extend(compile_ising(zz, resource, t_piece))
        if gens:
            piece.extend(oxx_cache[(c, k)][1])
        piece.add_layer(refl)
        pieces.append(piece)

    step = Schedule(N, resource)
    for piece in pieces + (pieces[::-1] if symmetrized else []):
        step.extend(piece)
    sched = Schedule(N, resource, report=plan, meta={
        "compiler": "mbody", "t_F": t_F, "n_T": n_T, "body": body, "symmetrized": symmetrized,
    })
    for _ in range(n_T):
        sched.mark_step()
        sched.blocks.extend(step.blocks)
    return sched


# ---------------------------------------------------------------------------
# block counts


def block_formula(body: int) -> tuple[float, float]:
    """``(a(M), b(M))`` of the closed-form count ``a(M) N + b(M)``."""
    a = 9.0 / 4.0 * (3 ** (body - 1) - 3)
    b = 3 ** (body - 1) / 2.0 * (1.5 - body)
    return a, b


def count_blocks(body: int, n_qubits: int, seed: int = 0) -> dict:
    """Closed-form count next to the counts of an actually assembled plan for a random target."""
    a, b = block_formula(body)
    from .models import build_ising, build_mbody_target

    plan = build_linear_map(n_qubits, body)
    target = build_mbody_target(n_qubits, body, seed=seed)
    resource = build_ising(n_qubits, 1.0, "NN")
    sched = compile_mbody(target, resource, 1.0, 1, body, plan=plan)
    pieces = plan.piece_strengths()
    return {
        "body": body,
        "n_qubits": n_qubits,
        "formula": a * n_qubits + b,
        "a": a,
        "b": b,
        "stated_four_body": 117 * n_qubits - 306 if body == 4 else None,
        "n_terms": mbody_term_count(n_qubits, body),
        "n_strength_parameters": len(plan.columns),
        "n_pieces": len(pieces),
        "n_analog_blocks": sched.n_analog,
        "rank": plan.rank,
    }
