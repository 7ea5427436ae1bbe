"""Coherent noise channels and Monte Carlo fidelity estimates.

Noise enters inside the exponent of every entangling operation:

* pi/4 gates: ``exp(i pi/4 (1 + xi_D) P + i sum dB^j_g s_g^j)`` with ``xi_D ~ N(0, sigma_D)``;
* analog blocks: ``exp(i s H_I (t + delta) + i sum dB^j_g s_g^j)`` with jitter
  ``delta_s ~ N(0, r_s dt)`` (stepwise) or ``delta_b ~ N(0, r_b dt)`` (banged, free segments only).

Field noise ``dB ~ U(-r_U dt/2, r_U dt/2)`` is drawn independently per qubit, per axis, per block.
Rotation layers and banged pulse segments are ideal.

Each run owns the random stream ``SeedSequence([seed, run])`` and draws all of its
numbers at once in fixed block order, so results do not depend on how runs are batched.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import expm

from .dqc import Gate, pair_pauli, step_program
from .executor import CONVENTION, bdaqc_segments, run_bdaqc, run_sdaqc
from .pauli import PAULI, SpinHamiltonian, apply_local, dense_propagator, local_operator
from .schedule import AnalogBlock, Schedule

FIELD_AXES = ("X", "Y", "Z")
CHUNK = 250


@dataclass
class NoiseSpec:
    sigma_d: float = 0.009
    r_u: float = 0.002
    r_b: float = 0.9
    r_s: float | None = None
    dt: float = 0.004
    seed: int = 0
    runs: int = 1000

    def __post_init__(self):
        if self.r_s is None:
            self.r_s = 2 * self.r_b
        for name in ("sigma_d", "r_u", "r_b", "r_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")

    @classmethod
    def noiseless(cls, dt: float = 0.004, seed: int = 0, runs: int = 1) -> "NoiseSpec":
        return cls(0.0, 0.0, 0.0, 0.0, dt, seed, runs)

    @property
    def field_half_width(self) -> float:
        return self.r_u * self.dt / 2

    def jitter_std(self, mode: str) -> float:
        if mode == "sdaqc":
            return self.r_s * self.dt
        if mode == "bdaqc":
            return self.r_b * self.dt
        raise ValueError(f"no jitter defined for mode {mode!r}")

    def to_dict(self) -> dict:
        return asdict(self)


def run_rng(seed: int, run: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(run)]))


# ---------------------------------------------------------------------------
# dense single-draw channels (reference implementations)


def noisy_dqc_gate(axes: str, spec: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """One noisy ``exp(i pi/4 s_a s_b)`` as a 4x4 unitary (first qubit most significant)."""
    xi = rng.normal(0.0, spec.sigma_d) if spec.sigma_d > 0 else 0.0
    dB = rng.uniform(-spec.field_half_width, spec.field_half_width, size=(2, 3))
    G = math.pi / 4 * (1 + xi) * pair_pauli(axes[0], axes[1])
    for q in range(2):
        for g, axis in enumerate(FIELD_AXES):
            ops = [np.eye(2), np.eye(2)]
            ops[q] = PAULI[axis]
            G = G + dB[q, g] * np.kron(ops[0], ops[1])
    return expm(1j * G)


def noisy_analog_block(
    duration: float,
    spec: NoiseSpec,
    mode: str,
    rng: np.random.Generator,
    resource: SpinHamiltonian,
    sign: int = 1,
    convention: int = CONVENTION,
) -> np.ndarray:
    """One noisy analog block ``exp(i s H_I (t + delta) + i sum dB s)`` as a dense unitary."""
    if duration < 0:
        raise ValueError("duration must be non-negative")
    n = resource.n_qubits
    delta = rng.normal(0.0, spec.jitter_std(mode)) if spec.jitter_std(mode) > 0 else 0.0
    dB = rng.uniform(-spec.field_half_width, spec.field_half_width, size=(n, 3))
    G = convention * sign * (duration + delta) * resource.matrix()
    for q in range(n):
        for g, axis in enumerate(FIELD_AXES):
            G = G + dB[q, g] * local_operator({q: PAULI[axis]}, n)
    return expm(1j * G)


# ---------------------------------------------------------------------------
# batched kernels: states are (D, R) with one column per run


def _draws(n_runs_from: int, n_runs: int, spec: NoiseSpec, plan: list[str], n_qubits: int):
    """Per-run noise draws for a plan of block kinds ('gate', 'sdaqc', 'bdaqc')."""
    n_blocks = len(plan)
    n_field = 2 if plan and plan[0] == "gate" else n_qubits
    amp = np.empty((n_runs, n_blocks))
    field_ = np.empty((n_runs, n_blocks, n_field, 3))
    scale = spec.sigma_d if plan and plan[0] == "gate" else (spec.jitter_std(plan[0]) if plan else 0.0)
    for i in range(n_runs):
        rng = run_rng(spec.seed, n_runs_from + i)
        amp[i] = rng.normal(0.0, 1.0, size=n_blocks) * scale
        field_[i] = rng.uniform(-spec.field_half_width, spec.field_half_width, size=(n_blocks, n_field, 3))
    return amp, field_


def _flip_index(n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << n_qubits)
    shifts = n_qubits - 1 - np.arange(n_qubits)
    flips = idx[None, :] ^ (1 << shifts)[:, None]
    bits = (idx[None, :] >> shifts[:, None]) & 1
    return flips, bits


def _phi(x: np.ndarray) -> np.ndarray:
    """``(1 - e^{-ix}) / (ix)`` with the removable singularity filled in."""
    small = np.abs(x) < 1e-8
    safe = np.where(small, 1.0, x)
    return np.where(small, 1 - 0.5j * x, (1 - np.exp(-1j * safe)) / (1j * safe))


def _apply_field_dressed(psi, a, dB, flips, bits):
    """``exp(i Btilde) psi`` where ``Btilde`` is the field term averaged over ``exp(i a s)`` (first-order Magnus).

    ``a`` (D, R) holds the diagonal block phases and ``dB`` (R, N, 3) the field strengths.
    """
    zsign = 1 - 2 * bits  # (N, D): +1 for |0>, -1 for |1>

    def apply_B(v):
        out = np.zeros_like(v)
        for q in range(flips.shape[0]):
            f = flips[q]
            kern = _phi(a - a[f])  # (D, R)
            # X: <m|X|m^q> = 1, Y: <m|Y|m^q> = i * zsign... computed from bit of m
            coeff = dB[:, q, 0][None, :] + 1j * (-zsign[q])[:, None] * dB[:, q, 1][None, :]
            out += coeff * kern * v[f]
            out += zsign[q][:, None] * dB[:, q, 2][None, :] * v
        return out

    b1 = apply_B(psi)
    b2 = apply_B(b1)
    b3 = apply_B(b2)
    return psi + 1j * b1 - 0.5 * b2 - (1j / 6) * b3


def _noisy_free_block(psi, diag, base_t, sign, delta, dB, flips, bits):
    """``exp(i sign diag (base_t + delta) + i sum dB s) psi`` for a Z-diagonal resource."""
    a = sign * diag[:, None] * (base_t + delta)[None, :]
    psi = _apply_field_dressed(psi, a, dB, flips, bits)
    return np.exp(1j * a) * psi


def _apply_two_qubit_batched(us: np.ndarray, j: int, k: int, psi: np.ndarray, n_qubits: int) -> np.ndarray:
    """Apply a different 4x4 unitary ``us[r]`` to each column ``r``."""
    R = psi.shape[1]
    t = psi.reshape((2,) * n_qubits + (R,))
    t = np.moveaxis(t, [j, k], [0, 1]).reshape(4, -1, R)
    t = np.einsum("rxy,ymr->xmr", us, t)
    t = np.moveaxis(t.reshape((2, 2) + (2,) * (n_qubits - 2) + (R,)), [0, 1], [j, k])
    return np.ascontiguousarray(t).reshape(psi.shape)


_GATE_FIELD = np.array([[np.kron(PAULI[a], np.eye(2)) for a in FIELD_AXES],
                        [np.kron(np.eye(2), PAULI[a]) for a in FIELD_AXES]])


def _batched_gate_unitaries(axes: str, xi: np.ndarray, dB: np.ndarray) -> np.ndarray:
    G = (math.pi / 4) * (1 + xi)[:, None, None] * pair_pauli(axes[0], axes[1])[None]
    G = G + np.einsum("rqg,qgxy->rxy", dB, _GATE_FIELD)
    w, v = np.linalg.eigh(G)
    return np.einsum("rxk,rk,ryk->rxy", v, np.exp(1j * w), v.conj())


def _require_diagonal(resource: SpinHamiltonian) -> np.ndarray:
    if not resource.is_z_diagonal:
        raise ValueError("the batched noise kernel needs a Z-diagonal (Ising) resource")
    return resource.diagonal()


def noisy_sdaqc(schedule: Schedule, psi0: np.ndarray, spec: NoiseSpec, run0: int, n_runs: int,
                convention: int = CONVENTION) -> np.ndarray:
    n = schedule.n_qubits
    diag = _require_diagonal(schedule.base)
    blocks = [b for b in schedule.blocks]
    n_analog = sum(1 for b in blocks if isinstance(b, AnalogBlock))
    delta, dB = _draws(run0, n_runs, spec, ["sdaqc"] * n_analog, n)
    flips, bits = _flip_index(n)
    psi = np.repeat(np.asarray(psi0, dtype=complex)[:, None], n_runs, axis=1)
    i = 0
    for b in blocks:
        if isinstance(b, AnalogBlock):
            psi = _noisy_free_block(psi, diag, b.duration, convention * b.sign, delta[:, i], dB[:, i], flips, bits)
            i += 1
        else:
            psi = apply_local(b.ops(), psi, n)
    return psi


def bdaqc_propagators(schedule: Schedule, dt: float, convention: int = CONVENTION) -> list:
    """Banged segments as ``(width, None)`` for free evolution or ``(width, U)`` for an ideal pulse segment."""
    cache: dict = {}
    out = []
    for width, H in bdaqc_segments(schedule, dt, convention=convention):
        if H is None:
            out.append((width, None))
            continue
        key = (tuple(sorted(H.items())), width)
        if key not in cache:
            cache[key] = dense_propagator(H.matrix(), width, sign=-1)
        out.append((width, cache[key]))
    return out


def noisy_bdaqc(schedule: Schedule, psi0: np.ndarray, spec: NoiseSpec, run0: int, n_runs: int,
                convention: int = CONVENTION, dt: float | None = None, segments: list | None = None) -> np.ndarray:
    """Banged protocol with jitter on the free segments; ``dt`` (pulse width) defaults to ``spec.dt``."""
    n = schedule.n_qubits
    diag = _require_diagonal(schedule.base)
    if segments is None:
        segments = bdaqc_propagators(schedule, dt or spec.dt, convention)
    n_free = sum(1 for _, U in segments if U is None)
    delta, dB = _draws(run0, n_runs, spec, ["bdaqc"] * n_free, n)
    flips, bits = _flip_index(n)
    psi = np.repeat(np.asarray(psi0, dtype=complex)[:, None], n_runs, axis=1)
    i = 0
    for width, U in segments:
        if U is None:
            psi = _noisy_free_block(psi, diag, width, convention, delta[:, i], dB[:, i], flips, bits)
            i += 1
        else:
            psi = U @ psi
    return psi


def noisy_dqc(program: list[Gate], n_T: int, psi0: np.ndarray, spec: NoiseSpec, run0: int, n_runs: int,
              n_qubits: int) -> np.ndarray:
    gates_per_step = sum(1 for g in program if g.kind == "pi4")
    xi, dB = _draws(run0, n_runs, spec, ["gate"] * (gates_per_step * n_T), n_qubits)
    psi = np.repeat(np.asarray(psi0, dtype=complex)[:, None], n_runs, axis=1)
    i = 0
    for _ in range(n_T):
        for g in program:
            if g.kind == "pi4":
                us = _batched_gate_unitaries(g.axes, xi[:, i], dB[:, i])
                psi = _apply_two_qubit_batched(us, g.qubits[0], g.qubits[1], psi, n_qubits)
                i += 1
            else:
                psi = apply_local(g.local_ops(), psi, n_qubits)
    return psi


# ---------------------------------------------------------------------------
# Monte Carlo driver


@dataclass
class MCResult:
    mode: str
    n_T: int
    mean: float
    stderr: float
    fidelities: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "n_T": self.n_T, "mean_fidelity": self.mean, "stderr": self.stderr}


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DAQC_THREADS", "1")))
    except ValueError:
        return 1


def run_fidelities(mode: str, spec: NoiseSpec, psi0: np.ndarray, psi_exact: np.ndarray, *,
                   schedule: Schedule | None = None, program: list[Gate] | None = None,
                   n_T: int = 1, n_qubits: int | None = None, threads: int | None = None,
                   dt: float | None = None) -> np.ndarray:
    """Per-run fidelities for one protocol, in run-index order.

    Runs are processed in chunks; chunks may run on a thread pool but each
    run's draws depend only on ``(seed, run)`` and results are concatenated in order.
    """
    runs = spec.runs
    chunks = [(r0, min(CHUNK, runs - r0)) for r0 in range(0, runs, CHUNK)]
    segments = bdaqc_propagators(schedule, dt or spec.dt) if mode == "bdaqc" else None

    def work(chunk):
        r0, m = chunk
        if mode == "sdaqc":
            psi = noisy_sdaqc(schedule, psi0, spec, r0, m)
        elif mode == "bdaqc":
            psi = noisy_bdaqc(schedule, psi0, spec, r0, m, segments=segments)
        elif mode == "dqc":
            psi = noisy_dqc(program, n_T, psi0, spec, r0, m, n_qubits)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        return np.abs(psi_exact.conj() @ psi) ** 2

    n_workers = threads or _threads()
    if n_workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    return np.concatenate(parts)


def summarize(mode: str, n_T: int, fids: np.ndarray) -> MCResult:
    mean = float(np.mean(fids))
    stderr = float(np.std(fids, ddof=1) / math.sqrt(len(fids))) if len(fids) > 1 else 0.0
    return MCResult(mode, n_T, mean, stderr, fids)


def monte_carlo_fidelity(
    target: SpinHamiltonian,
    resource: SpinHamiltonian,
    t_F: float,
    n_T_values,
    spec: NoiseSpec,
    psi0: np.ndarray,
    modes=("sdaqc", "bdaqc", "dqc"),
    dqc_mode: str = "direct-ATA",
    compiler=None,
    dt: float | None = None,
) -> list[MCResult]:
    """Mean fidelity with the exact state ``exp(+i t_F H) psi0`` for each (n_T, mode)."""
    from .pauli import evolve
    from .xz import compile_xz

    compiler = compiler or (lambda n_T: compile_xz(target, resource, t_F, n_T))
    psi_exact = evolve(target, t_F, np.asarray(psi0, dtype=complex))
    out = []
    for n_T in n_T_values:
        schedule = compiler(n_T) if {"sdaqc", "bdaqc"} & set(modes) else None
        for mode in modes:
            if mode == "dqc":
                prog = step_program(target, t_F / n_T, dqc_mode, resource)
                fids = run_fidelities(mode, spec, psi0, psi_exact, program=prog, n_T=n_T, n_qubits=target.n_qubits)
            else:
                fids = run_fidelities(mode, spec, psi0, psi_exact, schedule=schedule, dt=dt)
            out.append(summarize(mode, n_T, fids))
    return out


def ideal_fidelity(mode: str, schedule: Schedule | None, psi0, psi_exact, dt: float | None = None,
                   program=None, n_T: int = 1, n_qubits: int | None = None) -> float:
    """Noise-free reference using the plain executors."""
    from .dqc import run_program

    if mode == "sdaqc":
        psi = run_sdaqc(schedule, psi0)
    elif mode == "bdaqc":
        psi = run_bdaqc(schedule, psi0, dt)
    else:
        psi = np.asarray(psi0, dtype=complex)
        for _ in range(n_T):
            psi = run_program(program, psi, n_qubits)
    return float(abs(np.vdot(psi_exact, psi)) ** 2)


def write_raw_csv(path, results: list[MCResult]) -> None:
    """Per-run fidelities, one row per (mode, n_T, run)."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mode", "n_T", "run", "fidelity"])
        for res in results:
            for r, f in enumerate(res.fidelities):
                w.writerow([res.mode, res.n_T, r, repr(float(f))])
    os.replace(tmp, path)
