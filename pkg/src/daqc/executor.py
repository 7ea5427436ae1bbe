"""State-vector execution of schedules in the stepwise (sDAQC) and banged (bDAQC) protocols.

Analog blocks evolve as ``exp(+i CONVENTION * H_I * t)``.  For the banged
protocol the resource is written as a physical generator ``K_I = -CONVENTION * H_I``
(so that ``exp(-i K_I t)`` is the same analog block) and each rotation layer
becomes a rectangular pulse of width ``dt`` whose generator ``G`` satisfies
``exp(-i G dt) = layer``; during a pulse the system evolves under ``K_I + G``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ExecutionError, GeneratorUndefined, NegativeDuration, PulseOverlap
from .pauli import SpinHamiltonian, apply_local, commutator, dense_propagator, evolve, monomial_layer
from .schedule import AnalogBlock, RotationLayer, Schedule

CONVENTION = +1
_TWO_PI = 2 * np.longdouble("3.14159265358979323846264338327950288")


def _as_states(psi0: np.ndarray, dim: int) -> np.ndarray:
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape[0] != dim:
        raise ValueError(f"state has dimension {psi.shape[0]}, schedule needs {dim}")
    return psi.copy()


def run_sdaqc(schedule: Schedule, psi0: np.ndarray, convention: int = CONVENTION) -> np.ndarray:
    """Stepwise protocol: exact analog propagators and instantaneous rotation layers."""
    n = schedule.n_qubits
    psi = _as_states(psi0, 1 << n)
    for block in schedule.blocks:
        if isinstance(block, AnalogBlock):
            if block.duration < 0:
                raise NegativeDuration(f"analog block with negative duration {block.duration}")
            if block.duration > 0:
                psi = evolve(schedule.base, block.duration, psi, sign=convention * block.sign)
        else:
            psi = apply_local(block.ops(), psi, n)
    return psi


def _monomial_sdaqc(schedule: Schedule, convention: int = CONVENTION) -> np.ndarray | None:
    """Stepwise unitary for a Z-diagonal resource with diagonal/flip layers, or ``None``.

    Such a unitary has one nonzero per row, so it is tracked as ``(source column, phase)``.
    """
    if not schedule.base.is_z_diagonal:
        return None
    n = schedule.n_qubits
    dim = 1 << n
    src = np.arange(dim)
    phase = np.ones(dim, dtype=complex)
    # analog phases are summed as angles in extended precision: long compiled
    # schedules cancel large block angles against each other
    angle = np.zeros(dim, dtype=np.longdouble)
    diag = schedule.base.diagonal().real.astype(np.longdouble)
    for block in schedule.blocks:
        if isinstance(block, AnalogBlock):
            if block.duration < 0:
                raise NegativeDuration(f"analog block with negative duration {block.duration}")
            angle += np.longdouble(convention * block.sign * block.duration) * diag
        else:
            layer = monomial_layer(block.ops(), n)
            if layer is None:
                return None
            ls, lp = layer
            src, phase, angle = src[ls], lp * phase[ls], angle[ls]
    phase = phase * np.exp(1j * np.fmod(angle, _TWO_PI).astype(float))
    u = np.zeros((dim, dim), dtype=complex)
    u[np.arange(dim), src] = phase
    return u


def schedule_unitary(schedule: Schedule, mode: str = "sdaqc", dt: float | None = None, **kwargs) -> np.ndarray:
    eye = np.eye(1 << schedule.n_qubits, dtype=complex)
    if mode == "sdaqc":
        u = _monomial_sdaqc(schedule, **kwargs)
        return u if u is not None else run_sdaqc(schedule, eye, **kwargs)
    if mode == "bdaqc":
        return run_bdaqc(schedule, eye, dt, **kwargs)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# banged protocol


@dataclass
class Pulse:
    start: float
    stop: float
    generator: SpinHamiltonian
    layer: RotationLayer


def _collect(schedule: Schedule) -> tuple[list[float], list[tuple[int, RotationLayer]]]:
    """Analog durations and the layers sitting on each block boundary."""
    durations: list[float] = []
    layers: list[tuple[int, RotationLayer]] = []
    for block in schedule.blocks:
        if isinstance(block, AnalogBlock):
            if block.sign != 1:
                raise ExecutionError("coupling-inverted blocks can only run in the stepwise protocol")
            if block.duration < 0:
                raise NegativeDuration(f"analog block with negative duration {block.duration}")
            durations.append(block.duration)
        else:
            boundary = len(durations)
            if layers and layers[-1][0] == boundary:
                layers[-1] = (boundary, layers[-1][1].then(block))
            else:
                layers.append((boundary, block))
    return durations, [(b, lay) for b, lay in layers if not lay.is_identity()]


def pulse_windows(schedule: Schedule, dt: float, allow_overlap: bool = False) -> tuple[float, list[Pulse]]:
    """Place one rectangular pulse per layer boundary; returns ``(total_time, pulses)``.

    The first boundary pulse starts at ``t = 0``, the last one ends at the
    final time and interior pulses are centred on their boundary.
    """
    if not dt > 0 or not np.isfinite(dt):
        raise ValueError("pulse width must be positive")
    durations, layers = _collect(schedule)
    bounds = np.concatenate([[0.0], np.cumsum(durations)])
    total = float(bounds[-1])
    last = len(durations)
    pulses = []
    for boundary, layer in layers:
        T = bounds[boundary]
        if boundary == 0:
            start = 0.0
        elif boundary == last:
            start = T - dt
        else:
            start = T - dt / 2
        stop = start + dt
        if start < -1e-15 or stop > total + 1e-12 * max(1.0, total):
            raise PulseOverlap(f"pulse of width {dt} does not fit inside the schedule (total time {total:.6g})")
        for q, rot in layer.rotations.items():
            if not np.isfinite(rot.angle):
                raise GeneratorUndefined(f"rotation on qubit {q} has no generator")
        pulses.append(Pulse(start, stop, layer.generator(schedule.n_qubits, dt), layer))
    if not allow_overlap:
        for a, b in zip(pulses[:-1], pulses[1:]):
            if b.start < a.stop - 1e-12 * max(1.0, total):
                raise PulseOverlap(
                    f"pulse width {dt} overlaps neighbouring pulses at t={a.stop:.6g}; "
                    "reduce the width or allow overlapping pulses"
                )
    return total, pulses


def bdaqc_segments(
    schedule: Schedule, dt: float, allow_overlap: bool = False, convention: int = CONVENTION
) -> list[tuple[float, SpinHamiltonian | None]]:
    """Piecewise-constant segments ``(width, H)`` of the banged protocol.

    ``H is None`` marks a free segment under the resource alone (``exp(+i convention H_I width)``);
    otherwise the segment is ``exp(-i H width)`` with ``H = K_I + sum of active pulse generators``.
    """
    n = schedule.n_qubits
    total, pulses = pulse_windows(schedule, dt, allow_overlap)
    if not pulses:
        return [(total, None)] if total > 0 else []
    K_I = schedule.base.scaled(-convention)
    events = sorted({0.0, total, *[p.start for p in pulses], *[p.stop for p in pulses]})
    segments = []
    for a, b in zip(events[:-1], events[1:]):
        width = b - a
        if width <= 0:
            continue
        mid = 0.5 * (a + b)
        active = [p.generator for p in pulses if p.start <= mid < p.stop]
        segments.append((width, SpinHamiltonian.sum(n, [K_I, *active]) if active else None))
    return segments


def run_bdaqc(
    schedule: Schedule,
    psi0: np.ndarray,
    dt: float,
    allow_overlap: bool = False,
    convention: int = CONVENTION,
) -> np.ndarray:
    """Banged protocol: the resource stays on and rotations are finite pulses on top of it."""
    psi = _as_states(psi0, 1 << schedule.n_qubits)
    for width, H in bdaqc_segments(schedule, dt, allow_overlap, convention):
        if H is None:
            psi = evolve(schedule.base, width, psi, sign=convention)
        else:
            psi = evolve(H, width, psi, sign=-1)
    return psi


# ---------------------------------------------------------------------------
# error estimate for one banged pulse


@dataclass
class BangError:
    estimate: float
    bch_estimate: float
    measured_interior: float
    measured_boundary: float


def _dense(H) -> np.ndarray:
    return H.matrix() if isinstance(H, SpinHamiltonian) else np.asarray(H, dtype=complex)


def bang_error_estimate(H_I, H_R, dt: float) -> BangError:
    """Per-pulse error of replacing an instantaneous rotation by a pulse of width ``dt``.

    ``estimate`` is ``dt^3/4 * ||[[H_I, H_R], H_I + 2 H_R]||`` (spectral norm);
    ``bch_estimate`` is the leading symmetric-splitting term ``dt^3/24 * ||...||``.
    The measured values compare ``exp(-i(H_I + H_R) dt)`` with the stepwise
    sequences: centred (``e^{-i H_I dt/2} e^{-i H_R dt} e^{-i H_I dt/2}``) and
    boundary (``e^{-i H_I dt} e^{-i H_R dt}``).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    a, r = _dense(H_I), _dense(H_R)
    nested = commutator(commutator(a, r), a + 2 * r)
    norm = float(np.linalg.norm(nested, 2))
    banged = dense_propagator(a + r, dt, sign=-1)
    half = dense_propagator(a, dt / 2, sign=-1)
    rot = dense_propagator(r, dt, sign=-1)
    centred = half @ rot @ half
    boundary = dense_propagator(a, dt, sign=-1) @ rot
    return BangError(
        estimate=dt**3 / 4 * norm,
        bch_estimate=dt**3 / 24 * norm,
        measured_interior=float(np.linalg.norm(banged - centred, 2)),
        measured_boundary=float(np.linalg.norm(banged - boundary, 2)),
    )


# ---------------------------------------------------------------------------
# time accounting


def schedule_time_report(schedule: Schedule) -> dict:
    """Analog time and block counts, overall and per Trotter step."""
    per_step = []
    for sl in schedule.step_slices():
        part = schedule.blocks[sl]
        analog = [b for b in part if isinstance(b, AnalogBlock)]
        per_step.append({
            "analog_time": float(sum(b.duration for b in analog)),
            "n_analog": len(analog),
            "n_layers": sum(1 for b in part if isinstance(b, RotationLayer)),
        })
    report = {
        "total_analog_time": schedule.analog_time,
        "n_analog": schedule.n_analog,
        "n_layers": len(schedule.layers),
        "n_inverted": sum(1 for b in schedule.analog_blocks if b.sign != 1),
        "n_steps": len(per_step),
        "per_step": per_step,
    }
    compile_report = schedule.report
    if compile_report is not None and hasattr(compile_report, "to_dict"):
        report["compile"] = compile_report.to_dict()
    return report


def run_dqc_baseline(*args, **kwargs):
    """Purely digital baseline; see :func:`daqc.dqc.run_dqc_baseline`."""
    from .dqc import run_dqc_baseline as _run

    return _run(*args, **kwargs)
