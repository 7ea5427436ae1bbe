"""Schedule data model: analog blocks of the resource Hamiltonian interleaved with
single-qubit rotation layers, plus its JSON file format.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Union

import numpy as np

from .pauli import I2, X, Y, Z, SpinHamiltonian, apply_local, single_site_word

SCHEDULE_VERSION = 1
AXIS_TOL = 1e-12


@dataclass(frozen=True)
class QubitRotation:
    """``exp(-i angle/2 (n.sigma - 1))``.

    The phase is fixed so that ``angle = pi`` gives the Hermitian reflection
    ``n.sigma`` and ``axis = z`` gives the phase gate ``diag(1, e^{i angle})``.
    """

    axis: tuple[float, float, float]
    angle: float

    def __post_init__(self):
        n = np.asarray(self.axis, dtype=float)
        if n.shape != (3,):
            raise ValueError("rotation axis must have three components")
        if abs(np.linalg.norm(n) - 1.0) > AXIS_TOL:
            raise ValueError(f"rotation axis {self.axis} is not normalised")
        if not math.isfinite(self.angle):
            raise ValueError("non-finite rotation angle")

    @classmethod
    def reflection(cls, axis: Iterable[float]) -> "QubitRotation":
        n = np.asarray(list(axis), dtype=float)
        return cls(tuple(n / np.linalg.norm(n)), math.pi)

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "QubitRotation":
        """Axis-angle form of a 2x2 unitary, dropping its global phase (angle in [0, pi])."""
        det = np.linalg.det(u)
        v = u * np.exp(-0.5j * np.angle(det))
        c = 0.5 * np.trace(v).real
        s_vec = np.array([0.5 * (1j * np.trace(v @ p)).real for p in (X, Y, Z)])
        if c < 0:
            c, s_vec = -c, -s_vec
        s = np.linalg.norm(s_vec)
        if s < 1e-14:
            return cls((0.0, 0.0, 1.0), 0.0)
        angle = 2.0 * math.atan2(s, c)
        return cls(tuple(s_vec / s), angle)

    def sigma(self) -> np.ndarray:
        nx, ny, nz = self.axis
        return nx * X + ny * Y + nz * Z

    def unitary(self) -> np.ndarray:
        a = 0.5 * self.angle
        return np.exp(1j * a) * (math.cos(a) * I2 - 1j * math.sin(a) * self.sigma())

    def pauli_generator(self, width: float) -> dict[str, float]:
        """Coefficients on I, X, Y, Z of ``H`` with ``exp(-i H width) = unitary()``."""
        rate = self.angle / (2.0 * width)
        nx, ny, nz = self.axis
        return {"I": -rate, "X": rate * nx, "Y": rate * ny, "Z": rate * nz}

    def is_identity(self, tol: float = 1e-12) -> bool:
        return abs(math.remainder(self.angle, 2 * math.pi)) < tol


@dataclass
class RotationLayer:
    """Simultaneous single-qubit rotations (0-based qubit -> rotation)."""

    rotations: dict[int, QubitRotation]
    width: float | None = None

    @classmethod
    def from_ops(cls, ops: Mapping[int, np.ndarray], width: float | None = None) -> "RotationLayer":
        rots = {q: QubitRotation.from_unitary(u) for q, u in ops.items()}
        return cls({q: r for q, r in rots.items() if not r.is_identity()}, width)

    def ops(self) -> dict[int, np.ndarray]:
        return {q: r.unitary() for q, r in self.rotations.items()}

    def then(self, later: "RotationLayer") -> "RotationLayer":
        """Layer equivalent to applying ``self`` first and ``later`` second."""
        mine, theirs = self.rotations, later.rotations
        combined = {}
        for q in set(mine) | set(theirs):
            a, b = mine.get(q), theirs.get(q)
            if a is None or b is None:
                # only one side acts on q: keep that rotation as it is
                combined[q] = a or b
            elif a == b and math.isclose(a.angle, math.pi):
                continue  # a reflection undoes itself
            else:
                combined[q] = QubitRotation.from_unitary(b.unitary() @ a.unitary())
        width = later.width if later.width is not None else self.width
        return RotationLayer({q: r for q, r in combined.items() if not r.is_identity()}, width)

    def is_identity(self) -> bool:
        return all(r.is_identity() for r in self.rotations.values())

    def generator(self, n_qubits: int, width: float) -> SpinHamiltonian:
        terms: dict[str, float] = {}
        ident = "I" * n_qubits
        for q, r in self.rotations.items():
            for axis, c in r.pauli_generator(width).items():
                w = ident if axis == "I" else single_site_word(n_qubits, {q: axis})
                terms[w] = terms.get(w, 0.0) + c
        return SpinHamiltonian(n_qubits, terms)

    def to_dict(self) -> dict:
        return {
            "type": "layer",
            "qubits": [
                {"qubit": q, "axis": list(r.axis), "angle": r.angle} for q, r in sorted(self.rotations.items())
            ],
            "width": self.width,
        }


def x_layer(qubits: Iterable[int]) -> RotationLayer:
    return RotationLayer({q: QubitRotation((1.0, 0.0, 0.0), math.pi) for q in qubits})


def reflection_layer(axes: Mapping[int, Iterable[float]]) -> RotationLayer:
    return RotationLayer({q: QubitRotation.reflection(a) for q, a in axes.items()})


def apply_rotation_layer(layer: RotationLayer, psi: np.ndarray, n_qubits: int | None = None) -> np.ndarray:
    if n_qubits is None:
        n_qubits = int(round(math.log2(psi.shape[0])))
    return apply_local(layer.ops(), psi, n_qubits)


@dataclass
class AnalogBlock:
    """Evolution under the base Hamiltonian for ``duration``; ``sign=-1`` marks an
    inverted-coupling block that only the stepwise executor can run."""

    duration: float
    sign: int = 1
    label: str = ""

    def to_dict(self) -> dict:
        doc = {"type": "analog", "duration": self.duration, "sign": self.sign}
        if self.label:
            doc["label"] = self.label
        return doc


Block = Union[AnalogBlock, RotationLayer]


@dataclass
class Schedule:
    n_qubits: int
    base: SpinHamiltonian
    blocks: list[Block] = field(default_factory=list)
    steps: list[int] = field(default_factory=list)
    report: Any = None
    meta: dict = field(default_factory=dict)
    merge_layers: bool = True

    # -- building -----------------------------------------------------------
    def add_layer(self, layer: RotationLayer) -> None:
        if layer.is_identity():
            return
        if self.merge_layers and self.blocks and isinstance(self.blocks[-1], RotationLayer):
            merged = self.blocks[-1].then(layer)
            self.blocks.pop()
            if not merged.is_identity():
                self.blocks.append(merged)
            return
        self.blocks.append(layer)

    def add_analog(self, duration: float, sign: int = 1, label: str = "") -> None:
        if duration < 0:
            raise ValueError("analog durations are non-negative; use sign=-1 for inverted couplings")
        self.blocks.append(AnalogBlock(float(duration), int(sign), label))

    def mark_step(self) -> None:
        self.steps.append(len(self.blocks))

    def extend(self, other: "Schedule") -> None:
        if other.n_qubits != self.n_qubits:
            raise ValueError("schedules act on different qubit counts")
        for b in other.blocks:
            if isinstance(b, RotationLayer):
                self.add_layer(b)
            else:
                self.blocks.append(AnalogBlock(b.duration, b.sign, b.label))

    # -- inspection ---------------------------------------------------------
    @property
    def analog_blocks(self) -> list[AnalogBlock]:
        return [b for b in self.blocks if isinstance(b, AnalogBlock)]

    @property
    def layers(self) -> list[RotationLayer]:
        return [b for b in self.blocks if isinstance(b, RotationLayer)]

    @property
    def n_analog(self) -> int:
        return len(self.analog_blocks)

    @property
    def analog_time(self) -> float:
        return float(sum(b.duration for b in self.analog_blocks))

    def step_slices(self) -> list[slice]:
        if not self.steps:
            return [slice(0, len(self.blocks))]
        bounds = list(self.steps) + [len(self.blocks)]
        return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]

    # -- serialisation ------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "version": SCHEDULE_VERSION,
            "n_qubits": self.n_qubits,
            "base": self.base.to_dict(),
            "steps": list(self.steps),
            "meta": self.meta,
            "blocks": [b.to_dict() for b in self.blocks],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Schedule":
        if int(doc.get("version", SCHEDULE_VERSION)) != SCHEDULE_VERSION:
            raise ValueError(f"unsupported schedule version {doc.get('version')}")
        sched = cls(int(doc["n_qubits"]), SpinHamiltonian.from_dict(doc["base"]), merge_layers=False)
        for b in doc["blocks"]:
            if b["type"] == "analog":
                sched.blocks.append(AnalogBlock(float(b["duration"]), int(b.get("sign", 1)), b.get("label", "")))
            elif b["type"] == "layer":
                rots = {int(e["qubit"]): QubitRotation(tuple(float(x) for x in e["axis"]), float(e["angle"]))
                        for e in b["qubits"]}
                sched.blocks.append(RotationLayer(rots, b.get("width")))
            else:
                raise ValueError(f"unknown block type {b['type']!r}")
        sched.steps = [int(s) for s in doc.get("steps", [])]
        sched.meta = dict(doc.get("meta", {}))
        sched.merge_layers = True
        return sched

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Schedule":
        return cls.from_dict(json.loads(Path(path).read_text()))
