"""Pauli words, real-weighted Pauli sums and the dense linear algebra built on them.

Qubit ``q`` (0-based) is the ``q``-th character of a word and the ``q``-th
tensor factor counted from the left, i.e. the most significant bit of the
computational-basis index.  Basis state ``|0>`` is spin up (sigma_z = +1).
"""
from __future__ import annotations

from functools import reduce
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionError

MAX_QUBITS = 12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}
AXES = "XYZ"

# single-qubit products: a*b = phase * c
_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("Y", "I"): (1, "Y"), ("Z", "I"): (1, "Z"),
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "Z"): (1j, "X"), ("Z", "X"): (1j, "Y"),
    ("Y", "X"): (-1j, "Z"), ("Z", "Y"): (-1j, "X"), ("X", "Z"): (-1j, "Y"),
}


def check_word(word: str, n_qubits: int | None = None) -> str:
    word = word.upper()
    if any(c not in "IXYZ" for c in word):
        raise ValueError(f"invalid Pauli word {word!r}")
    if n_qubits is not None and len(word) != n_qubits:
        raise DimensionError(f"word {word!r} has length {len(word)}, expected {n_qubits}")
    return word


def single_site_word(n_qubits: int, sites: Mapping[int, str]) -> str:
    """Word with the given axes on ``sites`` (0-based) and identity elsewhere."""
    chars = ["I"] * n_qubits
    for q, a in sites.items():
        chars[q] = a
    return "".join(chars)


def support(word: str) -> tuple[int, ...]:
    return tuple(i for i, c in enumerate(word) if c != "I")


def pauli_product(a: str, b: str) -> tuple[complex, str]:
    """Return ``(phase, word)`` with ``P_a P_b = phase * P_word``."""
    if len(a) != len(b):
        raise DimensionError("words of different length")
    phase = 1 + 0j
    out = []
    for ca, cb in zip(a, b):
        p, c = _PRODUCT[ca, cb]
        phase *= p
        out.append(c)
    return phase, "".join(out)


def commutes(a: str, b: str) -> bool:
    clashes = sum(1 for ca, cb in zip(a, b) if ca != "I" and cb != "I" and ca != cb)
    return clashes % 2 == 0


def _masks(word: str) -> tuple[int, int, int]:
    n = len(word)
    xm = zm = 0
    ny = 0
    for q, c in enumerate(word):
        bit = 1 << (n - 1 - q)
        if c in "XY":
            xm |= bit
        if c in "ZY":
            zm |= bit
        if c == "Y":
            ny += 1
    return xm, zm, ny


def _popcount_parity(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    parity = np.zeros_like(v)
    while np.any(v):
        parity ^= v & 1
        v >>= 1
    return parity


def word_action(word: str) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(source, phase)`` such that ``(P psi)[a] = phase[a] * psi[source[a]]``."""
    n = len(word)
    xm, zm, ny = _masks(word)
    idx = np.arange(1 << n)
    source = idx ^ xm
    sign = 1 - 2 * _popcount_parity(source & zm)
    phase = (1j ** ny) * sign
    return source, phase.astype(complex)


def word_matrix(word: str, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Dense ``2^N x 2^N`` matrix of a Pauli word (Kronecker product, qubit 0 leftmost)."""
    word = check_word(word)
    n = len(word)
    if n > max_qubits:
        raise DimensionError(f"{n} qubits exceeds the configured maximum of {max_qubits}")
    source, phase = word_action(word)
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    m[np.arange(dim), source] = phase
    return m


def word_diagonal(word: str) -> np.ndarray:
    """Diagonal of a Z-type word as a real vector."""
    n = len(word)
    if any(c in "XY" for c in word):
        raise ValueError(f"{word!r} is not diagonal")
    _, zm, _ = _masks(word)
    idx = np.arange(1 << n)
    return (1 - 2 * _popcount_parity(idx & zm)).astype(float)


class SpinHamiltonian:
    """Real linear combination of Pauli words on ``n_qubits`` qubits.

    Duplicate words are merged on construction.  Instances are treated as
    immutable; arithmetic returns new objects.
    """

    __slots__ = ("n_qubits", "_terms", "_cache")

    def __init__(self, n_qubits: int, terms: Mapping[str, float] | Iterable[tuple[float, str]] = ()):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.n_qubits = int(n_qubits)
        merged: dict[str, float] = {}
        items = terms.items() if isinstance(terms, Mapping) else ((w, c) for c, w in terms)
        for word, coeff in items:
            word = check_word(word, self.n_qubits)
            coeff = float(np.real_if_close(coeff))
            if not np.isfinite(coeff):
                raise ValueError(f"non-finite coefficient on {word}")
            merged[word] = merged.get(word, 0.0) + coeff
        self._terms = merged
        self._cache: dict = {}

    # -- container protocol -------------------------------------------------
    @property
    def terms(self) -> dict[str, float]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def coefficient(self, word: str) -> float:
        return self._terms.get(word, 0.0)

    def __repr__(self) -> str:
        body = " + ".join(f"{c:.4g}*{w}" for w, c in list(self._terms.items())[:6])
        more = "" if len(self) <= 6 else f" + ... ({len(self)} terms)"
        return f"SpinHamiltonian({self.n_qubits}, {body}{more})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpinHamiltonian) or other.n_qubits != self.n_qubits:
            return NotImplemented
        return self.pruned()._terms == other.pruned()._terms

    __hash__ = None  # type: ignore[assignment]

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "SpinHamiltonian") -> "SpinHamiltonian":
        if other.n_qubits != self.n_qubits:
            raise DimensionError("qubit counts differ")
        out = dict(self._terms)
        for w, c in other.items():
            out[w] = out.get(w, 0.0) + c
        return SpinHamiltonian(self.n_qubits, out)

    def __sub__(self, other: "SpinHamiltonian") -> "SpinHamiltonian":
        return self + other.scaled(-1.0)

    def __neg__(self) -> "SpinHamiltonian":
        return self.scaled(-1.0)

    def scaled(self, factor: float) -> "SpinHamiltonian":
        return SpinHamiltonian(self.n_qubits, {w: factor * c for w, c in self.items()})

    def pruned(self, tol: float = 0.0) -> "SpinHamiltonian":
        return SpinHamiltonian(self.n_qubits, {w: c for w, c in self.items() if abs(c) > tol})

    @classmethod
    def sum(cls, n_qubits: int, parts: Iterable["SpinHamiltonian"]) -> "SpinHamiltonian":
        out: dict[str, float] = {}
        for h in parts:
            for w, c in h.items():
                out[w] = out.get(w, 0.0) + c
        return cls(n_qubits, out)

    def max_abs_difference(self, other: "SpinHamiltonian") -> float:
        words = set(self._terms) | set(other._terms)
        if not words:
            return 0.0
        return max(abs(self.coefficient(w) - other.coefficient(w)) for w in words)

    # -- matrices -----------------------------------------------------------
    @property
    def is_z_diagonal(self) -> bool:
        return all(c not in "XY" for w in self._terms for c in w)

    def diagonal(self) -> np.ndarray:
        if "diag" not in self._cache:
            d = np.zeros(1 << self.n_qubits)
            for w, c in self.items():
                d += c * word_diagonal(w)
            self._cache["diag"] = d
        return self._cache["diag"]

    def matrix(self) -> np.ndarray:
        if self.n_qubits > MAX_QUBITS:
            raise DimensionError(f"{self.n_qubits} qubits exceeds the configured maximum")
        if "matrix" not in self._cache:
            dim = 1 << self.n_qubits
            m = np.zeros((dim, dim), dtype=complex)
            rows = np.arange(dim)
            for w, c in self.items():
                source, phase = word_action(w)
                m[rows, source] += c * phase
            self._cache["matrix"] = m
        return self._cache["matrix"]

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        if "eigh" not in self._cache:
            self._cache["eigh"] = np.linalg.eigh(self.matrix())
        return self._cache["eigh"]

    def apply(self, psi: np.ndarray) -> np.ndarray:
        out = np.zeros_like(psi, dtype=complex)
        for w, c in self.items():
            source, phase = word_action(w)
            out += c * (phase.reshape(phase.shape + (1,) * (psi.ndim - 1)) * psi[source])
        return out

    # -- serialisation ------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "terms": [{"coeff": c, "word": w} for w, c in self.items()],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SpinHamiltonian":
        n = int(doc["n_qubits"])
        return cls(n, [(float(t["coeff"]), str(t["word"])) for t in doc["terms"]])


# ---------------------------------------------------------------------------
# propagators and states


def propagator(H: SpinHamiltonian, t: float, sign: int = +1) -> np.ndarray:
    """Dense ``exp(+i * sign * H * t)``.

    Z-diagonal Hamiltonians take the closed-form phase path; everything else
    goes through a cached Hermitian eigendecomposition.
    """
    if not np.isfinite(t):
        raise ValueError("non-finite evolution time")
    if H.is_z_diagonal:
        return np.diag(np.exp(1j * sign * t * H.diagonal()))
    w, v = H.eigh()
    return (v * np.exp(1j * sign * t * w)) @ v.conj().T


def evolve(H: SpinHamiltonian, t: float, psi: np.ndarray, sign: int = +1) -> np.ndarray:
    """Apply ``exp(+i * sign * H * t)`` to a state (or to the columns of a matrix)."""
    if H.is_z_diagonal:
        phase = np.exp(1j * sign * t * H.diagonal())
        return phase.reshape(phase.shape + (1,) * (psi.ndim - 1)) * psi
    w, v = H.eigh()
    coeff = v.conj().T @ psi
    coeff = np.exp(1j * sign * t * w).reshape(w.shape + (1,) * (psi.ndim - 1)) * coeff
    return v @ coeff


def dense_propagator(matrix: np.ndarray, t: float, sign: int = +1) -> np.ndarray:
    w, v = np.linalg.eigh(matrix)
    return (v * np.exp(1j * sign * t * w)) @ v.conj().T


_TINY = 1e-15


def monomial_layer(ops: Mapping[int, np.ndarray], n_qubits: int):
    """``(source index, phase)`` when every op is diagonal or anti-diagonal, else ``None``.

    Entries below ``_TINY`` (rounding left over from rotation formulas) count as zero.
    """
    mask = 0
    phase = np.ones(1 << n_qubits, dtype=complex)
    idx = np.arange(1 << n_qubits)
    for q, u in ops.items():
        shift = n_qubits - 1 - q
        bit = (idx >> shift) & 1
        if abs(u[0, 1]) < _TINY and abs(u[1, 0]) < _TINY:
            phase *= np.where(bit == 0, u[0, 0], u[1, 1])
        elif abs(u[0, 0]) < _TINY and abs(u[1, 1]) < _TINY:
            mask |= 1 << shift
            phase *= np.where(bit == 0, u[0, 1], u[1, 0])
        else:
            return None
    return idx ^ mask, phase


def apply_local(ops: Mapping[int, np.ndarray], psi: np.ndarray, n_qubits: int) -> np.ndarray:
    """Apply single-qubit 2x2 operators (keyed by 0-based qubit) to ``psi``.

    ``psi`` may carry trailing batch axes, e.g. the columns of a unitary.
    """
    monomial = monomial_layer(ops, n_qubits)
    if monomial is not None:
        src, phase = monomial
        out = psi[src]
        return out * (phase if psi.ndim == 1 else phase.reshape((-1,) + (1,) * (psi.ndim - 1)))
    out = np.array(psi, dtype=complex, copy=True)
    for q, u in ops.items():
        t = out.reshape(1 << q, 2, -1)
        x0, x1 = t[:, 0].copy(), t[:, 1]
        if u[0, 1] == 0 and u[1, 0] == 0:
            t[:, 0] *= u[0, 0]
            t[:, 1] *= u[1, 1]
        elif u[0, 0] == 0 and u[1, 1] == 0:
            t[:, 0] = u[0, 1] * x1
            t[:, 1] = u[1, 0] * x0
        else:
            t[:, 0] = u[0, 0] * x0 + u[0, 1] * x1
            t[:, 1] = u[1, 0] * x0 + u[1, 1] * t[:, 1]
    return out


def local_operator(ops: Mapping[int, np.ndarray], n_qubits: int) -> np.ndarray:
    return reduce(np.kron, [ops.get(q, I2) for q in range(n_qubits)])


def basis_state(n_qubits: int, bits: str | int) -> np.ndarray:
    """Computational basis state from a bit string (``'0'``/``'u'`` up, ``'1'``/``'d'`` down) or index."""
    if isinstance(bits, str):
        table = {"0": "0", "1": "1", "u": "0", "d": "1", "U": "0", "D": "1", "↑": "0", "↓": "1"}
        if len(bits) != n_qubits:
            raise DimensionError(f"state label {bits!r} does not have {n_qubits} sites")
        index = int("".join(table[c] for c in bits), 2)
    else:
        index = int(bits)
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|^2`` for normalised state vectors."""
    if a.shape != b.shape:
        raise DimensionError(f"state shapes differ: {a.shape} vs {b.shape}")
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


def phase_aligned_distance(u: np.ndarray, v: np.ndarray) -> float:
    """``min_phi max|u - e^{i phi} v|`` using the phase that aligns the traces."""
    overlap = np.vdot(v.ravel(), u.ravel())
    phase = overlap / abs(overlap) if abs(overlap) > 1e-300 else 1.0
    return float(np.max(np.abs(u - phase * v)))


# ---------------------------------------------------------------------------
# exact conjugations in the Pauli basis


def conjugate_by_pauli_rotation(H: SpinHamiltonian, word: str, theta: float) -> SpinHamiltonian:
    """``exp(-i theta P) H exp(+i theta P)`` expanded exactly in the Pauli basis."""
    c2, s2 = np.cos(2 * theta), np.sin(2 * theta)
    out: dict[str, float] = {}
    for w, c in H.items():
        if commutes(w, word):
            out[w] = out.get(w, 0.0) + c
            continue
        phase, prod = pauli_product(w, word)
        # Q e^{2i theta P} = cos Q + i sin Q P
        coeff = (1j * phase).real
        out[w] = out.get(w, 0.0) + c * c2
        out[prod] = out.get(prod, 0.0) + c * s2 * coeff
    return SpinHamiltonian(H.n_qubits, out)


def transfer_matrix(u: np.ndarray) -> np.ndarray:
    """Real 3x3 ``T`` with ``u sigma_a u^dag = sum_b T[a, b] sigma_b`` (a, b over X, Y, Z)."""
    paulis = (X, Y, Z)
    t = np.empty((3, 3))
    for a, pa in enumerate(paulis):
        rotated = u @ pa @ u.conj().T
        for b, pb in enumerate(paulis):
            t[a, b] = 0.5 * np.trace(pb @ rotated).real
    return t


def conjugate_local(H: SpinHamiltonian, ops: Mapping[int, np.ndarray], tol: float = 1e-15) -> SpinHamiltonian:
    """``U H U^dag`` for ``U`` a tensor product of single-qubit unitaries."""
    transfer = {q: transfer_matrix(u) for q, u in ops.items()}
    out: dict[str, float] = {}
    for w, c in H.items():
        partial = {w: c}
        for q, tq in transfer.items():
            if w[q] == "I":
                continue
            a = AXES.index(w[q])
            nxt: dict[str, float] = {}
            for pw, pc in partial.items():
                for b in range(3):
                    if abs(tq[a, b]) <= tol:
                        continue
                    nw = pw[:q] + AXES[b] + pw[q + 1:]
                    nxt[nw] = nxt.get(nw, 0.0) + pc * tq[a, b]
            partial = nxt
        for pw, pc in partial.items():
            out[pw] = out.get(pw, 0.0) + pc
    return SpinHamiltonian(H.n_qubits, out)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def apply_two_qubit(u: np.ndarray, j: int, k: int, psi: np.ndarray, n_qubits: int) -> np.ndarray:
    """Apply a 4x4 operator on 0-based qubits ``(j, k)`` (``j`` is the more significant factor)."""
    if j == k:
        raise ValueError("two-qubit operator needs distinct qubits")
    extra = psi.shape[1:]
    t = psi.reshape((2,) * n_qubits + extra)
    t = np.tensordot(u.reshape(2, 2, 2, 2), t, axes=([2, 3], [j, k]))
    t = np.moveaxis(t, [0, 1], [j, k])
    return t.reshape(psi.shape)
