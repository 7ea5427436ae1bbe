"""Builders for the Hamiltonian families used as targets and as analog resources."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .pauli import SpinHamiltonian, single_site_word

TOPOLOGIES = ("ATA", "NN")
PROFILE_KINDS = ("homogeneous", "polynomial", "exponential", "explicit")


@dataclass(frozen=True)
class CouplingProfile:
    """Pair coupling ``g_jk`` as a function of qubit separation.

    ``explicit`` profiles read ``table[(j, k)]`` with 1-based ``j < k``.
    """

    kind: str = "homogeneous"
    J: float = 1.0
    alpha: float = 1.0
    table: Mapping[tuple[int, int], float] | None = field(default=None, compare=False)
    physical_ion: bool = False

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown coupling profile {self.kind!r}")
        if self.kind == "explicit" and self.table is None:
            raise ValueError("explicit profile needs a coupling table")
        if self.physical_ion and self.kind == "polynomial" and not 0 < self.alpha < 3:
            raise ValueError("ion-trap polynomial decay needs 0 < alpha < 3")
        if not np.isfinite(self.J) or not np.isfinite(self.alpha):
            raise ValueError("non-finite profile parameter")

    def coupling(self, j: int, k: int) -> float:
        """Coupling between 1-based qubits ``j`` and ``k``."""
        if j > k:
            j, k = k, j
        d = k - j
        if d < 1:
            raise ValueError("coupling needs two distinct qubits")
        if self.kind == "homogeneous":
            return self.J
        if self.kind == "polynomial":
            return self.J / d**self.alpha
        if self.kind == "exponential":
            return self.J * math.exp(-((d - 1) ** 2))
        value = float(self.table.get((j, k), 0.0))
        if not np.isfinite(value):
            raise ValueError(f"non-finite coupling for pair {(j, k)}")
        return value

    @classmethod
    def from_dict(cls, doc: Mapping) -> "CouplingProfile":
        table = doc.get("table")
        if table is not None:
            table = {tuple(int(x) for x in str(key).replace("(", "").replace(")", "").split(",")): float(v)
                     for key, v in table.items()} if isinstance(table, Mapping) else {
                (int(j), int(k)): float(v) for j, k, v in table}
        return cls(
            kind=str(doc.get("kind", "homogeneous")),
            J=float(doc.get("J", 1.0)),
            alpha=float(doc.get("alpha", 1.0)),
            table=table,
            physical_ion=bool(doc.get("physical_ion", False)),
        )

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "J": self.J, "alpha": self.alpha}
        if self.table is not None:
            doc["table"] = [[j, k, v] for (j, k), v in sorted(self.table.items())]
        return doc


def pair_list(n_qubits: int, topology: str = "ATA") -> list[tuple[int, int]]:
    """1-based pairs ``(j, k)``, ``j < k``, in lexicographic order."""
    if topology not in TOPOLOGIES:
        raise ValueError(f"unknown topology {topology!r}")
    if topology == "NN":
        return [(j, j + 1) for j in range(1, n_qubits)]
    return list(itertools.combinations(range(1, n_qubits + 1), 2))


def two_body_word(n_qubits: int, j: int, k: int, mu: str = "Z", nu: str = "Z") -> str:
    return single_site_word(n_qubits, {j - 1: mu.upper(), k - 1: nu.upper()})


def build_ising(n_qubits: int, profile: CouplingProfile | float = 1.0, topology: str = "ATA") -> SpinHamiltonian:
    """``sum_{j<k} g_jk Z_j Z_k`` over the pairs of ``topology``."""
    if n_qubits < 2:
        raise ValueError("an Ising model needs at least two qubits")
    if not isinstance(profile, CouplingProfile):
        profile = CouplingProfile("homogeneous", J=float(profile))
    terms = [(profile.coupling(j, k), two_body_word(n_qubits, j, k)) for j, k in pair_list(n_qubits, topology)]
    return SpinHamiltonian(n_qubits, terms)


XZ_AXES = (("X", "X"), ("X", "Z"), ("Z", "X"), ("Z", "Z"))


def build_xz_target(
    n_qubits: int,
    profiles: CouplingProfile | Mapping[tuple[str, str], CouplingProfile | None],
    topology: str = "ATA",
) -> SpinHamiltonian:
    """``sum_{j<k} sum_{mu,nu in {x,z}} g^{mu nu}_jk sigma_mu^j sigma_nu^k``.

    A single profile is used for all four axis pairs; a mapping may omit pairs.
    """
    if n_qubits < 2:
        raise ValueError("need at least two qubits")
    if isinstance(profiles, CouplingProfile):
        profiles = {ax: profiles for ax in XZ_AXES}
    for key in profiles:
        mu, nu = (s.upper() for s in key)
        if mu not in "XZ" or nu not in "XZ" or len(mu) != 1 or len(nu) != 1:
            raise ValueError(f"unsupported axis labels {key!r}; only x and z are allowed")
    norm = {(mu.upper(), nu.upper()): p for (mu, nu), p in profiles.items()}
    terms = []
    for j, k in pair_list(n_qubits, topology):
        for mu, nu in XZ_AXES:
            p = norm.get((mu, nu))
            if p is not None:
                terms.append((p.coupling(j, k), two_body_word(n_qubits, j, k, mu, nu)))
    return SpinHamiltonian(n_qubits, terms)


def mbody_words(n_qubits: int, body: int = 4) -> list[str]:
    """All contiguous full-support words of size 2..body, grouped by size then start."""
    words = []
    for m in range(2, body + 1):
        for start in range(n_qubits - m + 1):
            for axes in itertools.product("XYZ", repeat=m):
                words.append("I" * start + "".join(axes) + "I" * (n_qubits - start - m))
    return words


def mbody_term_count(n_qubits: int, body: int = 4) -> int:
    return sum(3**m * (n_qubits - m + 1) for m in range(2, body + 1))


def build_mbody_target(
    n_qubits: int,
    body: int = 4,
    coefficients: Mapping[str, float] | None = None,
    seed: int | None = None,
    J: float = 1.0,
) -> SpinHamiltonian:
    """Nearest-neighbour Hamiltonian with contiguous terms of up to ``body`` sites.

    With ``coefficients`` the listed words are used as given (zeros elsewhere);
    otherwise every coefficient is drawn uniformly from ``[-J, J]`` with ``seed``.
    """
    if n_qubits < body:
        raise ValueError(f"need N >= M (got N={n_qubits}, M={body})")
    words = mbody_words(n_qubits, body)
    if coefficients is not None:
        allowed = set(words)
        for w in coefficients:
            if w not in allowed:
                raise ValueError(f"{w!r} is not a contiguous term of size <= {body}")
        return SpinHamiltonian(n_qubits, {w: float(coefficients.get(w, 0.0)) for w in words})
    if seed is None:
        raise ValueError("random coefficients need an explicit seed")
    rng = np.random.default_rng(seed)
    values = rng.uniform(-1.0, 1.0, size=len(words)) * J
    return SpinHamiltonian(n_qubits, dict(zip(words, values)))


def hamiltonian_from_json(doc: Mapping) -> SpinHamiltonian:
    """Accept either explicit terms or ``{n_qubits, model, profile}`` shorthand."""
    if "terms" in doc:
        return SpinHamiltonian.from_dict(doc)
    n = int(doc["n_qubits"])
    model = doc.get("model", "ising")
    profile = CouplingProfile.from_dict(doc.get("profile", {}))
    topology = doc.get("topology", "ATA")
    if model == "ising":
        return build_ising(n, profile, topology)
    if model == "xz":
        return build_xz_target(n, profile, topology)
    if model == "mbody":
        return build_mbody_target(n, int(doc.get("body", 4)), seed=int(doc.get("seed", 0)), J=profile.J)
    raise ValueError(f"unknown model {model!r}")
