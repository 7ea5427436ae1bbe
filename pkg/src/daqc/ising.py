"""Compile inhomogeneous ZZ Ising targets onto a fixed ZZ resource.

Every analog block runs the resource for a time ``t`` sandwiched by a layer of
sigma_x flips.  Flipping qubits ``S`` multiplies the coupling of pair ``(j, k)``
by ``-1`` when exactly one of ``j, k`` is in ``S``, so the accumulated
couplings are linear in the block times:

    sum_c A[beta, c] t_c * gbar_beta = g_beta * t_F.

The all-to-all generator set uses the pair flips ``X_n X_m`` (``A`` is then the
sign matrix ``M``).  Nearest-neighbour targets on a chain use prefix flips,
which after merging adjacent layers need one sigma_x per site.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NoRemediation, SingularGeneratorSet, ZeroResourceCoupling
from .models import pair_list, two_body_word
from .pauli import SpinHamiltonian, support
from .schedule import QubitRotation, RotationLayer, Schedule, x_layer

COND_WARN = 1e8
ZERO_TIME = 1e-12
RESIDUAL_TOL = 1e-10


# ---------------------------------------------------------------------------
# pair indexing and the sign matrix


def pair_index(n: int, m: int, N: int) -> int:
    """1-based pair label ``alpha`` of the 1-based pair ``n < m``."""
    if not 1 <= n < m <= N:
        raise ValueError(f"need 1 <= n < m <= N, got n={n}, m={m}, N={N}")
    return N * (n - 1) - n * (n + 1) // 2 + m


def pair_unindex(alpha: int, N: int) -> tuple[int, int]:
    K = N * (N - 1) // 2
    if not 1 <= alpha <= K:
        raise ValueError(f"pair label {alpha} outside 1..{K}")
    n = 1
    while pair_index(n, N, N) < alpha:
        n += 1
    m = alpha - (N * (n - 1) - n * (n + 1) // 2)
    return n, m


def flip_sign(flipped: frozenset[int] | set[int], j: int, k: int) -> int:
    """Sign picked up by ``Z_j Z_k`` when the qubits in ``flipped`` are conjugated by sigma_x."""
    return -1 if ((j in flipped) != (k in flipped)) else 1


def sign_matrix(N: int) -> np.ndarray:
    """``M[alpha, beta] = (-1)^(overlaps)`` between flip pair ``alpha`` and coupling pair ``beta``."""
    if N < 3:
        raise ValueError("the sign matrix is defined for N >= 3")
    pairs = pair_list(N)
    M = np.empty((len(pairs), len(pairs)))
    for a, (n, m) in enumerate(pairs):
        for b, (j, k) in enumerate(pairs):
            M[a, b] = flip_sign({n, m}, j, k)
    return M


def sign_eigenvalues(N: int) -> tuple[float, float, float]:
    """Closed-form eigenvalues ``(lambda_1, lambda_2, lambda_3)`` with multiplicities ``1, N-1, K-N``."""
    return N * (N - 9) / 2 + 8, 2.0 * (4 - N), 4.0


# ---------------------------------------------------------------------------
# reports


@dataclass
class CompileReport:
    n_qubits: int
    topology: str
    patterns: list[tuple[int, ...]]
    times: np.ndarray
    shifted_times: np.ndarray
    signs: np.ndarray
    extra_bare_time: float = 0.0
    condition: float = 1.0
    residual: float = 0.0
    strategy: str = "none"
    t_min: float = 0.0
    fallback: bool = False
    warnings: list[str] = field(default_factory=list)

    @property
    def total_analog_time(self) -> float:
        return float(np.sum(np.abs(self.shifted_times)) + self.extra_bare_time)

    @property
    def n_blocks(self) -> int:
        live = int(np.sum(np.abs(self.shifted_times) > 0))
        return live + (1 if self.extra_bare_time > 0 else 0)

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "topology": self.topology,
            "patterns": [list(p) for p in self.patterns],
            "times": [float(t) for t in self.times],
            "shifted_times": [float(t) for t in self.shifted_times],
            "signs": [int(s) for s in self.signs],
            "extra_bare_time": self.extra_bare_time,
            "condition": self.condition,
            "residual": self.residual,
            "strategy": self.strategy,
            "t_min": self.t_min,
            "fallback": self.fallback,
            "total_analog_time": self.total_analog_time,
            "n_blocks": self.n_blocks,
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# linear solves


def _coupling_vector(H: SpinHamiltonian, pairs) -> np.ndarray:
    return np.array([H.coefficient(two_body_word(H.n_qubits, j, k)) for j, k in pairs])


def _check_pure_zz(H: SpinHamiltonian, name: str) -> None:
    for w, c in H.items():
        s = support(w)
        if not s:
            continue
        if len(s) != 2 or any(w[q] != "Z" for q in s):
            raise ValueError(f"{name} term {w} is not a two-body ZZ coupling")


def _scaled_rhs(target: np.ndarray, resource: np.ndarray, t_F: float, pairs) -> np.ndarray:
    rhs = np.zeros_like(target)
    for i, (g, gbar) in enumerate(zip(target, resource)):
        if g == 0.0:
            continue
        if gbar == 0.0:
            raise ZeroResourceCoupling(f"resource coupling on pair {pairs[i]} is zero but the target needs {g}")
        rhs[i] = g * t_F / gbar
    return rhs


def solve_block_times(target, resource, t_F: float = 1.0, N: int | None = None) -> CompileReport:
    """Solve ``M t = g t_F / gbar`` for the all-to-all pair-flip generator set.

    ``target`` and ``resource`` are coupling vectors in pair-label order (or a
    scalar for a homogeneous resource).
    """
    g = np.atleast_1d(np.asarray(target, dtype=float))
    K = g.size
    if N is None:
        N = int(round((1 + math.sqrt(1 + 8 * K)) / 2))
    pairs = pair_list(N)
    if len(pairs) != K:
        raise ValueError("coupling vector length does not match N(N-1)/2")
    gbar = np.broadcast_to(np.asarray(resource, dtype=float), g.shape)
    return _solve_sign_system(_scaled_rhs(g, gbar, t_F, pairs), N)


def _solve_sign_system(rhs: np.ndarray, N: int) -> CompileReport:
    M = sign_matrix(N)
    K = rhs.size
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularGeneratorSet(
            f"the pair-flip generator set is singular for N={N} (the N=4 corner case); "
            "enable the fallback to add single-site flips"
        )
    # M is symmetric, so the orientation of the system does not matter
    t = np.linalg.solve(M, rhs)
    # one step of iterative refinement; matters for strongly decaying resources
    t = t + np.linalg.solve(M, rhs - M @ t)
    residual = float(np.max(np.abs(M @ t - rhs))) if K else 0.0
    report = CompileReport(N, "ATA", [tuple(p) for p in pair_list(N)], t, t.copy(), np.ones(K, dtype=int),
                           condition=cond, residual=residual)
    _check_residual(report, rhs)
    return report


def _check_residual(report: CompileReport, rhs: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(rhs)))) if rhs.size else 1.0
    if report.residual > RESIDUAL_TOL * scale:
        raise SingularGeneratorSet(f"block-time solve residual {report.residual:.3e} exceeds tolerance")
    if report.condition > COND_WARN:
        msg = f"generator system is ill-conditioned (cond={report.condition:.3e})"
        report.warnings.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)


def remediate_negative_times(
    times,
    N: int,
    period: float | None = None,
    eigenvalue: float | None = None,
    allow_sign_inversion: bool = False,
) -> tuple[np.ndarray, float, np.ndarray, str]:
    """Return ``(shifted_times, extra_bare_time, signs, strategy)`` with non-negative durations.

    Strategies in order: shift along the constant eigenvector when its
    eigenvalue is negative (adds one bare block); wrap each time into
    ``[0, period)`` for a homogeneous resource; mark negative blocks as
    coupling-inverted.  ``eigenvalue`` defaults to the sign-matrix value.
    """
    t = np.asarray(times, dtype=float).copy()
    signs = np.ones(t.size, dtype=int)
    if t.size == 0 or t.min() >= 0:
        return t, 0.0, signs, "none"
    lam = sign_eigenvalues(N)[0] if eigenvalue is None else eigenvalue
    t_min = float(t.min())
    if lam < 0:
        shifted = t + abs(t_min)
        shifted[np.abs(shifted) < ZERO_TIME * max(1.0, abs(t_min))] = 0.0
        return shifted, abs(lam * t_min), signs, "eigenvector-shift"
    if period is not None:
        wrapped = np.mod(t, period)
        wrapped[np.isclose(wrapped, period, rtol=0, atol=ZERO_TIME * period)] = 0.0
        return wrapped, 0.0, signs, "period-wrap"
    if allow_sign_inversion:
        signs = np.where(t < 0, -1, 1)
        return np.abs(t), 0.0, signs, "sign-inversion"
    raise NoRemediation(
        f"negative block time {t_min:.4g} cannot be removed for N={N} with an inhomogeneous resource; "
        "only the stepwise protocol can run it with inverted couplings"
    )


# ---------------------------------------------------------------------------
# generator sets


def _nn_times(rhs: np.ndarray, N: int) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """Closed-form non-negative times for a chain target on a chain resource.

    Pattern ``prefix(b)`` (qubits 1..b flipped) inverts bond ``b`` only.  A
    negative time on a pattern is moved to its complement under the
    alternating flip (which inverts every bond) with the opposite sign.
    """
    nb = N - 1
    r_last = rhs[-1]
    tau = [(r_last - rhs[b]) / 2.0 for b in range(nb - 1)]
    bare = r_last - sum(tau)
    alternating = frozenset(range(2, N + 1, 2))
    raw = [(frozenset(), bare)] + [(frozenset(range(1, b + 2)), tb) for b, tb in enumerate(tau)]
    patterns, times = [], []
    for flips, tb in raw:
        if tb < 0:
            flips, tb = flips ^ alternating, -tb
        patterns.append(tuple(sorted(flips)))
        times.append(tb)
    return patterns, np.array(times)


def _fallback_system(N: int, pairs) -> tuple[list[tuple[int, ...]], np.ndarray]:
    patterns = [tuple(p) for p in pairs] + [(n,) for n in range(1, N + 1)]
    A = np.array([[flip_sign(set(p), j, k) for p in patterns] for j, k in pairs], dtype=float)
    return patterns, A


def _is_homogeneous(values: np.ndarray) -> bool:
    nz = values[values != 0]
    return nz.size > 0 and np.allclose(nz, nz[0], rtol=1e-14, atol=0)


def _detect_topology(H: SpinHamiltonian) -> str:
    for w, c in H.items():
        s = support(w)
        if len(s) == 2 and s[1] - s[0] > 1 and c != 0:
            return "ATA"
    return "NN"


def compile_ising(
    target: SpinHamiltonian,
    resource: SpinHamiltonian,
    t_F: float = 1.0,
    allow_fallback: bool = False,
    allow_sign_inversion: bool = True,
) -> Schedule:
    """Schedule whose stepwise unitary equals ``exp(+i t_F H_target)`` up to a global phase."""
    if target.n_qubits != resource.n_qubits:
        raise ValueError("target and resource act on different qubit counts")
    _check_pure_zz(target, "target")
    _check_pure_zz(resource, "resource")
    if not np.isfinite(t_F) or t_F < 0:
        raise ValueError("t_F must be finite and non-negative")
    N = target.n_qubits
    if N < 2:
        raise ValueError("need at least two qubits")
    target_topo = _detect_topology(target)
    resource_topo = _detect_topology(resource)
    if target_topo == "ATA" and resource_topo == "NN":
        raise ZeroResourceCoupling("an all-to-all target cannot be reached with a nearest-neighbour resource")

    if resource_topo == "NN" or N == 2:
        pairs = pair_list(N, "NN")
        g = _coupling_vector(target, pairs)
        gbar = _coupling_vector(resource, pairs)
        rhs = _scaled_rhs(g, gbar, t_F, pairs)
        patterns, times = _nn_times(rhs, N)
        A = np.array([[flip_sign(set(p), j, k) for p in patterns] for j, k in pairs], dtype=float)
        residual = float(np.max(np.abs(A @ times - rhs))) if rhs.size else 0.0
        report = CompileReport(N, "NN", patterns, times, times.copy(), np.ones(len(times), dtype=int),
                               condition=float(np.linalg.cond(A)) if N > 2 else 1.0, residual=residual,
                               strategy="prefix-flip")
        _check_residual(report, rhs)
    else:
        pairs = pair_list(N, "ATA")
        g = _coupling_vector(target, pairs)
        gbar = _coupling_vector(resource, pairs)
        rhs = _scaled_rhs(g, gbar, t_F, pairs)
        try:
            report = _solve_sign_system(rhs, N)
            lam = sign_eigenvalues(N)[0]
        except SingularGeneratorSet:
            if not allow_fallback:
                raise SingularGeneratorSet(
                    f"N={N} all-to-all: the pair-flip sign matrix is singular (the N=4 corner case); "
                    "rerun with the fallback generator set enabled"
                ) from None
            patterns, A = _fallback_system(N, pairs)
            t, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            residual = float(np.max(np.abs(A @ t - rhs)))
            report = CompileReport(N, "ATA", patterns, t, t.copy(), np.ones(len(t), dtype=int),
                                   condition=float(np.linalg.cond(A)), residual=residual, fallback=True)
            report.warnings.append("singular pair-flip set: used single-site flips and minimum-norm least squares")
            _check_residual(report, rhs)
            row_sums = A.sum(axis=1)
            lam = float(row_sums[0]) if np.allclose(row_sums, row_sums[0]) else 1.0
        report.t_min = float(min(0.0, report.times.min()))
        period = 2 * math.pi / gbar[0] if _is_homogeneous(gbar) and np.all(gbar != 0) else None
        shifted, extra, signs, strategy = remediate_negative_times(
            report.times, N, period=period, eigenvalue=lam, allow_sign_inversion=allow_sign_inversion
        )
        report.shifted_times, report.extra_bare_time, report.signs, report.strategy = shifted, extra, signs, strategy

    return _build_schedule(report, resource, t_F)


def _build_schedule(report: CompileReport, resource: SpinHamiltonian, t_F: float) -> Schedule:
    N = report.n_qubits
    sched = Schedule(N, resource, report=report, meta={"compiler": "ising", "t_F": t_F})
    cut = ZERO_TIME * max(t_F, 1e-300)
    for flips, t, s in zip(report.patterns, report.shifted_times, report.signs):
        if abs(t) < cut:
            continue
        layer = x_layer(q - 1 for q in flips)
        sched.add_layer(layer)
        sched.add_analog(abs(t), int(s), label="flip:" + ",".join(map(str, flips)))
        sched.add_layer(layer)
    if report.extra_bare_time >= cut:
        sched.add_analog(report.extra_bare_time, 1, label="bare")
    return sched


def cz_gadget(i: int, j: int, phi: float, n_qubits: int = 2, resource: SpinHamiltonian | None = None,
              t_F: float = 1.0) -> Schedule:
    """Controlled phase ``diag(1, 1, 1, e^{-2i phi})`` on 1-based qubits ``i, j``.

    Built as ``(Z_i(-phi) Z_j(-phi)) exp(-i phi/2 Z_i Z_j)`` with the ZZ factor
    compiled onto the resource.
    """
    if i == j:
        raise ValueError("the gadget needs two distinct qubits")
    if not (1 <= i <= n_qubits and 1 <= j <= n_qubits):
        raise ValueError("qubit index out of range")
    if resource is None:
        resource = SpinHamiltonian(n_qubits, {two_body_word(n_qubits, a, b): 1.0 for a, b in pair_list(n_qubits)})
    a, b = min(i, j), max(i, j)
    target = SpinHamiltonian(n_qubits, {two_body_word(n_qubits, a, b): -(phi / 2.0) / t_F})
    sched = compile_ising(target, resource, t_F)
    phase = QubitRotation((0.0, 0.0, 1.0), -phi)
    sched.add_layer(RotationLayer({i - 1: phase, j - 1: phase}))
    sched.meta.update({"compiler": "cz", "phi": phi, "qubits": [i, j]})
    return sched
