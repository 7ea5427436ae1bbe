"""Experiment runners behind the command line: fidelity sweeps, time totals, block times, couplings."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import RunConfig
from .dqc import _pair_program, dqc_accounting, gate_time, run_program, step_program
from .errors import DAQCError
from .executor import run_bdaqc, run_sdaqc
from .ising import compile_ising
from .mbody import compile_mbody
from .models import XZ_AXES, pair_list
from .noise import run_fidelities, summarize, write_raw_csv
from .pauli import SpinHamiltonian, evolve, support
from .schedule import Schedule
from .xz import compile_xz, xz_couplings

SWEEP_SCHEMA = "daqc.sweep/1"
BLOCKS_SCHEMA = "daqc.blocks/1"
COUPLINGS_SCHEMA = "daqc.couplings/1"
SWEEP_COLUMNS = ["sweep_var", "mode", "mean_fidelity", "stderr", "total_analog_time", "wall_time", "status"]


def threads() -> int:
    try:
        return max(1, int(os.environ.get("DAQC_THREADS", "1")))
    except ValueError:
        return 1


def target_class(H: SpinHamiltonian) -> str:
    """``ising`` (ZZ only), ``xz`` (two-body x/z) or ``mbody``."""
    kinds = set()
    for w, c in H.items():
        if c == 0 or not support(w):
            continue
        letters = {ch for ch in w if ch != "I"}
        if len(support(w)) != 2 or "Y" in letters:
            kinds.add("mbody")
        elif letters == {"Z"}:
            kinds.add("ising")
        else:
            kinds.add("xz")
    if "mbody" in kinds:
        return "mbody"
    return "xz" if "xz" in kinds else "ising"


def compile_for(cfg: RunConfig, target: SpinHamiltonian, resource: SpinHamiltonian, n_T: int) -> Schedule:
    kind = target_class(target)
    if kind == "ising":
        return compile_ising(target, resource, cfg.t_F, allow_fallback=cfg.allow_fallback)
    if kind == "xz":
        return compile_xz(target, resource, cfg.t_F, n_T, symmetrized=cfg.symmetrized,
                          allow_fallback=cfg.allow_fallback)
    body = int(cfg.target.get("body", 4))
    return compile_mbody(target, resource, cfg.t_F, n_T, body=body, symmetrized=cfg.symmetrized)


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_resolved(cfg: RunConfig, out: Path) -> None:
    atomic_write(out / "config.resolved.json", json.dumps(cfg.resolved(), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# fidelity sweeps


def _points(cfg: RunConfig) -> list[tuple[float, int, int, list[float]]]:
    """Sweep points as ``(value, n_qubits, n_T, dts)``."""
    if cfg.sweep == "n_T":
        return [(n_T, cfg.n_qubits, n_T, cfg.dt) for n_T in cfg.n_T]
    if cfg.sweep == "dt":
        return [(dt, cfg.n_qubits, cfg.n_T[0], [dt]) for dt in cfg.dt]
    return [(n, n, cfg.n_T[0], cfg.dt) for n in cfg.n_qubits_list]


def _mode_labels(cfg: RunConfig, dts: list[float]) -> list[tuple[str, str, float | None]]:
    labels = []
    for mode in cfg.modes:
        if mode == "bdaqc":
            for dt in dts:
                labels.append((mode, f"bdaqc@{dt:g}" if len(cfg.dt) > 1 and cfg.sweep != "dt" else "bdaqc", dt))
        elif mode == "dqc":
            labels.append((mode, f"dqc-{cfg.dqc_mode}", None))
        else:
            labels.append((mode, mode, None))
    return labels


def _point_rows(cfg: RunConfig, point) -> tuple[list[dict], list]:
    value, n, n_T, dts = point
    rows, raw = [], []
    try:
        target, resource, psi0 = cfg.build_target(n), cfg.build_resource(n), cfg.initial_psi(n)
        psi_exact = evolve(target, cfg.t_F, psi0)
    except (DAQCError, ValueError) as exc:
        return [_failed(value, label, exc) for _, label, _ in _mode_labels(cfg, dts)], raw
    schedule, compile_error = None, None
    if {"sdaqc", "bdaqc"} & set(cfg.modes):
        try:
            schedule = compile_for(cfg, target, resource, n_T)
        except (DAQCError, ValueError) as exc:
            compile_error = exc
    for mode, label, dt in _mode_labels(cfg, dts):
        t0 = time.perf_counter()
        try:
            if mode in ("sdaqc", "bdaqc") and compile_error is not None:
                raise compile_error
            if mode == "dqc":
                prog = step_program(target, cfg.t_F / n_T, cfg.dqc_mode, resource)
                total = dqc_accounting(target, resource, n_T, cfg.dqc_mode).total_time
            else:
                prog, total = None, schedule.analog_time
            if cfg.noise_enabled:
                fids = run_fidelities(mode, cfg.noise, psi0, psi_exact, schedule=schedule, program=prog,
                                      n_T=n_T, n_qubits=n, dt=dt, threads=1)
                res = summarize(label, n_T, fids)
                raw.append(res)
                mean, err = res.mean, res.stderr
            else:
                if mode == "sdaqc":
                    psi = run_sdaqc(schedule, psi0)
                elif mode == "bdaqc":
                    psi = run_bdaqc(schedule, psi0, dt)
                else:
                    psi = psi0
                    for _ in range(n_T):
                        psi = run_program(prog, psi, n)
                mean, err = float(abs(np.vdot(psi_exact, psi)) ** 2), 0.0
            rows.append({"sweep_var": value, "mode": label, "mean_fidelity": mean, "stderr": err,
                         "total_analog_time": total, "wall_time": time.perf_counter() - t0, "status": "ok"})
        except (DAQCError, ValueError) as exc:
            rows.append(_failed(value, label, exc, time.perf_counter() - t0))
    return rows, raw


def _failed(value, label, exc, wall=0.0) -> dict:
    return {"sweep_var": value, "mode": label, "mean_fidelity": math.nan, "stderr": math.nan,
            "total_analog_time": math.nan, "wall_time": wall, "status": f"failed:{type(exc).__name__}"}


def _csv_text(schema: str, header_note: str, columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {schema}\n")
    if header_note:
        buf.write(f"# {header_note}\n")
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})
    return buf.getvalue()


def run_sweep(cfg: RunConfig, out: Path | None = None) -> list[dict]:
    """Fidelity (and time) rows, one per (sweep point, mode); written as CSV when ``out`` is given."""
    points = _points(cfg)
    n_workers = threads()
    if n_workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            results = list(pool.map(lambda p: _point_rows(cfg, p), points))
    else:
        results = [_point_rows(cfg, p) for p in points]
    rows = [r for part, _ in results for r in part]
    if out is not None:
        out = Path(out)
        atomic_write(out / "results.csv", _csv_text(SWEEP_SCHEMA, f"sweep: {cfg.sweep}", SWEEP_COLUMNS, rows))
        if cfg.noise_enabled and cfg.raw_csv:
            write_raw_csv(out / "runs.csv", [r for _, raw in results for r in raw])
        write_resolved(cfg, out)
    return rows


# ---------------------------------------------------------------------------
# time totals per Trotter step (DAQC analog time vs pi/4-gate time)


def run_totals(cfg: RunConfig, out: Path | None = None) -> list[dict]:
    rows = []
    n_T = cfg.n_T[0]
    for n in cfg.n_qubits_list:
        target, resource = cfg.build_target(n), cfg.build_resource(n)
        t0 = time.perf_counter()
        try:
            sched = compile_for(cfg, target, resource, n_T)
            steps = max(1, int(sched.meta.get("n_T", n_T)))
            rows.append({"sweep_var": n, "mode": "daqc", "mean_fidelity": math.nan, "stderr": math.nan,
                         "total_analog_time": sched.analog_time / steps,
                         "wall_time": time.perf_counter() - t0, "status": "ok"})
        except (DAQCError, ValueError) as exc:
            rows.append(_failed(n, "daqc", exc, time.perf_counter() - t0))
        t0 = time.perf_counter()
        acc = dqc_accounting(target, resource, n_T, cfg.dqc_mode)
        rows.append({"sweep_var": n, "mode": f"dqc-{cfg.dqc_mode}", "mean_fidelity": math.nan, "stderr": math.nan,
                     "total_analog_time": acc.time_per_step, "wall_time": time.perf_counter() - t0,
                     "status": "ok"})
    if out is not None:
        out = Path(out)
        atomic_write(out / "results.csv", _csv_text(SWEEP_SCHEMA, "sweep: n_qubits (per-step totals)",
                                                    SWEEP_COLUMNS, rows))
        write_resolved(cfg, out)
    return rows


# ---------------------------------------------------------------------------
# per-block times of one Trotter step


BLOCK_COLUMNS = ["protocol", "set", "index", "pair", "time", "highlighted"]


def run_blocks(cfg: RunConfig, out: Path | None = None) -> list[dict]:
    n_T = cfg.n_T[0]
    target, resource = cfg.build_target(), cfg.build_resource()
    rows = []
    for mode in ("direct-ATA", "nn-swap"):
        for beta, ((j, k), vec) in enumerate(xz_couplings(target).items(), start=1):
            phis = [(mu, nu, float(g) * cfg.t_F / n_T) for (mu, nu), g in zip(XZ_AXES, vec)]
            route = "direct" if mode == "direct-ATA" or k == j + 1 else "swap"
            t = sum(gate_time(g, resource) for g in _pair_program(j, k, phis, route))
            rows.append({"protocol": f"dqc-{mode}", "set": "", "index": beta, "pair": f"{j}-{k}",
                         "time": t, "highlighted": 0})
    sched = compile_xz(target, resource, cfg.t_F, n_T, allow_fallback=cfg.allow_fallback)
    pairs = pair_list(cfg.n_qubits)
    for s, rep in sorted(sched.report.set_reports.items()):
        times = np.asarray(rep.times, dtype=float)
        i_min = int(np.argmin(times)) if times.size and times.min() < 0 else -1
        for alpha, t in enumerate(times, start=1):
            pair = pairs[alpha - 1] if alpha - 1 < len(pairs) else ("", "")
            rows.append({"protocol": "daqc", "set": s + 1, "index": alpha, "pair": f"{pair[0]}-{pair[1]}",
                         "time": float(t), "highlighted": int(alpha - 1 == i_min)})
    if out is not None:
        out = Path(out)
        atomic_write(out / "blocks.csv", _csv_text(BLOCKS_SCHEMA, f"per Trotter step, n_T={n_T}", BLOCK_COLUMNS, rows))
        write_resolved(cfg, out)
    return rows


# ---------------------------------------------------------------------------
# couplings of resources and target


COUPLING_COLUMNS = ["hamiltonian", "j", "k", "distance", "coupling"]


def run_couplings(cfg: RunConfig, out: Path | None = None) -> list[dict]:
    from .models import CouplingProfile

    n = cfg.n_qubits
    profiles = [("resource", cfg.resource)]
    for i, extra in enumerate(cfg.source.get("extra_resources", []) or [], start=1):
        profiles.append((f"resource{i + 1}", CouplingProfile.from_dict(extra)))
    target_profile = CouplingProfile.from_dict(cfg.target.get("profile", {}))
    profiles.append(("target", target_profile))
    rows = []
    for name, prof in profiles:
        for j, k in pair_list(n):
            rows.append({"hamiltonian": f"{name}:{prof.kind}", "j": j, "k": k, "distance": k - j,
                         "coupling": prof.coupling(j, k)})
    if out is not None:
        out = Path(out)
        atomic_write(out / "couplings.csv", _csv_text(COUPLINGS_SCHEMA, "", COUPLING_COLUMNS, rows))
        write_resolved(cfg, out)
    return rows


RUNNERS = {"fidelity": run_sweep, "totals": run_totals, "blocks": run_blocks, "couplings": run_couplings}


def run_experiment(cfg: RunConfig, out: Path | None = None) -> list[dict]:
    return RUNNERS[cfg.experiment](cfg, out)
