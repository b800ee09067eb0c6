"""Offline/online orchestration, benchmark schemes, and sweep campaigns.

Offline phase (before the flight): alternate phase SSCA, sample-average
scheduling, and trajectory SCA until a fixed held-out batch stops improving.
Online phase (per slot): draw the realized channel, re-pick the served user by
effective-channel norm, beamform by MRT.

Stream discipline: every random draw comes from a counter-based sampler keyed
by (scenario seed, purpose tag), so runs are reproducible bit-for-bit and
evaluation draws are shared across schemes (common random numbers).
"""
from __future__ import annotations

import csv
import json
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .channel import ChannelSampler
from .config import (ConfigError, ScenarioConfig, config_to_text,
                     with_beta_db, with_horizon)
from .rate import EvalResult, PhaseVector, effective_channel, mrt_rate_from_channel
from .scheduling import ScheduleMatrix, offline_schedule, online_schedule
from .ssca import PhaseSchedule, SscaState, optimize_phases, ssca_step
from .trajectory import Trajectory, sca_trajectory, straight_line

SCHEMES = ("full_icsi", "hybrid", "offline_only", "dcm",
           "heuristic_trajectory", "random_phase")

# design variants shared between schemes: hybrid, offline_only and full_icsi
# reuse one offline solution so paired comparisons isolate the online policy
_DESIGN_VARIANT = {
    "hybrid": "hybrid",
    "offline_only": "hybrid",
    "full_icsi": "hybrid",
    "dcm": "dcm",
    "heuristic_trajectory": "heuristic",
    "random_phase": "random_phase",
}


@dataclass
class OfflineSolution:
    trajectory: Trajectory
    phases: PhaseSchedule
    schedule: ScheduleMatrix
    objective_trace: list


@dataclass
class CampaignCell:
    scheme: str
    value: float
    result: EvalResult | None = None
    error: str | None = None


@dataclass
class CampaignResult:
    param: str
    values: list
    schemes: list
    cells: dict = field(default_factory=dict)      # (scheme, value) -> CampaignCell
    designs: dict = field(default_factory=dict)    # (scheme, value) -> OfflineSolution
    master_seed: int = 0
    reps: int = 0
    wall_clock: float = 0.0


def _string_entropy(part) -> int:
    if isinstance(part, str):
        return int.from_bytes(part.encode(), "little")
    return int(part)


def derive_cell_seed(master_seed: int, param: str, value: float) -> int:
    """Per-sweep-cell scenario seed; identical for all schemes in the cell."""
    bits = int(np.float64(value).view(np.uint64))
    ss = np.random.SeedSequence([int(master_seed), _string_entropy(param), bits])
    return int(ss.generate_state(1, np.uint64)[0] >> 1)


def initial_schedule(scenario: ScenarioConfig) -> ScheduleMatrix:
    """Round-robin assignment used to seed the alternating loop."""
    a = np.zeros((scenario.K, scenario.N), dtype=np.int8)
    for n in range(scenario.N):
        a[n % scenario.K, n] = 1
    return ScheduleMatrix(a=a)


def schedule_rate_table(trajectory, phases_combined: np.ndarray,
                        scenario: ScenarioConfig, tag=(),
                        deterministic: bool = False) -> np.ndarray:
    """Sample-average MRT rate of every user in every slot under the current
    combined per-slot phases."""
    q = np.asarray(getattr(trajectory, "q", trajectory), dtype=float)
    sampler = ChannelSampler(scenario, tag=tag, deterministic=deterministic)
    table = np.zeros((scenario.K, scenario.N))
    for n in range(scenario.N):
        batch = sampler.batch(q[n + 1], n)
        pv = PhaseVector(phi=phases_combined[n])
        for s in batch.samples:
            for k in range(scenario.K):
                h = effective_channel(s, pv, k)
                table[k, n] += mrt_rate_from_channel(h, scenario)
    return table / scenario.I


def heldout_objective(trajectory, phases: PhaseSchedule, schedule: ScheduleMatrix,
                      scenario: ScenarioConfig, tag=("heldout",),
                      deterministic: bool = False) -> float:
    """Offline objective on a fixed batch: the same unit-variance draws are
    re-materialized at the current trajectory every round, so the convergence
    test is a deterministic function of the iterates."""
    q = np.asarray(getattr(trajectory, "q", trajectory), dtype=float)
    sampler = ChannelSampler(scenario, tag=tag, deterministic=deterministic)
    combined = phases.combined(schedule)
    total = 0.0
    for n in range(scenario.N):
        k = schedule.user_for_slot(n)
        if k is None:
            continue
        pv = PhaseVector(phi=combined[n])
        batch = sampler.batch(q[n + 1], n)
        total += float(np.mean([
            mrt_rate_from_channel(effective_channel(s, pv, k), scenario)
            for s in batch.samples]))
    return total / scenario.N


def heuristic_trajectory(scenario: ScenarioConfig) -> Trajectory:
    """Fly toward the point above the RIS at v_max, hover while the return
    leg stays feasible, then fly to qF at v_max."""
    target = np.asarray(scenario.ris_pos[:2], dtype=float)
    qF = np.asarray(scenario.qF, dtype=float)
    D = scenario.D
    q = [np.asarray(scenario.q0, dtype=float)]
    for n in range(1, scenario.N + 1):
        remaining = scenario.N - n
        pos = q[-1]
        to_target = target - pos
        dist_t = float(np.linalg.norm(to_target))
        cand = pos + (to_target if dist_t <= D else to_target * (D / dist_t))
        if float(np.linalg.norm(cand - qF)) <= remaining * D - 1e-9:
            q.append(cand)
            continue
        to_end = qF - pos
        dist_e = float(np.linalg.norm(to_end))
        cand = pos + (to_end if dist_e <= D else to_end * (D / dist_e))
        q.append(cand)
    q[-1] = qF.copy()
    traj = Trajectory(q=np.array(q))
    traj.validate(scenario)
    return traj


def _design(scenario: ScenarioConfig, variant: str) -> OfflineSolution:
    """Offline alternating optimization for one design variant."""
    deterministic = variant == "dcm"
    sc = replace(scenario, I=1) if deterministic else scenario

    if variant == "heuristic":
        traj = heuristic_trajectory(sc)
        optimize_traj = False
    else:
        traj = straight_line(sc)
        optimize_traj = True

    sched = initial_schedule(sc)
    if variant == "random_phase":
        ent = [int(sc.seed)] + [_string_entropy(x) for x in ("design", variant, "phi")]
        rng = np.random.default_rng(np.random.SeedSequence(ent))
        phases = PhaseSchedule(phi=rng.uniform(0.0, 2.0 * np.pi, (sc.K, sc.N, sc.M)))
        optimize_phase = False
    else:
        phases = PhaseSchedule(phi=np.zeros((sc.K, sc.N, sc.M)))
        optimize_phase = True

    ho_tag = ("design", variant, "heldout")
    obj = heldout_objective(traj, phases, sched, sc, tag=ho_tag, deterministic=deterministic)
    trace = [obj]
    for r in range(sc.alt_rounds):
        prev = (traj, phases, sched)
        if optimize_phase:
            # round 0 starts from LoS-matched phases (coherent cascade); later
            # rounds keep the better of the carried phases and a fresh
            # LoS-matched start, since a trajectory move can strand the old
            # phases out of alignment
            phases = optimize_phases(traj, sched, sc,
                                     tag=("design", variant, "phase", r),
                                     init_phases=None if r == 0 else phases.phi,
                                     init_mode="los" if r == 0 else "best",
                                     deterministic=deterministic)
        table = schedule_rate_table(traj, phases.combined(sched), sc,
                                    tag=("design", variant, "sched", r),
                                    deterministic=deterministic)
        sched = offline_schedule(table)
        if optimize_traj:
            sampler = ChannelSampler(sc, tag=("design", variant, "traj", r),
                                     deterministic=deterministic)
            batches = [sampler.batch(traj.q[n + 1], n) for n in range(sc.N)]
            traj, _rep = sca_trajectory(batches, sched, phases, traj.q, sc)
        obj_new = heldout_objective(traj, phases, sched, sc, tag=ho_tag,
                                    deterministic=deterministic)
        if obj_new < obj:
            # a round that lowers the held-out objective is reverted; the
            # returned iterate and its trace stay monotone
            traj, phases, sched = prev
            break
        gain = obj_new - obj
        obj = obj_new
        trace.append(obj)
        if gain < sc.alt_tol * max(abs(trace[-2]), 1e-9):
            break
    return OfflineSolution(trajectory=traj, phases=phases, schedule=sched,
                           objective_trace=trace)


def offline_optimize(scenario: ScenarioConfig) -> OfflineSolution:
    """Offline design with S-CSI only (the hybrid scheme's first stage)."""
    return _design(scenario, "hybrid")


def online_run(scenario: ScenarioConfig, offline: OfflineSolution, rep: int = 0):
    """One flight under realized fading.

    Returns (online_rates, offline_rates): the per-slot rate with online
    re-scheduling plus MRT, and the paired rate of the offline schedule on the
    same realization.
    """
    sampler = ChannelSampler(scenario, tag=("eval", rep))
    combined = offline.phases.combined(offline.schedule)
    q = offline.trajectory.q
    online_rates = np.zeros(scenario.N)
    offline_rates = np.zeros(scenario.N)
    for n in range(scenario.N):
        s = sampler.sample(q[n + 1], n, 0)
        pv = PhaseVector(phi=combined[n])
        h_all = np.stack([effective_channel(s, pv, k) for k in range(scenario.K)])
        k_star, _ = online_schedule(h_all, scenario)
        online_rates[n] = mrt_rate_from_channel(h_all[k_star], scenario)
        k_off = offline.schedule.user_for_slot(n)
        if k_off is not None:
            offline_rates[n] = mrt_rate_from_channel(h_all[k_off], scenario)
    return online_rates, offline_rates


def _genie_slot_rate(sample, combined_phi: np.ndarray, scenario: ScenarioConfig,
                     iters: int) -> float:
    """Clairvoyant per-slot rate: per-user phase ascent on the realized
    channel (single-sample, fixed batch), never worse than the offline phases."""
    best = 0.0
    for k in range(scenario.K):
        pv = PhaseVector(phi=combined_phi)
        base = mrt_rate_from_channel(effective_channel(sample, pv, k), scenario)
        state = SscaState(phi=combined_phi.copy(), f_track=np.zeros(scenario.M))
        arrays = (sample.G[None], sample.h_r[k][None], sample.h_d[k][None])
        for _ in range(iters):
            state = ssca_step(state, arrays, scenario.ssca, k, scenario)
        tuned = mrt_rate_from_channel(
            effective_channel(sample, PhaseVector(phi=state.phi), k), scenario)
        best = max(best, base, tuned)
    return best


def _evaluate(scenario: ScenarioConfig, design: OfflineSolution, scheme: str,
              reps: int, genie_iters: int = 40) -> EvalResult:
    """Monte-Carlo average rate over full flights; draws are shared across
    schemes through the ("eval", rep) stream tags."""
    q = design.trajectory.q
    combined = design.phases.combined(design.schedule)
    per_rep = np.zeros(reps)
    per_slot = np.zeros(scenario.N)
    adaptive = scheme in ("hybrid", "heuristic_trajectory", "random_phase")
    for rep in range(reps):
        if scheme == "full_icsi":
            sampler = ChannelSampler(scenario, tag=("eval", rep))
            rates = np.zeros(scenario.N)
            for n in range(scenario.N):
                s = sampler.sample(q[n + 1], n, 0)
                rates[n] = _genie_slot_rate(s, combined[n], scenario, genie_iters)
        elif adaptive:
            rates, _ = online_run(scenario, design, rep=rep)
        else:  # offline_only, dcm: keep the offline schedule, MRT per slot
            _, rates = online_run(scenario, design, rep=rep)
        per_rep[rep] = rates.mean()
        per_slot += rates
    mean = float(per_rep.mean())
    se = float(per_rep.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0
    return EvalResult(mean_rate=mean, std_error=se, n_samples=reps,
                      per_slot=per_slot / reps)


def run_scheme(scheme: str, scenario: ScenarioConfig, reps: int = 200,
               design: OfflineSolution | None = None) -> EvalResult:
    """Design + evaluate one benchmark scheme."""
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme: {scheme}")
    if design is None:
        design = _design(scenario, _DESIGN_VARIANT[scheme])
    return _evaluate(scenario, design, scheme, reps)


def scheme_design(scheme: str, scenario: ScenarioConfig) -> OfflineSolution:
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme: {scheme}")
    return _design(scenario, _DESIGN_VARIANT[scheme])


def _cell_scenario(scenario: ScenarioConfig, param: str, value: float) -> ScenarioConfig:
    if param == "beta_db":
        sc = with_beta_db(scenario, value)
    elif param == "T_seconds":
        sc = with_horizon(scenario, value)
    else:
        raise ConfigError(f"unknown sweep parameter: {param}")
    return replace(sc, seed=derive_cell_seed(scenario.seed, param, value))


def sweep(param: str, values, scenario: ScenarioConfig, schemes=SCHEMES,
          reps: int = 200) -> CampaignResult:
    """Evaluate the requested schemes at every sweep value with common random
    numbers across schemes within each cell."""
    if not len(values):
        raise ConfigError("sweep values must be nonempty")
    t0 = time.perf_counter()
    out = CampaignResult(param=param, values=list(values), schemes=list(schemes),
                         master_seed=scenario.seed, reps=reps)
    for value in values:
        try:
            sc_v = _cell_scenario(scenario, param, value)
        except ConfigError as e:
            for scheme in schemes:
                out.cells[(scheme, value)] = CampaignCell(scheme, value, error=str(e))
            continue
        designs: dict = {}
        for scheme in schemes:
            variant = _DESIGN_VARIANT[scheme]
            try:
                if variant not in designs:
                    designs[variant] = _design(sc_v, variant)
                design = designs[variant]
                res = _evaluate(sc_v, design, scheme, reps)
                out.cells[(scheme, value)] = CampaignCell(scheme, value, result=res)
                out.designs[(scheme, value)] = design
            except Exception as e:  # record the failure, keep sweeping
                out.cells[(scheme, value)] = CampaignCell(scheme, value, error=str(e))
    out.wall_clock = time.perf_counter() - t0
    return out


# ---------------------------------------------------------------------------
# artifact emission
# ---------------------------------------------------------------------------

def _fmt_value(v) -> str:
    return repr(float(v))


def write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "x_m", "y_m"])
        for n, (x, y) in enumerate(traj.q):
            wr.writerow([n, repr(float(x)), repr(float(y))])


def write_schedule_csv(path: Path, sched: ScheduleMatrix) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "user"])
        for n, k in enumerate(sched.users()):
            wr.writerow([n, -1 if k is None else k])


def write_campaign(out_dir, campaign: CampaignResult, scenario: ScenarioConfig) -> Path:
    """Emit rates.csv, per-value trajectory/schedule CSVs, and manifest.json.

    Outputs are byte-identical across reruns with the same seed: floats are
    written with repr and the manifest holds no timestamps.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rates_path = out / "rates.csv"
    with open(rates_path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["scheme", "sweep_value", "mean_rate", "std_err", "n_samples"])
        for scheme in campaign.schemes:
            for value in campaign.values:
                cell = campaign.cells[(scheme, value)]
                if cell.error is not None:
                    wr.writerow([scheme, _fmt_value(value), "error", cell.error, 0])
                else:
                    r = cell.result
                    wr.writerow([scheme, _fmt_value(value),
                                 repr(r.mean_rate), repr(r.std_error), r.n_samples])

    value_index: dict = {}
    for value in campaign.values:
        vdir = out / f"{campaign.param}_{_fmt_value(value)}"
        entry = {"dir": vdir.name, "trajectories": {}, "schedules": {}}
        for scheme in campaign.schemes:
            des = campaign.designs.get((scheme, value))
            if des is None:
                continue
            vdir.mkdir(exist_ok=True)
            tpath = vdir / f"trajectory_{scheme}.csv"
            spath = vdir / f"schedule_{scheme}.csv"
            write_trajectory_csv(tpath, des.trajectory)
            write_schedule_csv(spath, des.schedule)
            entry["trajectories"][scheme] = f"{vdir.name}/{tpath.name}"
            entry["schedules"][scheme] = f"{vdir.name}/{spath.name}"
        value_index[_fmt_value(value)] = entry

    manifest = {
        "param": campaign.param,
        "values": [float(v) for v in campaign.values],
        "schemes": list(campaign.schemes),
        "reps": campaign.reps,
        "master_seed": int(campaign.master_seed),
        "config": {
            "K": scenario.K,
            "user_pos": [list(p) for p in scenario.user_pos],
            "ris_pos": list(scenario.ris_pos),
            "q0": list(scenario.q0),
            "qF": list(scenario.qF),
            "N": scenario.N,
            "z_F": scenario.z_F,
        },
        "config_text": config_to_text(scenario),
        "versions": {
            "risuav": __version__,
            "numpy": np.__version__,
            "python": ".".join(str(x) for x in sys.version_info[:3]),
        },
        "artifacts": {"rates": "rates.csv", "values": value_index},
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return rates_path
