"""Stochastic successive convex approximation for per-user, per-slot RIS phases.

Per slot and scheduled user the objective is the batch-averaged MRT log-rate
    f(phi) = (1/I) sum_i ln(1 + (P/sigma^2) ||theta^T H_i + h_d,i^H||^2),
with H_i = diag(h_r,i^H) G_i.  Each iteration draws a fresh batch, updates a
smoothed gradient tracker, minimizes a quadratic surrogate in closed form and
blends the minimizer into the iterate with a diminishing step:

    zeta = l^-nu,  f <- (1 - zeta) f - zeta * mean_i grad R_i(phi)
    phi_hat = phi - f / tau
    xi = l^-mu,    phi <- (1 - xi) phi + xi * phi_hat

so the first iteration collapses to a plain gradient-ascent step.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelBatch, ChannelSampler, los_components
from .config import ScenarioConfig, SscaHyperParams
from .scheduling import ScheduleMatrix

_LN2 = np.log(2.0)


def cascade_matrix(G: np.ndarray, h_r: np.ndarray) -> np.ndarray:
    """H = diag(h_r^H) G, batched over leading axes."""
    return h_r.conj()[..., :, None] * G


def _effective(H: np.ndarray, h_d: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Effective channel H^H theta^* + h_d, batched over leading axes."""
    eta = np.exp(-1j * phi)
    return np.einsum("...mt,m->...t", H.conj(), eta) + h_d


def _rate_nats(H, h_d, phi, c: float) -> np.ndarray:
    h = _effective(H, h_d, phi)
    g = np.einsum("...t,...t->...", h.conj(), h).real
    return np.log1p(c * g)


def _grad_nats(H, h_d, phi, c: float) -> np.ndarray:
    """d/dphi of ln(1 + c ||H^H theta^* + h_d||^2), batched; last axis is M."""
    h = _effective(H, h_d, phi)
    g = np.einsum("...t,...t->...", h.conj(), h).real
    Hh = np.einsum("...mt,...t->...m", H, h)
    theta = np.exp(1j * phi)
    return 2.0 * c * np.real(1j * theta * Hh) / (1.0 + c * g)[..., None]


def _batch_arrays(batch: ChannelBatch, k: int):
    G = np.stack([s.G for s in batch.samples])
    hr = np.stack([s.h_r[k] for s in batch.samples])
    hd = np.stack([s.h_d[k] for s in batch.samples])
    return G, hr, hd


def batch_objective(batch: ChannelBatch, phi: np.ndarray, k: int,
                    scenario: ScenarioConfig) -> float:
    """Sample-average MRT rate of user k under phases phi, bits/s/Hz."""
    G, hr, hd = _batch_arrays(batch, k)
    return objective_from_arrays(G, hr, hd, phi, scenario)


def objective_from_arrays(G, hr, hd, phi, scenario: ScenarioConfig) -> float:
    H = cascade_matrix(G, hr)
    return float(_rate_nats(H, hd, np.asarray(phi, float), scenario.snr_scale).mean() / _LN2)


def phase_gradient(sample, phi: np.ndarray, k: int,
                   scenario: ScenarioConfig) -> np.ndarray:
    """Analytic gradient (nats) of one realization's log-rate wrt phi."""
    H = cascade_matrix(sample.G, sample.h_r[k])
    return _grad_nats(H, sample.h_d[k], np.asarray(phi, float), scenario.snr_scale)


@dataclass
class SscaState:
    """Optimizer state: iterate, gradient tracker, iteration counter."""

    phi: np.ndarray
    f_track: np.ndarray
    l: int = 1
    obj_history: list = field(default_factory=list)


def surrogate_value(phi: np.ndarray, state: SscaState, tau: float) -> float:
    """Quadratic surrogate around the current iterate; zero at the iterate
    with gradient equal to the tracker."""
    d = np.asarray(phi, float) - state.phi
    return float(d @ state.f_track + 0.5 * tau * (d @ d))


def ssca_step(state: SscaState, batch, params: SscaHyperParams, k: int,
              scenario: ScenarioConfig, record_obj: bool = True) -> SscaState:
    """One tracker/surrogate/momentum update on a freshly drawn batch."""
    if isinstance(batch, ChannelBatch):
        G, hr, hd = _batch_arrays(batch, k)
    else:
        G, hr, hd = batch
    H = cascade_matrix(G, hr)
    c = scenario.snr_scale
    grad_mean = _grad_nats(H, hd, state.phi, c).mean(axis=0)

    zeta = float(state.l) ** -params.nu
    f_new = (1.0 - zeta) * state.f_track - zeta * grad_mean
    phi_hat = state.phi - f_new / params.tau
    xi = float(state.l) ** -params.mu
    phi_new = (1.0 - xi) * state.phi + xi * phi_hat

    hist = state.obj_history
    if record_obj:
        obj = float(_rate_nats(H, hd, phi_new, c).mean() / _LN2)
        hist = hist + [obj]
    return SscaState(phi=phi_new, f_track=f_new, l=state.l + 1, obj_history=hist)


@dataclass
class PhaseSchedule:
    """Per-user phases phi[k, n] (radians); combined per-slot phases follow
    the schedule: phi[n] = sum_k a_k[n] phi_k[n]."""

    phi: np.ndarray  # (K, N, M)

    def combined(self, schedule: ScheduleMatrix) -> np.ndarray:
        return np.einsum("kn,knm->nm", schedule.a.astype(float), self.phi)


def los_matched_phases(q, k: int, scenario: ScenarioConfig) -> np.ndarray:
    """Phases aligning the deterministic cascade coherently, rotated onto the
    deterministic direct component when one exists."""
    zbar, zbar_r, zbar_d = los_components(q, scenario)
    # Zbar is rank-1 (a_ris outer a_uav): per-element cascade coefficients are
    # parallel, so aligning their phases is exactly optimal for the LoS part.
    # First elements of both responses are 1, hence a_ris = zbar[:, 0] and
    # a_uav = zbar[0, :].
    coeff = zbar_r[k] * zbar[:, 0].conj()
    phi = np.angle(coeff)
    inner = np.vdot(zbar[0, :].conj(), zbar_d[k])  # cascade direction^H h_d LoS
    if scenario.beta_ug > 0 and abs(inner) > 1e-12:
        phi = phi - np.angle(inner)
    return np.mod(phi, 2.0 * np.pi)


def optimize_phases(trajectory, schedule: ScheduleMatrix, scenario: ScenarioConfig,
                    tag=(), init_phases: np.ndarray | None = None,
                    init_mode: str = "zero", deterministic: bool = False,
                    fresh_batches: bool = True) -> PhaseSchedule:
    """Run the SSCA loop per slot for the scheduled user; unscheduled slots
    keep their previous phases (or the initialization).

    init_mode picks the per-slot starting point: "zero", "los" (LoS-matched
    closed form), or "best" (probe the carried-over phases against the
    LoS-matched ones on the first batch and start from the better; useful
    after the trajectory moved and stale phases lost cascade alignment).
    fresh_batches=False reuses one batch across iterations (common random
    numbers) for variance-reduced comparisons.
    """
    q = np.asarray(getattr(trajectory, "q", trajectory), dtype=float)
    sc = scenario
    params = sc.ssca
    if init_phases is not None:
        phases = np.array(init_phases, dtype=float, copy=True)
    else:
        phases = np.zeros((sc.K, sc.N, sc.M))
        if init_mode in ("los", "best"):
            for n in range(sc.N):
                for k in range(sc.K):
                    phases[k, n] = los_matched_phases(q[n + 1], k, sc)

    window = 20
    for n in range(sc.N):
        k = schedule.user_for_slot(n)
        if k is None:
            continue
        sampler = ChannelSampler(sc, tag=tuple(tag) + (n,), deterministic=deterministic)
        phi0 = phases[k, n].copy()
        if init_mode == "best" and init_phases is not None:
            probe = sampler.user_batch(q[n + 1], n, k, base=0)
            cand = los_matched_phases(q[n + 1], k, sc)
            if (objective_from_arrays(*probe, cand, sc)
                    > objective_from_arrays(*probe, phi0, sc)):
                phi0 = cand
        state = SscaState(phi=phi0, f_track=np.zeros(sc.M))
        track = params.tol > 0
        fixed = None if fresh_batches else sampler.user_batch(q[n + 1], n, k, base=sc.I)
        for l in range(params.max_iters):
            arrays = fixed if fixed is not None else sampler.user_batch(
                q[n + 1], n, k, base=(l + 1) * sc.I)
            state = ssca_step(state, arrays, params, k, sc, record_obj=track)
            if track and state.l > 2 * window:
                recent = np.mean(state.obj_history[-window:])
                prev = np.mean(state.obj_history[-2 * window:-window])
                if abs(recent - prev) < params.tol * max(abs(prev), 1e-12):
                    break
        phases[k, n] = state.phi
    return PhaseSchedule(phi=phases)
