"""Successive convex approximation for the UAV trajectory.

The per-sample rate at slot n, holding the drawn small-scale fading fixed and
rescaling path loss to candidate distances (u, v) = (UAV-user, UAV-RIS), is

    R(u, v) = log2(1 + (P/sigma^2) (A/u^kappa + B/v^gamma
                                     + C/(u^(kappa/2) v^(gamma/2))))

where A, B, C absorb the sampled channels and the draw-position path loss
(they do not depend on the expansion point).  Linearizing R in (u, v) at the
current iterate yields coefficients D, E, F and a subproblem with a linear
objective, convex quadratic distance/step constraints, and slack variables
that are tight at any SCA fixed point.  The subproblem is solved by a
log-barrier interior-point method with dense Newton steps: the problem is
small (a few hundred variables), so no external solver is needed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import distances
from .config import ConfigError, GeometryError, ScaHyperParams, ScenarioConfig, SolverError
from .scheduling import ScheduleMatrix
from .ssca import PhaseSchedule, cascade_matrix

_LN2 = np.log(2.0)


@dataclass
class Trajectory:
    """Horizontal waypoints q[0..N] with pinned endpoints and bounded steps."""

    q: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        if self.q.ndim != 2 or self.q.shape[1] != 2:
            raise ConfigError("trajectory must be an (N+1) x 2 array")

    def validate(self, scenario: ScenarioConfig) -> None:
        if self.q.shape[0] != scenario.N + 1:
            raise ConfigError("trajectory length must be N + 1")
        if not np.allclose(self.q[0], scenario.q0) or not np.allclose(self.q[-1], scenario.qF):
            raise ConfigError("trajectory endpoints must equal q0 and qF")
        steps = np.sum(np.diff(self.q, axis=0) ** 2, axis=1)
        if np.any(steps > scenario.D ** 2 + 1e-6):
            raise ConfigError("trajectory violates the per-slot step bound")

    def slot_positions(self) -> np.ndarray:
        """Position occupied during slot n (0-based), i.e. q[n+1]."""
        return self.q[1:]


def straight_line(scenario: ScenarioConfig) -> Trajectory:
    frac = np.linspace(0.0, 1.0, scenario.N + 1)[:, None]
    q = np.asarray(scenario.q0) * (1 - frac) + np.asarray(scenario.qF) * frac
    return Trajectory(q=q)


@dataclass
class SlackVars:
    """Slack distances; entries for unscheduled (k, n) are the tight values."""

    u: np.ndarray  # (K, N)
    v: np.ndarray  # (N,)


@dataclass
class SolveReport:
    objective_trace: list = field(default_factory=list)
    kkt_residual: float = 0.0
    max_violation: float = 0.0
    iterations: int = 0
    status: str = "solved"


def _slot_dz2(scenario: ScenarioConfig):
    dz2_ug = np.array([(scenario.z_F - p[2]) ** 2 for p in scenario.user_pos])
    dz2_ur = (scenario.z_F - scenario.ris_pos[2]) ** 2
    return dz2_ug, dz2_ur


def d_ug(p, k: int, scenario: ScenarioConfig) -> float:
    w = np.asarray(scenario.user_pos[k])
    return float(np.sqrt((p[0] - w[0]) ** 2 + (p[1] - w[1]) ** 2 + (scenario.z_F - w[2]) ** 2))


def d_ur(p, scenario: ScenarioConfig) -> float:
    r = np.asarray(scenario.ris_pos)
    return float(np.sqrt((p[0] - r[0]) ** 2 + (p[1] - r[1]) ** 2 + (scenario.z_F - r[2]) ** 2))


def abc_coefficients(sample, phase, q_j, k: int, scenario: ScenarioConfig):
    """Rate coefficients of one sample drawn at UAV position q_j.

    The distance powers cancel the sampled path loss, so A, B, C characterize
    the realization independently of where the expansion later happens.
    """
    phi = np.asarray(getattr(phase, "phi", phase), dtype=float)
    dur, dug_all, _ = distances(q_j, scenario)
    dug = float(dug_all[k])
    H = cascade_matrix(sample.G, sample.h_r[k])
    casc = np.einsum("mt,m->t", H.conj(), np.exp(-1j * phi))
    h_d = sample.h_d[k]
    A = float(np.vdot(h_d, h_d).real) * dug ** scenario.kappa
    B = float(np.vdot(casc, casc).real) * dur ** scenario.gamma
    C = 2.0 * float(np.vdot(casc, h_d).real) * dug ** (scenario.kappa / 2) * dur ** (scenario.gamma / 2)
    return A, B, C


@dataclass
class RateCoefficients:
    """Per scheduled slot s and sample i: A, B, C (and D, E, F on demand)."""

    slots: list      # 0-based scheduled slot indices
    users: list
    A: np.ndarray    # (S, I)
    B: np.ndarray
    C: np.ndarray


def compute_coefficients(batches, schedule: ScheduleMatrix, phases,
                         scenario: ScenarioConfig) -> RateCoefficients:
    phi_all = _phases_per_slot(phases, schedule)
    slots, users, rows_a, rows_b, rows_c = [], [], [], [], []
    for n in range(schedule.N):
        k = schedule.user_for_slot(n)
        if k is None:
            continue
        batch = batches[n]
        a = np.empty(len(batch))
        b = np.empty(len(batch))
        c = np.empty(len(batch))
        for i, s in enumerate(batch.samples):
            a[i], b[i], c[i] = abc_coefficients(s, phi_all[n], batch.q, k, scenario)
        slots.append(n)
        users.append(k)
        rows_a.append(a)
        rows_b.append(b)
        rows_c.append(c)
    if not slots:
        raise ConfigError("schedule has no served slot; nothing to optimize")
    return RateCoefficients(slots=slots, users=users, A=np.array(rows_a),
                            B=np.array(rows_b), C=np.array(rows_c))


def _phases_per_slot(phases, schedule: ScheduleMatrix) -> np.ndarray:
    if isinstance(phases, PhaseSchedule):
        return phases.combined(schedule)
    return np.asarray(phases, dtype=float)


def snr_term(A, B, C, u, v, scenario: ScenarioConfig):
    ka, ga = scenario.kappa, scenario.gamma
    return A / u ** ka + B / v ** ga + C / (u ** (ka / 2) * v ** (ga / 2))


def rate_field(A, B, C, u, v, scenario: ScenarioConfig):
    """Exact distance-rescaled rate in bits/s/Hz."""
    return np.log1p(scenario.snr_scale * snr_term(A, B, C, u, v, scenario)) / _LN2


def def_coefficients(A, B, C, u_j, v_j, scenario: ScenarioConfig):
    """Taylor coefficients at (u_j, v_j): value D, slopes E (wrt u), F (wrt v)."""
    ka, ga, c = scenario.kappa, scenario.gamma, scenario.snr_scale
    D = 1.0 + c * snr_term(A, B, C, u_j, v_j, scenario)
    E = -c * (ka * A / u_j ** (ka + 1)
              + (ka / 2) * C / (v_j ** (ga / 2) * u_j ** (ka / 2 + 1)))
    F = -c * (ga * B / v_j ** (ga + 1)
              + (ga / 2) * C / (u_j ** (ka / 2) * v_j ** (ga / 2 + 1)))
    return D, E, F


def taylor_rate(A, B, C, u, v, u_j, v_j, scenario: ScenarioConfig):
    """First-order lower-bound model of the rate around (u_j, v_j), bits/s/Hz."""
    if np.any(np.asarray(u_j) <= 0) or np.any(np.asarray(v_j) <= 0):
        raise GeometryError("expansion distances must be positive")
    D, E, F = def_coefficients(A, B, C, u_j, v_j, scenario)
    if np.any(D <= 0):
        raise SolverError("nonpositive SNR term at the expansion point")
    return np.log2(D) + (E * (u - u_j) + F * (v - v_j)) / (D * _LN2)


@dataclass
class ConvexSubproblem:
    """Linearized trajectory program: linear objective in the slacks, convex
    quadratic distance and step constraints, pinned endpoints."""

    N: int
    q0: np.ndarray
    qF: np.ndarray
    D2: float
    slots: list          # scheduled slot indices (0-based)
    users: list
    user_xy: np.ndarray  # (S, 2)
    dz2_ug: np.ndarray   # (S,)
    ris_xy: np.ndarray
    dz2_ur: float
    u_anchor: np.ndarray
    v_anchor: np.ndarray
    cu: np.ndarray       # objective slope per unit u, bits/s/Hz per metre
    cv: np.ndarray
    const_bits: float
    slack_cap: float
    q_start: np.ndarray  # (N+1, 2) expansion trajectory

    def objective_bits(self, u: np.ndarray, v: np.ndarray) -> float:
        """Linearized sample-average rate at slacks (u, v)."""
        return float(self.const_bits + self.cu @ (u - self.u_anchor)
                     + self.cv @ (v - self.v_anchor))


def build_subproblem(batches, schedule: ScheduleMatrix, phases, q_j,
                     u_j, v_j, scenario: ScenarioConfig,
                     coeffs: RateCoefficients | None = None) -> ConvexSubproblem:
    """Assemble the convex subproblem around expansion point (q_j, u_j, v_j).

    u_j, v_j are indexed by scheduled slot (arrays of length S, matching the
    schedule's served slots in order).
    """
    q_j = np.asarray(getattr(q_j, "q", q_j), dtype=float)
    if coeffs is None:
        coeffs = compute_coefficients(batches, schedule, phases, scenario)
    S = len(coeffs.slots)
    u_j = np.asarray(u_j, dtype=float).reshape(S)
    v_j = np.asarray(v_j, dtype=float).reshape(S)

    pos = q_j[1:]
    for s, (n, k) in enumerate(zip(coeffs.slots, coeffs.users)):
        if u_j[s] < d_ug(pos[n], k, scenario) - 1e-6 or v_j[s] < d_ur(pos[n], scenario) - 1e-6:
            raise ConfigError("expansion point infeasible: slack below true distance")

    c_total = 1.0 / (scenario.N * coeffs.A.shape[1])
    cu = np.empty(S)
    cv = np.empty(S)
    const = 0.0
    for s in range(S):
        D, E, F = def_coefficients(coeffs.A[s], coeffs.B[s], coeffs.C[s],
                                   u_j[s], v_j[s], scenario)
        cu[s] = c_total * float(np.sum(E / (D * _LN2)))
        cv[s] = c_total * float(np.sum(F / (D * _LN2)))
        const += c_total * float(np.sum(np.log2(D)))

    dz2_ug_all, dz2_ur = _slot_dz2(scenario)
    user_xy = np.array([scenario.user_pos[k][:2] for k in coeffs.users])
    cap = 4.0 * (max(float(u_j.max()), float(v_j.max())) + scenario.N * scenario.D)
    return ConvexSubproblem(
        N=scenario.N, q0=np.asarray(scenario.q0), qF=np.asarray(scenario.qF),
        D2=scenario.D ** 2, slots=list(coeffs.slots), users=list(coeffs.users),
        user_xy=user_xy, dz2_ug=dz2_ug_all[list(coeffs.users)],
        ris_xy=np.asarray(scenario.ris_pos[:2]), dz2_ur=dz2_ur,
        u_anchor=u_j, v_anchor=v_j, cu=cu, cv=cv, const_bits=const,
        slack_cap=cap, q_start=q_j.copy())


# ---------------------------------------------------------------------------
# log-barrier interior-point solver
# ---------------------------------------------------------------------------

class _Program:
    """Dense barrier formulation of a ConvexSubproblem.

    Variables x = [q[1..N-1] flattened, u_s, v_s].  All constraints are of the
    form c(x) <= 0 with quadratic q-parts and linear slack parts.
    """

    def __init__(self, prob: ConvexSubproblem):
        self.prob = prob
        self.nf = prob.N - 1
        self.S = len(prob.slots)
        self.dim = 2 * self.nf + 2 * self.S
        # minimization objective: negate the rate slopes
        g = np.zeros(self.dim)
        g[2 * self.nf:2 * self.nf + self.S] = -prob.cu
        g[2 * self.nf + self.S:] = -prob.cv
        self.obj_grad = g

    # -- packing ------------------------------------------------------------
    def pack(self, q: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.concatenate([q[1:-1].ravel(), u, v])

    def positions(self, x: np.ndarray) -> np.ndarray:
        q = np.empty((self.prob.N + 1, 2))
        q[0] = self.prob.q0
        q[-1] = self.prob.qF
        if self.nf:
            q[1:-1] = x[:2 * self.nf].reshape(self.nf, 2)
        return q

    def slacks(self, x: np.ndarray):
        u = x[2 * self.nf:2 * self.nf + self.S]
        v = x[2 * self.nf + self.S:]
        return u, v

    def _qvar(self, n: int):
        """Free-variable offset of position n, or None when pinned."""
        if 1 <= n <= self.prob.N - 1:
            return 2 * (n - 1)
        return None

    # -- constraints ----------------------------------------------------------
    def constraints(self, x: np.ndarray) -> np.ndarray:
        p = self.prob
        q = self.positions(x)
        u, v = self.slacks(x)
        vals = list(np.sum(np.diff(q, axis=0) ** 2, axis=1) - p.D2)
        pos = q[1:]
        for s, n in enumerate(p.slots):
            d2 = np.sum((pos[n] - p.user_xy[s]) ** 2) + p.dz2_ug[s]
            vals.append(d2 + p.u_anchor[s] ** 2 - 2 * p.u_anchor[s] * u[s])
            d2r = np.sum((pos[n] - p.ris_xy) ** 2) + p.dz2_ur
            vals.append(d2r + p.v_anchor[s] ** 2 - 2 * p.v_anchor[s] * v[s])
        vals.extend(u - p.slack_cap)
        vals.extend(v - p.slack_cap)
        return np.array(vals)

    def n_constraints(self) -> int:
        return self.prob.N + 4 * self.S

    def barrier_grad_hess(self, x: np.ndarray):
        """Gradient and Hessian of -sum log(-c_i); requires strict feasibility."""
        p = self.prob
        q = self.positions(x)
        u, v = self.slacks(x)
        g = np.zeros(self.dim)
        H = np.zeros((self.dim, self.dim))

        def add(idx: np.ndarray, grad: np.ndarray, hess_diag, cval: float):
            inv = 1.0 / (-cval)
            g[idx] += grad * inv
            H[np.ix_(idx, idx)] += np.outer(grad, grad) * inv * inv
            if hess_diag is not None:
                H[np.ix_(idx, idx)] += hess_diag * inv

        # step constraints
        for n in range(1, p.N + 1):
            ia, ib = self._qvar(n - 1), self._qvar(n)
            diff = q[n] - q[n - 1]
            cval = float(diff @ diff - p.D2)
            if cval >= 0:
                raise SolverError("infeasible point in barrier evaluation")
            if ia is None and ib is None:
                continue
            idx, grad, rows = [], [], []
            if ib is not None:
                idx += [ib, ib + 1]
                grad += [2 * diff[0], 2 * diff[1]]
                rows.append(1.0)
            if ia is not None:
                idx += [ia, ia + 1]
                grad += [-2 * diff[0], -2 * diff[1]]
                rows.append(-1.0)
            idx = np.array(idx)
            grad = np.array(grad)
            blocks = len(rows)
            hd = np.zeros((2 * blocks, 2 * blocks))
            for a in range(blocks):
                for b in range(blocks):
                    sgn = rows[a] * rows[b]
                    hd[2 * a, 2 * b] += 2 * sgn
                    hd[2 * a + 1, 2 * b + 1] += 2 * sgn
            add(idx, grad, hd, cval)

        # distance-linking constraints and caps
        pos = q[1:]
        iu0 = 2 * self.nf
        iv0 = 2 * self.nf + self.S
        for s, n in enumerate(p.slots):
            iq = self._qvar(n + 1)
            diff = pos[n] - p.user_xy[s]
            cval = float(diff @ diff + p.dz2_ug[s] + p.u_anchor[s] ** 2
                         - 2 * p.u_anchor[s] * u[s])
            if cval >= 0:
                raise SolverError("infeasible point in barrier evaluation")
            if iq is not None:
                idx = np.array([iq, iq + 1, iu0 + s])
                grad = np.array([2 * diff[0], 2 * diff[1], -2 * p.u_anchor[s]])
                hd = np.zeros((3, 3))
                hd[0, 0] = hd[1, 1] = 2.0
            else:
                idx = np.array([iu0 + s])
                grad = np.array([-2 * p.u_anchor[s]])
                hd = None
            add(idx, grad, hd, cval)

            diffr = pos[n] - p.ris_xy
            cval = float(diffr @ diffr + p.dz2_ur + p.v_anchor[s] ** 2
                         - 2 * p.v_anchor[s] * v[s])
            if cval >= 0:
                raise SolverError("infeasible point in barrier evaluation")
            if iq is not None:
                idx = np.array([iq, iq + 1, iv0 + s])
                grad = np.array([2 * diffr[0], 2 * diffr[1], -2 * p.v_anchor[s]])
                hd = np.zeros((3, 3))
                hd[0, 0] = hd[1, 1] = 2.0
            else:
                idx = np.array([iv0 + s])
                grad = np.array([-2 * p.v_anchor[s]])
                hd = None
            add(idx, grad, hd, cval)

        for s in range(self.S):
            cval = float(u[s] - p.slack_cap)
            add(np.array([iu0 + s]), np.array([1.0]), None, cval)
            cval = float(v[s] - p.slack_cap)
            add(np.array([iv0 + s]), np.array([1.0]), None, cval)
        return g, H

    def barrier_value(self, x: np.ndarray, t: float) -> float:
        c = self.constraints(x)
        if np.any(c >= 0):
            return np.inf
        return t * float(self.obj_grad @ x) - float(np.sum(np.log(-c)))


def _interiorize(q: np.ndarray, prob: ConvexSubproblem) -> np.ndarray:
    """Pull a feasible trajectory strictly inside the step constraints."""
    steps = np.sum(np.diff(q, axis=0) ** 2, axis=1)
    if np.all(steps < prob.D2 * (1 - 1e-9)):
        return q.copy()
    span = float(np.linalg.norm(prob.qF - prob.q0))
    if span >= np.sqrt(prob.D2) * prob.N * (1 - 1e-12):
        raise SolverError("mission span leaves no slack: trajectory is pinned")
    frac = np.linspace(0.0, 1.0, prob.N + 1)[:, None]
    line = prob.q0 * (1 - frac) + prob.qF * frac
    lam = 1e-3
    for _ in range(40):
        cand = (1 - lam) * q + lam * line
        steps = np.sum(np.diff(cand, axis=0) ** 2, axis=1)
        if np.all(steps < prob.D2 * (1 - 1e-9)):
            return cand
        lam = min(1.0, lam * 4)
    return line.copy()


def solve_subproblem(prob: ConvexSubproblem, params: ScaHyperParams,
                     scenario: ScenarioConfig):
    """Log-barrier solve of the linearized program.

    Returns (Trajectory, SlackVars, SolveReport); the report carries the
    linearized objective trace across barrier stages.
    """
    pg = _Program(prob)
    S = pg.S

    def tight_slacks(q):
        pos = q[1:]
        u = np.array([d_ug(pos[n], k, scenario) for n, k in zip(prob.slots, prob.users)])
        v = np.array([d_ur(pos[n], scenario) for n in prob.slots])
        return u, v

    def finish(q, u, v, report):
        uu = np.zeros((scenario.K, scenario.N))
        vv = np.zeros(scenario.N)
        pos = q[1:]
        for n in range(scenario.N):
            for k in range(scenario.K):
                uu[k, n] = d_ug(pos[n], k, scenario)
            vv[n] = d_ur(pos[n], scenario)
        for s, (n, k) in enumerate(zip(prob.slots, prob.users)):
            uu[k, n] = u[s]
            vv[n] = v[s]
        return Trajectory(q=q), SlackVars(u=uu, v=vv), report

    # Degenerate programs: nothing to move.
    if np.all(np.abs(prob.cu) < 1e-300) and np.all(np.abs(prob.cv) < 1e-300):
        q = prob.q_start.copy()
        u, v = tight_slacks(q)
        rep = SolveReport(objective_trace=[prob.objective_bits(u, v)], status="solved")
        return finish(q, u, v, rep)
    if pg.dim == 0:
        q = prob.q_start.copy()
        u, v = tight_slacks(q)
        rep = SolveReport(objective_trace=[prob.objective_bits(u, v)], status="solved")
        return finish(q, u, v, rep)

    q0 = _interiorize(prob.q_start, prob)
    pos0 = q0[1:]
    u0 = np.empty(S)
    v0 = np.empty(S)
    for s, (n, k) in enumerate(zip(prob.slots, prob.users)):
        du2 = d_ug(pos0[n], k, scenario) ** 2
        lb = (du2 + prob.u_anchor[s] ** 2) / (2 * prob.u_anchor[s])
        u0[s] = min(lb * (1 + 1e-6) + 1e-9, 0.5 * (lb + prob.slack_cap))
        dv2 = d_ur(pos0[n], scenario) ** 2
        lb = (dv2 + prob.v_anchor[s] ** 2) / (2 * prob.v_anchor[s])
        v0[s] = min(lb * (1 + 1e-6) + 1e-9, 0.5 * (lb + prob.slack_cap))
    x = pg.pack(q0, u0, v0)
    if np.any(pg.constraints(x) >= 0):
        raise SolverError("could not construct a strictly feasible start")

    m = pg.n_constraints()
    t = params.barrier_t0
    total_newton = 0
    trace = []
    status = "solved"
    for _stage in range(200):
        for _it in range(params.newton_max_iters):
            bg, bh = pg.barrier_grad_hess(x)
            g = t * pg.obj_grad + bg
            H = bh
            try:
                d = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                d = np.linalg.solve(H + 1e-10 * np.trace(H) / pg.dim * np.eye(pg.dim), -g)
            if not np.all(np.isfinite(d)):
                raise SolverError("Newton direction not finite")
            decrement = float(-g @ d)
            if decrement < 0:
                d = -g
                decrement = float(g @ g)
            total_newton += 1
            if decrement / 2 <= params.newton_tol:
                break
            f0 = pg.barrier_value(x, t)
            alpha = 1.0
            while alpha > 1e-14:
                cand = x + alpha * d
                fc = pg.barrier_value(cand, t)
                if fc < f0 - 0.25 * alpha * decrement:
                    x = cand
                    break
                alpha *= 0.5
            else:
                break
        else:
            status = "max_iter"
        u, v = pg.slacks(x)
        trace.append(prob.objective_bits(u, v))
        if m / t <= params.kkt_tol:
            break
        t *= params.barrier_mult
    else:
        status = "max_iter"

    # stationarity residual of the original (minimization) KKT system with
    # barrier multiplier estimates lambda_i = 1 / (t * (-c_i))
    cvals = pg.constraints(x)
    bg, _ = pg.barrier_grad_hess(x)
    kkt = float(np.max(np.abs(pg.obj_grad + bg / t)))
    report = SolveReport(objective_trace=trace, kkt_residual=kkt,
                         max_violation=float(max(0.0, cvals.max())),
                         iterations=total_newton, status=status)
    q = pg.positions(x)
    u, v = pg.slacks(x)
    return finish(q, u, v, report)


def frozen_objective(coeffs: RateCoefficients, q, scenario: ScenarioConfig) -> float:
    """Sample-average rate of the frozen batch rescaled to trajectory q, bits/s/Hz."""
    q = np.asarray(getattr(q, "q", q), dtype=float)
    pos = q[1:]
    total = 0.0
    I = coeffs.A.shape[1]
    for s, (n, k) in enumerate(zip(coeffs.slots, coeffs.users)):
        u = d_ug(pos[n], k, scenario)
        v = d_ur(pos[n], scenario)
        total += float(np.sum(rate_field(coeffs.A[s], coeffs.B[s], coeffs.C[s],
                                         u, v, scenario)))
    return total / (scenario.N * I)


def sca_trajectory(batches, schedule: ScheduleMatrix, phases, q_init,
                   scenario: ScenarioConfig,
                   coeffs: RateCoefficients | None = None):
    """Outer SCA loop: expand, solve, safeguard, repeat until the frozen-batch
    objective stops improving.  The accepted objective sequence is
    nondecreasing by construction (steps that lower it are halved toward the
    expansion point and ultimately rejected)."""
    q = np.array(getattr(q_init, "q", q_init), dtype=float)
    if coeffs is None:
        coeffs = compute_coefficients(batches, schedule, phases, scenario)
    params = scenario.sca

    obj = frozen_objective(coeffs, q, scenario)
    trace = [obj]
    last_report = SolveReport(objective_trace=[obj])
    for _j in range(params.max_outer_iters):
        pos = q[1:]
        u_j = np.array([d_ug(pos[n], k, scenario) for n, k in zip(coeffs.slots, coeffs.users)])
        v_j = np.array([d_ur(pos[n], scenario) for n in coeffs.slots])
        prob = build_subproblem(batches, schedule, phases, q, u_j, v_j,
                                scenario, coeffs=coeffs)
        try:
            traj_new, _slack, rep = solve_subproblem(prob, params, scenario)
        except SolverError:
            if str(last_report.status) == "solved":
                last_report.status = "stalled"
            break
        q_new = traj_new.q
        obj_new = frozen_objective(coeffs, q_new, scenario)
        halvings = 0
        while obj_new < obj - 1e-12 and halvings < 10:
            q_new = 0.5 * (q_new + q)
            obj_new = frozen_objective(coeffs, q_new, scenario)
            halvings += 1
        if obj_new < obj - 1e-12:
            last_report = rep
            break
        gain = obj_new - obj
        q, obj = q_new, obj_new
        trace.append(obj)
        last_report = rep
        if gain < params.obj_tol * max(1e-12, abs(obj)):
            break

    report = SolveReport(objective_trace=trace,
                         kkt_residual=last_report.kkt_residual,
                         max_violation=last_report.max_violation,
                         iterations=len(trace) - 1,
                         status=last_report.status)
    traj = Trajectory(q=q)
    traj.validate(scenario)
    return traj, report
