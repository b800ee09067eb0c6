"""Scenario configuration: geometry, channel statistics, powers, and solver knobs.

All quantities are stored in linear SI units internally (watts, meters,
power ratios).  Config files may use dB-suffixed keys which are converted
on load, see `load_config`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration; message names the offending key."""


class GeometryError(ValueError):
    """Degenerate geometry (coincident points, behind-panel placement)."""


class SolverError(RuntimeError):
    """Numerical solver failed to produce a usable iterate."""


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(x: float) -> float:
    return 10.0 * math.log10(x) + 30.0


@dataclass
class SscaHyperParams:
    """Stochastic phase-optimizer knobs.

    zeta = l^-nu smooths the gradient tracker, xi = l^-mu damps the iterate
    update; convergence needs 0.5 <= nu <= 1 and nu < mu <= 1.
    """

    tau: float = 5.0
    nu: float = 0.8
    mu: float = 0.9
    max_iters: int = 300
    tol: float = 0.0  # relative objective tolerance; 0 disables early stop

    def validate(self) -> None:
        if not (self.tau > 0):
            raise ConfigError("ssca_tau must be > 0")
        if not (0.5 <= self.nu <= 1.0):
            raise ConfigError("ssca_nu must lie in [0.5, 1]")
        if not (self.nu < self.mu <= 1.0):
            raise ConfigError("ssca_mu must lie in (ssca_nu, 1]")
        if self.max_iters < 1:
            raise ConfigError("ssca_max_iters must be >= 1")
        if self.tol < 0:
            raise ConfigError("ssca_tol must be >= 0")


@dataclass
class ScaHyperParams:
    """Trajectory solver knobs: outer SCA loop and the log-barrier inner solver."""

    max_outer_iters: int = 20
    kkt_tol: float = 1e-7
    obj_tol: float = 1e-5
    barrier_t0: float = 1.0
    barrier_mult: float = 10.0
    newton_tol: float = 1e-10
    newton_max_iters: int = 60

    def validate(self) -> None:
        for key in ("kkt_tol", "obj_tol", "barrier_t0", "newton_tol"):
            if not (getattr(self, key) > 0):
                raise ConfigError(f"sca_{key} must be > 0")
        if self.barrier_mult <= 1:
            raise ConfigError("sca_barrier_mult must be > 1")
        if self.max_outer_iters < 1:
            raise ConfigError("sca_max_outer_iters must be >= 1")
        if self.newton_max_iters < 1:
            raise ConfigError("sca_newton_max_iters must be >= 1")


@dataclass
class ScenarioConfig:
    """Full physical + algorithmic parameter set for one scenario."""

    K: int
    user_pos: tuple  # K tuples (x, y, z); ground users have z = 0
    ris_pos: tuple   # (x, y, z)
    ris_dims: tuple  # (M_x, M_z)
    N_t: int
    z_F: float
    q0: tuple        # (x, y) start of the corridor
    qF: tuple        # (x, y) end of the corridor
    N: int
    delta_t: float
    v_max: float
    alpha: float     # RIS-user path-loss exponent
    gamma: float     # UAV-RIS path-loss exponent
    kappa: float     # UAV-user path-loss exponent
    rho: float       # reference path loss at 1 m, linear power ratio
    beta_ur: float   # Rician factors, linear power ratios
    beta_rg: float
    beta_ug: float
    sigma2: float    # noise power, W
    P: float         # max transmit power, W
    I: int           # Monte-Carlo batch size
    seed: int = 0
    element_spacing: float = 0.5  # metres; carrier wavelength = 2 * spacing
    ssca: SscaHyperParams = field(default_factory=SscaHyperParams)
    sca: ScaHyperParams = field(default_factory=ScaHyperParams)
    alt_rounds: int = 4      # alternating-optimization round cap
    alt_tol: float = 1e-3    # relative held-out objective gain to keep going

    def __post_init__(self):
        self.user_pos = tuple(tuple(float(x) for x in p) for p in self.user_pos)
        self.ris_pos = tuple(float(x) for x in self.ris_pos)
        self.ris_dims = tuple(int(x) for x in self.ris_dims)
        self.q0 = tuple(float(x) for x in self.q0)
        self.qF = tuple(float(x) for x in self.qF)
        self.validate()

    @property
    def M(self) -> int:
        return self.ris_dims[0] * self.ris_dims[1]

    @property
    def D(self) -> float:
        """Maximum horizontal displacement per slot."""
        return self.v_max * self.delta_t

    @property
    def snr_scale(self) -> float:
        """P over sigma^2, the SNR at unit channel gain."""
        return self.P / self.sigma2

    def validate(self) -> None:
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if len(self.user_pos) != self.K:
            raise ConfigError("user_pos must list exactly K positions")
        if any(len(p) != 3 for p in self.user_pos):
            raise ConfigError("user_pos entries must be 3D (x,y,z)")
        if any(p[2] != 0.0 for p in self.user_pos):
            raise ConfigError("user_pos entries must sit on the ground (z = 0)")
        if len(self.ris_pos) != 3:
            raise ConfigError("ris_pos must be 3D (x,y,z)")
        if len(self.ris_dims) != 2 or min(self.ris_dims) < 1:
            raise ConfigError("ris_dims must be two counts >= 1")
        if self.N_t < 1:
            raise ConfigError("N_t must be >= 1")
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if self.I < 1:
            raise ConfigError("I must be >= 1")
        for key in ("z_F", "delta_t", "v_max", "alpha", "gamma", "kappa",
                    "rho", "sigma2", "P", "element_spacing"):
            if not (float(getattr(self, key)) > 0):
                raise ConfigError(f"{key} must be > 0")
        for key in ("beta_ur", "beta_rg", "beta_ug"):
            if float(getattr(self, key)) < 0:
                raise ConfigError(f"{key} must be >= 0")
        if len(self.q0) != 2 or len(self.qF) != 2:
            raise ConfigError("q0 and qF must be 2D (x,y)")
        # Mission feasibility under the per-slot step bound.
        span = math.dist(self.q0, self.qF)
        if span > self.N * self.D + 1e-9:
            raise ConfigError("qF unreachable: ||qF - q0|| exceeds N * v_max * delta_t")
        # RIS panel faces +y; everything must sit strictly in front of it.
        ris_y = self.ris_pos[1]
        for idx, p in enumerate(self.user_pos):
            if p[1] <= ris_y:
                raise ConfigError(f"user_pos[{idx}] lies behind the RIS panel (y <= ris y)")
        if self.q0[1] <= ris_y or self.qF[1] <= ris_y:
            raise ConfigError("q0/qF lie behind the RIS panel (y <= ris y)")
        # Coincident points break distance-based path loss.  q0 == qF is fine
        # (a hovering mission); what must never coincide are link endpoints.
        ground = [np.array(p) for p in self.user_pos]
        ground.append(np.array(self.ris_pos))
        for i in range(len(ground)):
            for j in range(i + 1, len(ground)):
                if float(np.linalg.norm(ground[i] - ground[j])) <= 0.0:
                    raise ConfigError("coincident scenario points: all pairwise distances must be > 0")
        for q in (self.q0, self.qF):
            uav = np.array([q[0], q[1], self.z_F])
            for p in ground:
                if float(np.linalg.norm(uav - p)) <= 0.0:
                    raise ConfigError("coincident scenario points: all pairwise distances must be > 0")
        if self.alt_rounds < 1:
            raise ConfigError("alt_rounds must be >= 1")
        if self.alt_tol < 0:
            raise ConfigError("alt_tol must be >= 0")
        self.ssca.validate()
        self.sca.validate()


def full_scale_scenario(seed: int = 0, beta_db: float = 10.0) -> ScenarioConfig:
    """Full-scale scenario: 4 users, 20x20 RIS, 100 s mission."""
    return ScenarioConfig(
        K=4,
        user_pos=((-120.0, 10.0, 0.0), (-80.0, 80.0, 0.0),
                  (80.0, 80.0, 0.0), (120.0, 10.0, 0.0)),
        ris_pos=(0.0, 0.0, 40.0),
        ris_dims=(20, 20),
        N_t=5,
        z_F=80.0,
        q0=(-500.0, 20.0),
        qF=(500.0, 20.0),
        N=100,
        delta_t=1.0,
        v_max=25.0,
        alpha=2.2,
        gamma=2.4,
        kappa=3.5,
        rho=db_to_linear(-25.0),
        beta_ur=db_to_linear(beta_db),
        beta_rg=db_to_linear(beta_db),
        beta_ug=0.0,
        sigma2=dbm_to_watts(-80.0),
        P=0.01,
        I=100,
        seed=seed,
    )


def desk_scenario(seed: int = 0, beta_db: float = 5.0) -> ScenarioConfig:
    """Shrunk scenario that keeps the RIS-versus-direct-link trade-off alive
    while every optimization finishes in seconds."""
    return ScenarioConfig(
        K=2,
        user_pos=((-45.0, 6.0, 0.0), (60.0, 42.0, 0.0)),
        ris_pos=(0.0, 0.0, 40.0),
        ris_dims=(12, 12),
        N_t=4,
        z_F=60.0,
        q0=(-150.0, 20.0),
        qF=(150.0, 20.0),
        N=20,
        delta_t=1.0,
        v_max=25.0,
        alpha=2.2,
        gamma=2.4,
        kappa=3.5,
        rho=db_to_linear(-25.0),
        beta_ur=db_to_linear(beta_db),
        beta_rg=db_to_linear(beta_db),
        beta_ug=0.0,
        sigma2=dbm_to_watts(-80.0),
        P=0.01,
        I=20,
        seed=seed,
        ssca=SscaHyperParams(max_iters=150),
        alt_rounds=3,
    )


PRESETS = {"full": full_scale_scenario, "desk": desk_scenario}

# Canonical key order for config files.  dB-valued keys carry the suffix
# these quantities are usually quoted in; they are converted on load.
_INT_KEYS = {"K", "N_t", "N", "I", "seed", "ssca_max_iters",
             "sca_max_outer_iters", "sca_newton_max_iters", "alt_rounds"}
_VEC2_KEYS = {"q0", "qF"}
_VEC_KEYS = {"ris_pos", "ris_dims"}
_LIST_KEYS = {"user_pos"}
_DB_BASE = {"rho_db": "rho", "beta_ur_db": "beta_ur", "beta_rg_db": "beta_rg",
            "beta_ug_db": "beta_ug"}
_DBM_BASE = {"sigma2_dbm": "sigma2", "P_dbm": "P"}
_SCALAR_KEYS = {
    "K", "N_t", "z_F", "N", "delta_t", "v_max", "element_spacing",
    "alpha", "gamma", "kappa", "rho", "beta_ur", "beta_rg", "beta_ug",
    "sigma2", "P", "I", "seed",
    "ssca_tau", "ssca_nu", "ssca_mu", "ssca_max_iters", "ssca_tol",
    "sca_max_outer_iters", "sca_kkt_tol", "sca_obj_tol", "sca_barrier_t0",
    "sca_barrier_mult", "sca_newton_tol", "sca_newton_max_iters",
    "alt_rounds", "alt_tol",
}
_ALL_KEYS = (_SCALAR_KEYS | _VEC2_KEYS | _VEC_KEYS | _LIST_KEYS
             | set(_DB_BASE) | set(_DBM_BASE))

_EXPORT_ORDER = [
    "K", "user_pos", "ris_pos", "ris_dims", "element_spacing", "N_t", "z_F",
    "q0", "qF", "N", "delta_t", "v_max", "alpha", "gamma", "kappa",
    "rho_db", "beta_ur_db", "beta_rg_db", "beta_ug", "sigma2_dbm", "P",
    "I", "seed",
    "ssca_tau", "ssca_nu", "ssca_mu", "ssca_max_iters", "ssca_tol",
    "sca_max_outer_iters", "sca_kkt_tol", "sca_obj_tol", "sca_barrier_t0",
    "sca_barrier_mult", "sca_newton_tol", "sca_newton_max_iters",
    "alt_rounds", "alt_tol",
]


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def config_to_text(cfg: ScenarioConfig) -> str:
    """Canonical flat key-value rendering; stable across save/load cycles."""
    vals = {
        "K": cfg.K,
        "user_pos": "; ".join(",".join(_fmt(x) for x in p) for p in cfg.user_pos),
        "ris_pos": ",".join(_fmt(x) for x in cfg.ris_pos),
        "ris_dims": ",".join(str(x) for x in cfg.ris_dims),
        "element_spacing": _fmt(cfg.element_spacing),
        "N_t": cfg.N_t,
        "z_F": _fmt(cfg.z_F),
        "q0": ",".join(_fmt(x) for x in cfg.q0),
        "qF": ",".join(_fmt(x) for x in cfg.qF),
        "N": cfg.N,
        "delta_t": _fmt(cfg.delta_t),
        "v_max": _fmt(cfg.v_max),
        "alpha": _fmt(cfg.alpha),
        "gamma": _fmt(cfg.gamma),
        "kappa": _fmt(cfg.kappa),
        "rho_db": _fmt(round(linear_to_db(cfg.rho), 6)),
        "beta_ur_db": _fmt(round(linear_to_db(cfg.beta_ur), 6)) if cfg.beta_ur > 0 else None,
        "beta_rg_db": _fmt(round(linear_to_db(cfg.beta_rg), 6)) if cfg.beta_rg > 0 else None,
        "beta_ug": _fmt(cfg.beta_ug),
        "sigma2_dbm": _fmt(round(watts_to_dbm(cfg.sigma2), 6)),
        "P": _fmt(cfg.P),
        "I": cfg.I,
        "seed": cfg.seed,
        "ssca_tau": _fmt(cfg.ssca.tau),
        "ssca_nu": _fmt(cfg.ssca.nu),
        "ssca_mu": _fmt(cfg.ssca.mu),
        "ssca_max_iters": cfg.ssca.max_iters,
        "ssca_tol": _fmt(cfg.ssca.tol),
        "sca_max_outer_iters": cfg.sca.max_outer_iters,
        "sca_kkt_tol": _fmt(cfg.sca.kkt_tol),
        "sca_obj_tol": _fmt(cfg.sca.obj_tol),
        "sca_barrier_t0": _fmt(cfg.sca.barrier_t0),
        "sca_barrier_mult": _fmt(cfg.sca.barrier_mult),
        "sca_newton_tol": _fmt(cfg.sca.newton_tol),
        "sca_newton_max_iters": cfg.sca.newton_max_iters,
        "alt_rounds": cfg.alt_rounds,
        "alt_tol": _fmt(cfg.alt_tol),
    }
    lines = []
    for key in _EXPORT_ORDER:
        v = vals[key]
        if key == "beta_ur_db" and v is None:
            lines.append(f"beta_ur = {_fmt(cfg.beta_ur)}")
            continue
        if key == "beta_rg_db" and v is None:
            lines.append(f"beta_rg = {_fmt(cfg.beta_rg)}")
            continue
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"


def _parse_scalar(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        return float(raw)
    except ValueError as e:
        raise ConfigError(f"cannot parse value for {key}: {raw!r}") from e


def config_from_text(text: str) -> ScenarioConfig:
    entries: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"unknown config key: {key}")
        if key in entries:
            raise ConfigError(f"duplicate config key: {key}")
        entries[key] = raw

    def pop_vec(key, n):
        raw = entries.pop(key)
        parts = [p for p in raw.replace(";", ",").split(",") if p.strip()]
        if len(parts) != n:
            raise ConfigError(f"{key} must have {n} components")
        try:
            return tuple(float(p) for p in parts)
        except ValueError as e:
            raise ConfigError(f"cannot parse value for {key}: {raw!r}") from e

    kw: dict = {}
    if "user_pos" in entries:
        raw = entries.pop("user_pos")
        try:
            kw["user_pos"] = tuple(
                tuple(float(x) for x in g.split(","))
                for g in raw.split(";") if g.strip()
            )
        except ValueError as e:
            raise ConfigError(f"cannot parse value for user_pos: {raw!r}") from e
    for key in ("ris_pos",):
        if key in entries:
            kw[key] = pop_vec(key, 3)
    if "ris_dims" in entries:
        kw["ris_dims"] = tuple(int(x) for x in pop_vec("ris_dims", 2))
    for key in _VEC2_KEYS:
        if key in entries:
            kw[key] = pop_vec(key, 2)

    # dB-suffixed keys convert to the linear base key.
    for dbkey, base in _DB_BASE.items():
        if dbkey in entries:
            if base in entries:
                raise ConfigError(f"both {dbkey} and {base} given")
            kw[base] = db_to_linear(_parse_scalar(dbkey, entries.pop(dbkey)))
    for dbkey, base in _DBM_BASE.items():
        if dbkey in entries:
            if base in entries:
                raise ConfigError(f"both {dbkey} and {base} given")
            kw[base] = dbm_to_watts(_parse_scalar(dbkey, entries.pop(dbkey)))

    ssca_kw, sca_kw = {}, {}
    for key, raw in list(entries.items()):
        if key.startswith("ssca_"):
            ssca_kw[key[5:]] = _parse_scalar(key, raw)
        elif key.startswith("sca_"):
            sca_kw[key[4:]] = _parse_scalar(key, raw)
        else:
            kw[key] = _parse_scalar(key, raw)
        entries.pop(key)

    required = {"K", "user_pos", "ris_pos", "ris_dims", "N_t", "z_F", "q0",
                "qF", "N", "delta_t", "v_max", "alpha", "gamma", "kappa",
                "rho", "beta_ur", "beta_rg", "beta_ug", "sigma2", "P", "I"}
    missing = sorted(required - set(kw))
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    kw["ssca"] = SscaHyperParams(**ssca_kw)
    kw["sca"] = ScaHyperParams(**sca_kw)
    return ScenarioConfig(**kw)


def load_config(path: str | Path) -> ScenarioConfig:
    return config_from_text(Path(path).read_text())


def save_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(config_to_text(cfg))


def with_beta_db(cfg: ScenarioConfig, beta_db: float) -> ScenarioConfig:
    """Common Rician factor on both RIS hops, quoted in dB."""
    b = db_to_linear(beta_db)
    return replace(cfg, beta_ur=b, beta_rg=b)


def with_horizon(cfg: ScenarioConfig, T_seconds: float) -> ScenarioConfig:
    """Rescale the slot count for a new mission duration at fixed delta_t."""
    n = int(round(T_seconds / cfg.delta_t))
    return replace(cfg, N=n)
