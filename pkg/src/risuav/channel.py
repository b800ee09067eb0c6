"""Geometry, array responses, and the Rician fading channel sampler.

Links (UAV at (q, z_F), RIS fixed, users on the ground):
  G      UAV -> RIS,   M x N_t, path-loss exponent gamma, factor beta_ur
  h_r,k  RIS -> user k, M,      exponent alpha, factor beta_rg
  h_d,k  UAV -> user k, N_t,    exponent kappa, factor beta_ug

Each link is sqrt(rho * d^-exp) * (sqrt(b/(1+b)) * los + sqrt(1/(1+b)) * nlos)
with i.i.d. unit-variance CSCG small-scale fading.  Deterministic components
are far-field array responses: the UAV carries an N_t-element ULA along the
x-axis, the RIS an M_x x M_z URA in the x-z plane facing +y, both at
half-wavelength spacing (carrier wavelength := 2 * element_spacing).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .config import GeometryError, ScenarioConfig

# Link codes index the per-(slot, sample, link) Philox counter blocks.
_LINK_G = 0


def _link_hr(k: int) -> int:
    return 1 + 2 * k


def _link_hd(k: int) -> int:
    return 2 + 2 * k


def uav_position(q, scenario: ScenarioConfig) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.array([q[0], q[1], scenario.z_F])


def distances(q, scenario: ScenarioConfig):
    """Euclidean distances (d_UR, d_UG per user, d_RG per user) at UAV position q.

    d_RG does not depend on q; it is returned for convenience since every
    per-slot computation needs all three.
    """
    pos = uav_position(q, scenario)
    ris = np.asarray(scenario.ris_pos)
    users = np.asarray(scenario.user_pos)  # (K, 3)
    d_ur = float(np.linalg.norm(pos - ris))
    d_ug = np.linalg.norm(users - pos, axis=1)
    d_rg = np.linalg.norm(users - ris, axis=1)
    if d_ur <= 0.0 or np.any(d_ug <= 0.0) or np.any(d_rg <= 0.0):
        raise GeometryError("coincident points: all link distances must be > 0")
    return d_ur, d_ug, d_rg


def _ula_response(direction: np.ndarray, n_elem: int) -> np.ndarray:
    """UAV array response for a unit propagation direction; axis = x."""
    # phase per element = 2*pi/lambda * spacing * idx * u_x with spacing = lambda/2
    return np.exp(1j * np.pi * np.arange(n_elem) * direction[0])


def _ura_response(direction: np.ndarray, dims) -> np.ndarray:
    """RIS panel response, elements on an x-z grid, flattened x-fastest."""
    mx, mz = dims
    px = np.pi * np.arange(mx) * direction[0]
    pz = np.pi * np.arange(mz) * direction[2]
    return np.exp(1j * (pz[:, None] + px[None, :])).reshape(mx * mz)


def los_components(q, scenario: ScenarioConfig):
    """Deterministic (unit-modulus) components Zbar (M x N_t), zbar_r (K, M),
    zbar_d (K, N_t) at UAV position q."""
    pos = uav_position(q, scenario)
    ris = np.asarray(scenario.ris_pos)
    users = np.asarray(scenario.user_pos)
    d_ur, d_ug, d_rg = distances(q, scenario)

    dir_ris_to_uav = (pos - ris) / d_ur
    dir_uav_to_ris = -dir_ris_to_uav
    a_ris = _ura_response(dir_ris_to_uav, scenario.ris_dims)
    a_uav = _ula_response(dir_uav_to_ris, scenario.N_t)
    zbar = np.outer(a_ris, a_uav)

    zbar_r = np.empty((scenario.K, scenario.M), dtype=complex)
    zbar_d = np.empty((scenario.K, scenario.N_t), dtype=complex)
    for k in range(scenario.K):
        zbar_r[k] = _ura_response((users[k] - ris) / d_rg[k], scenario.ris_dims)
        zbar_d[k] = _ula_response((users[k] - pos) / d_ug[k], scenario.N_t)
    return zbar, zbar_r, zbar_d


@dataclass
class ChannelSample:
    """One joint realization of all links at a single slot."""

    G: np.ndarray      # (M, N_t)
    h_r: np.ndarray    # (K, M)
    h_d: np.ndarray    # (K, N_t)
    n: int


@dataclass
class ChannelBatch:
    """I realizations drawn at the same UAV position and slot."""

    samples: list
    q: np.ndarray
    n: int

    def __len__(self) -> int:
        return len(self.samples)


def _mix(los: np.ndarray, nlos: np.ndarray, beta: float, amp: float) -> np.ndarray:
    if beta == 0.0:
        return amp * nlos
    w_los = np.sqrt(beta / (1.0 + beta))
    w_nlos = np.sqrt(1.0 / (1.0 + beta))
    return amp * (w_los * los + w_nlos * nlos)


class ChannelSampler:
    """Counter-based Rician sampler.

    Streams are keyed by (scenario.seed, tag) and the Philox counter encodes
    (link, sample index, slot), so identical (seed, q, n, i) always yield the
    same draws no matter in which order batches are generated.  With
    `deterministic=True` small-scale fading is zeroed and every draw returns
    the mean channel (the deterministic-model view of the same statistics).
    """

    def __init__(self, scenario: ScenarioConfig, tag=(), deterministic: bool = False):
        self.scenario = scenario
        self.deterministic = deterministic
        entropy = [int(scenario.seed)]
        for part in tag:
            if isinstance(part, str):
                entropy.append(int.from_bytes(part.encode(), "little"))
            else:
                entropy.append(int(part))
        self._key = np.random.SeedSequence(entropy).generate_state(2)
        # One bit generator reused across streams: resetting its state to the
        # (link, sample, slot) counter reproduces exactly the stream a fresh
        # Philox(key, counter) would give, without per-call entropy gathering.
        # Draws happen sequentially, so one sampler is not thread-safe;
        # concurrent use requires one sampler instance per worker.
        self._bitgen = Philox(key=self._key)
        self._gen = Generator(self._bitgen)
        self._los_cache: dict = {}

    def _rg(self, n: int, i: int, link: int) -> Generator:
        self._bitgen.state = {
            "bit_generator": "Philox",
            "state": {"counter": np.array([0, link, i, n], dtype=np.uint64),
                      "key": self._key.astype(np.uint64)},
            "buffer": np.zeros(4, dtype=np.uint64),
            "buffer_pos": 4,
            "has_uint32": 0,
            "uinteger": 0,
        }
        return self._gen

    def _cn(self, n: int, i: int, link: int, shape) -> np.ndarray:
        if self.deterministic:
            return np.zeros(shape, dtype=complex)
        g = self._rg(n, i, link)
        parts = g.standard_normal((2,) + (shape if isinstance(shape, tuple) else (shape,)))
        return (parts[0] + 1j * parts[1]) / np.sqrt(2.0)

    def _geometry(self, q):
        q = np.asarray(q, dtype=float)
        cache_key = (float(q[0]), float(q[1]))
        hit = self._los_cache.get(cache_key)
        if hit is None:
            hit = (distances(q, self.scenario), los_components(q, self.scenario))
            if len(self._los_cache) > 64:
                self._los_cache.clear()
            self._los_cache[cache_key] = hit
        return hit

    def sample(self, q, n: int, i: int = 0) -> ChannelSample:
        sc = self.scenario
        (d_ur, d_ug, d_rg), (zbar, zbar_r, zbar_d) = self._geometry(q)

        amp_g = np.sqrt(sc.rho * d_ur ** -sc.gamma)
        G = _mix(zbar, self._cn(n, i, _LINK_G, (sc.M, sc.N_t)), sc.beta_ur, amp_g)
        h_r = np.empty((sc.K, sc.M), dtype=complex)
        h_d = np.empty((sc.K, sc.N_t), dtype=complex)
        for k in range(sc.K):
            amp_r = np.sqrt(sc.rho * d_rg[k] ** -sc.alpha)
            amp_d = np.sqrt(sc.rho * d_ug[k] ** -sc.kappa)
            h_r[k] = _mix(zbar_r[k], self._cn(n, i, _link_hr(k), sc.M), sc.beta_rg, amp_r)
            h_d[k] = _mix(zbar_d[k], self._cn(n, i, _link_hd(k), sc.N_t), sc.beta_ug, amp_d)
        return ChannelSample(G=G, h_r=h_r, h_d=h_d, n=n)

    def batch(self, q, n: int, base: int = 0, size: int | None = None) -> ChannelBatch:
        """I samples at (q, n); `base` offsets the sample counter so repeated
        fresh batches (one per optimizer iteration) never overlap streams."""
        size = self.scenario.I if size is None else size
        samples = [self.sample(q, n, base + i) for i in range(size)]
        return ChannelBatch(samples=samples, q=np.asarray(q, dtype=float), n=n)

    def user_batch(self, q, n: int, k: int, base: int = 0, size: int | None = None):
        """Stacked arrays (G, h_r,k, h_d,k) for a single user, drawn from the
        same per-(slot, sample, link) streams as full batches."""
        sc = self.scenario
        size = sc.I if size is None else size
        (d_ur, d_ug, d_rg), (zbar, zbar_r, zbar_d) = self._geometry(q)
        amp_g = np.sqrt(sc.rho * d_ur ** -sc.gamma)
        amp_r = np.sqrt(sc.rho * d_rg[k] ** -sc.alpha)
        amp_d = np.sqrt(sc.rho * d_ug[k] ** -sc.kappa)
        G = np.empty((size, sc.M, sc.N_t), dtype=complex)
        hr = np.empty((size, sc.M), dtype=complex)
        hd = np.empty((size, sc.N_t), dtype=complex)
        for i in range(size):
            G[i] = self._cn(n, base + i, _LINK_G, (sc.M, sc.N_t))
            hr[i] = self._cn(n, base + i, _link_hr(k), sc.M)
            hd[i] = self._cn(n, base + i, _link_hd(k), sc.N_t)
        G = _mix(zbar, G, sc.beta_ur, amp_g)
        hr = _mix(zbar_r[k], hr, sc.beta_rg, amp_r)
        hd = _mix(zbar_d[k], hd, sc.beta_ug, amp_d)
        return G, hr, hd
