import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risuav.channel import ChannelBatch, ChannelSample, ChannelSampler
from risuav.config import ConfigError
from risuav.rate import (BeamVector, PhaseVector, effective_channel,
                         mc_expected_rate, mrt_beamformer, mrt_rate_from_channel, rate)

from conftest import make_tiny


def scalar_sample(g, hr, hd):
    return ChannelSample(G=np.array([[g]], dtype=complex),
                         h_r=np.array([[hr]], dtype=complex),
                         h_d=np.array([[hd]], dtype=complex), n=0)


def random_sample(rng, M=6, Nt=3, K=1):
    return ChannelSample(
        G=rng.standard_normal((M, Nt)) + 1j * rng.standard_normal((M, Nt)),
        h_r=rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M)),
        h_d=rng.standard_normal((K, Nt)) + 1j * rng.standard_normal((K, Nt)),
        n=0)


def test_effective_channel_zero_cascade():
    s = scalar_sample(0.0, 1.5, 2.0 - 1.0j)
    h = effective_channel(s, PhaseVector(np.array([0.7])), 0)
    assert np.allclose(h, [2.0 - 1.0j])


def test_effective_channel_conjugates_phase_through_gh():
    s = scalar_sample(1.0, 1.0, 0.0)
    h = effective_channel(s, PhaseVector(np.array([np.pi / 2])), 0)
    assert np.allclose(h, [-1.0j])


def test_effective_channel_identity_phase():
    rng = np.random.default_rng(3)
    s = random_sample(rng)
    s.h_d[0] = 0.0
    h = effective_channel(s, PhaseVector(np.zeros(6)), 0)
    assert np.allclose(h, s.G.conj().T @ s.h_r[0])


def test_effective_channel_dimension_mismatch():
    rng = np.random.default_rng(4)
    s = random_sample(rng, M=6)
    with pytest.raises(ConfigError):
        effective_channel(s, PhaseVector(np.zeros(5)), 0)


@pytest.mark.parametrize("snr,expected", [(0.0, 0.0), (3.0, 2.0), (1.0, 1.0)])
def test_rate_known_points(tiny, snr, expected):
    # craft |h^H w|^2 / sigma2 = snr with a direct-only scalar channel
    s = scalar_sample(0.0, 0.0, 1.0)
    w = BeamVector(w=np.array([np.sqrt(snr * tiny.sigma2)], dtype=complex))
    assert rate(s, PhaseVector(np.zeros(1)), w, 0, tiny) == pytest.approx(expected)


def test_mrt_aligned_scaling(tiny):
    s = ChannelSample(G=np.zeros((1, 2), dtype=complex),
                      h_r=np.zeros((1, 1), dtype=complex),
                      h_d=np.array([[1.0, 0.0]], dtype=complex), n=0)
    sc = make_tiny(N_t=2, P=4.0)
    w = mrt_beamformer(s, PhaseVector(np.zeros(1)), 0, sc)
    assert np.allclose(w.w, [2.0, 0.0])
    assert not w.degenerate


def test_mrt_full_power(tiny):
    rng = np.random.default_rng(5)
    sc = make_tiny(ris_dims=(2, 3), N_t=3)
    s = random_sample(rng, M=6, Nt=3)
    w = mrt_beamformer(s, PhaseVector(rng.uniform(0, 2 * np.pi, 6)), 0, sc)
    assert w.power == pytest.approx(sc.P)


def test_mrt_zero_channel_flagged():
    sc = make_tiny(N_t=2)
    s = ChannelSample(G=np.zeros((4, 2), dtype=complex),
                      h_r=np.zeros((1, 4), dtype=complex),
                      h_d=np.zeros((1, 2), dtype=complex), n=0)
    w = mrt_beamformer(s, PhaseVector(np.zeros(4)), 0, sc)
    assert w.degenerate
    assert w.power == pytest.approx(sc.P)
    assert rate(s, PhaseVector(np.zeros(4)), w, 0, sc) == 0.0


def test_mrt_dominates_random_probes():
    sc = make_tiny(ris_dims=(2, 2), N_t=3)
    rng = np.random.default_rng(6)
    for _ in range(100):
        s = random_sample(rng, M=4, Nt=3)
        pv = PhaseVector(rng.uniform(0, 2 * np.pi, 4))
        w_opt = mrt_beamformer(s, pv, 0, sc)
        r_opt = rate(s, pv, w_opt, 0, sc)
        for _ in range(100):
            w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            w = BeamVector(w / np.linalg.norm(w) * np.sqrt(sc.P * rng.uniform(0, 1)))
            assert r_opt >= rate(s, pv, w, 0, sc) - 1e-12


@given(shift=st.integers(-3, 3))
@settings(max_examples=20, deadline=None)
def test_rate_periodic_in_phase(shift):
    sc = make_tiny(ris_dims=(2, 2), N_t=3)
    rng = np.random.default_rng(8)
    s = random_sample(rng, M=4, Nt=3)
    phi = rng.uniform(0, 2 * np.pi, 4)
    pv1, pv2 = PhaseVector(phi), PhaseVector(phi + 2 * np.pi * shift)
    h1 = effective_channel(s, pv1, 0)
    h2 = effective_channel(s, pv2, 0)
    r1 = mrt_rate_from_channel(h1, sc)
    r2 = mrt_rate_from_channel(h2, sc)
    assert r2 == pytest.approx(r1, rel=1e-10)


def test_rate_monotone_in_power_and_noise():
    rng = np.random.default_rng(9)
    s = random_sample(rng, M=4, Nt=3)
    h = effective_channel(s, PhaseVector(np.zeros(4)), 0)
    scs = [make_tiny(ris_dims=(2, 2), N_t=3, P=p) for p in (0.001, 0.01, 0.1)]
    rates_p = [mrt_rate_from_channel(h, sc) for sc in scs]
    assert rates_p == sorted(rates_p)
    scs = [make_tiny(ris_dims=(2, 2), N_t=3, sigma2=s2) for s2 in (1e-12, 1e-11, 1e-10)]
    rates_s = [mrt_rate_from_channel(h, sc) for sc in scs]
    assert rates_s == sorted(rates_s, reverse=True)


def test_mc_singleton_and_deterministic_limits():
    sc = make_tiny(beta_ur=1e12, beta_rg=1e12, beta_ug=1e12, I=6)
    smp = ChannelSampler(sc, tag=("mc",))
    q = np.array([0.0, 20.0])
    batch = smp.batch(q, 0)
    res = mc_expected_rate(batch, PhaseVector(np.zeros(sc.M)), 0, sc)
    assert res.std_error < 1e-6
    one = ChannelBatch(samples=batch.samples[:1], q=batch.q, n=0)
    res1 = mc_expected_rate(one, PhaseVector(np.zeros(sc.M)), 0, sc)
    assert res1.std_error == 0.0
    assert res1.mean_rate == pytest.approx(
        mrt_rate_from_channel(effective_channel(batch.samples[0],
                                                PhaseVector(np.zeros(sc.M)), 0), sc))


def test_mc_direct_only_matches_analytic_oracle():
    # Direct link only (cascade zeroed): E log2(1 + snr * rho d^-kappa * X),
    # X ~ Gamma(N_t, 1); oracle by high-resolution Monte Carlo.
    sc = make_tiny(N_t=3, I=10_000)
    q = np.array([-5.0, 22.0])
    smp = ChannelSampler(sc, tag=("oracle",))
    batch = smp.batch(q, 0)
    for s in batch.samples:
        s.G = np.zeros_like(s.G)
        s.h_r = np.zeros_like(s.h_r)
    res = mc_expected_rate(batch, PhaseVector(np.zeros(sc.M)), 0, sc)

    from risuav.channel import distances
    d_ug = distances(q, sc)[1][0]
    scale = sc.snr_scale * sc.rho * d_ug ** -sc.kappa
    rng = np.random.default_rng(2024)
    x = rng.gamma(shape=sc.N_t, scale=1.0, size=1_000_000)
    oracle = np.mean(np.log2(1 + scale * x))
    assert abs(res.mean_rate - oracle) < 3 * res.std_error


def test_mc_rejects_empty_and_missing_beamformer(tiny):
    smp = ChannelSampler(tiny, tag=("e",))
    batch = smp.batch(np.array([0.0, 20.0]), 0)
    with pytest.raises(ConfigError):
        mc_expected_rate(ChannelBatch(samples=[], q=batch.q, n=0),
                         PhaseVector(np.zeros(tiny.M)), 0, tiny)
    with pytest.raises(ConfigError):
        mc_expected_rate(batch, PhaseVector(np.zeros(tiny.M)), 0, tiny, use_mrt=False)
