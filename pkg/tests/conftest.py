import dataclasses

import pytest

from risuav.config import ScaHyperParams, ScenarioConfig, SscaHyperParams, desk_scenario


def make_tiny(**overrides) -> ScenarioConfig:
    """Small instance for fast unit tests; geometry mirrors the desk layout."""
    kw = dict(
        K=2,
        user_pos=((-25.0, 8.0, 0.0), (30.0, 35.0, 0.0)),
        ris_pos=(0.0, 0.0, 30.0),
        ris_dims=(2, 2),
        N_t=2,
        z_F=50.0,
        q0=(-60.0, 15.0),
        qF=(60.0, 15.0),
        N=6,
        delta_t=1.0,
        v_max=25.0,
        alpha=2.2,
        gamma=2.4,
        kappa=3.5,
        rho=10 ** -2.5,
        beta_ur=3.0,
        beta_rg=3.0,
        beta_ug=0.0,
        sigma2=1e-11,
        P=0.01,
        I=5,
        seed=7,
        ssca=SscaHyperParams(max_iters=40),
        sca=ScaHyperParams(),
        alt_rounds=2,
    )
    kw.update(overrides)
    return ScenarioConfig(**kw)


@pytest.fixture
def tiny() -> ScenarioConfig:
    return make_tiny()


@pytest.fixture
def desk() -> ScenarioConfig:
    return desk_scenario(seed=123)


def deterministic(sc: ScenarioConfig, beta: float = 1e12) -> ScenarioConfig:
    """Rician factors pushed to the deterministic limit."""
    return dataclasses.replace(sc, beta_ur=beta, beta_rg=beta, beta_ug=beta)
