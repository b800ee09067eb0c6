import dataclasses
import math

import pytest

from risuav.config import (ConfigError, ScenarioConfig, config_from_text,
                           config_to_text, db_to_linear, dbm_to_watts,
                           desk_scenario, full_scale_scenario, with_beta_db,
                           with_horizon)

from conftest import make_tiny


def test_full_scale_scenario_parameters():
    sc = full_scale_scenario()
    assert sc.K == 4
    assert sc.M == 400 and sc.ris_dims == (20, 20)
    assert sc.N_t == 5
    assert sc.I == 100
    assert sc.P == 0.01
    assert sc.sigma2 == pytest.approx(1e-11)
    assert sc.rho == pytest.approx(db_to_linear(-25.0))
    assert (sc.alpha, sc.gamma, sc.kappa) == (2.2, 2.4, 3.5)
    assert sc.v_max == 25.0 and sc.delta_t == 1.0
    assert sc.z_F == 80.0
    assert sc.q0 == (-500.0, 20.0) and sc.qF == (500.0, 20.0)
    assert sc.N == 100
    assert sc.user_pos[0] == (-120.0, 10.0, 0.0)
    assert sc.ris_pos == (0.0, 0.0, 40.0)
    assert sc.beta_ug == 0.0


def test_mission_feasibility_rejected():
    with pytest.raises(ConfigError, match="qF unreachable"):
        make_tiny(N=2, q0=(-60.0, 15.0), qF=(60.0, 15.0), v_max=10.0)


@pytest.mark.parametrize("field,value,match", [
    ("P", -1.0, "P"),
    ("sigma2", 0.0, "sigma2"),
    ("rho", -0.5, "rho"),
    ("beta_ur", -2.0, "beta_ur"),
    ("N_t", 0, "N_t"),
    ("I", 0, "I"),
])
def test_invalid_scalars_rejected(field, value, match):
    with pytest.raises(ConfigError, match=match):
        make_tiny(**{field: value})


def test_user_behind_panel_rejected():
    with pytest.raises(ConfigError, match="behind the RIS panel"):
        make_tiny(user_pos=((-25.0, -8.0, 0.0), (30.0, 35.0, 0.0)))


def test_coincident_ground_points_rejected():
    with pytest.raises(ConfigError, match="coincident"):
        make_tiny(user_pos=((-25.0, 8.0, 0.0), (-25.0, 8.0, 0.0)))


def test_hovering_mission_allowed():
    sc = make_tiny(q0=(-10.0, 15.0), qF=(-10.0, 15.0))
    assert sc.q0 == sc.qF


def test_ssca_exponent_constraints():
    with pytest.raises(ConfigError, match="ssca_nu"):
        make_tiny(ssca=dataclasses.replace(make_tiny().ssca, nu=0.3))
    with pytest.raises(ConfigError, match="ssca_mu"):
        make_tiny(ssca=dataclasses.replace(make_tiny().ssca, nu=0.9, mu=0.8))


def test_db_suffix_conversion_on_load():
    text = config_to_text(full_scale_scenario())
    sc = config_from_text(text)
    assert sc.sigma2 == pytest.approx(dbm_to_watts(-80.0))
    assert sc.rho == pytest.approx(db_to_linear(-25.0))
    assert sc.beta_ur == pytest.approx(db_to_linear(10.0))


def test_config_roundtrip_byte_identical():
    text = config_to_text(full_scale_scenario())
    again = config_to_text(config_from_text(text))
    assert text == again


def test_unknown_key_rejected():
    text = config_to_text(full_scale_scenario()) + "bogus_key = 3\n"
    with pytest.raises(ConfigError, match="bogus_key"):
        config_from_text(text)


def test_duplicate_and_conflicting_keys_rejected():
    text = config_to_text(full_scale_scenario())
    with pytest.raises(ConfigError, match="duplicate"):
        config_from_text(text + "P = 0.01\n")
    with pytest.raises(ConfigError, match="beta_ug"):
        config_from_text(text + "beta_ug_db = 0.0\n")


def test_malformed_vector_values_name_key():
    text = config_to_text(full_scale_scenario())
    broken = text.replace("q0 = -500.0,20.0", "q0 = west,20.0")
    with pytest.raises(ConfigError, match="q0"):
        config_from_text(broken)
    broken = text.replace("user_pos = -120.0,10.0,0.0;", "user_pos = a,b,c;")
    with pytest.raises(ConfigError, match="user_pos"):
        config_from_text(broken)


def test_missing_key_reported():
    text = "\n".join(line for line in config_to_text(full_scale_scenario()).splitlines()
                     if not line.startswith("P "))
    with pytest.raises(ConfigError, match="missing config keys: P"):
        config_from_text(text)


def test_sweep_helpers():
    sc = desk_scenario()
    hot = with_beta_db(sc, 10.0)
    assert hot.beta_ur == pytest.approx(10.0)
    assert hot.beta_rg == pytest.approx(10.0)
    longer = with_horizon(sc, 40.0)
    assert longer.N == 40


def test_derived_quantities():
    sc = make_tiny()
    assert sc.D == pytest.approx(sc.v_max * sc.delta_t)
    assert sc.M == 4
    assert sc.snr_scale == pytest.approx(sc.P / sc.sigma2)
    assert math.dist(sc.q0, sc.qF) <= sc.N * sc.D
