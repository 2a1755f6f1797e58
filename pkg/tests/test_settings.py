import json

import pytest

from src.errors import ConversionError
from src.settings import CONFIG_ENV_VAR, ConverterSettings, GoalSettings, load_settings

from conftest import ROOT


@pytest.fixture(autouse=True)
def _no_env_config(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)


def test_defaults():
    settings = ConverterSettings()
    assert (settings.dt_sim, settings.dt_cr, settings.t_max) == (0.01, 0.1, 60.0)
    assert settings.sim_config().max_frame == 6000
    assert settings.goal == GoalSettings()


def test_bundled_config_matches_defaults():
    assert load_settings(ROOT / "config" / "converter.json") == ConverterSettings()


def test_overrides_win_over_file(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"dt_cr": 0.2, "t_max": 30.0, "goal": {"length_factor": 4.0}}))
    settings = load_settings(path, t_max=10.0, ego_name=None)
    assert (settings.dt_cr, settings.t_max, settings.ego_name) == (0.2, 10.0, None)
    assert settings.goal.length_factor == 4.0


def test_file_from_environment(tmp_path, monkeypatch):
    path = tmp_path / "env.json"
    path.write_text(json.dumps({"country_code": "DEU"}))
    monkeypatch.setenv(CONFIG_ENV_VAR, str(path))
    assert load_settings().country_code == "DEU"


@pytest.mark.parametrize("content", [
    "{not json",
    json.dumps({"dt_sim": 0}),
    json.dumps({"dt_sim": 0.1, "t_max": 0.05}),
    json.dumps({"unknown_key": 1}),
    json.dumps({"default_condition_edge": "sideways"}),
])
def test_invalid_settings(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    with pytest.raises(ConversionError):
        load_settings(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConversionError):
        load_settings(tmp_path / "absent.json")
