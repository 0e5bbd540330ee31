import pytest
from pydantic import ValidationError

from sl2lab.settings import Settings, get_settings


def test_from_env(monkeypatch):
    monkeypatch.setenv("SL2LAB_THREADS", "3")
    monkeypatch.setenv("SL2LAB_LOG_LEVEL", "DEBUG")
    settings = Settings.from_env()
    assert settings.threads == 3
    assert settings.log_level == "debug"


def test_defaults(monkeypatch):
    monkeypatch.delenv("SL2LAB_THREADS", raising=False)
    monkeypatch.delenv("SL2LAB_LOG_LEVEL", raising=False)
    settings = Settings.from_env()
    assert settings.threads >= 1
    assert settings.log_level == "warning"


@pytest.mark.parametrize(
    ("name", "value"),
    [
        pytest.param("SL2LAB_THREADS", "0", id="no workers"),
        pytest.param("SL2LAB_THREADS", "many", id="not a number"),
        pytest.param("SL2LAB_LOG_LEVEL", "loud", id="unknown level"),
    ],
)
def test_invalid_env(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ValidationError):
        Settings.from_env()


def test_settings_are_cached():
    assert get_settings() is get_settings()
