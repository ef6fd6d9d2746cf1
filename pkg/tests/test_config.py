import pytest

from config import Config, config


def test_defaults_are_valid():
    results = Config().validate_config()
    assert results['valid']
    assert results['errors'] == []


def test_invalid_environment(monkeypatch):
    monkeypatch.setenv('TAIL_TOLERANCE', '0')
    monkeypatch.setenv('MAX_WORKERS', '0')
    monkeypatch.setenv('LOG_LEVEL', 'LOUD')
    results = Config().validate_config()
    assert not results['valid']
    assert len(results['errors']) == 3


def test_loose_tail_tolerance_warns(monkeypatch):
    monkeypatch.setenv('TAIL_TOLERANCE', '1e-3')
    results = Config().validate_config()
    assert results['valid']
    assert results['warnings']


def test_overridden_restores_tolerances():
    before = config.tolerances()
    with config.overridden({'tail': 1e-4, 'condition': None}) as active:
        assert active.tail_tolerance == 1e-4
        assert config.tolerances()['condition'] == before['condition']
    assert config.tolerances() == before


def test_overridden_restores_after_error():
    before = config.tail_tolerance
    with pytest.raises(RuntimeError):
        with config.overridden({'tail': 0.5}):
            raise RuntimeError("boom")
    assert config.tail_tolerance == before


def test_overridden_rejects_unknown_keys():
    with pytest.raises(KeyError):
        with config.overridden({'speed': 1.0}):
            pass


def test_quiet_logging_config():
    logging_config = Config().get_logging_config(quiet=True)
    assert logging_config['handlers']['console']['level'] == 'WARNING'


def test_trace_and_basis_limits_are_configurable(monkeypatch):
    monkeypatch.setenv('TRACE_TOLERANCE', '1e-9')
    monkeypatch.setenv('MAX_BASIS_DIMENSION', '0')
    fresh = Config()
    assert fresh.tolerances()['trace'] == 1e-9
    assert fresh.to_dict()['max_basis_dimension'] == 0
    assert not fresh.validate_config()['valid']
