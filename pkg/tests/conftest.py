"""Shared fixtures: registry experiments run once per session."""

import time

import pytest

from desing.registry import EXPERIMENTS, run_experiment

_cache = {}


@pytest.fixture(scope="session")
def experiments():
    """Lazily run named experiments once; returns (result, wall_seconds)."""

    def get(name: str):
        if name not in _cache:
            if name not in EXPERIMENTS:
                raise KeyError(name)
            t0 = time.perf_counter()
            result = run_experiment(name)
            _cache[name] = (result, time.perf_counter() - t0)
        return _cache[name]

    return get


def checks_by_id(result):
    return {c.invariant_id: c for c in result.checks}
