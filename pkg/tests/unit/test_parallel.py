import numpy as np
import pytest
from structlog.testing import capture_logs

from sl2lab.parallel import chunked_map, split, trial_rngs, worker_count


@pytest.mark.parametrize("workers", [pytest.param(1, id="serial"), pytest.param(4, id="pool")])
def test_chunked_map_keeps_order(workers):
    assert chunked_map(lambda x: x * x, list(range(50)), workers) == [x * x for x in range(50)]


def test_chunked_map_empty():
    assert chunked_map(str, [], 3) == []


def test_worker_count_from_settings(monkeypatch):
    monkeypatch.setattr("sl2lab.parallel.get_settings", lambda: type("S", (), {"threads": 3})())
    assert worker_count() == 3
    assert worker_count(0) == 1
    assert worker_count(5) == 5


def test_split_covers_array():
    array = np.arange(20_000)
    pieces = split(array, workers=4, min_chunk=4096)
    assert len(pieces) == 4
    assert np.array_equal(np.concatenate(pieces), array)
    assert len(split(np.arange(10), workers=4)) == 1


def test_trial_rngs_depend_on_seed_and_index():
    first = [rng.integers(1 << 30) for rng in trial_rngs(7, 3)]
    again = [rng.integers(1 << 30) for rng in trial_rngs(7, 5)]
    other = [rng.integers(1 << 30) for rng in trial_rngs(8, 3)]
    assert first == again[:3]
    assert first != other
    assert len(set(first)) == 3


@pytest.mark.parametrize("workers", [pytest.param(1, id="serial"), pytest.param(3, id="pool")])
def test_chunked_map_logs_workers(workers):
    with capture_logs() as logs:
        chunked_map(str, list(range(5)), workers)
    assert {"event": "chunked_map", "items": 5, "workers": workers, "log_level": "debug"} in logs
