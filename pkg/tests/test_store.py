"""Cache persistence: round-trips, atomicity, schema and key validation."""

from __future__ import annotations

import json
import os
import threading
from fractions import Fraction
from itertools import combinations_with_replacement, islice

import pytest

from rspin.core import CacheError
from rspin.store import CACHE_ENV_VAR, CacheStore, default_cache_path


def synthetic_entries(count):
    """Yield (canonical g0 key, exact value) pairs, all distinct."""
    r = 50
    source = combinations_with_replacement(range(r), 3)
    for i, a in enumerate(islice(source, count)):
        key = "g0:r={}:a={}".format(r, ",".join(map(str, a)))
        yield key, Fraction(i - 3, i + 7)


def test_put_get_round_trip():
    store = CacheStore()
    store.put("g0:r=5:a=1,1,3,3", Fraction(1, 5))
    assert store.get("g0:r=5:a=1,1,3,3") == Fraction(1, 5)
    assert store.get("g0:r=5:a=1,1,3,4") is None
    assert "g0:r=5:a=1,1,3,3" in store
    assert len(store) == 1


def test_put_rejects_non_canonical_keys():
    store = CacheStore()
    with pytest.raises(CacheError):
        store.put("g0:r=5:a=3,1,1,3", Fraction(1, 5))   # unsorted twists
    with pytest.raises(CacheError):
        store.put("dr1:r=4:k=-2,2:a=2,2", Fraction(1, 32))  # wrong orientation
    with pytest.raises(CacheError):
        store.put("junk", Fraction(1))


def test_save_load_round_trip(tmp_path):
    path = tmp_path / "cache.json"
    store = CacheStore()
    store.put("g0:r=5:a=1,1,3,3", Fraction(1, 5))
    store.put("dr1:r=4:k=2,-2:a=2,2", Fraction(1, 32))
    store.save(str(path))
    assert not store.dirty
    loaded = CacheStore.load(str(path))
    assert dict(loaded.items()) == dict(store.items())
    assert not loaded.dirty


def test_round_trip_ten_thousand_entries(tmp_path):
    path = tmp_path / "big.json"
    store = CacheStore()
    for key, value in synthetic_entries(10_000):
        store.put(key, value)
    assert len(store) == 10_000
    store.save(str(path))
    loaded = CacheStore.load(str(path))
    assert dict(loaded.items()) == dict(store.items())


def test_save_is_atomic_under_crash(tmp_path, monkeypatch):
    path = tmp_path / "cache.json"
    store = CacheStore()
    store.put("g0:r=5:a=1,1,3,3", Fraction(1, 5))
    store.save(str(path))
    before = path.read_text()

    bigger = CacheStore()
    for key, value in synthetic_entries(50):
        bigger.put(key, value)

    def exploding_dump(*args, **kwargs):
        raise OSError("disk full")

    monkeypatch.setattr(json, "dump", exploding_dump)
    with pytest.raises(OSError):
        bigger.save(str(path))
    monkeypatch.undo()

    # the original file is untouched and no temp debris remains
    assert path.read_text() == before
    assert os.listdir(tmp_path) == ["cache.json"]
    assert CacheStore.load(str(path)).get("g0:r=5:a=1,1,3,3") == Fraction(1, 5)


def test_load_rejects_unknown_schema(tmp_path):
    path = tmp_path / "cache.json"
    path.write_text('{"schema": 2, "entries": {}}')
    with pytest.raises(CacheError, match="schema"):
        CacheStore.load(str(path))


@pytest.mark.parametrize(
    "content",
    [
        "not json at all {",
        '["wrong top level"]',
        '{"schema": 1}',
        '{"schema": 1, "entries": ["list"]}',
        '{"schema": 1, "entries": {"g0:r=5:a=1,1,3,3": "1.5"}}',
        '{"schema": 1, "entries": {"g0:r=5:a=3,1": "1/5"}}',
    ],
)
def test_load_rejects_malformed_files(tmp_path, content):
    path = tmp_path / "cache.json"
    path.write_text(content)
    with pytest.raises(CacheError):
        CacheStore.load(str(path))


def test_load_error_names_the_path(tmp_path):
    path = tmp_path / "cache.json"
    path.write_text("{{{")
    with pytest.raises(CacheError, match="cache.json"):
        CacheStore.load(str(path))


def test_default_cache_path_env_override(monkeypatch):
    monkeypatch.setenv(CACHE_ENV_VAR, "/tmp/elsewhere.json")
    assert default_cache_path() == "/tmp/elsewhere.json"
    monkeypatch.delenv(CACHE_ENV_VAR)
    assert default_cache_path() != "/tmp/elsewhere.json"


def test_concurrent_reads(tmp_path):
    store = CacheStore()
    pairs = list(synthetic_entries(500))
    for key, value in pairs:
        store.put(key, value)
    errors = []

    def reader():
        try:
            for key, value in pairs:
                assert store.get(key) == value
        except Exception as exc:   # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=reader) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert errors == []


def test_dirty_flag_tracks_mutation(tmp_path):
    store = CacheStore()
    assert not store.dirty
    store.put("g0:r=5:a=1,1,3,3", Fraction(1, 5))
    assert store.dirty
    path = tmp_path / "cache.json"
    store.save(str(path))
    assert not store.dirty
