from __future__ import annotations

from datetime import datetime

import pytest
from hypothesis import HealthCheck, settings

from riskmap.ingest import CallRecord, Direction
from riskmap.synth import SynthConfig, generate

settings.register_profile(
    "deterministic",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")


def rec(caller: str, callee: str, ts: str, direction: str, antenna: str) -> CallRecord:
    """Shorthand record builder for hand-written scenarios."""
    return CallRecord(
        caller,
        callee,
        datetime.fromisoformat(ts),
        Direction.OUTGOING if direction == "out" else Direction.INCOMING,
        antenna,
    )


@pytest.fixture(scope="session")
def small_fixture(tmp_path_factory):
    """300 users, 20 antennas, 10 days; cheap enough for most suites."""
    root = tmp_path_factory.mktemp("synth-small")
    cfg = SynthConfig(seed=11, n_users=300, n_antennas=20, n_days=10)
    manifest = generate(cfg, root)
    return root, cfg, manifest


@pytest.fixture(scope="session")
def acceptance_fixture(tmp_path_factory):
    """The seeded 10,000-user / 200-antenna / 30-day dataset."""
    root = tmp_path_factory.mktemp("synth-10k")
    cfg = SynthConfig(
        seed=42,
        n_users=10_000,
        n_antennas=200,
        n_days=30,
        mean_degree=8.0,
        calls_per_user_day=1.2,
    )
    manifest = generate(cfg, root)
    return root, cfg, manifest
