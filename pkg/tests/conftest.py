import json
from pathlib import Path

import pytest

from evsound import cli

DATA = Path(__file__).parent / "data"


def _make_bundle(tmp_path_factory, name: str) -> Path:
    out = tmp_path_factory.mktemp(name)
    assert cli.main(["synth", "--out", str(out), "--seed", "0"]) == 0
    assert cli.main(["metrics", "--audio", str(out), "--out", str(out),
                     "--format", "csv"]) == 0
    return out


@pytest.fixture(scope="session")
def bundle(tmp_path_factory) -> Path:
    """Synthesized catalogue plus metrics table, shared across the session."""
    return _make_bundle(tmp_path_factory, "bundle_a")


@pytest.fixture(scope="session")
def bundle_rerun(tmp_path_factory) -> Path:
    """An independent second run with identical seeds, for determinism checks."""
    return _make_bundle(tmp_path_factory, "bundle_b")


@pytest.fixture(scope="session")
def metric_rows(bundle):
    return cli.load_metrics(bundle / "metrics.csv")


@pytest.fixture(scope="session")
def golden_metrics() -> list[dict]:
    return json.loads((DATA / "golden_metrics_seed0.json").read_text())


@pytest.fixture(scope="session")
def demo_ratings_path() -> Path:
    return DATA / "synthetic_ratings_demo.csv"
