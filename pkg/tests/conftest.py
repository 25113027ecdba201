from __future__ import annotations

import pytest

from agentmesh.models import reset_registry
from agentmesh.monitor import reset_monitor


@pytest.fixture(autouse=True)
def fresh_runtime(tmp_path, monkeypatch):
    """Isolate every test: clean registries, a throwaway run directory."""
    reset_registry()
    reset_monitor()
    monkeypatch.setenv("AGENTMESH_RUN_DIR", str(tmp_path / "run"))
    yield
    reset_registry()
    reset_monitor()
