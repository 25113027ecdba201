"""Run directory and content-addressed artifact store.

Media payloads never travel inside messages; they are saved locally and
referenced by URL, and consumers fetch them lazily through that URL.
Artifacts are content-addressed (hash of the bytes, plus the suggested
extension), so saving identical bytes twice yields the same URL and one
file. Nothing in the store is mutated or deleted during a run.
"""

from __future__ import annotations

import hashlib
import os
from pathlib import Path
from urllib.parse import unquote, urlparse
from urllib.request import pathname2url

from ..errors import ValidationError

RUN_DIR_ENV = "AGENTMESH_RUN_DIR"


def run_dir() -> Path:
    """Root directory for this run's artifacts and logs.

    Overridable via the ``AGENTMESH_RUN_DIR`` environment variable.
    """
    root = Path(os.environ.get(RUN_DIR_ENV, "./agentmesh_run"))
    root.mkdir(parents=True, exist_ok=True)
    return root


def artifact_dir() -> Path:
    d = run_dir() / "artifacts"
    d.mkdir(parents=True, exist_ok=True)
    return d


def save_artifact(data: bytes, suggested_extension: str = ".bin") -> str:
    """Store ``data`` and return a ``file://`` URL for it."""
    if not isinstance(data, (bytes, bytearray)):
        raise ValidationError("artifact data must be bytes")
    ext = suggested_extension or ".bin"
    if not ext.startswith("."):
        ext = "." + ext
    digest = hashlib.sha256(bytes(data)).hexdigest()
    path = artifact_dir() / f"{digest}{ext}"
    if not path.exists():
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(bytes(data))
        os.replace(tmp, path)
    return "file://" + pathname2url(str(path.resolve()))


def load_artifact(url: str) -> bytes:
    """Fetch the bytes behind a ``file://`` URL (or a bare path)."""
    if url.startswith("file://"):
        path = Path(unquote(urlparse(url).path))
    else:
        path = Path(url)
    return path.read_bytes()
