"""Knowledge objects: chunked, embedded, retrievable document indexes.

Retrieval is exact cosine similarity over the whole index (no
approximate structures; corpora at this scale make exactness affordable
and testable). Each object can persist itself to a directory as
``manifest.json`` + ``entries.jsonl`` + ``vectors.bin`` (little-endian
float32, row-major) and reload from there without re-embedding anything.

Updates (insert/delete/replace) take an exclusive writer turn and rewrite
the persisted files via temp-file swap; concurrent retrieval stays safe.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ..errors import ValidationError
from ..models.backends import EmbeddingBackend, HashEmbeddingModel
from .chunker import chunk_text

MANIFEST_FILE = "manifest.json"
ENTRIES_FILE = "entries.jsonl"
VECTORS_FILE = "vectors.bin"


@dataclass
class KnowledgeEntry:
    """One indexed chunk: its provenance span, text, and embedding."""

    chunk_id: str
    source_path: str
    span: tuple[int, int]
    text: str
    embedding: np.ndarray  # float32, shape (dim,)


def _as_vector(values: Sequence[float], dim: int) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float32)
    if vec.shape != (dim,):
        raise ValidationError(f"embedding has dimension {vec.shape}, index expects ({dim},)")
    return vec


class KnowledgeObject:
    """A retrievable index of knowledge entries under one ``knowledge_id``."""

    def __init__(
        self,
        knowledge_id: str,
        embedder: EmbeddingBackend | None = None,
        persist_dir: str | Path | None = None,
        source_config: dict[str, Any] | None = None,
    ):
        if not knowledge_id:
            raise ValidationError("knowledge_id must be non-empty")
        self.knowledge_id = knowledge_id
        self.embedder = embedder or HashEmbeddingModel()
        self.persist_dir = Path(persist_dir) if persist_dir else None
        self.source_config = dict(source_config or {})
        self.entries: list[KnowledgeEntry] = []
        self._lock = threading.RLock()
        self._matrix: np.ndarray | None = None
        self._insert_seq = 0

    # -- index construction -------------------------------------------------

    @property
    def dim(self) -> int:
        return self.embedder.dim

    def _invalidate(self) -> None:
        self._matrix = None

    def _normalized_matrix(self) -> np.ndarray:
        with self._lock:
            if self._matrix is None:
                if not self.entries:
                    self._matrix = np.zeros((0, self.dim), dtype=np.float64)
                else:
                    m = np.stack([e.embedding for e in self.entries]).astype(np.float64)
                    norms = np.linalg.norm(m, axis=1, keepdims=True)
                    norms[norms == 0] = 1.0
                    self._matrix = m / norms
            return self._matrix

    def add_document(self, text: str, source_path: str, chunk_size: int, chunk_overlap: int) -> int:
        """Chunk and embed one document; returns the number of entries added."""
        pieces = chunk_text(text, chunk_size, chunk_overlap)
        if not pieces:
            return 0
        vectors = self.embedder.embed([piece for _, _, piece in pieces])
        with self._lock:
            for (start, end, piece), vec in zip(pieces, vectors):
                self.entries.append(
                    KnowledgeEntry(
                        chunk_id=f"{source_path}:{start}-{end}",
                        source_path=source_path,
                        span=(start, end),
                        text=piece,
                        embedding=_as_vector(vec, self.dim),
                    )
                )
            self._invalidate()
        return len(pieces)

    def build_from_directory(
        self,
        directory: str | Path,
        extensions: Sequence[str],
        chunk_size: int,
        chunk_overlap: int,
    ) -> int:
        """Index every matching file under ``directory`` (sorted order)."""
        root = Path(directory)
        if not root.is_dir():
            raise ValidationError(f"knowledge directory not found: {root}")
        exts = {e if e.startswith(".") else "." + e for e in extensions}
        total = 0
        for path in sorted(root.rglob("*")):
            if path.is_file() and path.suffix in exts:
                rel = path.relative_to(root).as_posix()
                total += self.add_document(
                    path.read_text(encoding="utf-8"), rel, chunk_size, chunk_overlap
                )
        self.source_config = {
            "directory": str(root),
            "extensions": sorted(exts),
            "chunk_size": chunk_size,
            "chunk_overlap": chunk_overlap,
        }
        return total

    def rebuild_from_source(self) -> None:
        """Re-index from the recorded source directory (used by watchers)."""
        cfg = self.source_config
        if not cfg.get("directory"):
            raise ValidationError(f"knowledge object {self.knowledge_id!r} has no source directory")
        with self._lock:
            self.entries = []
            self._invalidate()
            self.build_from_directory(
                cfg["directory"], cfg["extensions"], cfg["chunk_size"], cfg["chunk_overlap"]
            )
            if self.persist_dir:
                self.persist()

    # -- retrieval -----------------------------------------------------------

    def embed_query(self, query: str) -> np.ndarray:
        vec = np.asarray(self.embedder.embed([query])[0], dtype=np.float64)
        if vec.shape != (self.dim,):
            raise ValidationError(
                f"query embedding dimension {vec.shape[0]} does not match index ({self.dim})"
            )
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec

    def retrieve(self, query: str, k: int) -> list[tuple[KnowledgeEntry, float]]:
        """Exact top-k by cosine similarity; ties broken by chunk_id."""
        if k < 1:
            raise ValidationError("k must be >= 1")
        qv = self.embed_query(query)
        with self._lock:
            entries = list(self.entries)
            matrix = self._normalized_matrix()
        if not entries:
            return []
        scores = matrix @ qv
        order = sorted(range(len(entries)), key=lambda i: (-scores[i], entries[i].chunk_id))
        return [(entries[i], float(scores[i])) for i in order[:k]]

    # -- updates ---------------------------------------------------------------

    def insert(self, text: str, source_path: str = "manual") -> str:
        with self._lock:
            self._insert_seq += 1
            chunk_id = f"{source_path}#insert-{self._insert_seq:04d}"
            vec = _as_vector(self.embedder.embed([text])[0], self.dim)
            self.entries.append(
                KnowledgeEntry(chunk_id, source_path, (0, len(text)), text, vec)
            )
            self._invalidate()
            if self.persist_dir:
                self.persist()
            return chunk_id

    def _find(self, chunk_id: str) -> int:
        for i, e in enumerate(self.entries):
            if e.chunk_id == chunk_id:
                return i
        raise ValidationError(f"unknown chunk_id: {chunk_id!r}")

    def delete(self, chunk_id: str) -> None:
        with self._lock:
            self.entries.pop(self._find(chunk_id))
            self._invalidate()
            if self.persist_dir:
                self.persist()

    def replace(self, chunk_id: str, text: str) -> None:
        with self._lock:
            i = self._find(chunk_id)
            old = self.entries[i]
            vec = _as_vector(self.embedder.embed([text])[0], self.dim)
            self.entries[i] = KnowledgeEntry(chunk_id, old.source_path, (0, len(text)), text, vec)
            self._invalidate()
            if self.persist_dir:
                self.persist()

    # -- persistence -----------------------------------------------------------

    def persist(self, persist_dir: str | Path | None = None) -> Path:
        """Write the index to disk atomically (temp files, then rename)."""
        target = Path(persist_dir) if persist_dir else self.persist_dir
        if target is None:
            raise ValidationError("no persist_dir configured")
        target.mkdir(parents=True, exist_ok=True)
        with self._lock:
            entries = list(self.entries)
            manifest = {
                "knowledge_id": self.knowledge_id,
                "dim": self.dim,
                "embedder": self.embedder.config_name,
                "count": len(entries),
                "insert_seq": self._insert_seq,
                "source_config": self.source_config,
            }
            rows = [
                json.dumps(
                    {
                        "chunk_id": e.chunk_id,
                        "source_path": e.source_path,
                        "span": list(e.span),
                        "text": e.text,
                    },
                    ensure_ascii=False,
                )
                for e in entries
            ]
            if entries:
                matrix = np.stack([e.embedding for e in entries]).astype("<f4")
            else:
                matrix = np.zeros((0, self.dim), dtype="<f4")

        def swap(name: str, data: bytes) -> None:
            tmp = target / (name + ".tmp")
            tmp.write_bytes(data)
            os.replace(tmp, target / name)

        swap(ENTRIES_FILE, ("\n".join(rows) + ("\n" if rows else "")).encode("utf-8"))
        swap(VECTORS_FILE, matrix.tobytes(order="C"))
        # Manifest last: its presence marks the directory as intact.
        swap(MANIFEST_FILE, json.dumps(manifest, indent=2).encode("utf-8"))
        self.persist_dir = target
        return target

    @classmethod
    def is_intact(cls, persist_dir: str | Path) -> bool:
        d = Path(persist_dir)
        return all((d / f).exists() for f in (MANIFEST_FILE, ENTRIES_FILE, VECTORS_FILE))

    @classmethod
    def load(cls, persist_dir: str | Path, embedder: EmbeddingBackend | None = None) -> "KnowledgeObject":
        """Reload a persisted index without any embedding computation."""
        d = Path(persist_dir)
        manifest = json.loads((d / MANIFEST_FILE).read_text(encoding="utf-8"))
        dim = manifest["dim"]
        obj = cls(
            manifest["knowledge_id"],
            embedder=embedder,
            persist_dir=d,
            source_config=manifest.get("source_config"),
        )
        if obj.dim != dim:
            raise ValidationError(
                f"embedder dimension {obj.dim} does not match persisted index ({dim})"
            )
        raw = np.frombuffer((d / VECTORS_FILE).read_bytes(), dtype="<f4")
        count = manifest["count"]
        matrix = raw.reshape(count, dim) if count else np.zeros((0, dim), dtype="<f4")
        lines = [
            ln for ln in (d / ENTRIES_FILE).read_text(encoding="utf-8").splitlines() if ln.strip()
        ]
        if len(lines) != count:
            raise ValidationError(
                f"persisted index inconsistent: {len(lines)} entries, manifest says {count}"
            )
        for i, line in enumerate(lines):
            row = json.loads(line)
            obj.entries.append(
                KnowledgeEntry(
                    chunk_id=row["chunk_id"],
                    source_path=row["source_path"],
                    span=tuple(row["span"]),
                    text=row["text"],
                    embedding=matrix[i].copy(),
                )
            )
        obj._insert_seq = manifest.get("insert_seq", 0)
        return obj

    def clone(self) -> "KnowledgeObject":
        """Deep copy whose mutations never affect this object."""
        with self._lock:
            twin = KnowledgeObject(
                self.knowledge_id,
                embedder=self.embedder,
                persist_dir=None,
                source_config=copy.deepcopy(self.source_config),
            )
            twin.entries = [
                KnowledgeEntry(e.chunk_id, e.source_path, e.span, e.text, e.embedding.copy())
                for e in self.entries
            ]
            twin._insert_seq = self._insert_seq
            return twin


def update_knowledge(obj: KnowledgeObject, op: str, payload: dict[str, Any]) -> str | None:
    """Apply one index update: ``insert``, ``delete``, or ``replace``."""
    if op == "insert":
        return obj.insert(payload["text"], payload.get("source_path", "manual"))
    if op == "delete":
        obj.delete(payload["chunk_id"])
        return None
    if op == "replace":
        obj.replace(payload["chunk_id"], payload["text"])
        return None
    raise ValidationError(f"unknown update op {op!r}; expected insert, delete, or replace")


def fused_retrieve(
    weighted_objects: Sequence[tuple[KnowledgeObject, float]],
    query: str,
    k: int,
) -> list[tuple[KnowledgeEntry, float]]:
    """Top-k across multiple sources with per-source weights.

    Each candidate's fused score is ``weight * cosine``. Zero-weight
    sources are skipped entirely, so weights (1, 0) reduce exactly to
    single-source retrieval.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    pairs = [(obj, w) for obj, w in weighted_objects]
    if any(w < 0 for _, w in pairs):
        raise ValidationError("weights must be >= 0")
    live = [(obj, w) for obj, w in pairs if w > 0]
    if not live:
        raise ValidationError("at least one weight must be positive")
    merged: list[tuple[float, str, str, KnowledgeEntry]] = []
    for obj, w in live:
        for entry, score in obj.retrieve(query, k):
            merged.append((w * score, obj.knowledge_id, entry.chunk_id, entry))
    merged.sort(key=lambda row: (-row[0], row[1], row[2]))
    return [(entry, fused) for fused, _, _, entry in merged[:k]]


class DirectoryWatcher:
    """Poll-based refresh: re-index a knowledge object when its source
    directory's content changes."""

    def __init__(self, obj: KnowledgeObject, interval: float = 1.0):
        if not obj.source_config.get("directory"):
            raise ValidationError("watch requires an object built from a directory")
        self.obj = obj
        self.interval = interval
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._signature = self._scan()
        self.refreshes = 0

    def _scan(self) -> dict[str, str]:
        cfg = self.obj.source_config
        root = Path(cfg["directory"])
        exts = set(cfg["extensions"])
        sig = {}
        if root.is_dir():
            for path in sorted(root.rglob("*")):
                if path.is_file() and path.suffix in exts:
                    sig[str(path)] = hashlib.sha256(path.read_bytes()).hexdigest()
        return sig

    def _run(self) -> None:
        while not self._stop.wait(self.interval):
            current = self._scan()
            if current != self._signature:
                self._signature = current
                self.obj.rebuild_from_source()
                self.refreshes += 1

    def start(self) -> "DirectoryWatcher":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=5)

    def wait_for_refresh(self, count: int = 1, timeout: float = 10.0) -> bool:
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            if self.refreshes >= count:
                return True
            time.sleep(0.02)
        return False


def watch_dir(obj: KnowledgeObject, interval: float = 1.0) -> DirectoryWatcher:
    return DirectoryWatcher(obj, interval).start()
