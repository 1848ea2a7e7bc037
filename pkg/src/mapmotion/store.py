"""File-backed project store.

One canonical JSON file per project under the data directory, wrapped in a
small envelope carrying the revision counter. Writes are atomic (temp file
in the same directory, fsync, rename) so an interrupted write can never
corrupt the previous revision. Optimistic concurrency: every write states
the revision it was based on and conflicts if the store has moved on.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from pathlib import Path

from .canonical import canonical_bytes
from .errors import ConflictError, NotFoundError
from .project import Project, project_from_doc, project_to_doc


class ProjectStore:
    """Per-project writes serialized by a lock; reads are lock-free reads
    of immutable snapshots (whole-file read of the last committed state)."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.projects_dir = self.root / "projects"
        self.assets_dir = self.root / "assets"
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        # parsed-snapshot read cache, keyed by file mtime: projects are
        # immutable once written, so a matching mtime means a valid snapshot
        self._snapshots: dict[str, tuple[int, Project, int]] = {}

    def _lock_for(self, project_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(project_id, threading.Lock())

    def _path(self, project_id: str) -> Path:
        return self.projects_dir / f"{project_id}.json"

    # -- reads ------------------------------------------------------------

    def list_ids(self) -> list[str]:
        if not self.projects_dir.exists():
            return []
        return sorted(p.stem for p in self.projects_dir.glob("*.json"))

    def exists(self, project_id: str) -> bool:
        return self._path(project_id).exists()

    def load(self, project_id: str) -> tuple[Project, int]:
        path = self._path(project_id)
        try:
            mtime = path.stat().st_mtime_ns
        except FileNotFoundError:
            self._snapshots.pop(project_id, None)
            raise NotFoundError(f"no project with id {project_id}", {"project_id": project_id}) from None
        cached = self._snapshots.get(project_id)
        if cached is not None and cached[0] == mtime:
            return cached[1], cached[2]
        doc = json.loads(path.read_text(encoding="utf-8"))
        project, revision = project_from_doc(doc["project"]), int(doc["revision"])
        self._snapshots[project_id] = (mtime, project, revision)
        return project, revision

    def load_bytes(self, project_id: str) -> bytes:
        path = self._path(project_id)
        if not path.exists():
            raise NotFoundError(f"no project with id {project_id}", {"project_id": project_id})
        return path.read_bytes()

    # -- writes -----------------------------------------------------------

    def _write_atomic(self, path: Path, payload: bytes) -> None:
        tmp = path.parent / f".tmp-{path.stem}-{uuid.uuid4().hex[:8]}"
        with open(tmp, "wb") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)

    def create(self, project: Project) -> int:
        with self._lock_for(project.id):
            self.projects_dir.mkdir(parents=True, exist_ok=True)
            path = self._path(project.id)
            if path.exists():
                raise ConflictError(f"project {project.id} already exists")
            payload = canonical_bytes({"revision": 1, "project": project_to_doc(project)})
            self._write_atomic(path, payload)
            return 1

    def save(self, project: Project, expected_revision: int) -> int:
        """Compare-and-swap write: fails with a conflict when the store's
        revision differs from the caller's last-seen one."""
        with self._lock_for(project.id):
            _, current = self.load(project.id)
            if current != expected_revision:
                raise ConflictError(
                    f"project {project.id} is at revision {current}, caller expected {expected_revision}",
                    {"current_revision": current, "expected_revision": expected_revision},
                )
            new_revision = current + 1
            payload = canonical_bytes({"revision": new_revision, "project": project_to_doc(project)})
            self._write_atomic(self._path(project.id), payload)
            return new_revision

    def delete(self, project_id: str) -> None:
        with self._lock_for(project_id):
            path = self._path(project_id)
            if not path.exists():
                raise NotFoundError(f"no project with id {project_id}", {"project_id": project_id})
            path.unlink()

    # -- assets -----------------------------------------------------------

    def put_asset(self, data: bytes) -> str:
        import hashlib

        self.assets_dir.mkdir(parents=True, exist_ok=True)
        asset_id = hashlib.sha256(data).hexdigest()[:32]
        path = self.assets_dir / asset_id
        if not path.exists():
            self._write_atomic(path, data)
        return asset_id

    def get_asset(self, asset_id: str) -> bytes:
        if not asset_id or not all(c in "0123456789abcdef" for c in asset_id):
            raise NotFoundError(f"no asset with id {asset_id}", {"asset_id": asset_id})
        path = self.assets_dir / asset_id
        if not path.exists():
            raise NotFoundError(f"no asset with id {asset_id}", {"asset_id": asset_id})
        return path.read_bytes()
