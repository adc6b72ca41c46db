"""
Workspace layout and locking

    <workspace>/.lock
    <workspace>/datasets/<kind>/manifest.json
    <workspace>/runs/<run>/checkpoint.ckpt, metrics.csv, config.json
    <workspace>/reports/<run>/<kind>.csv, <kind>.json
    <workspace>/figures/<run>/<sequence>_<artifact>.svg
"""

import logging
import os
from pathlib import Path
from typing import Union

from .errors import WorkspaceLockedError
from .scene import DatasetKind

logger = logging.getLogger(__name__)

LOCK_NAME = ".lock"
RUN_NAMES = {DatasetKind.DS_CLEAN: "masknet-clean", DatasetKind.DS_WGN: "masknet-wgn"}


class Workspace:
    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    def dataset_dir(self, kind: DatasetKind) -> Path:
        return self.root / "datasets" / kind.value.lower()

    def run_dir(self, run: str) -> Path:
        return self.root / "runs" / run

    def report_dir(self, run: str) -> Path:
        return self.root / "reports" / run

    def figure_dir(self, run: str) -> Path:
        return self.root / "figures" / run

    def resolve_dataset(self, name: str) -> Path:
        """A dataset kind name inside the workspace, or a path to a dataset/manifest"""
        try:
            return self.dataset_dir(DatasetKind.parse(name))
        except ValueError:
            return Path(name)

    def lock(self) -> "WorkspaceLock":
        return WorkspaceLock(self.root / LOCK_NAME)


def run_name(kind: DatasetKind) -> str:
    """Default run name for a model trained on `kind`"""
    return RUN_NAMES.get(kind, f"masknet-{kind.value.lower()}")


class WorkspaceLock:
    """
    Exclusive lock file holding the owner's pid

    Usage:
        with Workspace(path).lock():
            ...
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        self._held = False

    def acquire(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY, 0o644)
        except FileExistsError:
            try:
                holder = self.path.read_text().strip() or "unknown"
            except OSError:
                holder = "unknown"
            raise WorkspaceLockedError(f"workspace is locked by pid {holder} ({self.path}); "
                                       f"remove the file if that process is gone")
        with os.fdopen(fd, "w") as f:
            f.write(f"{os.getpid()}\n")
        self._held = True
        logger.debug("acquired %s", self.path)

    def release(self):
        if self._held:
            self.path.unlink(missing_ok=True)
            self._held = False

    def __enter__(self):
        self.acquire()
        return self

    def __exit__(self, *exc):
        self.release()
        return False
