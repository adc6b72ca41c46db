import os
from pathlib import Path

import pytest

from spatialtap.errors import WorkspaceLockedError
from spatialtap.scene import DatasetKind
from spatialtap.workspace import LOCK_NAME, Workspace, run_name


def test_layout(tmp_path):
    ws = Workspace(tmp_path)
    assert ws.dataset_dir(DatasetKind.DST_1SPK) == tmp_path / "datasets" / "dst-1spk"
    assert ws.run_dir("masknet-clean") == tmp_path / "runs" / "masknet-clean"
    assert ws.report_dir("r") == tmp_path / "reports" / "r"
    assert ws.figure_dir("r") == tmp_path / "figures" / "r"


def test_resolve_dataset(tmp_path):
    ws = Workspace(tmp_path)
    assert ws.resolve_dataset("DST-WGN") == ws.dataset_dir(DatasetKind.DST_WGN)
    assert ws.resolve_dataset("elsewhere/set") == Path("elsewhere/set")


def test_run_names():
    assert run_name(DatasetKind.DS_CLEAN) == "masknet-clean"
    assert run_name(DatasetKind.DS_WGN) == "masknet-wgn"


def test_lock_is_exclusive(tmp_path):
    ws = Workspace(tmp_path)
    with ws.lock():
        lock_file = tmp_path / LOCK_NAME
        assert lock_file.read_text().strip() == str(os.getpid())
        with pytest.raises(WorkspaceLockedError, match=str(os.getpid())):
            ws.lock().acquire()
    assert not (tmp_path / LOCK_NAME).exists()
    # released locks can be taken again
    with ws.lock():
        pass


def test_lock_released_on_error(tmp_path):
    ws = Workspace(tmp_path)
    with pytest.raises(RuntimeError):
        with ws.lock():
            raise RuntimeError("boom")
    assert not (tmp_path / LOCK_NAME).exists()


def test_failed_acquire_leaves_foreign_lock(tmp_path):
    (tmp_path / LOCK_NAME).write_text("12345\n")
    lock = Workspace(tmp_path).lock()
    with pytest.raises(WorkspaceLockedError, match="12345"):
        lock.acquire()
    lock.release()
    assert (tmp_path / LOCK_NAME).exists()
