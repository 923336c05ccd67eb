import json
import shutil

import pytest

from mdagkit.checks import SidecarError, run_gallery, run_sidecar, shipped_gallery


def test_shipped_gallery_passes():
    results = run_gallery(shipped_gallery())
    assert len({r.file for r in results}) == len(list(shipped_gallery().glob("*.mdag")))
    bad = [r for r in results if not r.ok]
    assert not bad, bad


def _copy(tmp_path, name, expect):
    shutil.copy(shipped_gallery() / f"{name}.mdag", tmp_path / f"{name}.mdag")
    (tmp_path / f"{name}.json").write_text(json.dumps({"expect": expect}))
    return tmp_path / f"{name}.mdag"


def test_mismatch_is_reported(tmp_path):
    path = _copy(tmp_path, "fig2i", {"classify": {"class": "DAG_EQUIVALENT"}, "valid": True})
    res = {r.check: r for r in run_sidecar(path)}
    assert res["valid"].ok
    assert not res["classify"].ok and "NESTED" in res["classify"].detail


def test_wrong_witness_is_reported(tmp_path):
    want = {"class": "NESTED", "witnesses": [{"sigma": ["c"], "A": ["a"], "B": ["b"], "C": ["c"]}]}
    path = _copy(tmp_path, "fig2i", {"classify": want})
    assert not run_sidecar(path)[0].ok


def test_crashing_check_is_a_failure(tmp_path):
    path = _copy(tmp_path, "fig2i", {"fix": {"vertex": "b", "file": "fig2ii.mdag"}})
    (r,) = run_sidecar(path)
    assert not r.ok and "GraphError" in r.detail


def test_missing_sidecar(tmp_path):
    shutil.copy(shipped_gallery() / "fig2i.mdag", tmp_path)
    with pytest.raises(SidecarError, match="missing"):
        run_gallery(tmp_path)


@pytest.mark.parametrize("content", ["{not json", '{"note": "x"}', '{"expect": []}'])
def test_corrupted_sidecar(tmp_path, content):
    shutil.copy(shipped_gallery() / "fig2i.mdag", tmp_path)
    (tmp_path / "fig2i.json").write_text(content)
    with pytest.raises(SidecarError, match="corrupted"):
        run_gallery(tmp_path)


def test_unknown_check(tmp_path):
    path = _copy(tmp_path, "fig2i", {"frobnicate": 1})
    with pytest.raises(SidecarError):
        run_sidecar(path)


def test_empty_directory(tmp_path):
    assert run_gallery(tmp_path) == []
