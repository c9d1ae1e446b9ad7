import json

import pytest
from fastapi.testclient import TestClient

from querysum.cli import run
from querysum.service import create_app
from querysum.store import load_queries


def _run(capsys, argv):
    code = run(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_no_args_usage(capsys):
    code, out, err = _run(capsys, [])
    assert code == 1
    assert out == "" and "usage" in err.lower()


def test_unknown_flag(capsys):
    code, out, err = _run(capsys, ["synth", "--nope"])
    assert code == 1


def test_synth_and_querygen(tmp_path, capsys):
    code, out, _ = _run(capsys, ["synth", "--data-dir", str(tmp_path), "--shots", "128",
                                 "--videos", "1", "--feature-dim", "8", "--vocab", "12",
                                 "--seed", "7"])
    assert code == 0
    report = json.loads(out)
    assert report["videos"] == 1

    gt = load_queries(tmp_path)["train"][0]["summary"]
    code, out, _ = _run(capsys, ["querygen", "--data-dir", str(tmp_path),
                                 "--video", "video-0",
                                 "--shots", ",".join(map(str, gt)), "--size", "3"])
    assert code == 0
    q = json.loads(out)
    assert len(q["query_shots"]) == 3 and set(q["query_shots"]) <= set(gt)


def test_infer_parity_with_service(small_ds, small_ckpt, capsys):
    q = load_queries(small_ds)["train"][0]
    code, out, _ = _run(capsys, [
        "infer", "--data-dir", str(small_ds), "--checkpoint", small_ckpt,
        "--video", q["video"], "--c1", q["c1"], "--c2", q["c2"]])
    assert code == 0
    client = TestClient(create_app(str(small_ds)))
    r = client.get("/api/infer", params=dict(
        c1=q["c1"], c2=q["c2"], video=q["video"], ckpt=small_ckpt))
    assert out.strip().encode() == r.content


def test_infer_usage_errors(small_ds, small_ckpt, capsys):
    base = ["infer", "--data-dir", str(small_ds), "--checkpoint", small_ckpt,
            "--video", "video-0"]
    assert _run(capsys, base)[0] == 1  # neither text nor visual query
    assert _run(capsys, base + ["--c1", "x"])[0] == 1  # missing c2
    assert _run(capsys, base + ["--c1", "a", "--c2", "b", "--shots", "1"])[0] == 1


def test_infer_data_errors(small_ds, small_ckpt, capsys):
    code, _, err = _run(capsys, [
        "infer", "--data-dir", str(small_ds), "--checkpoint", "ghost",
        "--video", "video-0", "--c1", "tag00", "--c2", "tag01"])
    assert code == 2 and "ghost" in err


def test_eval_parity_with_service(small_ds, capsys):
    code, out, _ = _run(capsys, ["eval", "--data-dir", str(small_ds),
                                 "--video", "video-0", "--shots", "0,1,2,3"])
    assert code == 0
    client = TestClient(create_app(str(small_ds)))
    r = client.post("/api/evaluate", json=dict(video="video-0", summary=[0, 1, 2, 3]))
    assert out.strip().encode() == r.content


def test_eval_with_model_selection(small_ds, small_ckpt, capsys):
    q = load_queries(small_ds)["train"][0]
    code, out, _ = _run(capsys, [
        "eval", "--data-dir", str(small_ds), "--video", q["video"],
        "--checkpoint", small_ckpt, "--c1", q["c1"], "--c2", q["c2"],
        "--budget", "4"])
    assert code == 0
    res = json.loads(out)
    assert set(res) == {"precision", "recall", "f1"}


def test_gradcheck_cli(capsys):
    code, out, err = _run(capsys, ["gradcheck"])
    assert code == 0
    report = json.loads(out)
    assert report["passed"] is True and report["worst"] < 1e-4
    assert "full_model" in report["checks"]
