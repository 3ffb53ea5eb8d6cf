"""CLI behavior: flags, exit codes, and output parity with the service."""

from __future__ import annotations

import json
import socket
import subprocess
import sys
import time
import urllib.request

import pytest

from conftest import (
    NOT_RELEVANT_VERDICT,
    NYC_ARTICLE_BODY,
    NYC_ARTICLE_TITLE,
    make_sidecar_document,
)
from mediacontext.cli import main, split_media_flag
from mediacontext.llm import serialize_assessment
from mediacontext.provenance.container import minimal_jpeg


@pytest.fixture()
def mock_script(tmp_path):
    script = {"default": serialize_assessment(NOT_RELEVANT_VERDICT, style="python")}
    path = tmp_path / "script.json"
    path.write_text(json.dumps(script), encoding="utf-8")
    return str(path)


@pytest.fixture()
def sidecar_media(tmp_path):
    media = tmp_path / "bodybags.jpg"
    media.write_bytes(minimal_jpeg())
    (tmp_path / "bodybags.c2pa.json").write_text(
        json.dumps(make_sidecar_document()), encoding="utf-8"
    )
    return str(media)


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_split_media_flag():
    assert split_media_flag("a.jpg") == ("a.jpg", None)
    assert split_media_flag("a.jpg:my caption") == ("a.jpg", "my caption")
    assert split_media_flag("a.jpg:cap:tion") == ("a.jpg:cap", "tion")
    assert split_media_flag(r"a\:b.jpg:caption") == ("a:b.jpg", "caption")
    assert split_media_flag(r"plain\:path.jpg") == ("plain:path.jpg", None)


def test_structured_analysis_json_verdict(mock_script, sidecar_media, capsys):
    code, out, _ = run_cli(
        [
            "analyze",
            "--title",
            NYC_ARTICLE_TITLE,
            "--body",
            NYC_ARTICLE_BODY,
            "--media",
            f"{sidecar_media}:Body bags in a corridor.",
            "--backend",
            "mock",
            "--mock-script",
            mock_script,
            "--json",
        ],
        capsys,
    )
    assert code == 0
    document = json.loads(out)
    assert document["boxes"]["overall"]["label"] == "NOT RELEVANT"
    assert document["article"]["media"][0]["caption"] == "Body bags in a corridor."


def test_human_report_mirrors_three_boxes(mock_script, capsys):
    code, out, _ = run_cli(
        ["analyze", "--title", "T", "--body", "B", "--mock-script", mock_script],
        capsys,
    )
    assert code == 0
    lines = out.split("\n")
    assert lines[0].startswith("Overall assessment: NOT RELEVANT")
    assert any(line.startswith("Location and Source:") for line in lines)
    assert any(line.startswith("Tampering:") for line in lines)
    overall_idx = next(i for i, l in enumerate(lines) if l.startswith("Overall"))
    location_idx = next(i for i, l in enumerate(lines) if l.startswith("Location"))
    tampering_idx = next(i for i, l in enumerate(lines) if l.startswith("Tampering"))
    assert overall_idx < location_idx < tampering_idx


def test_url_and_structured_are_exclusive(capsys):
    code, _, err = run_cli(["analyze", "--url", "http://x", "--title", "T"], capsys)
    assert code == 2
    assert "mutually exclusive" in err


def test_missing_inputs_is_usage_error(capsys):
    code, _, _ = run_cli(["analyze", "--title", "only title"], capsys)
    assert code == 2


def test_missing_media_degrades_to_warning(mock_script, tmp_path, capsys):
    code, out, _ = run_cli(
        [
            "analyze",
            "--title",
            "T",
            "--body",
            "B",
            "--media",
            str(tmp_path / "missing.jpg"),
            "--mock-script",
            mock_script,
        ],
        capsys,
    )
    assert code == 0
    assert "Warnings:" in out
    assert "missing.jpg" in out


def test_ingestion_failure_exit_3(mock_script, fixture_server, capsys):
    code, _, err = run_cli(
        ["analyze", "--url", f"{fixture_server}/absent.html", "--mock-script", mock_script],
        capsys,
    )
    assert code == 3
    assert "ingest" in err


def test_backend_failure_exit_4(capsys, monkeypatch):
    monkeypatch.delenv("MEDIACONTEXT_MOCK_SCRIPT", raising=False)
    code, _, err = run_cli(["analyze", "--title", "T", "--body", "B", "--backend", "mock"], capsys)
    assert code == 4


def test_inspect_dump_and_summary(ecuador_jpeg_file, capsys):
    code, out, _ = run_cli(["provenance-inspect", str(ecuador_jpeg_file)], capsys)
    assert code == 0
    document = json.loads(out)
    assert document["capture_time"] == "2016-04-17T14:03:00Z"
    assert document["origin_method"] == "captured"
    assert document["raw_fields"] == {}

    code, out, _ = run_cli(["provenance-inspect", str(ecuador_jpeg_file), "--summary"], capsys)
    assert code == 0
    assert "- origin location: -2.170998, -79.922359" in out


def test_inspect_plain_jpeg_absence_is_exit_0(tmp_path, capsys):
    path = tmp_path / "plain.jpg"
    path.write_bytes(minimal_jpeg())
    code, out, _ = run_cli(["provenance-inspect", str(path)], capsys)
    assert code == 0
    assert "no provenance metadata" in out


def test_inspect_unreadable_file_exit_3(tmp_path, capsys):
    code, _, err = run_cli(["provenance-inspect", str(tmp_path / "gone.jpg")], capsys)
    assert code == 3
    text_file = tmp_path / "notes.txt"
    text_file.write_text("hello")
    code, _, err = run_cli(["provenance-inspect", str(text_file)], capsys)
    assert code == 3


def test_cli_json_matches_api_serialization(mock_script, sidecar_media, capsys, tmp_path):
    """Oracle: POST /api/analyze on the same input, same serializer."""
    from fastapi.testclient import TestClient

    from mediacontext.llm import ModelConfig
    from mediacontext.serialization import canonical_json
    from mediacontext.service import ServiceConfig, create_app

    code, out, _ = run_cli(
        [
            "analyze",
            "--title",
            NYC_ARTICLE_TITLE,
            "--body",
            NYC_ARTICLE_BODY,
            "--media",
            f"{sidecar_media}:Body bags in a corridor.",
            "--mock-script",
            mock_script,
            "--json",
        ],
        capsys,
    )
    assert code == 0

    config = ServiceConfig(model=ModelConfig(backend="mock", mock_script_path=mock_script))
    with TestClient(create_app(config)) as client:
        payload = {
            "article": {
                "title": NYC_ARTICLE_TITLE,
                "body": NYC_ARTICLE_BODY,
                "media": [
                    {"locator": sidecar_media, "kind": "image", "caption": "Body bags in a corridor."}
                ],
            }
        }
        api_result = client.post("/api/analyze", json=payload).json()["result"]

    cli_doc = json.loads(out)
    for doc in (cli_doc, api_result):
        doc["id"] = "X"
        doc["created_at"] = "T"
    assert canonical_json(cli_doc).encode() == canonical_json(api_result).encode()


# --- serve -----------------------------------------------------------------


def test_serve_prints_assigned_port_and_answers(tmp_path, mock_script):
    env = {
        "MEDIACONTEXT_BACKEND": "mock",
        "MEDIACONTEXT_MOCK_SCRIPT": mock_script,
        "PATH": "/usr/bin:/bin:/usr/local/bin",
    }
    process = subprocess.Popen(
        [sys.executable, "-m", "mediacontext", "serve", "--port", "0"],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
        env=env,
    )
    try:
        line = process.stdout.readline()
        assert "listening on http://" in line
        base = line.strip().rsplit(" ", 1)[-1]
        deadline = time.time() + 10
        health = None
        while time.time() < deadline:
            try:
                with urllib.request.urlopen(f"{base}/api/health", timeout=1) as response:
                    health = json.loads(response.read())
                break
            except OSError:
                time.sleep(0.1)
        assert health == {"status": "ok", "backend": "mock"}
    finally:
        process.terminate()
        process.wait(timeout=10)


def test_serve_occupied_port_exit_3(capsys):
    blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    blocker.bind(("127.0.0.1", 0))
    blocker.listen(1)
    port = blocker.getsockname()[1]
    try:
        code, _, err = run_cli(["serve", "--port", str(port)], capsys)
        assert code == 3
        assert "cannot bind" in err
    finally:
        blocker.close()
