"""HTTP API contract, serialization stability, and journal replay."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from conftest import (
    NOT_RELEVANT_VERDICT,
    NYC_ARTICLE_BODY,
    NYC_ARTICLE_TITLE,
    make_sidecar_document,
)
from mediacontext.engine import Engine, result_to_dict
from mediacontext.llm import MockBackend, ModelConfig, serialize_assessment
from mediacontext.serialization import canonical_json
from mediacontext.service import ServiceConfig, create_app


def _mock_script_file(tmp_path):
    script = {"default": serialize_assessment(NOT_RELEVANT_VERDICT, style="python")}
    path = tmp_path / "script.json"
    path.write_text(json.dumps(script), encoding="utf-8")
    return str(path)


def _config(tmp_path, **overrides) -> ServiceConfig:
    model = ModelConfig(backend="mock", mock_script_path=_mock_script_file(tmp_path))
    return ServiceConfig(model=model, **overrides)


@pytest.fixture()
def client(tmp_path):
    app = create_app(_config(tmp_path))
    with TestClient(app) as test_client:
        yield test_client


def _structured_payload(sidecar=None):
    media = [{"locator": "bodybags.jpg", "kind": "image", "caption": "Body bags in a corridor."}]
    if sidecar is not None:
        media[0]["sidecar"] = sidecar
    return {"article": {"title": NYC_ARTICLE_TITLE, "body": NYC_ARTICLE_BODY, "media": media}}


def test_analyze_structured_with_inline_sidecar(client):
    response = client.post("/api/analyze", json=_structured_payload(make_sidecar_document()))
    assert response.status_code == 200
    body = response.json()
    assert body["id"] == body["result"]["id"]
    assert body["result"]["boxes"]["overall"]["label"] == "NOT RELEVANT"
    assert body["result"]["boxes"]["location_source"]["flag"] is False
    assert body["result"]["summaries"][0]["status"] == "ok"


def test_analyze_matches_direct_engine_call(client, tmp_path):
    """Oracle: the service answer equals a direct engine run on the same input."""
    payload = _structured_payload(make_sidecar_document())
    response = client.post("/api/analyze", json=payload)
    assert response.status_code == 200
    via_api = response.json()["result"]

    backend = MockBackend(default=serialize_assessment(NOT_RELEVANT_VERDICT, style="python"))
    from mediacontext.article import article_from_dict

    direct = result_to_dict(Engine(backend).analyze(article_from_dict(payload["article"])))
    for doc in (via_api, direct):
        doc["id"] = "X"
        doc["created_at"] = "T"
    assert via_api == direct


def test_analyze_url_input(client, fixture_server):
    response = client.post("/api/analyze", json={"url": f"{fixture_server}/article1.html"})
    assert response.status_code == 200
    result = response.json()["result"]
    assert result["article"]["title"] == "Quake Recovery Continues Along Coast"
    assert result["boxes"]["overall"]["label"] == "NOT RELEVANT"


def test_analyze_requires_exactly_one_input(client, fixture_server):
    assert client.post("/api/analyze", json={}).status_code == 400
    both = {"url": f"{fixture_server}/article1.html", "article": {"title": "t", "body": "b", "media": []}}
    assert client.post("/api/analyze", json=both).status_code == 400


def test_analyze_ingestion_failure_is_422(client, fixture_server):
    response = client.post("/api/analyze", json={"url": f"{fixture_server}/absent.html"})
    assert response.status_code == 422
    assert response.json()["error"]["stage"] == "ingest"


def test_analyze_backend_failure_is_502(tmp_path):
    config = ServiceConfig(model=ModelConfig(backend="mock"))  # unscripted mock
    with TestClient(create_app(config)) as client:
        response = client.post("/api/analyze", json={"article": {"title": "t", "body": "b", "media": []}})
        assert response.status_code == 502
        assert response.json()["error"]["stage"] == "model"


def test_analyze_malformed_json_is_400(client):
    response = client.post("/api/analyze", content=b"{not json", headers={"Content-Type": "application/json"})
    assert response.status_code == 400


def test_body_cap_enforced(tmp_path):
    config = _config(tmp_path, max_body_bytes=500)
    with TestClient(create_app(config)) as client:
        big = {"article": {"title": "t", "body": "x" * 1000, "media": []}}
        assert client.post("/api/analyze", json=big).status_code == 413


def test_get_analysis_roundtrip(client):
    created = client.post("/api/analyze", json=_structured_payload()).json()
    fetched = client.get(f"/api/analyses/{created['id']}")
    assert fetched.status_code == 200
    assert fetched.json()["result"] == created["result"]
    # byte-stable across repeated reads
    again = client.get(f"/api/analyses/{created['id']}")
    assert again.content == fetched.content


def test_get_analysis_404(client):
    assert client.get("/api/analyses/0000000000").status_code == 404
    assert client.get("/api/analyses/not-a-real-id!").status_code == 404


def test_response_serialization_reroundtrips_bytes(client):
    response = client.post("/api/analyze", json=_structured_payload())
    parsed = json.loads(response.content.decode("utf-8"))
    assert canonical_json(parsed).encode("utf-8") == response.content


RESULT_SCHEMA = {
    "type": "object",
    "required": [
        "id",
        "created_at",
        "article",
        "summaries",
        "assessment",
        "boxes",
        "warnings",
        "heuristic_tamper_class",
    ],
    "properties": {
        "id": {"type": "string", "pattern": "^[0-9a-f]{32}$"},
        "created_at": {"type": "string"},
        "article": {
            "type": "object",
            "required": ["title", "body", "media"],
            "properties": {
                "title": {"type": "string", "minLength": 1},
                "body": {"type": "string", "minLength": 1},
                "media": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["locator", "kind", "caption", "format"],
                        "properties": {"kind": {"enum": ["image", "video", "audio"]}},
                    },
                },
            },
        },
        "summaries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["media_ref", "text", "status"],
                "properties": {
                    "status": {"enum": ["ok", "no_metadata", "parse_error", "unsupported_kind"]}
                },
            },
        },
        "assessment": {
            "type": "object",
            "required": [
                "origin_relevant",
                "origin_reason",
                "edits_relevant",
                "edits_reason",
                "overall",
                "raw_model_output",
            ],
            "properties": {"overall": {"enum": ["RELEVANT", "NOT RELEVANT"]}},
        },
        "boxes": {
            "type": "object",
            "required": ["overall", "location_source", "tampering"],
            "properties": {
                "overall": {"type": "object", "required": ["label", "headline"]},
                "location_source": {"type": "object", "required": ["flag", "reason"]},
                "tampering": {"type": "object", "required": ["flag", "reason"]},
            },
        },
        "warnings": {"type": "array", "items": {"type": "string"}},
        "heuristic_tamper_class": {"enum": ["benign", "edited", "generated", "unknown"]},
    },
}


def test_2xx_results_are_schema_valid(client, fixture_server):
    import jsonschema

    responses = [
        client.post("/api/analyze", json=_structured_payload(make_sidecar_document())),
        client.post("/api/analyze", json=_structured_payload()),
        client.post("/api/analyze", json={"url": f"{fixture_server}/article1.html"}),
    ]
    for response in responses:
        assert response.status_code == 200
        jsonschema.validate(response.json()["result"], RESULT_SCHEMA)
        analysis_id = response.json()["id"]
        fetched = client.get(f"/api/analyses/{analysis_id}")
        jsonschema.validate(fetched.json()["result"], RESULT_SCHEMA)


def test_chat_flow(client):
    analysis_id = client.post("/api/analyze", json=_structured_payload()).json()["id"]
    first = client.post(f"/api/analyses/{analysis_id}/chat", json={"question": "Why not relevant?"})
    assert first.status_code == 200
    body = first.json()
    assert len(body["messages"]) == 2
    assert body["messages"][0] == {**body["messages"][0], "role": "user", "text": "Why not relevant?"}

    second = client.post(f"/api/analyses/{analysis_id}/chat", json={"question": "What about edits?"})
    assert second.status_code == 200
    messages = second.json()["messages"]
    assert len(messages) == 4
    assert messages[:2] == body["messages"]
    assert second.json()["session_id"] == body["session_id"]


def test_chat_validation_and_404(client):
    analysis_id = client.post("/api/analyze", json=_structured_payload()).json()["id"]
    assert client.post(f"/api/analyses/{analysis_id}/chat", json={"question": ""}).status_code == 400
    assert client.post("/api/analyses/unknown/chat", json={"question": "q"}).status_code == 404


def test_chat_backend_failure_appends_notice(tmp_path):
    script = {"default": serialize_assessment(NOT_RELEVANT_VERDICT, style="python")}
    path = tmp_path / "script.json"
    path.write_text(json.dumps(script), encoding="utf-8")
    config = ServiceConfig(model=ModelConfig(backend="mock", mock_script_path=str(path)))
    app = create_app(config)
    with TestClient(app) as client:
        analysis_id = client.post("/api/analyze", json=_structured_payload()).json()["id"]
        # swap the backend for an unscripted one: follow-ups now fail
        app.state.service.engine.backend = MockBackend()
        response = client.post(f"/api/analyses/{analysis_id}/chat", json={"question": "q"})
        assert response.status_code == 502
        messages = response.json()["messages"]
        assert [m["role"] for m in messages] == ["user", "assistant"]
        assert "failed" in messages[1]["text"]


def test_health(client):
    response = client.get("/api/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok", "backend": "mock"}
    assert client.get("/api/health").content == response.content


def test_journal_restart_preserves_state(tmp_path, fixture_server):
    journal = tmp_path / "journal.ndjson"
    config = _config(tmp_path, journal_path=str(journal))
    with TestClient(create_app(config)) as client:
        created = client.post("/api/analyze", json=_structured_payload(make_sidecar_document())).json()
        analysis_id = created["id"]
        client.post(f"/api/analyses/{analysis_id}/chat", json={"question": "Q1"})
        client.post(f"/api/analyses/{analysis_id}/chat", json={"question": "Q2"})
        original_result = client.get(f"/api/analyses/{analysis_id}").content
        original_chat = client.post(
            f"/api/analyses/{analysis_id}/chat", json={"question": "Q3"}
        ).json()["messages"]

    restarted = create_app(_config(tmp_path, journal_path=str(journal)))
    with TestClient(restarted) as client:
        replayed = client.get(f"/api/analyses/{analysis_id}")
        assert replayed.status_code == 200
        assert replayed.content == original_result
        after = client.post(f"/api/analyses/{analysis_id}/chat", json={"question": "Q4"}).json()
        assert [m["text"] for m in after["messages"][: len(original_chat)]] == [
            m["text"] for m in original_chat
        ]
        assert len(after["messages"]) == len(original_chat) + 2
