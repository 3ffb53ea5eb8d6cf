"""Shared fixtures: authored provenance records, fixture media files, a
local HTTP server for the fixtures directory, and scripted mock backends.

The Ecuador record's field values are the authoring inputs for the fixture
JPEG; tests treat those inputs as the oracle for everything parsed back out.
"""

from __future__ import annotations

import http.server
import json
import random
import threading
from datetime import datetime, timezone
from pathlib import Path

import pytest

from mediacontext.article import Article, MediaItem, MediaKind
from mediacontext.llm import Assessment, MockBackend, OverallLabel, serialize_assessment
from mediacontext.provenance.container import embed_manifest_jpeg, minimal_jpeg
from mediacontext.provenance.manifest import build_manifest_store
from mediacontext.provenance.model import (
    EditAction,
    GeoPoint,
    OriginMethod,
    ProvenanceRecord,
)

FIXTURES = Path(__file__).parent / "fixtures"

# Authoring inputs for the Ecuador fixture: a photo captured in Guayaquil
# on 2016-04-17, attached out of context to a 2020 New York story.
ECUADOR_CAPTURE_TIME = datetime(2016, 4, 17, 14, 3, 0, tzinfo=timezone.utc)
ECUADOR_LATITUDE = -2.170998
ECUADOR_LONGITUDE = -79.922359


def make_ecuador_record() -> ProvenanceRecord:
    return ProvenanceRecord(
        capture_time=ECUADOR_CAPTURE_TIME,
        capture_location=GeoPoint(ECUADOR_LATITUDE, ECUADOR_LONGITUDE),
        place_name="Guayaquil, Ecuador",
        creator="Field Reporter",
        claim_generator="ExampleCam 1.0",
        origin_method=OriginMethod.CAPTURED,
        actions=[EditAction("c2pa.created", when=ECUADOR_CAPTURE_TIME, software_agent="ExampleCam 1.0")],
        signature_present=True,
    )


NYC_ARTICLE_TITLE = "Hospital in New York overwhelmed amid outbreak"
NYC_ARTICLE_BODY = (
    "Workers at a New York City hospital described corridors lined with "
    "body bags in early April 2020 as the outbreak strained the morgue "
    "system.\n\nCity officials said refrigerated trailers were being "
    "deployed to hospitals across the boroughs."
)

NOT_RELEVANT_VERDICT = Assessment(
    origin_relevant=False,
    origin_reason="The photo was captured in Ecuador in April 2016, four years before the reported New York events.",
    edits_relevant=True,
    edits_reason="The only recorded action is the original capture; no tampering is indicated.",
    overall=OverallLabel.NOT_RELEVANT,
)


@pytest.fixture(scope="session")
def ecuador_record() -> ProvenanceRecord:
    return make_ecuador_record()


@pytest.fixture(scope="session")
def ecuador_store(ecuador_record) -> bytes:
    return build_manifest_store(ecuador_record)


@pytest.fixture(scope="session")
def ecuador_jpeg(ecuador_store) -> bytes:
    return embed_manifest_jpeg(minimal_jpeg(), ecuador_store)


@pytest.fixture()
def ecuador_jpeg_file(tmp_path, ecuador_jpeg) -> Path:
    path = tmp_path / "ecuador.jpg"
    path.write_bytes(ecuador_jpeg)
    return path


def make_sidecar_document() -> dict:
    """Sidecar equivalent of the Ecuador record."""
    return {
        "claim_generator": "ExampleCam 1.0",
        "signature_present": True,
        "creator": "Field Reporter",
        "capture": {
            "when": "2016-04-17T14:03:00Z",
            "latitude": ECUADOR_LATITUDE,
            "longitude": ECUADOR_LONGITUDE,
            "place_name": "Guayaquil, Ecuador",
        },
        "origin_method": "captured",
        "actions": [
            {
                "action": "c2pa.created",
                "when": "2016-04-17T14:03:00Z",
                "software_agent": "ExampleCam 1.0",
            }
        ],
    }


def make_nyc_article(media: list[MediaItem]) -> Article:
    return Article(title=NYC_ARTICLE_TITLE, body=NYC_ARTICLE_BODY, media=media)


@pytest.fixture()
def nyc_article_with_sidecar(tmp_path) -> Article:
    """NYC story with a plain local JPEG whose provenance comes from a sidecar."""
    media_path = tmp_path / "bodybags.jpg"
    media_path.write_bytes(minimal_jpeg())
    sidecar_path = tmp_path / "bodybags.c2pa.json"
    sidecar_path.write_text(json.dumps(make_sidecar_document()), encoding="utf-8")
    item = MediaItem(
        locator=str(media_path),
        kind=MediaKind.IMAGE,
        caption="Body bags line a hospital corridor.",
    )
    return make_nyc_article([item])


@pytest.fixture()
def not_relevant_backend() -> MockBackend:
    return MockBackend(default=serialize_assessment(NOT_RELEVANT_VERDICT, style="python"))


# --- randomized provenance records (seeded, for round-trip suites) ---------


_ACTION_IDS = [
    "c2pa.created",
    "c2pa.opened",
    "c2pa.resized",
    "c2pa.cropped",
    "c2pa.edited",
    "c2pa.color_adjustments",
    "c2pa.placed",
    "c2pa.published",
]


def random_record(rng: random.Random) -> ProvenanceRecord:
    def maybe(value):
        return value if rng.random() < 0.7 else None

    def rand_text(prefix: str) -> str:
        return f"{prefix}-{rng.randrange(1_000_000)}"

    actions = []
    for index in range(rng.randrange(0, 11)):
        parameters = None
        if rng.random() < 0.3:
            parameters = {"note": rand_text("p"), "level": rng.randrange(10)}
        actions.append(
            EditAction(
                action_id=rng.choice(_ACTION_IDS),
                when=maybe(
                    datetime(
                        rng.randrange(2000, 2026),
                        rng.randrange(1, 13),
                        rng.randrange(1, 28),
                        rng.randrange(24),
                        rng.randrange(60),
                        rng.randrange(60),
                        tzinfo=timezone.utc,
                    )
                ),
                software_agent=maybe(rand_text("agent")),
                parameters=parameters,
            )
        )
    location = None
    if rng.random() < 0.6:
        location = GeoPoint(
            round(rng.uniform(-90, 90), 6),
            round(rng.uniform(-180, 180), 6),
        )
    return ProvenanceRecord(
        capture_time=maybe(
            datetime(
                rng.randrange(2000, 2026),
                rng.randrange(1, 13),
                rng.randrange(1, 28),
                rng.randrange(24),
                rng.randrange(60),
                rng.randrange(60),
                tzinfo=timezone.utc,
            )
        ),
        capture_location=location,
        place_name=maybe(rand_text("place")),
        creator=maybe(rand_text("creator")),
        claim_generator=maybe(rand_text("tool")),
        origin_method=rng.choice(list(OriginMethod)),
        actions=actions,
        signature_present=rng.random() < 0.5,
    )


# --- local fixture HTTP server ----------------------------------------------


class _QuietHandler(http.server.SimpleHTTPRequestHandler):
    def log_message(self, *args):  # keep pytest output clean
        pass


@pytest.fixture(scope="session")
def fixture_server():
    handler = lambda *args, **kwargs: _QuietHandler(*args, directory=str(FIXTURES), **kwargs)
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
