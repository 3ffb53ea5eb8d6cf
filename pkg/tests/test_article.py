from __future__ import annotations

import json

import pytest

from conftest import FIXTURES
from mediacontext.article import (
    Article,
    FetchLimits,
    MediaItem,
    MediaKind,
    extract_article,
    fetch_article,
    kind_from_content_type,
    kind_from_locator,
    resolve_media,
)
from mediacontext.errors import (
    ExtractionError,
    FetchContentTypeError,
    FetchSizeError,
    FetchStatusError,
    ValidationError,
)
from mediacontext.provenance.container import minimal_jpeg

BASE = "http://news.example/stories/quake-recovery"


@pytest.fixture(scope="module")
def article1():
    return extract_article(FIXTURES.joinpath("article1.html").read_bytes(), BASE)


def test_article1_matches_hand_annotation(article1):
    expected = json.loads(FIXTURES.joinpath("article1.expected.json").read_text("utf-8"))
    assert article1.title == expected["title"]
    assert article1.body == "\n\n".join(expected["body_paragraphs"])
    assert [
        {"locator": m.locator, "kind": m.kind.value, "caption": m.caption} for m in article1.media
    ] == expected["media"]


def test_og_title_beats_title_element(article1):
    # article1.html carries both; og:title wins
    assert article1.title == "Quake Recovery Continues Along Coast"


def test_title_precedence_rules():
    html = '<html><head><meta property="og:title" content="A"><title>B</title></head><body><p>text here</p></body></html>'
    assert extract_article(html, BASE).title == "A"
    html = "<html><head><title>B</title></head><body><h1>C</h1><p>text here</p></body></html>"
    assert extract_article(html, BASE).title == "B"
    html = "<html><body><h1>C</h1><p>text here</p></body></html>"
    assert extract_article(html, BASE).title == "C"


def test_image_outside_container_excluded():
    article = extract_article(FIXTURES.joinpath("article2.html").read_bytes(), BASE)
    assert article.title == "Budget Talks Stall Again"
    assert article.media == []
    assert "Negotiators left the capitol" in article.body


def test_og_image_is_added():
    html = (
        '<html><head><title>T</title><meta property="og:image" content="/lead.jpg"></head>'
        "<body><article><p>some paragraph text long enough</p></article></body></html>"
    )
    article = extract_article(html, BASE)
    assert [m.locator for m in article.media] == ["http://news.example/lead.jpg"]
    assert article.media[0].kind is MediaKind.IMAGE
    assert article.media[0].caption is None


def test_media_dedup_by_resolved_url():
    html = (
        "<html><head><title>T</title><meta property='og:image' content='/a.jpg'></head><body><article>"
        "<p>one paragraph of body text</p>"
        "<img src='/a.jpg' alt='first'><img src='http://news.example/a.jpg' alt='dup'>"
        "</article></body></html>"
    )
    article = extract_article(html, BASE)
    assert [m.locator for m in article.media] == ["http://news.example/a.jpg"]
    assert article.media[0].caption == "first"


def test_caption_precedence_figcaption_then_alt():
    html = (
        "<html><head><title>T</title></head><body><article><p>body paragraph text</p>"
        "<figure><img src='/a.jpg' alt='alt text'><figcaption>Figure caption.</figcaption></figure>"
        "<img src='/b.jpg' alt='bare alt'>"
        "<img src='/c.jpg'>"
        "</article></body></html>"
    )
    captions = [m.caption for m in extract_article(html, BASE).media]
    assert captions == ["Figure caption.", "bare alt", None]


def test_video_and_audio_collected():
    html = (
        "<html><head><title>T</title></head><body><article><p>enough body text here</p>"
        "<video src='/clip.mp4'></video>"
        "<audio><source src='/talk.mp3'></audio>"
        "</article></body></html>"
    )
    media = extract_article(html, BASE).media
    assert [(m.kind.value, m.locator) for m in media] == [
        ("video", "http://news.example/clip.mp4"),
        ("audio", "http://news.example/talk.mp3"),
    ]


def test_missing_title_and_missing_body_are_distinct_errors():
    with pytest.raises(ExtractionError) as excinfo:
        extract_article("<html><body><p>body but no title at all</p></body></html>", BASE)
    assert excinfo.value.missing_field == "title"
    with pytest.raises(ExtractionError) as excinfo:
        extract_article("<html><head><title>T</title></head><body><div>no paragraphs</div></body></html>", BASE)
    assert excinfo.value.missing_field == "body"


def test_extraction_deterministic(article1):
    again = extract_article(FIXTURES.joinpath("article1.html").read_bytes(), BASE)
    assert again == article1


def test_no_markup_or_script_in_body(article1):
    assert "<" not in article1.body
    assert "analytics" not in article1.body
    assert ".nav" not in article1.body


def test_malformed_html_never_raises():
    soup = "<html><body><p>unclosed <div><p>another<figure><img src='x.jpg'>"
    article = extract_article("<title>T</title>" + soup, BASE)
    assert article.title == "T"
    assert "unclosed" in article.body


def test_charset_honored_and_fallback():
    text = "Straße und Café"
    latin = (
        "<html><head><meta charset='iso-8859-1'><title>T</title></head>"
        f"<body><article><p>{text} with some more body text</p></article></body></html>"
    ).encode("iso-8859-1")
    assert text in extract_article(latin, BASE).body
    # undecodable bytes are replaced, never fatal
    broken = b"<html><head><title>T</title></head><body><p>ok \xff\xfe text body here</p></body></html>"
    assert "ok" in extract_article(broken, BASE).body


def test_kind_mappings():
    assert kind_from_content_type("image/png") is MediaKind.IMAGE
    assert kind_from_content_type("video/mp4; codecs=avc1") is MediaKind.VIDEO
    assert kind_from_content_type("audio/mpeg") is MediaKind.AUDIO
    assert kind_from_content_type("text/html") is None
    assert kind_from_locator("http://x/y/photo.JPEG") is MediaKind.IMAGE
    assert kind_from_locator("clip.webm") is MediaKind.VIDEO
    assert kind_from_locator("/a/b/talk.m4a") is MediaKind.AUDIO
    assert kind_from_locator("page.html") is None


# --- fetching against the local fixture server --------------------------------


def test_fetch_article_identity(fixture_server):
    doc = fetch_article(f"{fixture_server}/article1.html")
    assert doc.content == FIXTURES.joinpath("article1.html").read_bytes()
    assert "article1.html" in doc.final_url


def test_fetch_rejects_non_http_scheme():
    with pytest.raises(ValidationError):
        fetch_article("ftp://example.com/x")


def test_fetch_follows_redirects_to_final_url():
    import http.server
    import threading

    class Redirector(http.server.BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def do_GET(self):
            if self.path in ("/hop1", "/hop2"):
                target = "/hop2" if self.path == "/hop1" else "/final"
                self.send_response(302)
                self.send_header("Location", target)
                self.end_headers()
            else:
                body = b"<html><head><title>T</title></head><body><p>landed</p></body></html>"
                self.send_response(200)
                self.send_header("Content-Type", "text/html")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), Redirector)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        doc = fetch_article(f"{base}/hop1")
        assert doc.final_url == f"{base}/final"
        from mediacontext.errors import FetchNetworkError

        with pytest.raises(FetchNetworkError):
            fetch_article(f"{base}/hop1", FetchLimits(max_redirects=1))
    finally:
        server.shutdown()


def test_fetch_status_error(fixture_server):
    with pytest.raises(FetchStatusError) as excinfo:
        fetch_article(f"{fixture_server}/no-such-page.html")
    assert excinfo.value.status == 404


def test_fetch_content_type_error(fixture_server, tmp_path):
    # the fixture server serves .json as application/json
    with pytest.raises(FetchContentTypeError):
        fetch_article(f"{fixture_server}/article1.expected.json")


def test_fetch_size_cap(fixture_server):
    size = len(FIXTURES.joinpath("article1.html").read_bytes())
    with pytest.raises(FetchSizeError):
        fetch_article(f"{fixture_server}/article1.html", FetchLimits(max_bytes=size - 1))
    # exactly at the cap is fine
    fetch_article(f"{fixture_server}/article1.html", FetchLimits(max_bytes=size))


def test_resolve_media_local_jpeg(tmp_path):
    path = tmp_path / "img.png"  # wrong extension on purpose
    path.write_bytes(minimal_jpeg())
    item = MediaItem(locator=str(path), kind=MediaKind.VIDEO)
    resolved, error = resolve_media(item)
    assert error is None
    assert resolved.content.startswith(b"\xff\xd8")
    assert resolved.kind is MediaKind.IMAGE  # magic overrides declared kind
    assert resolved.media_format == "jpeg"


def test_resolve_media_dead_url_degrades():
    item = MediaItem(locator="http://127.0.0.1:1/missing.jpg", kind=MediaKind.IMAGE)
    resolved, error = resolve_media(item)
    assert resolved.content is None
    assert error is not None and "missing.jpg" in error


def test_resolve_media_missing_file_degrades(tmp_path):
    item = MediaItem(locator=str(tmp_path / "nope.jpg"), kind=MediaKind.IMAGE)
    resolved, error = resolve_media(item)
    assert resolved.content is None
    assert error is not None
