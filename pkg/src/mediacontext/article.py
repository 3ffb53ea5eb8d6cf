"""Article ingestion: fetching by URL and structured extraction from HTML.

Extraction follows fixed, deterministic rules; identical bytes and base
URL always produce the identical Article.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Optional
from urllib.parse import urljoin, urlparse

import requests

from .errors import (
    ExtractionError,
    FetchContentTypeError,
    FetchError,
    FetchNetworkError,
    FetchSizeError,
    FetchStatusError,
    ValidationError,
)
from .htmldom import Element, parse_html
from .provenance.container import detect_media_format
from .serialization import format_utc, parse_utc, utc_now

USER_AGENT = "mediacontext/0.1"

# Elements competing to be the article body container.
_CANDIDATE_TAGS = frozenset({"body", "article", "main", "section", "div", "td", "blockquote"})

_EXTENSION_KINDS = {
    "jpg": "image",
    "jpeg": "image",
    "png": "image",
    "webp": "image",
    "mp4": "video",
    "webm": "video",
    "mov": "video",
    "mp3": "audio",
    "wav": "audio",
    "m4a": "audio",
}

_CHARSET_RE = re.compile(
    rb"""<meta[^>]+charset\s*=\s*["']?\s*([A-Za-z0-9_.:-]+)""", re.IGNORECASE
)


class MediaKind(str, Enum):
    IMAGE = "image"
    VIDEO = "video"
    AUDIO = "audio"


@dataclass
class FetchLimits:
    max_bytes: int = 8 * 1024 * 1024
    max_redirects: int = 5
    timeout: float = 30.0


# Media bytes get a higher default cap than HTML pages.
MEDIA_FETCH_LIMITS = FetchLimits(max_bytes=32 * 1024 * 1024)


@dataclass
class MediaItem:
    locator: str
    kind: MediaKind
    caption: Optional[str] = None
    content: Optional[bytes] = None
    media_format: Optional[str] = None  # binary format confirmed from magic bytes
    sidecar: Optional[dict[str, Any]] = None  # inline sidecar document (input only)

    def __post_init__(self) -> None:
        if self.caption is not None:
            self.caption = self.caption.strip() or None


@dataclass
class Article:
    title: str
    body: str
    media: list[MediaItem] = field(default_factory=list)
    source_url: Optional[str] = None
    fetched_at: Optional[datetime] = None


@dataclass
class RawDocument:
    content: bytes
    content_type: str
    final_url: str
    fetched_at: datetime


def kind_from_content_type(content_type: str) -> Optional[MediaKind]:
    main = content_type.split(";")[0].strip().lower()
    for prefix, kind in (("image/", MediaKind.IMAGE), ("video/", MediaKind.VIDEO), ("audio/", MediaKind.AUDIO)):
        if main.startswith(prefix):
            return kind
    return None


def kind_from_locator(locator: str) -> Optional[MediaKind]:
    path = urlparse(locator).path if "://" in locator else locator
    suffix = Path(path).suffix.lstrip(".").lower()
    kind = _EXTENSION_KINDS.get(suffix)
    return MediaKind(kind) if kind else None


# --- fetching -------------------------------------------------------------


def _fetch_bytes(url: str, limits: FetchLimits) -> requests.Response:
    session = requests.Session()
    session.max_redirects = limits.max_redirects
    try:
        response = session.get(
            url,
            timeout=limits.timeout,
            stream=True,
            allow_redirects=True,
            headers={"User-Agent": USER_AGENT},
        )
    except requests.TooManyRedirects as exc:
        raise FetchNetworkError(f"too many redirects fetching {url}") from exc
    except requests.RequestException as exc:
        raise FetchNetworkError(f"network failure fetching {url}: {exc}") from exc
    return response


def _read_capped(response: requests.Response, limits: FetchLimits, url: str) -> bytes:
    chunks = bytearray()
    for chunk in response.iter_content(chunk_size=65536):
        chunks += chunk
        if len(chunks) > limits.max_bytes:
            response.close()
            raise FetchSizeError(f"response for {url} exceeds {limits.max_bytes} bytes")
    return bytes(chunks)


def fetch_article(url: str, limits: Optional[FetchLimits] = None) -> RawDocument:
    """Fetch an HTML document, following redirects and capping the body size."""
    limits = limits or FetchLimits()
    scheme = urlparse(url).scheme.lower()
    if scheme not in ("http", "https"):
        raise ValidationError(f"article URL must be http(s), got {url!r}")
    response = _fetch_bytes(url, limits)
    if not 200 <= response.status_code < 300:
        raise FetchStatusError(response.status_code, url)
    content_type = response.headers.get("Content-Type", "")
    main_type = content_type.split(";")[0].strip().lower()
    if main_type and main_type not in ("text/html", "application/xhtml+xml"):
        raise FetchContentTypeError(f"{url} returned non-HTML content type {main_type!r}")
    content = _read_capped(response, limits, url)
    return RawDocument(
        content=content,
        content_type=content_type,
        final_url=response.url,
        fetched_at=utc_now(),
    )


def resolve_media(item: MediaItem, limits: Optional[FetchLimits] = None) -> tuple[MediaItem, Optional[str]]:
    """Populate ``content`` from the locator and confirm the kind from magic.

    Never raises for per-item problems: the second element carries the
    error message and the item comes back unchanged, so the pipeline can
    degrade instead of aborting.
    """
    limits = limits or MEDIA_FETCH_LIMITS
    content = item.content
    if content is None:
        scheme = urlparse(item.locator).scheme.lower()
        try:
            if scheme in ("http", "https"):
                response = _fetch_bytes(item.locator, limits)
                if not 200 <= response.status_code < 300:
                    raise FetchStatusError(response.status_code, item.locator)
                content = _read_capped(response, limits, item.locator)
            else:
                path = Path(item.locator[7:] if scheme == "file" else item.locator)
                if path.stat().st_size > limits.max_bytes:
                    raise FetchSizeError(f"{path} exceeds {limits.max_bytes} bytes")
                content = path.read_bytes()
        except (FetchError, OSError) as exc:
            return item, f"media fetch failed for {item.locator}: {exc}"
    media_format = detect_media_format(content)
    kind = item.kind
    if media_format in ("jpeg", "png"):
        kind = MediaKind.IMAGE  # magic bytes override extension/declared kind
    return replace(item, content=content, kind=kind, media_format=media_format), None


# --- extraction ------------------------------------------------------------


def _decode_html(content: bytes, declared_content_type: str = "") -> str:
    charset = None
    match = re.search(r"charset\s*=\s*([A-Za-z0-9_.:-]+)", declared_content_type, re.IGNORECASE)
    if match:
        charset = match.group(1)
    else:
        sniff = _CHARSET_RE.search(content[:4096])
        if sniff:
            charset = sniff.group(1).decode("ascii", "replace")
    for encoding in filter(None, (charset, "utf-8")):
        try:
            return content.decode(encoding, errors="replace")
        except LookupError:
            continue
    return content.decode("utf-8", errors="replace")


def _meta_content(document: Element, *names: str) -> Optional[str]:
    wanted = set(names)
    for meta in document.find_all("meta"):
        key = meta.attrs.get("property") or meta.attrs.get("name") or ""
        if key.lower() in wanted:
            value = (meta.attrs.get("content") or "").strip()
            if value:
                return value
    return None


def _pick_title(document: Element) -> Optional[str]:
    og_title = _meta_content(document, "og:title")
    if og_title:
        return og_title
    title_el = document.find_first("title")
    if title_el is not None and title_el.text():
        return title_el.text()
    h1 = document.find_first("h1")
    if h1 is not None and h1.text():
        return h1.text()
    return None


def _paragraphs_of(element: Element) -> list[str]:
    return [text for p in element.find_all("p") if (text := p.text())]


def _score(element: Element) -> float:
    paragraph_chars = sum(len(t) for t in _paragraphs_of(element))
    if paragraph_chars == 0:
        return 0.0
    total_chars = len(element.text())
    linked_chars = sum(len(a.text()) for a in element.find_all("a"))
    if total_chars == 0:
        return 0.0
    return paragraph_chars * (1.0 - min(linked_chars, total_chars) / total_chars)


def _pick_body_container(document: Element) -> Optional[Element]:
    best: Optional[Element] = None
    best_score = 0.0
    for element in document.iter_elements():
        if element.tag not in _CANDIDATE_TAGS:
            continue
        score = _score(element)
        if score > best_score:  # ties keep the earlier element
            best, best_score = element, score
    return best


def _caption_for(node: Element) -> Optional[str]:
    for ancestor in node.ancestors():
        if ancestor.tag == "figure":
            figcaption = ancestor.find_first("figcaption")
            if figcaption is not None and figcaption.text():
                return figcaption.text()
            break
    alt = (node.attrs.get("alt") or "").strip()
    return alt or None


def _media_source(node: Element) -> Optional[str]:
    src = (node.attrs.get("src") or "").strip()
    if src:
        return src
    if node.tag in ("video", "audio"):
        source = node.find_first("source")
        if source is not None:
            child_src = (source.attrs.get("src") or "").strip()
            if child_src:
                return child_src
    return None


def _collect_media(document: Element, container: Element, base_url: str) -> list[MediaItem]:
    kinds = {"img": MediaKind.IMAGE, "video": MediaKind.VIDEO, "audio": MediaKind.AUDIO}
    items: list[MediaItem] = []
    seen: set[str] = set()
    for node in container.find_all("img", "video", "audio"):
        src = _media_source(node)
        if not src or src.startswith("data:"):
            continue
        locator = urljoin(base_url, src)
        if locator in seen:
            continue
        seen.add(locator)
        items.append(MediaItem(locator=locator, kind=kinds[node.tag], caption=_caption_for(node)))
    og_image = _meta_content(document, "og:image")
    if og_image:
        locator = urljoin(base_url, og_image)
        if locator not in seen:
            items.append(MediaItem(locator=locator, kind=MediaKind.IMAGE))
    return items


def extract_article(html: bytes | str | RawDocument, base_url: str) -> Article:
    """Extract title, body, and media from HTML.

    Title precedence: og:title meta, then <title>, then the first <h1>.
    The body comes from the block element whose paragraphs score highest
    on character count discounted by link-text ratio; paragraphs are
    joined with blank lines. Media are the images/videos/audio inside
    that container plus og:image, deduplicated by resolved URL.
    """
    fetched_at = None
    source_url: Optional[str] = base_url or None
    if isinstance(html, RawDocument):
        source_url = html.final_url
        fetched_at = html.fetched_at
        base_url = html.final_url
        text = _decode_html(html.content, html.content_type)
    elif isinstance(html, bytes):
        text = _decode_html(html)
    else:
        text = html

    document = parse_html(text)
    title = _pick_title(document)
    if not title:
        raise ExtractionError("title")
    container = _pick_body_container(document)
    if container is None:
        raise ExtractionError("body")
    paragraphs = _paragraphs_of(container)
    if not paragraphs:
        raise ExtractionError("body")
    return Article(
        title=title,
        body="\n\n".join(paragraphs),
        media=_collect_media(document, container, base_url),
        source_url=source_url,
        fetched_at=fetched_at,
    )


# --- serialization ----------------------------------------------------------


def media_to_dict(item: MediaItem) -> dict[str, Any]:
    return {
        "locator": item.locator,
        "kind": item.kind.value,
        "caption": item.caption,
        "format": item.media_format,
    }


def media_from_dict(data: Mapping[str, Any]) -> MediaItem:
    kind = data.get("kind")
    if kind is None:
        inferred = kind_from_locator(data["locator"])
        kind = inferred.value if inferred else MediaKind.IMAGE.value
    return MediaItem(
        locator=data["locator"],
        kind=MediaKind(kind),
        caption=data.get("caption"),
        media_format=data.get("format"),
        sidecar=data.get("sidecar"),
    )


def article_to_dict(article: Article) -> dict[str, Any]:
    return {
        "title": article.title,
        "body": article.body,
        "media": [media_to_dict(item) for item in article.media],
        "source_url": article.source_url,
        "fetched_at": format_utc(article.fetched_at) if article.fetched_at else None,
    }


def article_from_dict(data: Mapping[str, Any]) -> Article:
    fetched_at = data.get("fetched_at")
    return Article(
        title=data["title"],
        body=data["body"],
        media=[media_from_dict(item) for item in data.get("media", [])],
        source_url=data.get("source_url"),
        fetched_at=parse_utc(fetched_at) if fetched_at else None,
    )
