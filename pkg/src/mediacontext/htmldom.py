"""A small, lenient DOM over the stdlib HTML parser.

Just enough tree for article extraction: elements with attributes, parent
links, document order, and visible-text collection that skips script and
style content. Malformed HTML never raises; stray end tags are dropped and
unclosed elements are closed at end of input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Iterator, Optional, Union

VOID_TAGS = frozenset(
    {
        "area",
        "base",
        "br",
        "col",
        "embed",
        "hr",
        "img",
        "input",
        "link",
        "meta",
        "param",
        "source",
        "track",
        "wbr",
    }
)

# Opening one of these implicitly closes an open <p> or <li>.
_BLOCK_STARTERS = frozenset(
    {
        "address",
        "article",
        "aside",
        "blockquote",
        "div",
        "dl",
        "fieldset",
        "figcaption",
        "figure",
        "footer",
        "form",
        "h1",
        "h2",
        "h3",
        "h4",
        "h5",
        "h6",
        "header",
        "hr",
        "li",
        "main",
        "nav",
        "ol",
        "p",
        "pre",
        "section",
        "table",
        "ul",
    }
)

_INVISIBLE_TAGS = frozenset({"script", "style", "noscript", "template"})


@dataclass
class Element:
    tag: str
    attrs: dict[str, str] = field(default_factory=dict)
    children: list[Union["Element", str]] = field(default_factory=list)
    parent: Optional["Element"] = None
    order: int = 0  # start-tag position in document order

    def __repr__(self) -> str:  # keeps test failures readable
        return f"<{self.tag} order={self.order} children={len(self.children)}>"

    def iter_elements(self) -> Iterator["Element"]:
        """All descendant elements in document order, self excluded."""
        for child in self.children:
            if isinstance(child, Element):
                yield child
                yield from child.iter_elements()

    def find_all(self, *tags: str) -> list["Element"]:
        wanted = set(tags)
        return [el for el in self.iter_elements() if el.tag in wanted]

    def find_first(self, *tags: str) -> Optional["Element"]:
        for el in self.iter_elements():
            if el.tag in tags:
                return el
        return None

    def ancestors(self) -> Iterator["Element"]:
        node = self.parent
        while node is not None:
            yield node
            node = node.parent

    def text(self) -> str:
        """Whitespace-normalized visible text of the subtree."""
        parts: list[str] = []
        self._collect_text(parts)
        return " ".join(" ".join(parts).split())

    def _collect_text(self, parts: list[str]) -> None:
        if self.tag in _INVISIBLE_TAGS:
            return
        for child in self.children:
            if isinstance(child, str):
                parts.append(child)
            else:
                child._collect_text(parts)


class _DomBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = Element("#document")
        self._stack = [self.root]
        self._order = 0

    def _open(self, tag: str, attrs: list[tuple[str, Optional[str]]], push: bool) -> None:
        if tag in _BLOCK_STARTERS:
            while self._stack[-1].tag in ("p", "li"):
                self._stack.pop()
        self._order += 1
        element = Element(
            tag=tag,
            attrs={name: (value if value is not None else "") for name, value in attrs},
            parent=self._stack[-1],
            order=self._order,
        )
        self._stack[-1].children.append(element)
        if push:
            self._stack.append(element)

    def handle_starttag(self, tag: str, attrs: list[tuple[str, Optional[str]]]) -> None:
        self._open(tag, attrs, push=tag not in VOID_TAGS)

    def handle_startendtag(self, tag: str, attrs: list[tuple[str, Optional[str]]]) -> None:
        self._open(tag, attrs, push=False)

    def handle_endtag(self, tag: str) -> None:
        for index in range(len(self._stack) - 1, 0, -1):
            if self._stack[index].tag == tag:
                del self._stack[index:]
                return
        # stray end tag: ignore

    def handle_data(self, data: str) -> None:
        if data:
            self._stack[-1].children.append(data)


def parse_html(text: str) -> Element:
    """Parse (possibly malformed) HTML into a document element. Never raises."""
    builder = _DomBuilder()
    try:
        builder.feed(text)
        builder.close()
    except Exception:  # parser bugs on hostile input must not break extraction
        pass
    return builder.root
