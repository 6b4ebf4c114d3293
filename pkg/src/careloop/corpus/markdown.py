"""Minimal HTML to Markdown normalization.

Guideline sources arrive as HTML or Markdown; HTML is converted while
preserving the structural elements that matter for in-context reasoning:
section headings, ordered/unordered lists (with nesting), and tables
(rendered as pipe tables). Inline emphasis, code, and links are kept;
scripts/styles are dropped; other unknown tags contribute only their text.
"""

from __future__ import annotations

import re
from html.parser import HTMLParser

_HEADINGS = {f"h{i}": i for i in range(1, 7)}
_SKIP = {"script", "style", "head"}
_WS = re.compile(r"[ \t\r\n]+")


class _Converter(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.blocks: list[tuple[str, str]] = []  # (kind, text); kind in {"block", "li"}
        self._text: list[str] = []
        self._skip_depth = 0
        self._list_stack: list[dict] = []  # {"ordered": bool, "count": int}
        self._pre = False
        self._quote_depth = 0
        # table state
        self._table: list[list[str]] | None = None
        self._row: list[str] | None = None
        self._cell: list[str] | None = None
        self._header_cells = 0
        self._href: str | None = None

    # -- text assembly -----------------------------------------------------

    def _emit(self, text: str) -> None:
        if self._cell is not None:
            self._cell.append(text)
        else:
            self._text.append(text)

    def _flush_block(self) -> None:
        text = "".join(self._text)
        self._text = []
        if not self._pre:
            text = _WS.sub(" ", text).strip()
        if not text:
            return
        if self._quote_depth:
            prefix = "> " * self._quote_depth
            text = "\n".join(prefix + line for line in text.split("\n"))
        self.blocks.append(("block", text))

    # -- parser hooks -------------------------------------------------------

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP:
            self._skip_depth += 1
            return
        if self._skip_depth:
            return
        if tag in _HEADINGS or tag == "p":
            self._flush_block()
        elif tag == "br":
            self._emit("\n" if self._pre else " ")
        elif tag == "hr":
            self._flush_block()
            self.blocks.append(("block", "---"))
        elif tag in ("ul", "ol"):
            if not self._list_stack:
                self._flush_block()
            self._list_stack.append({"ordered": tag == "ol", "count": 0})
        elif tag == "li":
            self._flush_block()
        elif tag == "blockquote":
            self._flush_block()
            self._quote_depth += 1
        elif tag == "pre":
            self._flush_block()
            self._pre = True
        elif tag in ("b", "strong"):
            self._emit("**")
        elif tag in ("i", "em"):
            self._emit("*")
        elif tag == "code" and not self._pre:
            self._emit("`")
        elif tag == "a":
            self._href = dict(attrs).get("href")
            self._emit("[")
        elif tag == "table":
            self._flush_block()
            self._table = []
            self._header_cells = 0
        elif tag == "tr" and self._table is not None:
            self._row = []
        elif tag in ("td", "th") and self._row is not None:
            self._cell = []
            if tag == "th":
                self._header_cells += 1

    def handle_endtag(self, tag):
        if tag in _SKIP:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if self._skip_depth:
            return
        if tag in _HEADINGS:
            text = _WS.sub(" ", "".join(self._text)).strip()
            self._text = []
            if text:
                self.blocks.append(("block", "#" * _HEADINGS[tag] + " " + text))
        elif tag == "p":
            self._flush_block()
        elif tag in ("ul", "ol"):
            if self._list_stack:
                self._list_stack.pop()
        elif tag == "li":
            text = _WS.sub(" ", "".join(self._text)).strip()
            self._text = []
            if text:
                depth = max(0, len(self._list_stack) - 1)
                indent = "  " * depth
                frame = self._list_stack[-1] if self._list_stack else {"ordered": False, "count": 0}
                if frame["ordered"]:
                    frame["count"] += 1
                    self.blocks.append(("li", f"{indent}{frame['count']}. {text}"))
                else:
                    self.blocks.append(("li", f"{indent}- {text}"))
        elif tag == "blockquote":
            self._flush_block()
            self._quote_depth = max(0, self._quote_depth - 1)
        elif tag == "pre":
            text = "".join(self._text).strip("\n")
            self._text = []
            self._pre = False
            if text:
                self.blocks.append(("block", f"```\n{text}\n```"))
        elif tag in ("b", "strong"):
            self._emit("**")
        elif tag in ("i", "em"):
            self._emit("*")
        elif tag == "code" and not self._pre:
            self._emit("`")
        elif tag == "a":
            self._emit(f"]({self._href})" if self._href else "]()")
            self._href = None
        elif tag in ("td", "th") and self._cell is not None:
            cell = _WS.sub(" ", "".join(self._cell)).strip().replace("|", "\\|")
            self._cell = None
            if self._row is not None:
                self._row.append(cell)
        elif tag == "tr" and self._table is not None:
            if self._row:
                self._table.append(self._row)
            self._row = None
        elif tag == "table" and self._table is not None:
            self._flush_table()

    def handle_data(self, data):
        if self._skip_depth:
            return
        self._emit(data if self._pre else data)

    def _flush_table(self) -> None:
        rows = self._table or []
        self._table = None
        if not rows:
            return
        width = max(len(r) for r in rows)
        rows = [r + [""] * (width - len(r)) for r in rows]
        lines = ["| " + " | ".join(rows[0]) + " |"]
        lines.append("| " + " | ".join(["---"] * width) + " |")
        for row in rows[1:]:
            lines.append("| " + " | ".join(row) + " |")
        self.blocks.append(("block", "\n".join(lines)))

    def finish(self) -> str:
        self._flush_block()
        if self._table is not None:
            self._flush_table()
        if not self.blocks:
            return ""
        # consecutive list items sit on adjacent lines; everything else is
        # separated by a blank line
        parts: list[str] = []
        for i, (kind, text) in enumerate(self.blocks):
            if i == 0:
                parts.append(text)
            elif kind == "li" and self.blocks[i - 1][0] == "li":
                parts.append("\n" + text)
            else:
                parts.append("\n\n" + text)
        return "".join(parts).rstrip() + "\n"


def html_to_markdown(html: str) -> str:
    converter = _Converter()
    converter.feed(html)
    converter.close()
    return converter.finish()


def first_heading(markdown: str) -> str:
    """Title candidate: text of the first ATX heading, if any."""
    for line in markdown.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            return stripped.lstrip("#").strip()
    return ""
