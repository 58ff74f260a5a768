"""Reader for a practical subset of PENMAN graph notation.

Supported: nested ``(var / concept :rel ...)`` structure, bare
variable re-references (re-entrancies), quoted string constants as
leaves, and ``~e.N`` single-token alignment suffixes. Relation labels
lose their leading colon; labels ending in ``-of`` are normalized by
reversing the edge and stripping the suffix, so every stored edge
points in canonical direction.

Not supported (out of scope): multi-token alignment lists, epigraph
metadata inside the graph string, escaped quotes in literals.
"""

from __future__ import annotations

import re

from .errors import ParseError
from .graph import AmrEdge, AmrGraph, AmrNode

_ATOM_RE = re.compile(r'[^\s()/:~"]+')
_ALIGN_RE = re.compile(r"~e\.(\d+)")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise ParseError(f"expected '{ch}'", offset=self.pos)
        self.pos += 1

    def atom(self) -> str:
        self.skip_ws()
        m = _ATOM_RE.match(self.text, self.pos)
        if not m:
            raise ParseError("expected an identifier", offset=self.pos)
        self.pos = m.end()
        return m.group(0)

    def quoted(self) -> str:
        self.skip_ws()
        start = self.pos
        self.pos += 1  # opening quote
        end = self.text.find('"', self.pos)
        if end < 0:
            raise ParseError("unterminated string constant", offset=start)
        value = self.text[self.pos : end]
        self.pos = end + 1
        return value

    def alignment(self) -> int | None:
        m = _ALIGN_RE.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return int(m.group(1))


def read_penman(text: str, tokens: list[str] | None = None) -> AmrGraph:
    """Parse one PENMAN graph into an AmrGraph.

    `tokens` supplies the sentence; when omitted, placeholder tokens
    are synthesized to cover the largest alignment index so span
    invariants still hold.
    """
    if not text or not text.strip():
        raise ParseError("empty input", offset=0)
    sc = _Scanner(text)

    var_ids: dict[str, int] = {}
    nodes: list[AmrNode] = []
    raw_edges: list[tuple[int, str, object]] = []  # (parent id, rel, child id | var name)
    pending_refs: list[tuple[int, str, str, int]] = []  # parent, rel, var, offset

    def new_node(concept: str, align: int | None) -> int:
        nid = len(nodes)
        span = None if align is None else (align, align + 1)
        nodes.append(AmrNode(nid, concept, span))
        return nid

    def parse_node() -> int:
        sc.expect("(")
        at = sc.pos
        var = sc.atom()
        if var in var_ids:
            raise ParseError(f"duplicate variable definition '{var}'", offset=at)
        sc.expect("/")
        concept = sc.atom()
        align = sc.alignment()
        nid = new_node(concept, align)
        var_ids[var] = nid
        while True:
            ch = sc.peek()
            if ch == ")":
                sc.pos += 1
                return nid
            if ch == "":
                raise ParseError("unbalanced parentheses", offset=len(text))
            if ch != ":":
                raise ParseError("expected a relation or ')'", offset=sc.pos)
            sc.pos += 1
            rel = sc.atom()
            parse_target(nid, rel)

    def parse_target(parent: int, rel: str):
        ch = sc.peek()
        if ch == "(":
            child = parse_node()
            raw_edges.append((parent, rel, child))
        elif ch == '"':
            value = sc.quoted()
            align = sc.alignment()
            child = new_node(value, align)
            raw_edges.append((parent, rel, child))
        else:
            at = sc.pos
            name = sc.atom()
            sc.alignment()  # alignment on a bare reference adds nothing
            pending_refs.append((parent, rel, name, at))

    parse_node()
    sc.skip_ws()
    if sc.pos < len(sc.text):
        raise ParseError("trailing content after graph", offset=sc.pos)

    edges: list[AmrEdge] = []

    def add_edge(parent: int, rel: str, child: int):
        if rel.endswith("-of") and len(rel) > 3:
            edges.append(AmrEdge(child, parent, rel[:-3]))
        else:
            edges.append(AmrEdge(parent, child, rel))

    for parent, rel, child in raw_edges:
        add_edge(parent, rel, child)
    for parent, rel, name, at in pending_refs:
        if name in var_ids:
            add_edge(parent, rel, var_ids[name])
        else:
            # bare atom that names no variable: a symbol constant leaf
            add_edge(parent, rel, new_node(name, None))

    if tokens is None:
        max_align = max(
            (n.token_span[1] for n in nodes if n.token_span is not None), default=0
        )
        tokens = [f"tok{i}" for i in range(max_align)]

    g = AmrGraph(list(tokens), nodes, edges)
    g.validate(name="penman graph")
    return g


def iter_penman_blocks(text: str):
    """Split a file into (tokens | None, graph_text) blocks.

    Blocks are separated by blank lines. Comment lines starting with
    '#' are skipped, except '# ::tok ...' which supplies the sentence
    tokens for the following graph.
    """
    tokens: list[str] | None = None
    buf: list[str] = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            m = re.match(r"#\s*::tok\s+(.*)", stripped)
            if m:
                tokens = m.group(1).split()
            continue
        if not stripped:
            if buf:
                yield tokens, "\n".join(buf)
                tokens, buf = None, []
            continue
        buf.append(line)
    if buf:
        yield tokens, "\n".join(buf)


def read_penman_file(path) -> list[AmrGraph]:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    graphs = []
    for tokens, block in iter_penman_blocks(text):
        graphs.append(read_penman(block, tokens=tokens))
    return graphs
