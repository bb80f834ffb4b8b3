"""Line-oriented text format for spin networks.

Grammar (one statement per line, UTF-8, LF or CRLF):

    version 1                     optional header, at most once, first
    edge <id> <label>             label a non-negative integer
    vertex <id> <e1> <e2> <e3>    three edge ids, ends claimed in order
    # comment                     full-line comments and blanks ignored

Free ends are implicit: every edge end not claimed by a vertex line is
free.  Claiming an edge id a third time is an error.  Parsing reports
every problem it can find, each with a 1-based source span; semantic
checks reuse the network validator, so the format accepts exactly the
networks the model does.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .errors import InvalidNetwork
from .model import End, SpinNetwork, Vertex, Edge, validate_network

_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True)
class SourceSpan:
    """A 1-based (line, column) position and the length of the token there."""

    line: int
    column: int
    length: int


class ErrorKind(enum.Enum):
    LEXICAL = "lexical"
    SYNTACTIC = "syntactic"
    SEMANTIC = "semantic"


@dataclass(frozen=True)
class ParseError:
    message: str
    span: SourceSpan
    kind: ErrorKind

    def __str__(self) -> str:
        return f"{self.span.line}:{self.span.column}: {self.kind.value}: {self.message}"


@dataclass(frozen=True)
class _Token:
    text: str
    span: SourceSpan


def _tokenize(text: str) -> list[list[_Token]]:
    lines = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if line.lstrip().startswith("#"):
            lines.append([])
            continue
        lines.append(
            [
                _Token(m.group(), SourceSpan(lineno, m.start() + 1, len(m.group())))
                for m in _TOKEN.finditer(line)
            ]
        )
    return lines


def parse_network(text: str) -> SpinNetwork | list[ParseError]:
    """Parse the format above; returns the network or every error found."""
    errors: list[ParseError] = []

    def err(kind: ErrorKind, token: _Token, message: str) -> None:
        errors.append(ParseError(message, token.span, kind))

    edges: list[tuple[_Token, _Token]] = []  # (id token, label token)
    vertices: list[tuple[_Token, list[_Token]]] = []
    seen_version = False
    seen_statement = False
    for tokens in _tokenize(text):
        if not tokens:
            continue
        head, args = tokens[0], tokens[1:]
        if head.text == "version":
            if seen_version or seen_statement:
                err(ErrorKind.SYNTACTIC, head, "version line must come first, once")
            elif len(args) != 1 or args[0].text != "1":
                bad = args[0] if args else head
                err(ErrorKind.SYNTACTIC, bad, "only `version 1` is supported")
            seen_version = True
            continue
        seen_statement = True
        if head.text == "edge":
            if len(args) != 2:
                err(ErrorKind.SYNTACTIC, head, "expected `edge <id> <label>`")
                continue
            edges.append((args[0], args[1]))
        elif head.text == "vertex":
            if len(args) != 4:
                err(ErrorKind.SYNTACTIC, head, "expected `vertex <id> <edge> <edge> <edge>`")
                continue
            vertices.append((args[0], args[1:]))
        else:
            err(ErrorKind.SYNTACTIC, head, f"unknown statement {head.text!r}")

    # Lexical pass on labels; structural pass resolving edge references.
    edge_span: dict[str, _Token] = {}
    label_span: dict[str, _Token] = {}
    edge_objs: list[Edge] = []
    for id_tok, label_tok in edges:
        if id_tok.text in edge_span:
            err(ErrorKind.SEMANTIC, id_tok, f"duplicate edge id {id_tok.text!r}")
            continue
        edge_span[id_tok.text] = id_tok
        label_span[id_tok.text] = label_tok
        if re.fullmatch(r"[0-9]+", label_tok.text):
            label = int(label_tok.text, 10)
        else:
            err(ErrorKind.LEXICAL, label_tok, f"label must be a non-negative integer, got {label_tok.text!r}")
            label = 0
        edge_objs.append(Edge(id_tok.text, label))

    vertex_span: dict[str, _Token] = {}
    claimed: dict[str, int] = {}
    vertex_objs: list[Vertex] = []
    for id_tok, edge_toks in vertices:
        if id_tok.text in vertex_span:
            err(ErrorKind.SEMANTIC, id_tok, f"duplicate vertex id {id_tok.text!r}")
            continue
        vertex_span[id_tok.text] = id_tok
        ends = []
        usable = True
        for tok in edge_toks:
            if tok.text not in edge_span:
                err(ErrorKind.SEMANTIC, tok, f"unknown edge id {tok.text!r}")
                usable = False
                continue
            n = claimed.get(tok.text, 0)
            claimed[tok.text] = n + 1
            if n >= 2:
                err(ErrorKind.SEMANTIC, tok, f"edge {tok.text!r} has no end left to attach")
                usable = False
                continue
            ends.append(End(tok.text, n))
        if usable:
            vertex_objs.append(Vertex(id_tok.text, tuple(ends)))

    net = SpinNetwork(tuple(edge_objs), tuple(vertex_objs))
    for violation in validate_network(net):
        anchor = (
            vertex_span.get(violation.subject)
            or label_span.get(violation.subject)
            or _Token("", SourceSpan(1, 1, 1))
        )
        err(ErrorKind.SEMANTIC, anchor, str(violation))
    if errors:
        # Deduplicate identical reports (a violation can mirror a pass above).
        unique: list[ParseError] = []
        for e in sorted(errors, key=lambda e: (e.span.line, e.span.column, e.message)):
            if not unique or unique[-1] != e:
                unique.append(e)
        return unique
    return net


def serialize_network(net: SpinNetwork) -> str:
    """Canonical text for a valid network: edges then vertices, sorted by id.

    parse_network(serialize_network(n)) reproduces n up to which side of an
    edge each vertex slot holds (sides are re-claimed in declaration order),
    an id-preserving isomorphism.
    """
    problems = validate_network(net)
    if problems:
        raise InvalidNetwork(problems)
    out = []
    for e in sorted(net.edges, key=lambda e: e.id):
        out.append(f"edge {e.id} {e.label}")
    for v in sorted(net.vertices, key=lambda v: v.id):
        out.append(f"vertex {v.id} {' '.join(end.edge for end in v.ends)}")
    return "\n".join(out) + ("\n" if out else "")
