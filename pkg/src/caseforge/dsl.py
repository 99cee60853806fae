"""Textual authoring format for safety cases (``.gsn`` files).

The grammar is line oriented::

    # comment
    case { system: "...", version: "...", risk-owner: "..." }
    goal G1 "Claim text" { hazardous-event, acp: high "label" }
    strategy S1 "Argument over ..." { lifecycle: development }
    solution Sn1 "Evidence" { evidence: "path/or/uri" dated: 2024-01-01 valid-days: 90 }
    context C1 "Definition"
    G1 <- S1        # S1 supports G1
    G1 <-ctx C1     # G1 in context of C1

Declarations are ``goal|strategy|solution|context|assumption|justification
<ID> "<statement>" [{ attr, ... }]``. Attribute blocks may span lines.
Edges may reference nodes declared further down the file.

:func:`parse` reports every error it finds, recovering at statement
boundaries, and raises :class:`CaseParseError` carrying the full list.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from typing import Optional

from .argument import (
    ID_PATTERN,
    ArgumentEdge,
    ArgumentGraph,
    ArgumentNode,
    CaseMetadata,
    ConfidenceAssertion,
    ConfidenceLevel,
    EdgeKind,
    EvidenceRef,
    Flag,
    LifecyclePhase,
    NodeKind,
    SourceSpan,
    build_graph,
)

ERROR_CODES = frozenset({"SYNTAX", "DUP_ID", "UNKNOWN_REF", "BAD_ATTR", "BAD_EDGE_SYNTAX"})

_KIND_KEYWORDS = {k.value: k for k in NodeKind}
_CASE_KEYS = {"system": "system_name", "version": "case_version", "risk-owner": "risk_owner"}


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    code: str
    message: str

    def __post_init__(self):
        if self.code not in ERROR_CODES:
            raise ValueError(f"unknown parse error code {self.code!r}")

    def __str__(self):
        return f"{self.span.line}:{self.span.column}: {self.code}: {self.message}"


class CaseParseError(Exception):
    """Raised by :func:`parse`; ``errors`` holds every problem found."""

    def __init__(self, errors: list[ParseError]):
        self.errors = list(errors)
        first = self.errors[0] if self.errors else None
        more = f" (+{len(self.errors) - 1} more)" if len(self.errors) > 1 else ""
        super().__init__(f"{first}{more}")


# --------------------------------------------------------------------------
# Lexer
# --------------------------------------------------------------------------

WORD, STRING, LBRACE, RBRACE, COMMA, COLON, ARROW, CTXARROW, NEWLINE, COMMENT, BAD, EOF = (
    "word", "string", "{", "}", ",", ":", "<-", "<-ctx", "newline", "comment", "bad", "eof",
)

_WORD_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.\-]*")
_WORD_CHAR = re.compile(r"[A-Za-z0-9_.\-]")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}


@dataclass
class Token:
    type: str
    value: str
    line: int
    column: int
    length: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, self.length)


def _tokenize(text: str, errors: list[ParseError]) -> list[Token]:
    tokens: list[Token] = []
    lines = text.split("\n")
    for lineno, line in enumerate(lines, start=1):
        i = 0
        n = len(line)
        while i < n:
            ch = line[i]
            col = i + 1
            if ch in " \t\f\v\r\ufeff":
                i += 1
            elif ch == "#":
                tokens.append(Token(COMMENT, line[i + 1:], lineno, col, n - i))
                i = n
            elif ch == '"':
                value, end, problem = _scan_string(line, i)
                if problem:
                    errors.append(ParseError(SourceSpan(lineno, col, end - i), "SYNTAX", problem))
                    tokens.append(Token(BAD, line[i:end], lineno, col, end - i))
                else:
                    tokens.append(Token(STRING, value, lineno, col, end - i))
                i = end
            elif ch in "{},:":
                tokens.append(Token(ch, ch, lineno, col, 1))
                i += 1
            elif line.startswith("<-", i):
                rest = line[i + 2:]
                if rest.startswith("ctx") and (len(rest) == 3 or not _WORD_CHAR.match(rest[3])):
                    tokens.append(Token(CTXARROW, "<-ctx", lineno, col, 5))
                    i += 5
                else:
                    tokens.append(Token(ARROW, "<-", lineno, col, 2))
                    i += 2
            else:
                m = _WORD_RE.match(line, i)
                if m:
                    tokens.append(Token(WORD, m.group(), lineno, col, m.end() - i))
                    i = m.end()
                else:
                    # one report per run of junk, so "->" is a single error
                    end = i + 1
                    while end < n and not line[end].isspace() and not _WORD_RE.match(line, end) \
                            and line[end] not in '"#{},:' and not line.startswith("<-", end):
                        end += 1
                    junk = line[i:end]
                    what = f"character {junk!r}" if len(junk) == 1 else f"characters {junk!r}"
                    errors.append(ParseError(SourceSpan(lineno, col, end - i), "SYNTAX", f"unexpected {what}"))
                    tokens.append(Token(BAD, junk, lineno, col, end - i))
                    i = end
        if lineno < len(lines):
            tokens.append(Token(NEWLINE, "\n", lineno, n + 1, 0))
    last = lines[-1]
    tokens.append(Token(EOF, "", len(lines), len(last) + 1, 0))
    return tokens


def _scan_string(line: str, start: int) -> tuple[str, int, Optional[str]]:
    out = []
    i = start + 1
    n = len(line)
    while i < n:
        ch = line[i]
        if ch == '"':
            return "".join(out), i + 1, None
        if ch == "\\":
            if i + 1 >= n:
                break
            esc = line[i + 1]
            if esc in _ESCAPES:
                out.append(_ESCAPES[esc])
                i += 2
                continue
            if esc == "u" and re.fullmatch(r"[0-9A-Fa-f]{4}", line[i + 2:i + 6] or ""):
                out.append(chr(int(line[i + 2:i + 6], 16)))
                i += 6
                continue
            return "", min(i + 2, n), f"invalid escape '\\{esc}' in string"
        out.append(ch)
        i += 1
    return "", n, "unterminated string"


def quote(value: str) -> str:
    """Render ``value`` as a DSL string literal."""
    out = ['"']
    for ch in value:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


# --------------------------------------------------------------------------
# Statements
# --------------------------------------------------------------------------


@dataclass
class Statement:
    span: SourceSpan
    comments: list = field(default_factory=list)
    trailing: Optional[str] = None
    blank_before: bool = False


@dataclass
class CaseStmt(Statement):
    fields: dict = field(default_factory=dict)


@dataclass
class DeclStmt(Statement):
    node: Optional[ArgumentNode] = None
    hazardous: bool = False


@dataclass
class EdgeStmt(Statement):
    kind: EdgeKind = EdgeKind.SUPPORTED_BY
    parent: str = ""
    child: str = ""
    parent_span: Optional[SourceSpan] = None
    child_span: Optional[SourceSpan] = None


@dataclass
class ParseResult:
    graph: Optional[ArgumentGraph]
    errors: list
    statements: list
    footer: list = field(default_factory=list)
    footer_blank: bool = False


class _Recover(Exception):
    """Abandon the current statement and resync at the next line."""


class _Resume(_Recover):
    """Abandon the current statement; the parser already sits on the next one."""


class _Parser:
    def __init__(self, text: str):
        self.errors: list[ParseError] = []
        self.tokens = _tokenize(text, self.errors)
        self.pos = 0
        self.statements: list[Statement] = []
        self.footer: list = []
        self.footer_blank = False

    # token helpers
    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != EOF:
            self.pos += 1
        return tok

    def error(self, tok: Token, code: str, message: str):
        self.errors.append(ParseError(tok.span, code, message))

    def fail(self, tok: Token, code: str, message: str):
        if tok.type != BAD:
            self.error(tok, code, message)
        raise _Recover()

    def skip_newlines(self):
        while self.peek().type == NEWLINE:
            self.advance()

    def resync(self):
        while self.peek().type not in (NEWLINE, EOF):
            self.advance()

    # top level
    def run(self) -> None:
        # pending comments use None for a blank line between comment lines
        pending_comments: list = []
        blank = False
        lead_blank = False
        at_line_start = True

        def note_blank():
            nonlocal blank, lead_blank
            if blank:
                if pending_comments:
                    pending_comments.append(None)
                else:
                    lead_blank = True
                blank = False

        while True:
            tok = self.peek()
            if tok.type == EOF:
                self.footer = pending_comments
                self.footer_blank = lead_blank
                return
            if tok.type == NEWLINE:
                self.advance()
                if at_line_start and (self.statements or pending_comments):
                    blank = True
                at_line_start = True
                continue
            if tok.type == COMMENT:
                self.advance()
                note_blank()
                pending_comments.append(tok.value)
                at_line_start = False
                continue
            at_line_start = False
            note_blank()
            try:
                stmt = self.statement()
                stmt.comments = pending_comments
                stmt.blank_before = lead_blank
                if self.peek().type == COMMENT:
                    stmt.trailing = self.advance().value
                end = self.peek()
                if end.type not in (NEWLINE, EOF):
                    self.fail(end, "SYNTAX", f"unexpected {_describe(end)} after statement")
                self.statements.append(stmt)
            except _Resume:
                pass
            except _Recover:
                self.resync()
            pending_comments = []
            blank = lead_blank = False

    def statement(self) -> Statement:
        first = self.peek()
        second = self.peek(1)
        if first.type != WORD:
            self.fail(first, "SYNTAX", f"expected a declaration or edge, found {_describe(first)}")
        if second.type in (ARROW, CTXARROW):
            return self.edge()
        if first.value == "case" and second.type == LBRACE:
            return self.case_block()
        if first.value in _KIND_KEYWORDS:
            return self.declaration()
        if second.type == WORD:
            self.fail(first, "SYNTAX", f"unknown statement keyword {first.value!r}")
        self.fail(first, "SYNTAX", f"expected a declaration or edge after {first.value!r}")

    def identifier(self, tok: Token, code: str, what: str) -> str:
        if tok.type != WORD:
            self.fail(tok, code, f"expected {what}, found {_describe(tok)}")
        if not ID_PATTERN.match(tok.value):
            self.fail(tok, code, f"invalid identifier {tok.value!r}")
        return tok.value

    def edge(self) -> EdgeStmt:
        parent_tok = self.advance()
        arrow = self.advance()
        parent = self.identifier(parent_tok, "BAD_EDGE_SYNTAX", "a node id")
        child_tok = self.peek()
        if child_tok.type in (NEWLINE, EOF, COMMENT):
            self.fail(arrow, "BAD_EDGE_SYNTAX", f"missing node after {arrow.value!r}")
        self.advance()
        child = self.identifier(child_tok, "BAD_EDGE_SYNTAX", "a node id")
        after = self.peek()
        if after.type not in (NEWLINE, EOF, COMMENT):
            self.fail(after, "BAD_EDGE_SYNTAX", f"unexpected {_describe(after)} in edge")
        kind = EdgeKind.IN_CONTEXT_OF if arrow.type == CTXARROW else EdgeKind.SUPPORTED_BY
        return EdgeStmt(
            span=parent_tok.span,
            kind=kind,
            parent=parent,
            child=child,
            parent_span=parent_tok.span,
            child_span=child_tok.span,
        )

    def case_block(self) -> CaseStmt:
        kw = self.advance()
        values: dict[str, str] = {}
        for key_tok, items in self.attr_block():
            key = key_tok.value
            if key not in _CASE_KEYS:
                self.error(key_tok, "BAD_ATTR", f"unknown case field {key!r}")
                continue
            if key in values:
                self.error(key_tok, "BAD_ATTR", f"duplicate case field {key!r}")
                continue
            if len(items) != 2 or items[0].type != COLON or items[1].type != STRING:
                self.error(key_tok, "BAD_ATTR", f"case field {key!r} expects ': \"value\"'")
                continue
            values[key] = items[1].value
        return CaseStmt(span=kw.span, fields=values)

    def attr_block(self) -> list[tuple[Token, list[Token]]]:
        """Split ``{ a, b: c, ... }`` into ``(name token, value tokens)`` items."""
        open_tok = self.advance()
        items: list[tuple[Token, list[Token]]] = []
        while True:
            self.skip_newlines()
            tok = self.peek()
            if tok.type == RBRACE:
                self.advance()
                return items
            if tok.type == EOF or (
                tok.type == WORD and self.peek(1).type in (WORD, ARROW, CTXARROW) and self.tokens[self.pos - 1].type == NEWLINE
            ):
                self.error(open_tok, "SYNTAX", "unclosed '{'")
                raise _Resume()
            if tok.type != WORD:
                self.fail(tok, "SYNTAX", f"expected attribute name, found {_describe(tok)}")
            name = self.advance()
            value: list[Token] = []
            while self.peek().type not in (COMMA, RBRACE, EOF, NEWLINE):
                if self.peek().type == COMMENT:
                    self.advance()
                    continue
                value.append(self.advance())
            if self.peek().type == NEWLINE:
                self.skip_newlines()
            if self.peek().type == COMMA:
                self.advance()
            elif self.peek().type not in (RBRACE, WORD, EOF):
                self.fail(self.peek(), "SYNTAX", f"expected ',' or '}}', found {_describe(self.peek())}")
            bad = [t for t in value if t.type == BAD]
            if bad:
                continue
            items.append((name, value))

    def declaration(self) -> DeclStmt:
        kw = self.advance()
        kind = _KIND_KEYWORDS[kw.value]
        id_tok = self.advance()
        node_id = self.identifier(id_tok, "SYNTAX", f"{kw.value} id")
        stmt_tok = self.peek()
        if stmt_tok.type != STRING:
            self.fail(stmt_tok, "SYNTAX", f"expected quoted statement for {node_id}, found {_describe(stmt_tok)}")
        self.advance()
        attrs: dict = {}
        ok = True
        if self.peek().type == LBRACE:
            n_errors = len(self.errors)
            attrs = self.decl_attrs(kind, self.attr_block())
            ok = len(self.errors) == n_errors
        hazardous = attrs.pop("hazardous-event", False)
        node = None
        if ok:
            try:
                node = ArgumentNode(
                    node_id,
                    kind,
                    stmt_tok.value,
                    flags=attrs.get("flags", frozenset()),
                    lifecycle=attrs.get("lifecycle"),
                    acp=attrs.get("acp"),
                    evidence_ref=attrs.get("evidence"),
                    span=kw.span,
                )
            except ValueError as exc:
                self.error(id_tok, "BAD_ATTR", str(exc))
        return DeclStmt(span=kw.span, node=node, hazardous=hazardous)

    def decl_attrs(self, kind: NodeKind, items) -> dict:
        out: dict = {"flags": set()}
        seen: set[str] = set()
        for name_tok, value in items:
            name = name_tok.value
            if name in seen:
                self.error(name_tok, "BAD_ATTR", f"duplicate attribute {name!r}")
                continue
            seen.add(name)
            try:
                self._one_attr(kind, name_tok, value, out)
            except _AttrError as exc:
                self.error(exc.token or name_tok, "BAD_ATTR", exc.message)
        out["flags"] = frozenset(out["flags"])
        return out

    def _one_attr(self, kind: NodeKind, name_tok: Token, value: list[Token], out: dict) -> None:
        name = name_tok.value
        if name in ("undeveloped", "uninstantiated"):
            _expect_empty(name, value)
            out["flags"].add(Flag(name))
        elif name == "hazardous-event":
            _expect_empty(name, value)
            if kind is not NodeKind.GOAL:
                raise _AttrError("hazardous-event is only allowed on goals")
            out["hazardous-event"] = True
        elif name == "lifecycle":
            vals = _after_colon(name, value)
            if len(vals) != 1 or vals[0].type != WORD:
                raise _AttrError("lifecycle expects development|deployment|post-deployment", name_tok)
            try:
                phase = LifecyclePhase(vals[0].value)
            except ValueError:
                raise _AttrError(f"unknown lifecycle phase {vals[0].value!r}", vals[0]) from None
            if kind not in (NodeKind.GOAL, NodeKind.STRATEGY):
                raise _AttrError("lifecycle is only allowed on goals and strategies")
            out["lifecycle"] = phase
        elif name == "acp":
            vals = _after_colon(name, value)
            if len(vals) != 2 or vals[0].type != WORD or vals[1].type != STRING:
                raise _AttrError('acp expects \': <low|medium|high> "label"\'', name_tok)
            try:
                level = ConfidenceLevel(vals[0].value)
            except ValueError:
                raise _AttrError(f"unknown confidence level {vals[0].value!r}", vals[0]) from None
            out["acp"] = ConfidenceAssertion(vals[1].value, level)
        elif name == "evidence":
            if kind is not NodeKind.SOLUTION:
                raise _AttrError("evidence is only allowed on solutions")
            out["evidence"] = _evidence(name_tok, _after_colon(name, value))
        else:
            raise _AttrError(f"unknown attribute {name!r}")


class _AttrError(Exception):
    def __init__(self, message: str, token: Optional[Token] = None):
        self.message = message
        self.token = token


def _expect_empty(name: str, value: list[Token]) -> None:
    if value:
        raise _AttrError(f"{name} takes no value", value[0])


def _after_colon(name: str, value: list[Token]) -> list[Token]:
    if not value or value[0].type != COLON:
        raise _AttrError(f"{name} expects ':' and a value")
    return value[1:]


def _evidence(name_tok: Token, vals: list[Token]) -> EvidenceRef:
    if not vals or vals[0].type != STRING:
        raise _AttrError('evidence expects \': "uri"\'', name_tok)
    uri = vals[0].value
    extra: dict = {}
    rest = vals[1:]
    while rest:
        if len(rest) < 3 or rest[0].type != WORD or rest[1].type != COLON:
            raise _AttrError("evidence options are description:, dated: and valid-days:", rest[0])
        key, val = rest[0], rest[2]
        if key.value in extra:
            raise _AttrError(f"duplicate evidence option {key.value!r}", key)
        if key.value == "description":
            if val.type != STRING:
                raise _AttrError("description expects a quoted string", val)
            extra["description"] = val.value
        elif key.value == "dated":
            try:
                if val.type != WORD or not re.fullmatch(r"\d{4}-\d{2}-\d{2}", val.value):
                    raise ValueError
                extra["dated"] = date.fromisoformat(val.value)
            except ValueError:
                raise _AttrError(f"dated expects YYYY-MM-DD, got {val.value!r}", val) from None
        elif key.value == "valid-days":
            if val.type != WORD or not val.value.isdigit() or int(val.value) < 1:
                raise _AttrError(f"valid-days expects a positive integer, got {val.value!r}", val)
            extra["valid-days"] = int(val.value)
        else:
            raise _AttrError(f"unknown evidence option {key.value!r}", key)
        rest = rest[3:]
    if "valid-days" in extra and "dated" not in extra:
        raise _AttrError("valid-days requires dated", name_tok)
    return EvidenceRef(uri, extra.get("description", ""), extra.get("dated"), extra.get("valid-days"))


def _describe(tok: Token) -> str:
    if tok.type == EOF:
        return "end of input"
    if tok.type == NEWLINE:
        return "end of line"
    if tok.type == STRING:
        return "string"
    return repr(tok.value)


# --------------------------------------------------------------------------
# Assembly
# --------------------------------------------------------------------------


def parse_source(text: str) -> ParseResult:
    """Parse without raising; ``graph`` is ``None`` when ``errors`` is non-empty."""
    text = text.replace("\r\n", "\n")
    p = _Parser(text)
    p.run()
    errors = p.errors

    nodes: dict[str, ArgumentNode] = {}
    declared: set[str] = set()
    hazardous: set[str] = set()
    meta_fields: dict[str, str] = {}
    have_case = False
    for stmt in p.statements:
        if isinstance(stmt, CaseStmt):
            if have_case:
                errors.append(ParseError(stmt.span, "SYNTAX", "duplicate case header"))
            have_case = True
            meta_fields.update(stmt.fields)
        elif isinstance(stmt, DeclStmt):
            if stmt.node is None:
                continue
            nid = stmt.node.id
            if nid in declared:
                errors.append(ParseError(stmt.span, "DUP_ID", f"node {nid!r} already declared"))
                continue
            declared.add(nid)
            nodes[nid] = stmt.node
            if stmt.hazardous:
                hazardous.add(nid)
    # ids from declarations that failed still count as declared for edge checks
    attempted = declared | _attempted_ids(p)

    edges: list[ArgumentEdge] = []
    seen: set[tuple] = set()
    for stmt in p.statements:
        if not isinstance(stmt, EdgeStmt):
            continue
        bad = False
        for ref, span in ((stmt.parent, stmt.parent_span), (stmt.child, stmt.child_span)):
            if ref not in attempted:
                errors.append(ParseError(span, "UNKNOWN_REF", f"reference to undeclared node {ref!r}"))
                bad = True
        if bad or stmt.parent not in nodes or stmt.child not in nodes:
            continue
        if stmt.parent == stmt.child:
            errors.append(ParseError(stmt.span, "BAD_EDGE_SYNTAX", f"self-loop on {stmt.parent!r}"))
            continue
        edge = ArgumentEdge(stmt.kind, stmt.parent, stmt.child, span=stmt.span)
        if edge.key in seen:
            errors.append(ParseError(stmt.span, "BAD_EDGE_SYNTAX", f"duplicate edge {stmt.parent} -> {stmt.child}"))
            continue
        seen.add(edge.key)
        edges.append(edge)

    errors.sort(key=lambda e: (e.span.line, e.span.column))
    graph = None
    if not errors:
        meta = CaseMetadata(
            meta_fields.get("system", ""),
            meta_fields.get("version", ""),
            meta_fields.get("risk-owner", ""),
            frozenset(hazardous),
        )
        graph = build_graph(meta, nodes.values(), edges)
    return ParseResult(graph, errors, p.statements, p.footer, p.footer_blank)


def _attempted_ids(p: _Parser) -> set[str]:
    ids = set()
    toks = p.tokens
    for i, tok in enumerate(toks[:-1]):
        if (
            tok.type == WORD
            and tok.value in _KIND_KEYWORDS
            and toks[i + 1].type == WORD
            and (i == 0 or toks[i - 1].type == NEWLINE)
        ):
            ids.add(toks[i + 1].value)
    return ids


def parse(text: str) -> ArgumentGraph:
    """Parse DSL text into a graph.

    Raises:
        CaseParseError: with every error located in the source.
    """
    result = parse_source(text)
    if result.errors:
        raise CaseParseError(result.errors)
    return result.graph


# --------------------------------------------------------------------------
# Rendering
# --------------------------------------------------------------------------


def render_case_header(meta: CaseMetadata) -> str:
    return (
        f"case {{ system: {quote(meta.system_name)}, version: {quote(meta.case_version)}, "
        f"risk-owner: {quote(meta.risk_owner)} }}"
    )


def render_node(node: ArgumentNode, hazardous: bool = False) -> str:
    attrs = []
    if hazardous:
        attrs.append("hazardous-event")
    if node.lifecycle is not None:
        attrs.append(f"lifecycle: {node.lifecycle.value}")
    if node.acp is not None:
        attrs.append(f"acp: {node.acp.level.value} {quote(node.acp.label)}")
    ev = node.evidence_ref
    if ev is not None:
        parts = [f"evidence: {quote(ev.uri_or_path)}"]
        if ev.description:
            parts.append(f"description: {quote(ev.description)}")
        if ev.dated is not None:
            parts.append(f"dated: {ev.dated.isoformat()}")
        if ev.valid_for_days is not None:
            parts.append(f"valid-days: {ev.valid_for_days}")
        attrs.append(" ".join(parts))
    for flag in (Flag.UNDEVELOPED, Flag.UNINSTANTIATED):
        if flag in node.flags:
            attrs.append(flag.value)
    line = f"{node.kind.value} {node.id} {quote(node.statement)}"
    if attrs:
        line += " { " + ", ".join(attrs) + " }"
    return line


def render_edge(kind: EdgeKind, parent: str, child: str) -> str:
    arrow = "<-ctx" if kind is EdgeKind.IN_CONTEXT_OF else "<-"
    return f"{parent} {arrow} {child}"


def _meta_empty(meta: CaseMetadata) -> bool:
    return not (meta.system_name or meta.case_version or meta.risk_owner)


def render_dsl(graph: ArgumentGraph) -> str:
    """Canonical DSL text: header, declarations, then edges."""
    blocks = []
    if not _meta_empty(graph.metadata):
        blocks.append([render_case_header(graph.metadata)])
    hz = graph.metadata.hazardous_event_goals
    if graph.nodes:
        blocks.append([render_node(n, n.id in hz) for n in graph.nodes.values()])
    if graph.edges:
        blocks.append([render_edge(e.kind, e.source, e.target) for e in graph.edges])
    if not blocks:
        return ""
    return "\n\n".join("\n".join(b) for b in blocks) + "\n"


def format_source(text: str) -> str:
    """Normalize layout while keeping statement order and comments.

    Raises:
        CaseParseError: when ``text`` does not parse.
    """
    result = parse_source(text)
    if result.errors:
        raise CaseParseError(result.errors)
    out: list[str] = []
    for stmt in result.statements:
        if stmt.blank_before and out:
            out.append("")
        out.extend(_comment(c) for c in stmt.comments)
        if isinstance(stmt, CaseStmt):
            meta = result.graph.metadata
            line = render_case_header(meta)
        elif isinstance(stmt, DeclStmt):
            line = render_node(stmt.node, stmt.hazardous)
        else:
            line = render_edge(stmt.kind, stmt.parent, stmt.child)
        if stmt.trailing is not None:
            line += "  " + _comment(stmt.trailing)
        out.append(line)
    if result.footer:
        if result.footer_blank and out:
            out.append("")
        out.extend(_comment(c) for c in result.footer)
    return "\n".join(out) + "\n" if out else ""


def _comment(body: Optional[str]) -> str:
    if body is None:
        return ""
    body = body.rstrip()
    return "# " + body.lstrip() if body.strip() else "#"
