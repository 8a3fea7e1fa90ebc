"""Reader and writer for ``.accentrules`` rule-set documents.

Example::

    # Spanish-accented English
    ruleset "spanish" inventory "default@1"

    rule "sp3" "Epenthesis (s-clusters)" {
      context: word-initial;
      s p -> e s p;
      s t -> e s t;
    }

Phoneme symbols are whitespace-separated, ``∅`` is the empty target and an
optional ``@tag`` after the target names a separately switchable entry.
The first error aborts parsing; no partial rule set is produced.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .ipa import Inventory, default_inventory, normalize
from .rules import Context, Mapping, RewriteRule, RuleSet

EMPTY_TARGET = "∅"
_TAG_RE = re.compile(r"[A-Za-z0-9_.\-]+")
_WORD_STOP = frozenset('{};:"#@')
_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}
_CONTEXT_NAMES = {c.value: c for c in Context}


class DslError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0) -> None:
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {message}" if line else message)


class DslSyntaxError(DslError):
    def __init__(self, line: int, col: int, expected: str, found: str = "") -> None:
        self.expected, self.found = expected, found
        super().__init__(f"expected {expected}" + (f", found {found}" if found else ""), line, col)


class UnknownPhoneme(DslError):
    def __init__(self, line: int, col: int, symbol: str) -> None:
        self.symbol = symbol
        super().__init__(f"unknown phoneme {symbol!r}", line, col)


class DuplicateRuleId(DslError):
    def __init__(self, rule_id: str, line: int = 0, col: int = 0) -> None:
        self.rule_id = rule_id
        super().__init__(f"duplicate rule id {rule_id!r}", line, col)


class DuplicateSource(DslError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    line: int
    column: int
    message: str


@dataclass
class RuleSetDocument:
    source_text: str
    parsed: RuleSet | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.parsed is not None


@dataclass(frozen=True, slots=True)
class _Tok:
    kind: str  # str, word, arrow, tag, {, }, ;, :, eof
    text: str
    line: int
    col: int


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, n = 0, len(text)
    line, line_start = 1, 0
    while i < n:
        ch = text[i]
        col = i - line_start + 1
        if ch == "\n":
            line += 1
            line_start = i + 1
            i += 1
        elif ch.isspace():
            i += 1
        elif ch == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "{};:":
            toks.append(_Tok(ch, ch, line, col))
            i += 1
        elif ch == '"':
            i += 1
            buf = []
            while True:
                if i >= n or text[i] == "\n":
                    raise DslSyntaxError(line, col, "closing '\"'", "end of line")
                c = text[i]
                if c == '"':
                    i += 1
                    break
                if c == "\\":
                    esc = text[i + 1] if i + 1 < n else ""
                    if esc not in _ESCAPES:
                        raise DslSyntaxError(line, i - line_start + 1, "escape sequence", repr("\\" + esc))
                    buf.append(_ESCAPES[esc])
                    i += 2
                else:
                    buf.append(c)
                    i += 1
            toks.append(_Tok("str", "".join(buf), line, col))
        elif ch == "@":
            m = _TAG_RE.match(text, i + 1)
            if not m:
                raise DslSyntaxError(line, col, "tag name after '@'")
            toks.append(_Tok("tag", m.group(), line, col))
            i = m.end()
        elif text.startswith("->", i):
            toks.append(_Tok("arrow", "->", line, col))
            i += 2
        else:
            j = i
            while j < n and text[j] not in _WORD_STOP and not text[j].isspace() and not text.startswith("->", j):
                j += 1
            toks.append(_Tok("word", text[i:j], line, col))
            i = j
    toks.append(_Tok("eof", "", line, i - line_start + 1))
    return toks


def _describe(tok: _Tok) -> str:
    if tok.kind == "eof":
        return "end of input"
    if tok.kind == "str":
        return f'string "{tok.text}"'
    return repr(tok.text)


class _Parser:
    def __init__(self, text: str, inv: Inventory) -> None:
        self.toks = _lex(text)
        self.pos = 0
        self.inv = inv
        self.warnings: list[Diagnostic] = []

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self, kind: str, expected: str, text: str | None = None) -> _Tok:
        tok = self.toks[self.pos]
        if tok.kind != kind or (text is not None and tok.text != text):
            raise DslSyntaxError(tok.line, tok.col, expected, _describe(tok))
        self.pos += 1
        return tok

    def document(self) -> RuleSet:
        name, inv_ref = "", self.inv.ref
        tok = self.peek()
        if tok.kind == "word" and tok.text == "ruleset":
            self.pos += 1
            name = self.take("str", "rule set name").text
            self.take("word", "'inventory'", "inventory")
            ref_tok = self.take("str", "inventory reference")
            inv_ref = ref_tok.text
            if inv_ref != self.inv.ref:
                self.warnings.append(
                    Diagnostic("warning", ref_tok.line, ref_tok.col, f"rule set targets inventory {inv_ref}, checked against {self.inv.ref}")
                )
        rules: list[RewriteRule] = []
        seen: set[str] = set()
        while self.peek().kind != "eof":
            start = self.peek()
            if not (start.kind == "word" and start.text == "rule"):
                raise DslSyntaxError(start.line, start.col, "'rule'", _describe(start))
            rule = self.rule()
            if rule.id in seen:
                raise DuplicateRuleId(rule.id, start.line, start.col)
            seen.add(rule.id)
            rules.append(rule)
        return RuleSet(name, tuple(rules), inv_ref)

    def rule(self) -> RewriteRule:
        self.pos += 1
        rule_id = self.take("str", "rule id").text
        label = self.take("str", "rule label").text
        self.take("{", "'{'")
        context: Context | None = None
        entries: list[Mapping] = []
        sources: set[tuple[str, ...]] = set()
        while True:
            tok = self.peek()
            if tok.kind == "}":
                self.pos += 1
                break
            if tok.kind == "word" and tok.text == "context" and self.toks[self.pos + 1].kind == ":":
                if context is not None:
                    raise DslSyntaxError(tok.line, tok.col, "at most one context per rule", "second 'context'")
                self.pos += 2
                ctx_tok = self.take("word", "context kind")
                if ctx_tok.text not in _CONTEXT_NAMES:
                    raise DslSyntaxError(ctx_tok.line, ctx_tok.col, "one of " + "|".join(_CONTEXT_NAMES), repr(ctx_tok.text))
                context = _CONTEXT_NAMES[ctx_tok.text]
                self.take(";", "';'")
                continue
            if tok.kind != "word":
                raise DslSyntaxError(tok.line, tok.col, "mapping, 'context' or '}'", _describe(tok))
            src = self.symbols(allow_empty=False)
            self.take("arrow", "'->'")
            tgt = self.symbols(allow_empty=True)
            tag = None
            if self.peek().kind == "tag":
                tag = self.peek().text
                self.pos += 1
            self.take(";", "';'")
            if src in sources:
                raise DuplicateSource(f"duplicate source {' '.join(src)!r} in rule {rule_id!r}", tok.line, tok.col)
            sources.add(src)
            entries.append(Mapping(src, tgt, tag))
        return RewriteRule(rule_id, label, context or Context.ANYWHERE, tuple(entries))

    def symbols(self, allow_empty: bool) -> tuple[str, ...]:
        out: list[str] = []
        first = self.peek()
        while self.peek().kind == "word":
            tok = self.peek()
            self.pos += 1
            if tok.text == EMPTY_TARGET:
                if not allow_empty or out or self.peek().kind == "word":
                    raise DslSyntaxError(tok.line, tok.col, "phoneme symbol", f"'{EMPTY_TARGET}'")
                return ()
            sym = normalize(tok.text)
            if sym not in self.inv:
                raise UnknownPhoneme(tok.line, tok.col, tok.text)
            out.append(sym)
        if not out:
            raise DslSyntaxError(first.line, first.col, "phoneme symbol", _describe(first))
        return tuple(out)


def parse_document(text: str, inventory: Inventory | None = None) -> RuleSetDocument:
    """Parse without raising; errors land in ``diagnostics``."""
    inv = inventory or default_inventory()
    try:
        parser = _Parser(text, inv)
        rs = parser.document()
    except DslError as e:
        return RuleSetDocument(text, None, [Diagnostic("error", e.line, e.col, str(e))])
    return RuleSetDocument(text, rs, parser.warnings)


def parse_ruleset(text: str, inventory: Inventory | None = None) -> RuleSet:
    return _Parser(text, inventory or default_inventory()).document()


def parse_ruleset_bytes(data: bytes, inventory: Inventory | None = None) -> RuleSet:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        head = data[: e.start]
        line = head.count(b"\n") + 1
        col = len(head[head.rfind(b"\n") + 1 :].decode("utf-8", "replace")) + 1
        raise DslError(f"invalid UTF-8 byte 0x{data[e.start]:02x}", line, col) from None
    return parse_ruleset(text, inventory)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r") + '"'


def serialize_ruleset(rs: RuleSet) -> str:
    """Canonical text form: two-space indent, one mapping per line."""
    lines = [f"ruleset {_quote(rs.name)} inventory {_quote(rs.inventory_ref)}"]
    for rule in rs.rules:
        lines.append("")
        lines.append(f"rule {_quote(rule.id)} {_quote(rule.name)} {{")
        lines.append(f"  context: {rule.context.value};")
        for m in rule.entries:
            tgt = " ".join(m.target) if m.target else EMPTY_TARGET
            tag = f" @{m.tag}" if m.tag else ""
            lines.append(f"  {' '.join(m.source)} -> {tgt}{tag};")
        lines.append("}")
    return "\n".join(lines) + "\n"
