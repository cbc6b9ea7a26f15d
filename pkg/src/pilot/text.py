"""Concrete natural-language syntax for policies.

One document holds one policy:

    <Entity> may collect data of type <datatype> [if <condition>]
    and use it for <purpose-list> purposes until <date>.

followed by zero or more transfer sentences:

    This data may be transferred to <Entity> which may use it for
    <purpose-list> purposes until <date> [if <condition>].

Keywords are case-insensitive; labels are case-sensitive identifiers.
Condition syntax: infix ``= != < <= > >=`` (``is`` is a synonym for ``=``),
``and``, ``not``, ``true``, ``false`` and parentheses. A lowercase
identifier is a data-item reference; a capitalized bare word or a quoted
string is a string constant; integers and DD/MM/YYYY dates are literals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .conditions import (
    And,
    Atom,
    Condition,
    Const,
    FF,
    FalseCond,
    FuncApp,
    ItemRef,
    Not,
    TT,
    Term,
    TrueCond,
)
from .errors import PolicySyntaxError, UnknownLabelError
from .policy import DataCommunicationRule, DataUsageRule, Hierarchies, PilotPolicy, dcr_key
from .timestamps import Timestamp

KEYWORDS = {
    "may", "collect", "data", "of", "type", "if", "and", "use", "it", "for",
    "purposes", "until", "this", "be", "transferred", "to", "which",
    "not", "true", "false", "is",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<date>\d{2}/\d{2}/\d{4})
  | (?P<int>\d+)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<op><=|>=|!=|=|<|>)
  | (?P<punct>[.,()])
  | (?P<ws>\s+)
  | (?P<bad>.)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # date | int | word | string | op | punct | eof
    text: str
    start: int
    end: int

    @property
    def span(self) -> Tuple[int, int]:
        return (self.start, self.end)


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "bad":
            raise PolicySyntaxError(f"unexpected character {m.group()!r}", (m.start(), m.end()))
        tokens.append(Token(kind, m.group(), m.start(), m.end()))
    tokens.append(Token("eof", "", len(text), len(text)))
    return tokens


@dataclass
class PolicyDocument:
    source: str
    policy: PilotPolicy
    spans: Dict[str, Tuple[int, int]] = field(default_factory=dict)


class _Parser:
    def __init__(self, tokens: List[Token], hierarchies: Optional[Hierarchies]):
        self.tokens = tokens
        self.pos = 0
        self.hs = hierarchies
        self.spans: Dict[str, Tuple[int, int]] = {}

    # -- token plumbing ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        shown = tok.text if tok.kind != "eof" else "end of input"
        raise PolicySyntaxError(f"{message}, got {shown!r}", tok.span)

    def is_keyword(self, tok: Token, word: str) -> bool:
        return tok.kind == "word" and tok.text.lower() == word

    def expect_keyword(self, word: str) -> Token:
        tok = self.peek()
        if not self.is_keyword(tok, word):
            self.fail(f"expected {word!r}")
        return self.next()

    def expect_keywords(self, *words: str):
        for w in words:
            self.expect_keyword(w)

    def expect_punct(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind != "punct" or tok.text != text:
            self.fail(f"expected {text!r}")
        return self.next()

    def expect_label(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != "word":
            self.fail(f"expected {kind} name")
        if tok.text.lower() in KEYWORDS:
            self.fail(f"expected {kind} name")
        return self.next()

    def check_label(self, tok: Token, kind: str):
        if self.hs is None:
            return
        hier = {
            "entity": self.hs.entities,
            "datatype": self.hs.datatypes,
            "purpose": self.hs.purposes,
        }[kind]
        if tok.text not in hier.labels:
            raise UnknownLabelError(tok.text, kind, tok.span)

    # -- grammar ---------------------------------------------------------------

    def parse_policy(self) -> PilotPolicy:
        start = self.peek().start
        entity_tok = self.expect_label("entity")
        self.check_label(entity_tok, "entity")
        self.spans["collect.entity"] = entity_tok.span
        self.expect_keywords("may", "collect", "data", "of", "type")
        datatype_tok = self.expect_label("datatype")
        self.check_label(datatype_tok, "datatype")
        self.spans["datatype"] = datatype_tok.span

        condition: Condition = TT
        if self.is_keyword(self.peek(), "if"):
            self.next()
            cond_start = self.peek().start
            condition = self.parse_condition(stop_before=("use", "it", "for"))
            self.spans["collect.condition"] = (cond_start, self.tokens[self.pos - 1].end)
            self.expect_keyword("and")
        else:
            self.expect_keyword("and")
        self.expect_keywords("use", "it", "for")
        purposes, pspan = self.parse_purposes()
        self.spans["collect.purposes"] = pspan
        self.expect_keywords("purposes", "until")
        retention, rspan = self.parse_date()
        self.spans["collect.retention"] = rspan
        end_tok = self.expect_punct(".")

        dcr = DataCommunicationRule(condition, entity_tok.text, DataUsageRule(purposes, retention))
        self.spans["dcr"] = (start, end_tok.end)

        transfers = []
        index = 0
        while self.is_keyword(self.peek(), "this"):
            transfers.append(self.parse_transfer(index))
            index += 1
        tok = self.peek()
        if tok.kind != "eof":
            self.fail("expected a transfer sentence or end of input")
        self.spans["policy"] = (start, self.tokens[self.pos - 1].end if self.pos else start)
        return PilotPolicy(datatype_tok.text, dcr, frozenset(transfers))

    def parse_transfer(self, index: int) -> DataCommunicationRule:
        prefix = f"transfer[{index}]"
        start = self.peek().start
        self.expect_keywords("this", "data", "may", "be", "transferred", "to")
        entity_tok = self.expect_label("entity")
        self.check_label(entity_tok, "entity")
        self.spans[f"{prefix}.entity"] = entity_tok.span
        self.expect_keywords("which", "may", "use", "it", "for")
        purposes, pspan = self.parse_purposes()
        self.spans[f"{prefix}.purposes"] = pspan
        self.expect_keywords("purposes", "until")
        retention, rspan = self.parse_date()
        self.spans[f"{prefix}.retention"] = rspan
        condition: Condition = TT
        if self.is_keyword(self.peek(), "if"):
            self.next()
            cond_start = self.peek().start
            condition = self.parse_condition(stop_before=None)
            self.spans[f"{prefix}.condition"] = (cond_start, self.tokens[self.pos - 1].end)
        end_tok = self.expect_punct(".")
        self.spans[prefix] = (start, end_tok.end)
        return DataCommunicationRule(condition, entity_tok.text, DataUsageRule(purposes, retention))

    def parse_purposes(self) -> Tuple[frozenset, Tuple[int, int]]:
        first = self.expect_label("purpose")
        self.check_label(first, "purpose")
        labels = [first.text]
        start, end = first.span
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.text == ",":
                self.next()
            elif self.is_keyword(tok, "and"):
                # 'and' continues the list only when followed by another
                # purpose label rather than the fixed 'use it for' phrase.
                nxt = self.peek(1)
                if nxt.kind != "word" or nxt.text.lower() in KEYWORDS:
                    break
                self.next()
            else:
                break
            lab = self.expect_label("purpose")
            self.check_label(lab, "purpose")
            labels.append(lab.text)
            end = lab.end
        return frozenset(labels), (start, end)

    def parse_date(self) -> Tuple[Timestamp, Tuple[int, int]]:
        tok = self.peek()
        if tok.kind != "date":
            self.fail("expected a DD/MM/YYYY date")
        self.next()
        return Timestamp.parse(tok.text), tok.span

    # -- conditions ------------------------------------------------------------

    def parse_condition(self, stop_before: Optional[Tuple[str, ...]]) -> Condition:
        parts = [self.parse_condition_unary(stop_before)]
        while self.is_keyword(self.peek(), "and"):
            if stop_before is not None and self._lookahead_matches(1, stop_before):
                break
            self.next()
            parts.append(self.parse_condition_unary(stop_before))
        if len(parts) == 1:
            return parts[0]
        return And(tuple(parts))

    def _lookahead_matches(self, offset: int, words: Tuple[str, ...]) -> bool:
        return all(self.is_keyword(self.peek(offset + i), w) for i, w in enumerate(words))

    def parse_condition_unary(self, stop_before) -> Condition:
        tok = self.peek()
        if self.is_keyword(tok, "not"):
            self.next()
            return Not(self.parse_condition_unary(stop_before))
        if tok.kind == "punct" and tok.text == "(":
            self.next()
            inner = self.parse_condition(stop_before=None)
            self.expect_punct(")")
            return inner
        if self.is_keyword(tok, "true"):
            self.next()
            return TT
        if self.is_keyword(tok, "false"):
            self.next()
            return FF
        return self.parse_atom()

    def parse_atom(self) -> Condition:
        left = self.parse_term()
        tok = self.peek()
        if tok.kind == "op":
            pred = tok.text
            self.next()
        elif self.is_keyword(tok, "is"):
            pred = "="
            self.next()
        else:
            self.fail("expected a predicate (is, =, !=, <, <=, >, >=)")
        right = self.parse_term()
        return Atom(pred, left, right)

    def parse_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return Const(int(tok.text))
        if tok.kind == "date":
            self.next()
            return Const(Timestamp.parse(tok.text))
        if tok.kind == "string":
            self.next()
            return Const(tok.text[1:-1])
        if tok.kind == "word" and tok.text.lower() not in KEYWORDS:
            self.next()
            if self.peek().kind == "punct" and self.peek().text == "(":
                self.next()
                args = [self.parse_term()]
                while self.peek().kind == "punct" and self.peek().text == ",":
                    self.next()
                    args.append(self.parse_term())
                self.expect_punct(")")
                return FuncApp(tok.text, tuple(args))
            if tok.text[0].isupper():
                return Const(tok.text)
            return ItemRef(tok.text)
        self.fail("expected a term")


def parse_document(text: str, hierarchies: Optional[Hierarchies] = None) -> PolicyDocument:
    parser = _Parser(tokenize(text), hierarchies)
    policy = parser.parse_policy()
    return PolicyDocument(source=text, policy=policy, spans=dict(parser.spans))


def parse_policy(text: str, hierarchies: Optional[Hierarchies] = None) -> PilotPolicy:
    return parse_document(text, hierarchies).policy


def parse_condition(text: str, hierarchies: Optional[Hierarchies] = None) -> Condition:
    """Parse a standalone condition (used by scenario files and the API)."""
    parser = _Parser(tokenize(text), hierarchies)
    cond = parser.parse_condition(stop_before=None)
    tok = parser.peek()
    if tok.kind != "eof":
        parser.fail("unexpected trailing input")
    return cond


# --- rendering ---------------------------------------------------------------

_BARE_STRING_RE = re.compile(r"^[A-Z][A-Za-z0-9_]*$")


def render_term(term: Term) -> str:
    if isinstance(term, ItemRef):
        return term.item
    if isinstance(term, Const):
        v = term.value
        if isinstance(v, Timestamp):
            return str(v)
        if isinstance(v, int):
            return str(v)
        if _BARE_STRING_RE.match(v) and v.lower() not in KEYWORDS:
            return v
        return f'"{v}"'
    return f"{term.func}({', '.join(render_term(a) for a in term.args)})"


def render_condition(phi: Condition) -> str:
    if isinstance(phi, TrueCond):
        return "true"
    if isinstance(phi, FalseCond):
        return "false"
    if isinstance(phi, Atom):
        op = "is" if phi.predicate == "=" else phi.predicate
        return f"{render_term(phi.left)} {op} {render_term(phi.right)}"
    if isinstance(phi, Not):
        inner = render_condition(phi.operand)
        if isinstance(phi.operand, And):
            inner = f"({inner})"
        return f"not {inner}"
    if isinstance(phi, And):
        parts = []
        for part in phi.conjuncts:
            rendered = render_condition(part)
            if isinstance(part, And):
                rendered = f"({rendered})"
            parts.append(rendered)
        return " and ".join(parts)
    raise TypeError(f"not a condition: {phi!r}")


def _render_purposes(purposes: frozenset) -> str:
    labels = sorted(purposes)
    if len(labels) == 1:
        return labels[0]
    return ", ".join(labels[:-1]) + " and " + labels[-1]


def render_policy(policy: PilotPolicy) -> str:
    """Canonical sentence form; parses back to the same policy up to
    condition normalization."""
    dcr = policy.dcr
    head = f"{dcr.entity} may collect data of type {policy.datatype}"
    if dcr.condition != TT:
        head += f" if {render_condition(dcr.condition)}"
    head += (
        f" and use it for {_render_purposes(dcr.dur.purposes)} purposes"
        f" until {dcr.dur.retention}."
    )
    sentences = [head]
    for tr in sorted(policy.transfers, key=dcr_key):
        sentence = (
            f"This data may be transferred to {tr.entity} which may use it for"
            f" {_render_purposes(tr.dur.purposes)} purposes until {tr.dur.retention}"
        )
        if tr.condition != TT:
            sentence += f" if {render_condition(tr.condition)}"
        sentences.append(sentence + ".")
    return "\n".join(sentences)
