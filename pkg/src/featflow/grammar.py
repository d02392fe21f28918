"""Grammar model, text notation, and static validation.

A grammar is an ordered list of rules over feature structures plus a
restrictor (the set of feature paths discarded when results are stored).
The text notation, one statement per ``.``-terminated group::

    restrict slash, agr.num.        % declare restrictor paths (union)
    start S.                        % optional; default: first rule's mother
    S[] -> NP[agr=$1] VP[agr=$1].   % a rule; $n tags mark shared nodes
    NP[slash=NP[]] -> .             % empty right-hand side
    X[] -> term Det[].              % `term` injects ter=+ (preterminal mark)

An AVM is ``Label? [ feature=value, ... ]?``; a label is sugar for the
``cat`` feature with the lowercased label as an atomic value.  Values are
atoms (identifiers, ``+``, ``-``, or quoted strings), nested AVMs, or
``$n`` tags; a tag's value may be constrained at any occurrence
(``$1:NP[]``), and multiple constraints must be compatible.  ``%`` starts
a comment.  ``#n`` tags are accepted as synonyms of ``$n`` so that printed
output reparses.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import fs
from .fs import Node, UnificationFailed, atom, clone, clone_many, deref

DEFAULT_MAX_ITERATIONS = 100
DEFAULT_MAX_PAIRS = 10000

END_CATEGORY_ATOM = "$"
RESERVED_WORDS = ("restrict", "start", "term")


@dataclass(frozen=True)
class ParseIssue:
    line: int
    col: int
    message: str

    def __str__(self):
        return f"{self.line}:{self.col}: {self.message}"


class GrammarSyntaxError(Exception):
    """Aggregate of all parse issues found in one document."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


@dataclass
class Rule:
    rule_id: int
    mother: Node
    daughters: tuple
    line: int = 0

    @property
    def is_epsilon(self) -> bool:
        return not self.daughters

    def roots(self) -> list:
        return [self.mother, *self.daughters]


@dataclass
class Grammar:
    rules: tuple
    restrictor: frozenset
    start: Node
    start_declared: str | None = None
    name: str = "<string>"
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    max_pairs: int = DEFAULT_MAX_PAIRS

    def with_restrictor(self, restrictor) -> "Grammar":
        return replace(self, restrictor=fs.make_restrictor(restrictor))

    def rule(self, rule_id: int) -> Rule:
        return self.rules[rule_id - 1]


def is_preterminal(cat: Node) -> bool:
    """True iff the category carries ``ter`` with the atom ``+`` at its root."""
    n = deref(cat)
    if n.atom is not None:
        return False
    t = n.arcs.get("ter")
    return t is not None and deref(t).atom == "+"


def label_of(cat: Node) -> str | None:
    n = deref(cat)
    if n.atom is not None:
        return None
    c = n.arcs.get("cat")
    return deref(c).atom if c is not None else None


def end_category() -> Node:
    """The reserved end-of-input category; unwritable in grammar rules."""
    return Node(arcs={"cat": atom(END_CATEGORY_ATOM)})


def instantiate(rule: Rule) -> Rule:
    """Fresh copy of a rule; the algorithms never touch grammar-owned nodes."""
    roots = clone_many(rule.roots())
    return Rule(rule.rule_id, roots[0], tuple(roots[1:]), rule.line)


# ---------------------------------------------------------------------------
# lexer

_WORD_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
_WORD_CHARS = _WORD_START | set("0123456789_")


@dataclass(frozen=True)
class _Tok:
    kind: str
    value: str
    line: int
    col: int


class _Lexer:
    def __init__(self, text):
        self.text = text
        self.issues = []
        self.tokens = []
        self._lex()

    def _pos(self, index):
        line = self.text.count("\n", 0, index) + 1
        last = self.text.rfind("\n", 0, index)
        return line, index - last

    def _emit(self, kind, value, index):
        line, col = self._pos(index)
        self.tokens.append(_Tok(kind, value, line, col))

    def _issue(self, message, index):
        line, col = self._pos(index)
        self.issues.append(ParseIssue(line, col, message))

    def _lex(self):
        text, n = self.text, len(self.text)
        i = 0
        while i < n:
            c = text[i]
            if c in " \t\r\n":
                i += 1
                continue
            if c == "%":
                nl = text.find("\n", i)
                i = n if nl < 0 else nl + 1
                continue
            if c == '"':
                i = self._lex_string(i)
                continue
            if c == "-" and i + 1 < n and text[i + 1] == ">":
                self._emit("ARROW", "->", i)
                i += 2
                continue
            if c in "+-":
                self._emit("SYM", c, i)
                i += 1
                continue
            if c in "[],=:":
                self._emit({"[": "LB", "]": "RB", ",": "COMMA", "=": "EQ", ":": "COLON"}[c], c, i)
                i += 1
                continue
            if c == ".":
                self._emit("STOP", ".", i)
                i += 1
                continue
            if c in "$#":
                j = i + 1
                while j < n and text[j].isdigit():
                    j += 1
                if j > i + 1:
                    self._emit("TAG", text[i + 1 : j], i)
                elif c == "$":
                    self._emit("DOLLAR", "$", i)
                else:
                    self._issue("unknown syntax: stray '#'", i)
                i = j if j > i + 1 else i + 1
                continue
            if c in _WORD_START:
                j = i + 1
                while j < n and text[j] in _WORD_CHARS:
                    j += 1
                # a dot glued to a further identifier extends a feature path
                while j + 1 < n and text[j] == "." and text[j + 1] in _WORD_START:
                    j += 2
                    while j < n and text[j] in _WORD_CHARS:
                        j += 1
                self._emit("WORD", text[i:j], i)
                i = j
                continue
            self._issue(f"unknown syntax: unexpected character {c!r}", i)
            i += 1
        self._emit("EOF", "", n)

    def _lex_string(self, i):
        text, n = self.text, len(self.text)
        j = i + 1
        out = []
        while j < n:
            c = text[j]
            if c == "\\" and j + 1 < n:
                out.append(text[j + 1])
                j += 2
                continue
            if c == '"':
                self._emit("STR", "".join(out), i)
                return j + 1
            if c == "\n":
                break
            out.append(c)
            j += 1
        self._issue("unknown syntax: unterminated string", i)
        return j


# ---------------------------------------------------------------------------
# parser

class _Abort(Exception):
    pass


class _Parser:
    def __init__(self, text, name):
        lx = _Lexer(text)
        self.tokens = lx.tokens
        self.issues = lx.issues
        self.name = name
        self.idx = 0
        self.rules = []
        self.restrictor_paths = set()
        self.start_declared = None

    def peek(self) -> _Tok:
        return self.tokens[self.idx]

    def take(self) -> _Tok:
        t = self.tokens[self.idx]
        if t.kind != "EOF":
            self.idx += 1
        return t

    def fail(self, tok, message):
        self.issues.append(ParseIssue(tok.line, tok.col, message))
        raise _Abort()

    def expect(self, kind, what):
        t = self.take()
        if t.kind != kind:
            self.fail(t, f"unknown syntax: expected {what}, found {t.value!r}")
        return t

    def sync(self):
        while self.peek().kind not in ("STOP", "EOF"):
            self.take()
        if self.peek().kind == "STOP":
            self.take()

    def parse(self) -> Grammar:
        while self.peek().kind != "EOF":
            try:
                self.statement()
            except _Abort:
                self.sync()
        if not self.rules and not self.issues:
            self.issues.append(ParseIssue(1, 1, "a grammar needs at least one rule"))
        if self.issues:
            raise GrammarSyntaxError(self.issues)
        if self.start_declared is not None:
            start = Node(arcs={"cat": atom(self.start_declared)})
        else:
            start = clone(self.rules[0].mother)
        return Grammar(
            rules=tuple(self.rules),
            restrictor=frozenset(self.restrictor_paths),
            start=start,
            start_declared=self.start_declared,
            name=self.name,
        )

    def statement(self):
        t = self.peek()
        if t.kind == "WORD" and t.value == "restrict":
            self.take()
            self.restrict_statement()
        elif t.kind == "WORD" and t.value == "start":
            self.take()
            self.start_statement()
        else:
            self.rule_statement()

    def restrict_statement(self):
        while True:
            t = self.take()
            if t.kind != "WORD":
                self.fail(t, "restrictor path malformed")
            try:
                self.restrictor_paths.add(fs.make_path(t.value))
            except ValueError:
                self.fail(t, "restrictor path malformed")
            t = self.take()
            if t.kind == "STOP":
                return
            if t.kind != "COMMA":
                self.fail(t, "restrictor path malformed: expected ',' or '.'")

    def start_statement(self):
        t = self.take()
        if t.kind != "WORD" or "." in t.value:
            self.fail(t, "unknown syntax: start expects a category label")
        self.start_declared = t.value.lower()
        self.expect("STOP", "'.'")

    def rule_statement(self):
        tags = {}
        line = self.peek().line
        mother = self.category(tags)
        self.expect("ARROW", "'->'")
        daughters = []
        while self.peek().kind != "STOP":
            if self.peek().kind == "EOF":
                self.fail(self.peek(), "unknown syntax: unterminated rule")
            preterminal_sugar = False
            if self.peek().kind == "WORD" and self.peek().value == "term":
                self.take()
                preterminal_sugar = True
            d = self.category(tags)
            if preterminal_sugar:
                self.mark_preterminal(d)
            daughters.append(d)
        self.take()  # STOP
        roots = [mother, *daughters]
        if fs._cyclic(roots):
            self.issues.append(ParseIssue(line, 1, "rule builds a cyclic structure"))
            return
        self.rules.append(Rule(len(self.rules) + 1, mother, tuple(daughters), line))

    def mark_preterminal(self, cat):
        n = deref(cat)
        if n.atom is not None:
            return
        have = n.arcs.get("ter")
        if have is None:
            n.arcs["ter"] = atom("+")
        else:
            try:
                fs.unify_in_place(have, atom("+"))
            except UnificationFailed:
                self.issues.append(
                    ParseIssue(self.peek().line, self.peek().col, "term used on a category with ter incompatible with '+'")
                )

    def category(self, tags, allow_end_mark=False) -> Node:
        t = self.peek()
        if t.kind == "DOLLAR":
            self.take()
            if not allow_end_mark:
                self.fail(t, "unknown syntax: '$' is reserved for the end marker")
            return end_category()
        if t.kind == "TAG":
            return self.tag_value(tags)
        if t.kind == "LB":
            return Node(arcs=self.avm_body(tags, {}))
        if t.kind == "WORD":
            self.take()
            if "." in t.value:
                self.fail(t, f"unknown syntax: unexpected path {t.value!r}")
            fields = {"cat": atom(t.value.lower())}
            if self.peek().kind == "LB":
                self.avm_body(tags, fields)
            return Node(arcs=fields)
        self.fail(t, f"unknown syntax: expected a category, found {t.value!r}")

    def avm_body(self, tags, fields) -> dict:
        self.expect("LB", "'['")
        if self.peek().kind == "RB":
            self.take()
            return fields
        while True:
            name_tok = self.take()
            if name_tok.kind != "WORD" or not fs.valid_feature(name_tok.value):
                self.fail(name_tok, f"unknown syntax: expected a feature name, found {name_tok.value!r}")
            self.expect("EQ", "'='")
            value = self.value(tags)
            if name_tok.value in fields:
                self.issues.append(
                    ParseIssue(name_tok.line, name_tok.col, f"duplicate feature {name_tok.value!r} in one AVM")
                )
            else:
                fields[name_tok.value] = value
            t = self.take()
            if t.kind == "RB":
                return fields
            if t.kind != "COMMA":
                self.fail(t, "unknown syntax: expected ',' or ']'")

    def value(self, tags) -> Node:
        t = self.peek()
        if t.kind == "STR":
            self.take()
            return atom(t.value)
        if t.kind == "SYM":
            self.take()
            return atom(t.value)
        if t.kind == "TAG":
            return self.tag_value(tags)
        if t.kind == "LB":
            return Node(arcs=self.avm_body(tags, {}))
        if t.kind == "WORD":
            self.take()
            if "." in t.value:
                self.fail(t, f"unknown syntax: unexpected path {t.value!r}")
            if self.peek().kind == "LB":
                fields = {"cat": atom(t.value.lower())}
                self.avm_body(tags, fields)
                return Node(arcs=fields)
            return atom(t.value)
        self.fail(t, f"unknown syntax: expected a value, found {t.value!r}")

    def tag_value(self, tags) -> Node:
        t = self.take()
        tag = tags.setdefault(t.value, fs.empty())
        if self.peek().kind == "COLON":
            self.take()
            constraint = self.value(tags)
            try:
                fs.unify_in_place(tag, constraint)
            except UnificationFailed as exc:
                self.issues.append(
                    ParseIssue(t.line, t.col, f"tag ${t.value} used with two incompatible value annotations ({exc})")
                )
        return deref(tag)


def parse_grammar(text: str, name: str = "<string>") -> Grammar:
    """Parse a grammar document; raises GrammarSyntaxError listing all issues."""
    return _Parser(text, name).parse()


def parse_category(text: str) -> Node:
    """Parse one standalone AVM (the end marker ``$`` is accepted here)."""
    return parse_category_sequence(text)[0]


def parse_category_sequence(text: str) -> list:
    """Parse whitespace-separated AVMs sharing one tag space."""
    p = _Parser(text, "<category>")
    cats = []
    tags = {}
    try:
        while p.peek().kind != "EOF":
            cats.append(p.category(tags, allow_end_mark=True))
    except _Abort:
        pass
    if not p.issues and not cats:
        p.issues.append(ParseIssue(1, 1, "expected at least one category"))
    if not p.issues and fs._cyclic(cats):
        p.issues.append(ParseIssue(1, 1, "cyclic structure"))
    if p.issues:
        raise GrammarSyntaxError(p.issues)
    return cats


def parse_restrictor(text: str) -> frozenset:
    """Parse a comma/whitespace separated restrictor listing ('' is empty)."""
    parts = [p for chunk in text.split(",") for p in chunk.split()]
    return fs.make_restrictor(parts)


# ---------------------------------------------------------------------------
# printing

def _atom_text(name: str) -> str:
    if fs.valid_feature(name) or name in ("+", "-"):
        return name
    escaped = name.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def format_roots(roots, sigil: str = "#") -> list:
    """Render a space as one string per root with shared tag numbering.

    Complex nodes referenced more than once get ``#n`` tags, numbered by
    first occurrence left to right; atoms are never tagged (same-named
    atoms are interchangeable).  The output reparses to an equivalent
    space via the AVM notation.
    """
    roots = [deref(r) for r in roots]
    counts = {}

    def count(n):
        n = deref(n)
        if n.atom is not None:
            return
        counts[id(n)] = counts.get(id(n), 0) + 1
        if counts[id(n)] == 1:
            for _, child in sorted(n.arcs.items()):
                count(child)

    for r in roots:
        count(r)

    tag_ids = {}

    def render(n):
        n = deref(n)
        if n.atom is not None:
            return _atom_text(n.atom)
        prefix = ""
        if counts.get(id(n), 0) > 1:
            known = tag_ids.get(id(n))
            if known is not None:
                return f"{sigil}{known}"
            tag_ids[id(n)] = len(tag_ids) + 1
            prefix = f"{sigil}{tag_ids[id(n)]}:"
        cat = n.arcs.get("cat")
        cat_atom = deref(cat).atom if cat is not None else None
        if not prefix and cat_atom == END_CATEGORY_ATOM and len(n.arcs) == 1:
            return "$"
        label = ""
        rest = dict(n.arcs)
        if cat_atom is not None and fs.valid_feature(cat_atom):
            label = cat_atom
            del rest["cat"]
        parts = [f"{feat}={render(child)}" for feat, child in sorted(rest.items())]
        return f"{prefix}{label}[{', '.join(parts)}]"

    return [render(r) for r in roots]


def format_node(root: Node) -> str:
    return format_roots([root])[0]


def format_grammar(g: Grammar) -> str:
    """Pretty-print a grammar back into its text notation."""
    lines = []
    if g.restrictor:
        paths = ", ".join(".".join(p) for p in sorted(g.restrictor))
        lines.append(f"restrict {paths}.")
    if g.start_declared is not None:
        lines.append(f"start {g.start_declared}.")
    for r in g.rules:
        rendered = format_roots(r.roots(), sigil="$")
        if r.is_epsilon:
            lines.append(f"{rendered[0]} -> .")
        else:
            lines.append(f"{rendered[0]} -> {' '.join(rendered[1:])}.")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    rule_id: int | None = None

    def __str__(self):
        where = f"rule {self.rule_id}: " if self.rule_id is not None else ""
        return f"{self.severity}: {where}{self.message}"


def validate(g: Grammar) -> list:
    """Static checks; errors make FIRST/FOLLOW computation unfounded.

    Every category that is not a preterminal must be rewritable, i.e. its
    restricted form must unify with some rule mother's restricted form.
    """
    out = []
    mothers = [fs.restrict(r.mother, g.restrictor) for r in g.rules]
    for r in g.rules:
        for idx, d in enumerate(r.daughters, start=1):
            if is_preterminal(d):
                continue
            rd = fs.restrict(d, g.restrictor)
            if not any(fs.unifiable(rd, m) for m in mothers):
                out.append(
                    Diagnostic("error", f"daughter {idx} unifies with no rule mother", r.rule_id)
                )
    reachable = set()
    frontier = [fs.restrict(g.start, g.restrictor)]
    changed = True
    while changed:
        changed = False
        for r, m in zip(g.rules, mothers):
            if r.rule_id in reachable:
                continue
            if any(fs.unifiable(m, c) for c in frontier):
                reachable.add(r.rule_id)
                frontier.extend(fs.restrict(d, g.restrictor) for d in r.daughters)
                changed = True
    for r in g.rules:
        if r.rule_id not in reachable:
            out.append(Diagnostic("warning", "unreachable from the start category", r.rule_id))
        if r.is_epsilon and is_preterminal(r.mother):
            out.append(Diagnostic("warning", "empty rule with a preterminal mother", r.rule_id))
    return out
