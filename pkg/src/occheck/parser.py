"""Reader and printer for the Prolog-like source format.

Supported syntax: clauses ``h :- b1, b2.``, facts, queries ``?- a, b.``,
mode directives ``:- mode p(+,-,?).`` and ``:- mode2 p(+,-).``, list sugar,
quoted atoms, integers, ``%`` comments and the infix operators in OPS.
``_`` is a fresh variable per occurrence.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from .core import (
    Atom,
    Clause,
    Compound,
    Equation,
    EquationSet,
    Program,
    Query,
    Substitution,
    Var,
)

# name -> (priority, type)
OPS: dict[str, tuple[int, str]] = {
    "=": (700, "xfx"),
    "==": (700, "xfx"),
    "\\==": (700, "xfx"),
    "<": (700, "xfx"),
    ">": (700, "xfx"),
    "=<": (700, "xfx"),
    ">=": (700, "xfx"),
    "+": (500, "yfx"),
    "-": (500, "yfx"),
    "*": (400, "yfx"),
    "/": (400, "yfx"),
    "^": (200, "xfy"),
}

NIL = "[]"
CONS = "."
RESERVED_PREFIX = "$"

MODE_CHARS = {"+": "+", "-": "-", "?": "?", "−": "-", "⊥": "?"}


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line = line
        self.col = col


@dataclass
class SourceFile:
    clauses: list[Clause] = field(default_factory=list)
    queries: list[Query] = field(default_factory=list)
    modings: dict[tuple[str, int], str] = field(default_factory=dict)
    modings2: dict[tuple[str, int], str] = field(default_factory=dict)

    @property
    def program(self) -> Program:
        return Program(tuple(self.clauses))


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<int>\d+)
  | (?P<qname>'(?:[^'\\]|\\.|'')*')
  | (?P<end>\.(?=\s|%|$))
  | (?P<punct>[()\[\],|])
  | (?P<sym>[+\-*/\\^<>=~:.?@#&$−⊥]+)
    """,
    re.VERBOSE,
)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int
    start: int = 0
    end: int = 0


def tokenize(text: str) -> list[Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            if kind == "qname":
                s = s[1:-1].replace("''", "'").replace("\\'", "'").replace("\\\\", "\\")
            toks.append(Tok(kind, s, line, pos - line_start + 1, pos, m.end()))
        nl = m.group().count("\n")
        if nl:
            line += nl
            line_start = pos + m.group().rfind("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1, pos, pos))
    return toks


class _Reader:
    def __init__(self, text: str, fresh=None, allow_reserved=False):
        self.toks = tokenize(text)
        self.i = 0
        self.fresh = fresh if fresh is not None else itertools.count(1)
        self.allow_reserved = allow_reserved
        self.written = {t.text for t in self.toks if t.kind == "var"}

    def fresh_var(self) -> Var:
        while True:
            name = f"_{next(self.fresh)}"
            if name not in self.written:
                return Var(name)

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def advance(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: Tok | None = None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def expect(self, kind: str, text: str | None = None) -> Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = text if text is not None else kind
            got = t.text or t.kind
            raise self.error(f"expected {want!r}, found {got!r}")
        return self.advance()

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    # terms -------------------------------------------------------------

    def term(self, max_prec: int = 999):
        left, left_prec = self.primary(max_prec)
        while True:
            t = self.tok
            if t.kind not in ("sym", "name") or t.text not in OPS:
                return left
            prec, typ = OPS[t.text]
            if prec > max_prec:
                return left
            left_max = prec if typ[0] == "y" else prec - 1
            right_max = prec if typ[2] == "y" else prec - 1
            if left_prec > left_max:
                return left
            self.advance()
            right = self.term(right_max)
            left, left_prec = Compound(t.text, (left, right)), prec

    def primary(self, max_prec: int):
        t = self.advance()
        if t.kind == "var":
            if t.text == "_":
                return self.fresh_var(), 0
            return Var(t.text), 0
        if t.kind == "int":
            return Compound(t.text, ()), 0
        if t.kind == "punct" and t.text == "(":
            inner = self.term(1200)
            self.expect("punct", ")")
            return inner, 0
        if t.kind == "punct" and t.text == "[":
            return self.list_tail(), 0
        if t.kind in ("name", "qname", "sym"):
            if t.kind == "qname" and t.text.startswith(RESERVED_PREFIX) and not self.allow_reserved:
                raise self.error(f"reserved name {t.text!r}", t)
            nxt = self.tok
            if nxt.kind == "punct" and nxt.text == "(" and nxt.start == t.end:
                self.advance()
                args = [self.term(999)]
                while self.at("punct", ","):
                    self.advance()
                    args.append(self.term(999))
                self.expect("punct", ")")
                return Compound(t.text, tuple(args)), 0
            return Compound(t.text, ()), 0
        raise self.error(f"unexpected {t.text or t.kind!r}", t)

    def list_tail(self):
        if self.at("punct", "]"):
            self.advance()
            return Compound(NIL, ())
        items = [self.term(999)]
        while self.at("punct", ","):
            self.advance()
            items.append(self.term(999))
        tail = Compound(NIL, ())
        if self.at("punct", "|"):
            self.advance()
            tail = self.term(999)
        self.expect("punct", "]")
        for x in reversed(items):
            tail = Compound(CONS, (x, tail))
        return tail

    def goals(self) -> list:
        gs = [self.term(999)]
        while self.at("punct", ","):
            self.advance()
            gs.append(self.term(999))
        return gs


def _to_atom(t, tok: Tok) -> Atom:
    if type(t) is Var:
        raise ParseError(f"variable {t.name} used as a goal", tok.line, tok.col)
    return Atom(t.functor, t.args)


def _mode_string(r: _Reader) -> tuple[str, str]:
    t = r.advance()
    if t.kind not in ("name", "qname", "sym"):
        raise r.error("expected a predicate name in mode directive", t)
    if not r.at("punct", "("):
        return t.text, ""
    r.advance()
    modes = []
    while True:
        m = r.advance()
        # "+,-" may arrive glued as one symbol token such as "+" then "," ...
        chars = m.text if m.kind == "sym" else None
        if chars is None or any(c not in MODE_CHARS for c in chars) or len(chars) != 1:
            raise r.error(f"bad mode {m.text!r}", m)
        modes.append(MODE_CHARS[chars])
        if r.at("punct", ","):
            r.advance()
            continue
        r.expect("punct", ")")
        break
    return t.text, "".join(modes)


def parse_program(text: str, allow_reserved: bool = False) -> SourceFile:
    r = _Reader(text, allow_reserved=allow_reserved)
    src = SourceFile()
    arities: dict[str, tuple[int, Tok]] = {}
    mode_toks: dict[tuple[str, int], Tok] = {}

    def note(atom: Atom, tok: Tok):
        prev = arities.get(atom.pred)
        if prev is None:
            arities[atom.pred] = (atom.arity, tok)
        elif prev[0] != atom.arity:
            raise ParseError(
                f"predicate {atom.pred} used with arity {atom.arity}, earlier {prev[0]}",
                tok.line,
                tok.col,
            )

    while not r.at("eof"):
        start = r.tok
        if r.at("sym", ":-"):
            r.advance()
            d = r.expect("name")
            if d.text not in ("mode", "mode2"):
                raise r.error(f"unknown directive {d.text!r}", d)
            table = src.modings if d.text == "mode" else src.modings2
            while True:
                ptok = r.tok
                name, modes = _mode_string(r)
                if d.text == "mode2" and "?" in modes:
                    raise ParseError("secondary moding admits only + and -", ptok.line, ptok.col)
                key = (name, len(modes))
                if any(k[0] == name for k in table):
                    raise ParseError(f"duplicate mode directive for {name}", ptok.line, ptok.col)
                table[key] = modes
                mode_toks[key] = ptok
                if r.at("punct", ","):
                    r.advance()
                    continue
                break
            r.expect("end")
        elif r.at("sym", "?-"):
            r.advance()
            gs = r.goals()
            r.expect("end")
            q = Query(tuple(_to_atom(g, start) for g in gs))
            for a in q:
                note(a, start)
            src.queries.append(q)
        else:
            head = _to_atom(r.term(1199), start)
            body = []
            if r.at("sym", ":-"):
                r.advance()
                body = [_to_atom(g, start) for g in r.goals()]
            r.expect("end")
            c = Clause(head, tuple(body))
            for a in (head, *body):
                note(a, start)
            src.clauses.append(c)

    for table in (src.modings, src.modings2):
        for (name, n), _ in table.items():
            if name in arities and arities[name][0] != n:
                tok = mode_toks[(name, n)]
                raise ParseError(
                    f"mode for {name} has {n} positions but {name} has arity {arities[name][0]}",
                    tok.line,
                    tok.col,
                )
    return src


def parse_term(text: str):
    r = _Reader(text)
    t = r.term(1200)
    if r.at("end"):
        r.advance()
    r.expect("eof")
    return t


def parse_atom(text: str) -> Atom:
    r = _Reader(text)
    tok = r.tok
    t = r.term(1200)
    if r.at("end"):
        r.advance()
    r.expect("eof")
    return _to_atom(t, tok)


def parse_query(text: str) -> Query:
    text = text.strip()
    if text.startswith("?-"):
        text = text[2:]
    r = _Reader(text)
    tok = r.tok
    gs = r.goals()
    if r.at("end"):
        r.advance()
    r.expect("eof")
    return Query(tuple(_to_atom(g, tok) for g in gs))


def parse_equations(text: str) -> EquationSet:
    """``t1 = u1, t2 = u2.`` as an equation set over terms."""
    r = _Reader(text)
    eqs = []
    if r.at("eof"):
        return EquationSet()
    while True:
        tok = r.tok
        t = r.term(999)
        if type(t) is not Compound or t.functor != "=" or len(t.args) != 2:
            raise ParseError("expected an equation 'lhs = rhs'", tok.line, tok.col)
        eqs.append(Equation(t.args[0], t.args[1]))
        if r.at("punct", ","):
            r.advance()
            continue
        break
    if r.at("end"):
        r.advance()
    r.expect("eof")
    return EquationSet(eqs)


def parse_mode(text: str) -> tuple[tuple[str, int], str]:
    """``p(+,-,?)`` -> (('p', 3), '+-?')."""
    r = _Reader(text.strip().rstrip("."))
    name, modes = _mode_string(r)
    r.expect("eof")
    return (name, len(modes)), modes


# printing --------------------------------------------------------------

_PLAIN = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_SYMBOLIC = re.compile(r"[+\-*/\\^<>=~:.?@#&]+\Z")


def print_name(name: str) -> str:
    if _PLAIN.match(name) or name == NIL or name.isdigit():
        return name
    if _SYMBOLIC.match(name) and name not in (".",):
        return name
    return "'" + name.replace("'", "''") + "'"


def _fmt(t, max_prec: int = 999) -> str:
    if type(t) is Var:
        return t.name
    f, args = t.functor, t.args
    if f == CONS and len(args) == 2:
        items = []
        while type(t) is Compound and t.functor == CONS and len(t.args) == 2:
            items.append(_fmt(t.args[0]))
            t = t.args[1]
        inner = ",".join(items)
        if type(t) is Compound and t.functor == NIL and not t.args:
            return f"[{inner}]"
        return f"[{inner}|{_fmt(t)}]"
    if not args:
        s = print_name(f)
        return f"({s})" if f in OPS and max_prec < OPS[f][0] else s
    if f in OPS and len(args) == 2:
        prec, typ = OPS[f]
        lmax = prec if typ[0] == "y" else prec - 1
        rmax = prec if typ[2] == "y" else prec - 1
        s = f"{_fmt(args[0], lmax)}{_op_sep(f)}{_fmt(args[1], rmax)}"
        return f"({s})" if prec > max_prec else s
    return f"{print_name(f)}({','.join(_fmt(a) for a in args)})"


def _op_sep(f: str) -> str:
    return f" {f} " if f in ("=", "==", "\\==", "<", ">", "=<", ">=") else f


def format_term(t) -> str:
    return _fmt(t)


def format_atom(a: Atom) -> str:
    return _fmt(Compound(a.pred, a.args))


def format_equation(e: Equation) -> str:
    return f"{_fmt(e.lhs if type(e.lhs) is not Atom else e.lhs.as_term(), 699)} = " \
           f"{_fmt(e.rhs if type(e.rhs) is not Atom else e.rhs.as_term(), 699)}"


def format_clause(c: Clause) -> str:
    if not c.body:
        return f"{format_atom(c.head)}."
    return f"{format_atom(c.head)} :- {', '.join(format_atom(a) for a in c.body)}."


def format_query(q: Query) -> str:
    return ", ".join(format_atom(a) for a in q)


def format_mode(sig: tuple[str, int], modes: str) -> str:
    return f"{print_name(sig[0])}({','.join(modes)})"


def to_text(x) -> str:
    """Deterministic source text for any core value."""
    if isinstance(x, (Var, Compound)):
        return format_term(x)
    if isinstance(x, Atom):
        return format_atom(x)
    if isinstance(x, Equation):
        return format_equation(x)
    if isinstance(x, EquationSet):
        return ", ".join(format_equation(e) for e in x)
    if isinstance(x, Substitution):
        return "{" + ", ".join(f"{k}/{format_term(x[k])}" for k in sorted(x)) + "}"
    if isinstance(x, Clause):
        return format_clause(x)
    if isinstance(x, Query):
        return format_query(x)
    if isinstance(x, Program):
        return "\n".join(format_clause(c) for c in x)
    if isinstance(x, SourceFile):
        lines = [f":- mode {format_mode(k, m)}." for k, m in x.modings.items()]
        lines += [f":- mode2 {format_mode(k, m)}." for k, m in x.modings2.items()]
        lines += [format_clause(c) for c in x.clauses]
        lines += [f"?- {format_query(q)}." for q in x.queries]
        return "\n".join(lines) + "\n"
    if isinstance(x, (tuple, list)):
        return ", ".join(to_text(y) for y in x)
    raise TypeError(f"cannot print {type(x).__name__}")
