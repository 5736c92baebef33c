"""Independent oracles and random generators shared by the test suites.

The oracles here do not call into the package's unification code: they
re-implement the textbook algorithms directly so that the two can be
compared.
"""

from __future__ import annotations

import random
from pathlib import Path

from occheck.core import Atom, Clause, Compound, Equation, EquationSet, Program, Query, Var
from occheck.parser import parse_program

CORPUS = Path(__file__).resolve().parent.parent / "src" / "occheck" / "corpus"

FUNCTORS = [("a", 0), ("b", 0), ("f", 1), ("g", 2)]
VARS = ["X", "Y", "Z"]


def corpus(name: str):
    return parse_program((CORPUS / f"{name}.pl").read_text())


# Robinson-style unification with occur-check ---------------------------------

def _walk(t, s: dict):
    while type(t) is Var and t.name in s:
        t = s[t.name]
    return t


def _occurs(name: str, t, s: dict) -> bool:
    t = _walk(t, s)
    if type(t) is Var:
        return t.name == name
    return any(_occurs(name, a, s) for a in t.args)


def _resolve(t, s: dict):
    t = _walk(t, s)
    if type(t) is Var:
        return t
    return Compound(t.functor, tuple(_resolve(a, s) for a in t.args))


def _split(x):
    if type(x) is Atom:
        return x.pred, x.args
    return x.functor, x.args


def oracle_mgu(pairs) -> dict | None:
    """Idempotent mgu as {name: term}, or None when not unifiable."""
    s: dict = {}
    todo = [(e.lhs, e.rhs) if isinstance(e, Equation) else e for e in pairs]
    while todo:
        x, y = todo.pop()
        x, y = _walk(x, s), _walk(y, s)
        if type(x) is Var and type(y) is Var and x.name == y.name:
            continue
        if type(x) is Var:
            if _occurs(x.name, y, s):
                return None
            s[x.name] = y
        elif type(y) is Var:
            if _occurs(y.name, x, s):
                return None
            s[y.name] = x
        else:
            fx, ax = _split(x)
            fy, ay = _split(y)
            if fx != fy or len(ax) != len(ay):
                return None
            todo.extend(zip(ax, ay))
    return {k: _resolve(Var(k), s) for k in s}


def substitute(t, s: dict):
    if type(t) is Var:
        return s.get(t.name, t)
    if type(t) is Atom:
        return Atom(t.pred, tuple(substitute(a, s) for a in t.args))
    return Compound(t.functor, tuple(substitute(a, s) for a in t.args))


def _match(p, t, b: dict) -> bool:
    if type(p) is Var:
        if p.name in b:
            return b[p.name] == t
        b[p.name] = t
        return True
    if type(t) is Var:
        return False
    fp, ap = _split(p)
    ft, at = _split(t)
    return fp == ft and len(ap) == len(at) and all(_match(x, y, b) for x, y in zip(ap, at))


def more_general(theta: dict, sigma: dict, names) -> bool:
    """Some rho with X theta rho = X sigma for every X in ``names``."""
    b: dict = {}
    return all(_match(substitute(Var(n), theta), substitute(Var(n), sigma), b) for n in names)


def equivalent_mgus(theta: dict, sigma: dict, names) -> bool:
    names = sorted(names)
    return more_general(theta, sigma, names) and more_general(sigma, theta, names)


def solves(theta: dict, eqs) -> bool:
    return all(substitute(e.lhs, theta) == substitute(e.rhs, theta) for e in eqs)


# random generation ---------------------------------------------------------------

def rand_term(rng: random.Random, depth: int, variables=VARS, functors=FUNCTORS):
    if depth <= 1 or rng.random() < 0.35:
        if rng.random() < 0.75:
            return Var(rng.choice(variables))
        name, _ = rng.choice([f for f in functors if f[1] == 0])
        return Compound(name, ())
    name, n = rng.choice(functors)
    return Compound(name, tuple(rand_term(rng, depth - 1, variables, functors) for _ in range(n)))


def rand_equations(rng: random.Random, max_eqs: int = 4, depth: int = 3) -> EquationSet:
    n = rng.randint(1, max_eqs)
    return EquationSet(Equation(rand_term(rng, depth), rand_term(rng, depth)) for _ in range(n))


class _Fresh:
    def __init__(self, prefix: str):
        self.prefix, self.n = prefix, 0

    def __call__(self) -> Var:
        self.n += 1
        return Var(f"{self.prefix}{self.n}")


def rand_linear_term(rng: random.Random, depth: int, fresh: _Fresh):
    if depth <= 1 or rng.random() < 0.35:
        if rng.random() < 0.6:
            return fresh()
        return Compound(rng.choice(["a", "b"]), ())
    name, n = rng.choice(FUNCTORS)
    return Compound(name, tuple(rand_linear_term(rng, depth - 1, fresh) for _ in range(n)))


def rand_linear_sequence(rng, n: int, depth: int, prefix: str = "L"):
    fresh = _Fresh(prefix)
    return [rand_linear_term(rng, depth, fresh) for _ in range(n)]


def rand_atom(rng, pred: str, n: int, variables, depth: int = 3) -> Atom:
    return Atom(pred, tuple(rand_term(rng, depth, variables) for _ in range(n)))


def rand_moding(rng, sigs, alphabet: str = "+-") -> dict:
    return {sig: "".join(rng.choice(alphabet) for _ in range(sig[1])) for sig in sigs}


def rand_query(rng, preds, variables, max_len: int = 4, depth: int = 2) -> Query:
    n = rng.randint(1, max_len)
    atoms = []
    for _ in range(n):
        name, k = rng.choice(preds)
        atoms.append(rand_atom(rng, name, k, variables, depth))
    return Query(tuple(atoms))


def rand_clause(rng, preds, variables, max_body: int = 3, depth: int = 2) -> Clause:
    name, k = rng.choice(preds)
    head = rand_atom(rng, name, k, variables, depth)
    body = []
    for _ in range(rng.randint(0, max_body)):
        p, n = rng.choice(preds)
        body.append(rand_atom(rng, p, n, variables, depth))
    return Clause(head, tuple(body))


def rand_program(rng, preds, variables, n_clauses: int = 4) -> Program:
    return Program(tuple(rand_clause(rng, preds, variables) for _ in range(n_clauses)))
