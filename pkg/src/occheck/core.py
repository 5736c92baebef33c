"""Terms, atoms, clauses, substitutions and equations.

Everything is immutable.  Terms cache their hash, size, variable set and a
sort key, since the unification explorers hash and order millions of them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Union


@dataclass(frozen=True, eq=False)
class Var:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("variable name must be non-empty")

    def __eq__(self, other):
        return self is other or (type(other) is Var and other.name == self.name)

    def __hash__(self):
        return hash(("V", self.name))

    def __repr__(self):
        return self.name

    @property
    def size(self) -> int:
        return 1

    @cached_property
    def variables(self) -> frozenset[str]:
        return frozenset((self.name,))

    @cached_property
    def key(self) -> tuple:
        return (0, self.name)


@dataclass(frozen=True, eq=False)
class Compound:
    """``functor(args...)``; a constant is a compound with no arguments."""

    functor: str
    args: tuple = ()
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.functor:
            raise ValueError("functor name must be non-empty")
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(self, "_hash", hash((self.functor, self.args)))

    def __eq__(self, other):
        if self is other:
            return True
        return (
            type(other) is Compound
            and self._hash == other._hash
            and self.functor == other.functor
            and self.args == other.args
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if not self.args:
            return self.functor
        return f"{self.functor}({', '.join(map(repr, self.args))})"

    @property
    def arity(self) -> int:
        return len(self.args)

    @cached_property
    def size(self) -> int:
        return 1 + sum(a.size for a in self.args)

    @cached_property
    def variables(self) -> frozenset[str]:
        if not self.args:
            return frozenset()
        return frozenset().union(*(a.variables for a in self.args))

    @cached_property
    def key(self) -> tuple:
        return (1, self.functor, len(self.args), tuple(a.key for a in self.args))


Term = Union[Var, Compound]


def const(name: str) -> Compound:
    return Compound(name, ())


def is_var(t) -> bool:
    return type(t) is Var


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()

    def __post_init__(self):
        if not self.pred:
            raise ValueError("predicate name must be non-empty")
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    def __repr__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(map(repr, self.args))})"

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def signature(self) -> tuple[str, int]:
        return (self.pred, len(self.args))

    @cached_property
    def variables(self) -> frozenset[str]:
        return frozenset().union(*(a.variables for a in self.args))

    @cached_property
    def size(self) -> int:
        return 1 + sum(a.size for a in self.args)

    @cached_property
    def key(self) -> tuple:
        return (2, self.pred, len(self.args), tuple(a.key for a in self.args))

    def as_term(self) -> Compound:
        return Compound(self.pred, self.args)


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: tuple[Atom, ...] = ()

    def __post_init__(self):
        if not isinstance(self.body, tuple):
            object.__setattr__(self, "body", tuple(self.body))

    @property
    def is_fact(self) -> bool:
        return not self.body


@dataclass(frozen=True)
class Query:
    atoms: tuple[Atom, ...] = ()

    def __post_init__(self):
        if not isinstance(self.atoms, tuple):
            object.__setattr__(self, "atoms", tuple(self.atoms))

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __getitem__(self, i):
        return self.atoms[i]


@dataclass(frozen=True)
class Program:
    clauses: tuple[Clause, ...] = ()

    def __post_init__(self):
        if not isinstance(self.clauses, tuple):
            object.__setattr__(self, "clauses", tuple(self.clauses))
        seen: dict[str, int] = {}
        for c in self.clauses:
            for a in (c.head, *c.body):
                if seen.setdefault(a.pred, a.arity) != a.arity:
                    raise ValueError(
                        f"predicate {a.pred} used with arities {seen[a.pred]} and {a.arity}"
                    )

    def __iter__(self):
        return iter(self.clauses)

    def __len__(self):
        return len(self.clauses)

    def clauses_for(self, signature: tuple[str, int]) -> list[tuple[int, Clause]]:
        return [(i, c) for i, c in enumerate(self.clauses) if c.head.signature == signature]

    @property
    def predicates(self) -> list[tuple[str, int]]:
        """Signatures in order of first appearance (heads and bodies)."""
        out: dict[tuple[str, int], None] = {}
        for c in self.clauses:
            for a in (c.head, *c.body):
                out.setdefault(a.signature)
        return list(out)

    @property
    def defined(self) -> set[tuple[str, int]]:
        return {c.head.signature for c in self.clauses}


@dataclass(frozen=True)
class Equation:
    lhs: object
    rhs: object
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lt, rt = type(self.lhs) is Atom, type(self.rhs) is Atom
        if lt != rt:
            raise ValueError("an equation relates two terms or two atoms")
        object.__setattr__(self, "_hash", hash((self.lhs, self.rhs)))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return (
            type(other) is Equation
            and self._hash == other._hash
            and self.lhs == other.lhs
            and self.rhs == other.rhs
        )

    def __repr__(self):
        return f"{self.lhs!r} = {self.rhs!r}"

    @property
    def is_atomic(self) -> bool:
        return type(self.lhs) is Atom

    @cached_property
    def variables(self) -> frozenset[str]:
        return self.lhs.variables | self.rhs.variables

    @cached_property
    def key(self) -> tuple:
        return (self.lhs.key, self.rhs.key)


class EquationSet:
    """A finite set of equations kept in canonical order."""

    __slots__ = ("_eqs", "_set", "_hash")

    def __init__(self, equations: Iterable[Equation] = ()):
        s = frozenset(equations)
        self._set = s
        self._eqs = tuple(sorted(s, key=_eq_key))
        self._hash = hash(s)

    def __iter__(self) -> Iterator[Equation]:
        return iter(self._eqs)

    def __len__(self):
        return len(self._eqs)

    def __contains__(self, eq):
        return eq in self._set

    def __eq__(self, other):
        return isinstance(other, EquationSet) and self._set == other._set

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "{" + ", ".join(map(repr, self._eqs)) + "}"

    def __or__(self, other: "EquationSet") -> "EquationSet":
        return EquationSet(self._set | other._set)

    @property
    def equations(self) -> tuple[Equation, ...]:
        return self._eqs

    @property
    def variables(self) -> frozenset[str]:
        return frozenset().union(*(e.variables for e in self._eqs))

    def without(self, *eqs: Equation) -> frozenset[Equation]:
        return self._set.difference(eqs)

    @classmethod
    def of(cls, *pairs) -> "EquationSet":
        return cls(Equation(l, r) for l, r in pairs)


def _eq_key(e: Equation):
    return e.key


class Substitution(Mapping[str, Term]):
    """Finite map from variable names to terms; identity pairs are dropped."""

    __slots__ = ("_map", "_hash")

    def __init__(self, bindings: Mapping[str, Term] | Iterable[tuple[str, Term]] = ()):
        items = bindings.items() if isinstance(bindings, Mapping) else bindings
        m = {}
        for k, v in items:
            if isinstance(k, Var):
                k = k.name
            if not (type(v) is Var and v.name == k):
                m[k] = v
        self._map = m
        self._hash = None

    def __getitem__(self, k):
        return self._map[k]

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def __eq__(self, other):
        if isinstance(other, Substitution):
            return self._map == other._map
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._map.items()))
        return self._hash

    def __repr__(self):
        return "{" + ", ".join(f"{k}/{self._map[k]!r}" for k in sorted(self._map)) + "}"

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self._map)

    @property
    def range_vars(self) -> frozenset[str]:
        return frozenset().union(*(t.variables for t in self._map.values()))

    @property
    def variables(self) -> frozenset[str]:
        return self.domain | self.range_vars

    def __call__(self, x):
        return apply(x, self)


Expr = Union[Term, Atom, Clause, Query, Equation, EquationSet, tuple, list]


def vars_of(x) -> frozenset[str]:
    """Variable names occurring anywhere in ``x``."""
    if isinstance(x, (Var, Compound, Atom, Equation, EquationSet, Substitution)):
        return x.variables
    if isinstance(x, Clause):
        return x.head.variables.union(*(a.variables for a in x.body))
    if isinstance(x, Query):
        return frozenset().union(*(a.variables for a in x.atoms))
    if isinstance(x, (tuple, list, set, frozenset)):
        return frozenset().union(*(vars_of(y) for y in x))
    raise TypeError(f"no variables for {type(x).__name__}")


def occurrences(x) -> Iterator[str]:
    """Variable names in left-to-right order, with repetitions."""
    if type(x) is Var:
        yield x.name
    elif type(x) in (Compound, Atom):
        for a in x.args:
            yield from occurrences(a)
    elif isinstance(x, Equation):
        yield from occurrences(x.lhs)
        yield from occurrences(x.rhs)
    elif isinstance(x, Query):
        for a in x.atoms:
            yield from occurrences(a)
    elif isinstance(x, (tuple, list)):
        for y in x:
            yield from occurrences(y)
    else:
        raise TypeError(f"cannot walk {type(x).__name__}")


def is_linear(x) -> bool:
    seen = set()
    for v in occurrences(x):
        if v in seen:
            return False
        seen.add(v)
    return True


def size(t) -> int:
    return t.size


def is_ground(x) -> bool:
    return not vars_of(x)


def _subst(t: Term, m: Mapping[str, Term]) -> Term:
    if type(t) is Var:
        return m.get(t.name, t)
    if not t.args or t.variables.isdisjoint(m):
        return t
    return Compound(t.functor, tuple(_subst(a, m) for a in t.args))


def apply(x, theta: Mapping[str, Term]):
    """Simultaneous application of ``theta`` to any expression."""
    m = theta._map if isinstance(theta, Substitution) else theta
    if not m:
        return x
    tx = type(x)
    if tx is Var or tx is Compound:
        return _subst(x, m)
    if tx is Atom:
        if x.variables.isdisjoint(m):
            return x
        return Atom(x.pred, tuple(_subst(a, m) for a in x.args))
    if tx is Equation:
        return Equation(apply(x.lhs, m), apply(x.rhs, m))
    if tx is EquationSet:
        return EquationSet(apply(e, m) for e in x)
    if tx is Clause:
        return Clause(apply(x.head, m), tuple(apply(a, m) for a in x.body))
    if tx is Query:
        return Query(tuple(apply(a, m) for a in x.atoms))
    if tx is tuple or tx is list:
        return tx(apply(y, m) for y in x)
    raise TypeError(f"cannot apply a substitution to {tx.__name__}")


def restrict(theta: Substitution, s) -> Substitution:
    """``theta`` restricted to a set of variable names or to Var(expression)."""
    if not isinstance(s, (set, frozenset)):
        s = vars_of(s)
    return Substitution({k: v for k, v in theta.items() if k in s})


def compose(theta: Substitution, sigma: Substitution) -> Substitution:
    """``theta`` then ``sigma``: apply(t, compose(θ, σ)) == apply(apply(t, θ), σ)."""
    out = {k: _subst(v, sigma._map) for k, v in theta.items()}
    for k, v in sigma.items():
        if k not in theta._map:
            out[k] = v
    return Substitution(out)


def rename_apart(c: Clause, avoid, counter: Iterator[int] | None = None) -> Clause:
    """A variant of ``c`` sharing no variable with ``avoid``.

    Each variable gets a numeric suffix drawn from ``counter`` (after an
    underscore when the name already ends in a digit); with no counter
    a clause already disjoint from ``avoid`` is returned unchanged.
    """
    avoid = set(avoid)
    cvars = sorted(vars_of(c))
    if counter is None:
        if avoid.isdisjoint(cvars):
            return c
        counter = itertools.count(1)
    taken = avoid | set(cvars)
    ren = {}
    for v in cvars:
        while True:
            sep = "_" if v[-1].isdigit() else ""
            new = f"{v}{sep}{next(counter)}"
            if new not in taken:
                break
        taken.add(new)
        ren[v] = Var(new)
    return apply(c, ren)


def variant(a, b) -> bool:
    """True iff ``a`` and ``b`` are equal up to an injective variable renaming."""
    fwd: dict[str, str] = {}
    bwd: dict[str, str] = {}

    def walk(x, y) -> bool:
        if type(x) is Var:
            if type(y) is not Var:
                return False
            if fwd.setdefault(x.name, y.name) != y.name:
                return False
            return bwd.setdefault(y.name, x.name) == x.name
        if type(x) is not type(y):
            return False
        if type(x) is Compound:
            return x.functor == y.functor and len(x.args) == len(y.args) and all(
                map(walk, x.args, y.args)
            )
        if type(x) is Atom:
            return x.pred == y.pred and len(x.args) == len(y.args) and all(
                map(walk, x.args, y.args)
            )
        if type(x) is Clause:
            return walk(x.head, y.head) and walk(x.body, y.body)
        if type(x) is Query:
            return walk(x.atoms, y.atoms)
        if type(x) is Equation:
            return walk(x.lhs, y.lhs) and walk(x.rhs, y.rhs)
        if type(x) is Program:
            return walk(x.clauses, y.clauses)
        if type(x) in (tuple, list):
            return len(x) == len(y) and all(map(walk, x, y))
        return x == y

    return walk(a, b)


def match(pattern, target, binding: dict | None = None) -> dict | None:
    """One-way matching: a ``binding`` with apply(pattern, binding) == target."""
    b = {} if binding is None else dict(binding)
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        if type(p) is Var:
            prev = b.get(p.name)
            if prev is None:
                b[p.name] = t
            elif prev != t:
                return None
        elif type(p) is Compound:
            if type(t) is not Compound or p.functor != t.functor or len(p.args) != len(t.args):
                return None
            stack.extend(zip(p.args, t.args))
        elif isinstance(p, (tuple, list)):
            if not isinstance(t, (tuple, list)) or len(p) != len(t):
                return None
            stack.extend(zip(p, t))
        else:
            raise TypeError(f"cannot match {type(p).__name__}")
    return b
