"""Modings and the syntactic conditions built on them.

A moding assigns each argument position of a predicate one of ``+``
(input), ``-`` (output) or ``?`` (neutral, written ⊥ in 3-modings).
Every check returns a :class:`ConditionReport` whose failures carry a
witness naming the offending clause, atom or variable.
"""

from __future__ import annotations

import enum
import itertools
from collections import Counter
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Iterator, Mapping, Sequence

from .core import Atom, Clause, Compound, Program, Query, occurrences, vars_of

INPUT, OUTPUT, NEUTRAL = "+", "-", "?"

Signature = tuple[str, int]


class UnmodedError(KeyError):
    def __init__(self, sig: Signature):
        super().__init__(sig)
        self.signature = sig

    def __str__(self):
        return f"no moding for {self.signature[0]}/{self.signature[1]}"


@dataclass(frozen=True)
class Moding:
    """Per-predicate position modes. Also serves as a 3-moding."""

    table: tuple[tuple[Signature, str], ...] = ()

    def __post_init__(self):
        for (name, n), modes in self.table:
            if len(modes) != n or any(c not in "+-?" for c in modes):
                raise ValueError(f"bad mode string {modes!r} for {name}/{n}")
        object.__setattr__(self, "table", tuple(sorted(dict(self.table).items())))

    @classmethod
    def of(cls, mapping: Mapping[Signature, str] | None = None, **by_name: str) -> "Moding":
        items = dict(mapping or {})
        for name, modes in by_name.items():
            items[(name, len(modes))] = modes
        return cls(tuple(items.items()))

    @property
    def mapping(self) -> dict[Signature, str]:
        return dict(self.table)

    def __contains__(self, sig) -> bool:
        return sig in self.mapping

    def __getitem__(self, sig: Signature) -> str:
        try:
            return self.mapping[sig]
        except KeyError:
            raise UnmodedError(sig) from None

    def modes_of(self, atom: Atom) -> str:
        return self[atom.signature]

    def override(self, other: Mapping[Signature, str] | "Moding") -> "Moding":
        m = self.mapping
        m.update(other.mapping if isinstance(other, Moding) else other)
        return Moding.of(m)

    @property
    def has_neutral(self) -> bool:
        return any(NEUTRAL in m for _, m in self.table)

    @property
    def has_output(self) -> bool:
        return any(OUTPUT in m for _, m in self.table)

    def missing(self, sigs: Iterable[Signature]) -> list[Signature]:
        return [s for s in sigs if s not in self]

    def __str__(self):
        return ", ".join(f"{n}({','.join(m)})" if m else n for (n, _), m in self.table)


ThreeModing = Moding


# positions -----------------------------------------------------------------

def terms_at(a: Atom, m: Moding, mode: str) -> tuple:
    modes = m.modes_of(a)
    return tuple(t for t, c in zip(a.args, modes) if c == mode)


def input_terms(a: Atom, m: Moding) -> tuple:
    return terms_at(a, m, INPUT)


def output_terms(a: Atom, m: Moding) -> tuple:
    return terms_at(a, m, OUTPUT)


def varin(a: Atom, m: Moding) -> frozenset[str]:
    return vars_of(input_terms(a, m))


def varout(a: Atom, m: Moding) -> frozenset[str]:
    return vars_of(output_terms(a, m))


def _atoms(x) -> tuple[Atom, ...]:
    if isinstance(x, Atom):
        return (x,)
    if isinstance(x, Query):
        return x.atoms
    return tuple(x)


def _repeated(terms) -> list[str]:
    c = Counter(occurrences(list(terms)))
    return sorted(v for v, n in c.items() if n > 1)


def is_input_linear(x, m: Moding) -> bool:
    return not _repeated(t for a in _atoms(x) for t in input_terms(a, m))


def is_output_linear(x, m: Moding) -> bool:
    return not _repeated(t for a in _atoms(x) for t in output_terms(a, m))


def is_io_disjoint(a: Atom, m: Moding) -> bool:
    return varin(a, m).isdisjoint(varout(a, m))


# dependency relation -------------------------------------------------------

@dataclass(frozen=True)
class DependencyGraph:
    """Edges (i, j): a variable in an output of atom i and an input of atom j."""

    n: int
    edges: frozenset[tuple[int, int]]

    def is_acyclic(self) -> bool:
        return self.cycle() is None

    def cycle(self) -> list[int] | None:
        for i, j in self.edges:
            if i == j:
                return [i, i]
        ts = TopologicalSorter({j: set() for j in range(self.n)})
        for i, j in self.edges:
            ts.add(j, i)
        try:
            ts.prepare()
        except CycleError as exc:
            return list(exc.args[1])
        return None

    def backward_edges(self) -> list[tuple[int, int]]:
        return sorted((i, j) for i, j in self.edges if i >= j)


def dependency_graph(q, m: Moding) -> DependencyGraph:
    atoms = _atoms(q)
    outs = [varout(a, m) for a in atoms]
    ins = [varin(a, m) for a in atoms]
    edges = frozenset(
        (i, j)
        for i in range(len(atoms))
        for j in range(len(atoms))
        if not outs[i].isdisjoint(ins[j])
    )
    return DependencyGraph(len(atoms), edges)


def is_acyclic(g: DependencyGraph) -> bool:
    return g.is_acyclic()


# reports -------------------------------------------------------------------

class Status(enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    status: Status
    reason: str = ""
    witness: object = None

    def __post_init__(self):
        if self.status is Status.FAILS and self.witness is None:
            raise ValueError("a failing report needs a witness")

    def __bool__(self):
        return self.status is Status.HOLDS

    @classmethod
    def holds(cls, condition: str, reason: str = "") -> "ConditionReport":
        return cls(condition, Status.HOLDS, reason)

    @classmethod
    def fails(cls, condition: str, reason: str, witness) -> "ConditionReport":
        return cls(condition, Status.FAILS, reason, witness)

    def to_dict(self) -> dict:
        from .parser import to_text

        w = self.witness
        if w is not None and not isinstance(w, (str, int, list, tuple, dict)):
            w = to_text(w)
        return {"condition": self.condition, "status": self.status.value,
                "reason": self.reason, "witness": w}


def _relabel(r: ConditionReport, condition: str, prefix: str = "") -> ConditionReport:
    reason = f"{prefix}{r.reason}" if prefix else r.reason
    return ConditionReport(condition, r.status, reason, r.witness)


def _neutral_in(atoms: Iterable[Atom], m: Moding) -> Atom | None:
    for a in atoms:
        if NEUTRAL in m.modes_of(a):
            return a
    return None


def _clause_label(c: Clause) -> str:
    return _fmt(c).rstrip(".")


def _fmt(x) -> str:
    from .parser import to_text

    return to_text(x)


# tidy ----------------------------------------------------------------------

def is_tidy_query(q, m: Moding, condition: str = "tidy") -> ConditionReport:
    atoms = _atoms(q)
    a = _neutral_in(atoms, m)
    if a is not None:
        return ConditionReport(condition, Status.NOT_APPLICABLE,
                               f"{_fmt(a)} has a neutral position")
    rep = _repeated(t for a in atoms for t in output_terms(a, m))
    if rep:
        return ConditionReport.fails(condition, f"query not output linear: {rep[0]} repeats "
                                     "in output positions", rep[0])
    cyc = dependency_graph(atoms, m).cycle()
    if cyc is not None:
        path = " -> ".join(_fmt(atoms[i]) for i in cyc)
        return ConditionReport.fails(condition, f"dependency cycle {path}",
                                     [_fmt(atoms[i]) for i in cyc])
    return ConditionReport.holds(condition)


def is_tidy_clause(c: Clause, m: Moding, condition: str = "tidy") -> ConditionReport:
    r = is_tidy_query(c.body, m, condition)
    if not r:
        return _relabel(r, condition, f"clause {_clause_label(c)}: body ")
    h = c.head
    if NEUTRAL in m.modes_of(h):
        return ConditionReport(condition, Status.NOT_APPLICABLE, f"{_fmt(h)} has a neutral position")
    rep = _repeated(input_terms(h, m))
    if rep:
        return ConditionReport.fails(condition, f"clause {_clause_label(c)}: head not input linear "
                                     f"({rep[0]})", _fmt(c))
    clash = varin(h, m) & frozenset().union(*(varout(a, m) for a in c.body))
    if clash:
        v = min(clash)
        return ConditionReport.fails(condition, f"clause {_clause_label(c)}: head input variable {v} "
                                     "occurs in a body output", _fmt(c))
    return ConditionReport.holds(condition)


def _all_clauses(P: Program, check, condition: str) -> ConditionReport:
    na = None
    for c in P:
        r = check(c)
        if r.status is Status.FAILS:
            return r
        if r.status is Status.NOT_APPLICABLE and na is None:
            na = r
    if na is not None:
        return na
    return ConditionReport.holds(condition, f"all {len(P)} clauses")


def is_tidy_program(P: Program, m: Moding) -> ConditionReport:
    return _all_clauses(P, lambda c: is_tidy_clause(c, m), "tidy")


def is_tidy(x, m: Moding) -> ConditionReport:
    if isinstance(x, Program):
        return is_tidy_program(x, m)
    if isinstance(x, Clause):
        return is_tidy_clause(x, m)
    return is_tidy_query(x, m)


# nicely moded ----------------------------------------------------------------

def _left_to_right(atoms, m: Moding, condition: str, where: str) -> ConditionReport:
    back = dependency_graph(atoms, m).backward_edges()
    if back:
        i, j = back[0]
        return ConditionReport.fails(
            condition, f"{where}edge from atom {i + 1} to atom {j + 1} points backwards",
            [_fmt(atoms[i]), _fmt(atoms[j])])
    return ConditionReport.holds(condition)


def is_nicely_moded(x, m: Moding) -> ConditionReport:
    """Tidy with every dependency edge pointing left to right."""
    cond = "nicely-moded"
    if isinstance(x, Program):
        return _all_clauses(x, lambda c: is_nicely_moded(c, m), cond)
    t = _relabel(is_tidy(x, m), cond)
    if not t:
        return t
    if isinstance(x, Clause):
        return _left_to_right(x.body, m, cond, f"clause {_clause_label(x)}: ")
    return _left_to_right(_atoms(x), m, cond, "")


# well-(3-)moded --------------------------------------------------------------

def _well_clause(head: Atom | None, body: Sequence[Atom], m: Moding, cond: str,
                 label: str) -> ConditionReport:
    defined = set(varin(head, m)) if head is not None else set()
    for j, a in enumerate(body):
        missing = sorted(varin(a, m) - defined)
        if missing:
            return ConditionReport.fails(
                cond, f"{label}: input variable {missing[0]} of atom {j + 1} has no "
                "earlier defining occurrence", missing[0])
        defined |= varout(a, m)
    if head is not None:
        missing = sorted(varout(head, m) - defined)
        if missing:
            return ConditionReport.fails(
                cond, f"{label}: head output variable {missing[0]} has no defining occurrence",
                missing[0])
    return ConditionReport.holds(cond)


def is_well_3_moded(x, m: Moding) -> ConditionReport:
    """Defining-occurrence check; a query Q is checked as the clause p <- Q."""
    cond = "well-3-moded"
    if isinstance(x, Program):
        return _all_clauses(x, lambda c: is_well_3_moded(c, m), cond)
    if isinstance(x, Clause):
        return _well_clause(x.head, x.body, m, cond, f"clause {_clause_label(x)}")
    atoms = _atoms(x)
    return _well_clause(None, atoms, m, cond, f"query {_fmt(Query(tuple(atoms)))}")


def is_well_moded(x, m: Moding) -> ConditionReport:
    cond = "well-moded"
    atoms = list(x.clauses) if isinstance(x, Program) else [x]
    for a in _mentioned_atoms(atoms):
        if NEUTRAL in m.modes_of(a):
            return ConditionReport(cond, Status.NOT_APPLICABLE, f"{_fmt(a)} has a neutral position")
    return _relabel(is_well_3_moded(x, m), cond)


def _mentioned_atoms(items) -> Iterator[Atom]:
    for x in items:
        if isinstance(x, Clause):
            yield x.head
            yield from x.body
        else:
            yield from _atoms(x)


# weak linearity and weak tidiness -----------------------------------------------

def is_weakly_linear(a: Atom, m: Moding) -> bool:
    """Every variable occurring more than once in ``a`` occurs in an input position."""
    ins = varin(a, m)
    return all(v in ins for v in _repeated(a.args))


def weakly_linear_heads(P: Program, m: Moding) -> ConditionReport:
    cond = "weakly-linear-heads"
    for c in P:
        if not is_weakly_linear(c.head, m):
            return ConditionReport.fails(cond, f"head {_fmt(c.head)} is not weakly linear",
                                         _fmt(c.head))
    return ConditionReport.holds(cond)


def fresh_constants(start: int = 0) -> Iterator[Compound]:
    for i in itertools.count(start):
        yield Compound(f"$g{i}", ())


def ground_plus_positions(c: Clause, m: Moding, supply: Iterator[Compound] | None = None) -> Clause:
    """Replace every variable in a + position of the head by a distinct fresh constant."""
    from .core import apply

    supply = supply if supply is not None else fresh_constants()
    names = []
    for v in occurrences(list(input_terms(c.head, m))):
        if v not in names:
            names.append(v)
    if not names:
        return c
    return apply(c, {v: next(supply) for v in names})


def is_weakly_tidy(P: Program, m: Moding, m2: Moding) -> ConditionReport:
    """Tidiness under ``m2`` after grounding head + positions of ``m``."""
    cond = "weakly-tidy"
    if m2.has_neutral:
        return ConditionReport(cond, Status.NOT_APPLICABLE, "second moding has neutral positions")
    supply = fresh_constants()
    grounded = Program(tuple(ground_plus_positions(c, m, supply) for c in P))
    return _relabel(is_tidy_program(grounded, m2), cond, "after grounding: ")


# mode search -------------------------------------------------------------------

TARGETS = ("tidy", "nicely", "well3", "well-moded", "weakly-tidy")


class SearchBoundExceeded(ValueError):
    pass


def _signatures(P: Program, Q) -> list[Signature]:
    sigs = list(P.predicates)
    if Q is not None:
        for a in _atoms(Q):
            if a.signature not in sigs:
                sigs.append(a.signature)
    return sigs


def _assignments(sigs: Sequence[Signature], alphabet: str) -> Iterator[Moding]:
    sizes = [n for _, n in sigs]
    for combo in itertools.product(alphabet, repeat=sum(sizes)):
        table, k = [], 0
        for sig, n in zip(sigs, sizes):
            table.append((sig, "".join(combo[k:k + n])))
            k += n
        yield Moding(tuple(table))


@dataclass
class SearchResult:
    target: str
    free: list[Signature]
    fixed: dict[Signature, str]
    candidates: int = 0
    found: list = field(default_factory=list)


def mode_search(P: Program, target: str, Q=None, max_positions: int = 16,
                fixed: Mapping[Signature, str] | None = None) -> SearchResult:
    """Exhaustively enumerate modings under which ``target`` holds for P (and Q).

    Predicates without clauses are taken to be built-ins moded all-input
    unless ``fixed`` says otherwise. For ``weakly-tidy`` each result is a
    pair (M, M') with M over {+, ?} and M' over {+, -}.
    """
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; expected one of {', '.join(TARGETS)}")
    sigs = _signatures(P, Q)
    fixed = dict(fixed or {})
    for sig in sigs:
        if sig not in P.defined and sig not in fixed:
            fixed[sig] = INPUT * sig[1]
    free = [s for s in sigs if s not in fixed]
    positions = sum(n for _, n in free)
    alphabet = {"tidy": "+-", "nicely": "+-", "well-moded": "+-", "well3": "+-?",
                "weakly-tidy": "+-"}[target]
    count = len(alphabet) ** positions * (2 ** positions if target == "weakly-tidy" else 1)
    if count > 2 ** max_positions:
        raise SearchBoundExceeded(
            f"{count} candidate modings over {positions} positions exceed the bound "
            f"2^{max_positions}")
    base = Moding.of(fixed)
    res = SearchResult(target, free, fixed, count)
    check = {
        "tidy": lambda m: is_tidy_program(P, m) and (Q is None or is_tidy_query(Q, m)),
        "nicely": lambda m: is_nicely_moded(P, m) and (Q is None or is_nicely_moded(Q, m)),
        "well-moded": lambda m: is_well_moded(P, m) and (Q is None or is_well_moded(Q, m)),
        "well3": lambda m: is_well_3_moded(P, m) and (Q is None or is_well_3_moded(Q, m)),
    }
    if target == "weakly-tidy":
        grounders = [base.override(g) for g in _assignments(free, "+?")]
        tidy2 = [base.override(t) for t in _assignments(free, "+-")]
        tidy2 = [t for t in tidy2 if Q is None or is_tidy_query(Q, t)]
        for g in grounders:
            for t in tidy2:
                if is_weakly_tidy(P, g, t):
                    res.found.append((g, t))
        return res
    for m in _assignments(free, alphabet):
        full = base.override(m)
        if check[target](full):
            res.found.append(full)
    return res
