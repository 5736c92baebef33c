"""SLD-resolution with pluggable selection rules and occur-check auditing.

``verify_tree`` walks the SLD-tree of a program and query to a depth and
node bound and decides NSTO/WNSTO for every available unification, i.e.
for the selected atom against every clause head with the same predicate,
whether or not the unification succeeds.
"""

from __future__ import annotations

import itertools
import operator
import random
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .core import (
    Atom,
    Clause,
    Compound,
    Equation,
    Program,
    Query,
    Substitution,
    apply,
    is_ground,
    rename_apart,
    vars_of,
)
from .modes import Moding, input_terms
from .unify import (
    NstoReport,
    Outcome,
    RunTrace,
    Variant,
    as_equations,
    decide_nsto_wnsto,
    mgu_of_solved,
    run,
)

DEFAULT_DEPTH = 64
DEFAULT_NODES = 10_000


# selection rules -----------------------------------------------------------

class SelectionRule:
    name = "rule"

    def choose(self, q: Query, path: str) -> int | None:
        raise NotImplementedError


class Leftmost(SelectionRule):
    name = "leftmost"

    def choose(self, q, path):
        return 0


class Rightmost(SelectionRule):
    name = "rightmost"

    def choose(self, q, path):
        return len(q) - 1


@dataclass(frozen=True)
class RandomRule(SelectionRule):
    """Uniform choice, seeded per tree position so runs are reproducible."""

    seed: int = 0

    @property
    def name(self):
        return f"random:{self.seed}"

    def choose(self, q, path):
        return random.Random(f"{self.seed}:{path}").randrange(len(q))


@dataclass(frozen=True)
class ModingCompatible(SelectionRule):
    """Leftmost atom whose + positions are ground; None means floundering.

    With ``fallback="leftmost-ground"`` a query with no such atom selects its
    leftmost atom instead, and the node is counted as a compatibility
    violation rather than a floundered leaf.
    """

    moding: Moding
    fallback: str | None = None

    name = "moding"

    def eligible(self, a: Atom) -> bool:
        return is_ground(input_terms(a, self.moding))

    def choose(self, q, path):
        for i, a in enumerate(q):
            if self.eligible(a):
                return i
        if self.fallback == "leftmost-ground":
            return 0
        return None


def select(q: Query, rule: SelectionRule, path: str = "") -> int | None:
    if not len(q):
        raise ValueError("cannot select from the empty query")
    return rule.choose(q, path)


def parse_rule(text: str, moding: Moding | None = None) -> SelectionRule:
    if text == "leftmost":
        return Leftmost()
    if text == "rightmost":
        return Rightmost()
    if text.startswith("random:"):
        return RandomRule(int(text.split(":", 1)[1]))
    if text == "moding":
        if moding is None:
            raise ValueError("the moding rule needs a moding")
        return ModingCompatible(moding)
    raise ValueError(f"unknown selection rule {text!r}")


# built-ins -------------------------------------------------------------------

def _number(t) -> int | None:
    if type(t) is Compound and not t.args:
        try:
            return int(t.functor)
        except ValueError:
            return None
    return None


def _compare(op):
    def test(x, y):
        a, b = _number(x), _number(y)
        if a is None or b is None:
            return None
        return op(a, b)

    return test


BUILTINS: dict[tuple[str, int], Callable[..., bool | None]] = {
    ("constant", 1): lambda x: type(x) is Compound and not x.args,
    ("\\==", 2): lambda x, y: x != y,
    ("==", 2): lambda x, y: x == y,
    ("<", 2): _compare(operator.lt),
    (">", 2): _compare(operator.gt),
    ("=<", 2): _compare(operator.le),
    (">=", 2): _compare(operator.ge),
}


def builtin_result(a: Atom, P: Program) -> bool | None:
    """Outcome of a built-in test, or None when ``a`` is not a built-in call.

    Predicates defined by ``P`` are never treated as built-ins. A test whose
    arguments are not sufficiently instantiated raises ``InstantiationError``.
    """
    sig = a.signature
    if sig in P.defined or sig not in BUILTINS:
        return None
    r = BUILTINS[sig](*a.args)
    if r is None:
        raise InstantiationError(a)
    return bool(r)


class InstantiationError(ValueError):
    def __init__(self, atom: Atom):
        super().__init__(f"insufficiently instantiated built-in call {atom!r}")
        self.atom = atom


# resolution ------------------------------------------------------------------

def _unifier(a: Atom, h: Atom) -> tuple[Substitution | None, RunTrace]:
    tr = run(as_equations([Equation(a, h)]), Variant.MMA)
    if tr.outcome is Outcome.FINAL:
        return mgu_of_solved(tr.final), tr
    return None, tr


def resolve(q: Query, idx: int, c: Clause, counter: Iterator[int] | None = None,
            avoid=()) -> tuple[Query, Substitution] | None:
    """SLD-resolvent of ``q`` and ``c`` on atom ``idx``, or None if not unifiable.

    The selected atom is replaced in place by the renamed body.
    """
    a = q[idx]
    if a.signature != c.head.signature:
        raise ValueError(f"clause head {c.head.pred}/{c.head.arity} does not match "
                         f"{a.pred}/{a.arity}")
    renamed = rename_apart(c, vars_of(q) | set(avoid), counter or itertools.count(1))
    theta, _ = _unifier(a, renamed.head)
    if theta is None:
        return None
    atoms = q.atoms[:idx] + renamed.body + q.atoms[idx + 1:]
    return Query(tuple(apply(x, theta) for x in atoms)), theta


# tree exploration --------------------------------------------------------------

@dataclass(frozen=True)
class Available:
    """One available unification: selected atom against a renamed clause head."""

    clause_index: int  # 1-based position in the program
    head: Atom
    report: NstoReport | None
    mgu: Substitution | None


@dataclass
class SLDNode:
    query: Query
    depth: int
    path: str
    instance: Query  # the initial query with the mgus so far applied
    selected: int | None = None
    available: list[Available] = field(default_factory=list)
    compatibility_violation: bool = False


@dataclass
class WalkStats:
    nodes: int = 0
    truncated: bool = False
    floundered: int = 0
    builtin_errors: int = 0
    answers: list[Query] = field(default_factory=list)
    compatibility_violations: int = 0


def walk(P: Program, Q: Query, rule: SelectionRule, depth: int = DEFAULT_DEPTH,
         nodes: int = DEFAULT_NODES, decide: bool = True, budget: int | None = None,
         stats: WalkStats | None = None) -> Iterator[SLDNode]:
    """Depth-first walk of the SLD-tree, yielding every expanded node."""
    if depth <= 0 or nodes <= 0:
        raise ValueError("bounds must be positive")
    stats = stats if stats is not None else WalkStats()
    counter = itertools.count(1)
    root_vars = vars_of(Q)
    stack = [SLDNode(Q, 0, "", Q)]
    while stack:
        node = stack.pop()
        q = node.query
        if not len(q):
            stats.answers.append(node.instance)
            continue
        if node.depth >= depth:
            stats.truncated = True
            continue
        if stats.nodes >= nodes:
            stats.truncated = True
            break
        stats.nodes += 1
        idx = select(q, rule, node.path)
        if idx is None:
            stats.floundered += 1
            yield node
            continue
        node.selected = idx
        if isinstance(rule, ModingCompatible) and not rule.eligible(q[idx]):
            node.compatibility_violation = True
            stats.compatibility_violations += 1
        a = q[idx]
        try:
            builtin = builtin_result(a, P)
        except InstantiationError:
            stats.builtin_errors += 1
            yield node
            continue
        if builtin is not None:
            yield node
            if builtin:
                stack.append(SLDNode(Query(q.atoms[:idx] + q.atoms[idx + 1:]), node.depth + 1,
                                     f"{node.path}.b", node.instance))
            continue
        avoid = vars_of(q) | root_vars | vars_of(node.instance)
        children = []
        for ci, c in P.clauses_for(a.signature):
            renamed = rename_apart(c, avoid, counter)
            report = decide_nsto_wnsto(as_equations([Equation(a, renamed.head)]), budget) if decide else None
            theta = _mgu_from(report, a, renamed.head)
            node.available.append(Available(ci + 1, renamed.head, report, theta))
            if theta is None:
                continue
            atoms = q.atoms[:idx] + renamed.body + q.atoms[idx + 1:]
            child = SLDNode(Query(tuple(apply(x, theta) for x in atoms)), node.depth + 1,
                            f"{node.path}.{ci}", apply(node.instance, theta))
            children.append(child)
        yield node
        stack.extend(reversed(children))


def _mgu_from(report: NstoReport | None, a: Atom, h: Atom) -> Substitution | None:
    if report is not None and report.wnsto:
        w = report.wnsto_witness
        return mgu_of_solved(w.final) if w.outcome is Outcome.FINAL else None
    if report is not None and report.wnsto is False:
        # every maximal run performs the occur-check: not unifiable
        return None
    return _unifier(a, h)[0]


@dataclass(frozen=True)
class Counterexample:
    query: Query
    selected: int
    clause_index: int
    head: Atom
    trace: RunTrace | None


@dataclass(frozen=True)
class TreeVerdict:
    """Verdicts hold up to the bounds; ``truncated`` says whether they were hit.

    None means some decision exhausted its state budget and no violation
    was found elsewhere.
    """

    occur_check_free: bool | None
    weakly_occur_check_free: bool | None
    counterexample: Counterexample | None
    weak_counterexample: Counterexample | None
    floundered_leaves: int
    truncated: bool
    nodes: int
    answers: tuple[Query, ...]
    unknown_decisions: int = 0
    compatibility_violations: int = 0
    builtin_errors: int = 0


def verify_tree(P: Program, Q: Query, rule: SelectionRule | None = None,
                depth: int = DEFAULT_DEPTH, nodes: int = DEFAULT_NODES,
                budget: int | None = None) -> TreeVerdict:
    rule = rule or Leftmost()
    stats = WalkStats()
    cex = wcex = None
    unknown = 0
    for node in walk(P, Q, rule, depth, nodes, True, budget, stats):
        for av in node.available:
            r = av.report
            if r.budget_exhausted:
                unknown += 1
                continue
            if not r.nsto and cex is None:
                cex = Counterexample(node.query, node.selected, av.clause_index, av.head, r.witness)
            if not r.wnsto and wcex is None:
                wcex = Counterexample(node.query, node.selected, av.clause_index, av.head, r.witness)
    ocf = False if cex else (None if unknown else True)
    wocf = False if wcex else (None if unknown else True)
    return TreeVerdict(ocf, wocf, cex, wcex, stats.floundered, stats.truncated, stats.nodes,
                       tuple(stats.answers), unknown, stats.compatibility_violations,
                       stats.builtin_errors)


@dataclass(frozen=True)
class ProbeResult:
    holds_on_all_visited: bool
    counterexample: Query | None
    visited: int
    truncated: bool


def probe_invariant(P: Program, Q: Query, rule: SelectionRule | None,
                    prop: Callable[[Query], bool], depth: int = DEFAULT_DEPTH,
                    nodes: int = DEFAULT_NODES) -> ProbeResult:
    """Evaluate ``prop`` on every query visited in the SLD-tree, answers included."""
    rule = rule or Leftmost()
    stats = WalkStats()
    visited = 0
    for node in walk(P, Q, rule, depth, nodes, False, None, stats):
        visited += 1
        if not prop(node.query):
            return ProbeResult(False, node.query, visited, stats.truncated)
    # empty resolvents are never yielded by walk; the empty query is checked once
    if stats.answers and not prop(Query(())):
        return ProbeResult(False, Query(()), visited, stats.truncated)
    return ProbeResult(True, None, visited, stats.truncated)


def answers(P: Program, Q: Query, rule: SelectionRule | None = None,
            depth: int = DEFAULT_DEPTH, nodes: int = DEFAULT_NODES) -> list[Query]:
    """Computed answer instances Qθ from success leaves within the bounds."""
    stats = WalkStats()
    for _ in walk(P, Q, rule or Leftmost(), depth, nodes, False, None, stats):
        pass
    out = []
    for a in stats.answers:
        if a not in out:
            out.append(a)
    return out
