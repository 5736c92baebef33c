"""Martelli-Montanari unification with and without the occur-check.

Two nondeterministic algorithms over equation sets:

* ``Variant.MMA``: actions 1-6 (6 is the occur-check failure).
* ``Variant.MMA_MINUS``: actions 1-4 plus 5a (variable elimination) and 5b
  (merging two bindings of one variable); it never fails on the occur-check
  and stops in semi-solved form.

The deciders enumerate every reachable state, so their answers are exact
(or explicitly unknown when the state budget runs out).
"""

from __future__ import annotations

import enum
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .core import (
    Atom,
    Compound,
    Equation,
    EquationSet,
    Substitution,
    Var,
    apply,
    compose,
)

DEFAULT_BUDGET = 100_000


def default_budget() -> int:
    env = os.environ.get("OCCHECK_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


class Action(enum.Enum):
    DECOMPOSE = "1"
    CLASH = "2"
    DELETE = "3"
    ORIENT = "4"
    ELIMINATE = "5"
    OCCUR_FAIL = "6"
    ELIMINATE_VAR = "5a"
    MERGE = "5b"

    @property
    def rank(self) -> int:
        return _RANK[self]

    @property
    def halts(self) -> bool:
        return self in (Action.CLASH, Action.OCCUR_FAIL)


_RANK = {a: i for i, a in enumerate(
    [Action.DECOMPOSE, Action.CLASH, Action.DELETE, Action.ORIENT, Action.ELIMINATE,
     Action.ELIMINATE_VAR, Action.MERGE, Action.OCCUR_FAIL]
)}


class Variant(enum.Enum):
    MMA = "mma"
    MMA_MINUS = "mma-minus"


class Outcome(enum.Enum):
    FINAL = "final"
    CLASH = "clash"
    OCCUR_CHECK = "occur-check"


class BudgetExhausted(RuntimeError):
    def __init__(self, budget: int, explored: int):
        super().__init__(f"state budget {budget} exhausted")
        self.budget = budget
        self.explored = explored


@dataclass(frozen=True)
class Step:
    """One applicable action; ``result`` is None when the action halts."""

    selected: tuple[Equation, ...]
    action: Action
    result: EquationSet | None

    @property
    def sort_key(self):
        keys = tuple(e.key for e in self.selected)
        return (min(keys), self.action.rank, keys)


@dataclass(frozen=True)
class RunTrace:
    variant: Variant
    start: EquationSet
    steps: tuple[tuple[EquationSet, Step], ...]
    outcome: Outcome
    final: EquationSet | None

    @property
    def actions(self) -> list[Action]:
        return [s.action for _, s in self.steps]

    @property
    def states(self) -> list[EquationSet]:
        out = [self.start]
        out += [s.result for _, s in self.steps if s.result is not None]
        return out

    @property
    def occur_check_free(self) -> bool:
        return Outcome.OCCUR_CHECK is not self.outcome


# entry -----------------------------------------------------------------

def _head(t):
    if type(t) is Compound:
        return t.functor, t.args
    if type(t) is Atom:
        return t.pred, t.args
    return None


def as_equations(e) -> EquationSet:
    """Normalise input to a term-level equation set.

    Atom equations p(s) = p(t) become the argument equations s = t; atoms
    with different predicates become a term equation that clashes.
    """
    if isinstance(e, Equation):
        e = [e]
    out = []
    for eq in e:
        if not isinstance(eq, Equation):
            eq = Equation(*eq)
        if eq.is_atomic:
            l, r = eq.lhs, eq.rhs
            if l.signature == r.signature:
                out.extend(Equation(a, b) for a, b in zip(l.args, r.args))
            else:
                out.append(Equation(l.as_term(), r.as_term()))
        else:
            out.append(eq)
    return EquationSet(out)


# actions ---------------------------------------------------------------

def _occurrence_counts(E: EquationSet) -> Counter:
    c: Counter = Counter()
    for e in E:
        c.update(e.variables)
    return c


def _single_step(E: EquationSet, e: Equation, counts: Counter, variant: Variant) -> Step | None:
    l, r = e.lhs, e.rhs
    lv, rv = type(l) is Var, type(r) is Var
    if not lv and not rv:
        hl, hr = _head(l), _head(r)
        if hl[0] == hr[0] and len(hl[1]) == len(hr[1]):
            rest = E.without(e)
            return Step((e,), Action.DECOMPOSE,
                        EquationSet(rest.union(Equation(a, b) for a, b in zip(hl[1], hr[1]))))
        return Step((e,), Action.CLASH, None)
    if not lv:
        return Step((e,), Action.ORIENT, EquationSet(E.without(e) | {Equation(r, l)}))
    if rv and l.name == r.name:
        return Step((e,), Action.DELETE, EquationSet(E.without(e)))
    if l.name in r.variables:
        if variant is Variant.MMA:
            return Step((e,), Action.OCCUR_FAIL, None)
        return None
    if counts[l.name] < 2:
        return None
    if variant is Variant.MMA or rv:
        b = {l.name: r}
        new = [e]
        new.extend(apply(o, b) for o in E if o is not e and o != e)
        act = Action.ELIMINATE if variant is Variant.MMA else Action.ELIMINATE_VAR
        return Step((e,), act, EquationSet(new))
    return None


def _merge_steps(E: EquationSet) -> list[Step]:
    by_var: dict[str, list[Equation]] = {}
    for e in E:
        if type(e.lhs) is Var and type(e.rhs) is not Var:
            by_var.setdefault(e.lhs.name, []).append(e)
    steps = []
    for group in by_var.values():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                a, b = group[i], group[j]
                sa, sb = a.rhs.size, b.rhs.size
                if sa <= sb:
                    steps.append(_merge(E, a, b))
                if sb <= sa:
                    steps.append(_merge(E, b, a))
    return steps


def _merge(E: EquationSet, keep: Equation, rewrite: Equation) -> Step:
    # X = s1 stays, X = s2 becomes s1 = s2
    new = E.without(rewrite) | {Equation(keep.rhs, rewrite.rhs)}
    return Step((keep, rewrite), Action.MERGE, EquationSet(new))


def applicable_steps(E: EquationSet, variant: Variant = Variant.MMA) -> list[Step]:
    """Every action applicable to ``E``, in canonical order."""
    counts = _occurrence_counts(E)
    steps = []
    for e in E:
        s = _single_step(E, e, counts, variant)
        if s is not None:
            steps.append(s)
    # at most one single-equation action per equation
    assert len({s.selected for s in steps}) == len(steps)
    if variant is Variant.MMA_MINUS:
        steps.extend(_merge_steps(E))
    steps.sort(key=lambda s: s.sort_key)
    return steps


Strategy = Callable[[Sequence[Step]], Step]


def canonical_strategy(steps: Sequence[Step]) -> Step:
    """First step in canonical equation order, lowest action first."""
    return steps[0]


def random_strategy(rng) -> Strategy:
    return lambda steps: steps[rng.randrange(len(steps))]


def run(E, variant: Variant = Variant.MMA, strategy: Strategy | None = None,
        max_steps: int = 1_000_000) -> RunTrace:
    """One maximal run of ``variant`` from ``E``."""
    strategy = strategy or canonical_strategy
    start = as_equations(E)
    state = start
    trace = []
    for _ in range(max_steps):
        steps = applicable_steps(state, variant)
        if not steps:
            return RunTrace(variant, start, tuple(trace), Outcome.FINAL, state)
        step = strategy(steps)
        trace.append((state, step))
        if step.action is Action.CLASH:
            return RunTrace(variant, start, tuple(trace), Outcome.CLASH, None)
        if step.action is Action.OCCUR_FAIL:
            return RunTrace(variant, start, tuple(trace), Outcome.OCCUR_CHECK, None)
        state = step.result
    raise RuntimeError("run did not terminate")  # pragma: no cover


# solved forms ----------------------------------------------------------

def _bindings(E: EquationSet):
    out = []
    for e in E:
        if type(e.lhs) is not Var:
            return None
        out.append((e.lhs.name, e.rhs))
    return out


def is_solved(E: EquationSet) -> bool:
    b = _bindings(E)
    if b is None:
        return False
    lhs = [x for x, _ in b]
    if len(set(lhs)) != len(lhs):
        return False
    lset = set(lhs)
    return all(lset.isdisjoint(t.variables) for _, t in b)


def is_semi_solved(E: EquationSet) -> bool:
    b = _bindings(E)
    if b is None:
        return False
    lhs = [x for x, _ in b]
    if len(set(lhs)) != len(lhs):
        return False
    counts = None
    for x, t in b:
        if type(t) is Var:
            if t.name == x:
                return False
            if counts is None:
                counts = _occurrence_total(E)
            if counts[x] != 1:
                return False
    return True


def _occurrence_total(E: EquationSet) -> Counter:
    from .core import occurrences

    c: Counter = Counter()
    for e in E:
        c.update(occurrences(e))
    return c


def mgu_of_solved(E: EquationSet) -> Substitution:
    if not is_solved(E):
        raise ValueError(f"not in solved form: {E!r}")
    return Substitution({e.lhs.name: e.rhs for e in E})


def solve_semi_solved(E: EquationSet) -> Substitution | None:
    """Finish a semi-solved set with MMA; None when the occur-check fails."""
    if not is_semi_solved(E):
        raise ValueError(f"not in semi-solved form: {E!r}")
    tr = run(E, Variant.MMA)
    if tr.outcome is Outcome.OCCUR_CHECK:
        return None
    assert tr.outcome is Outcome.FINAL, "semi-solved sets cannot clash"
    return mgu_of_solved(tr.final)


def mgu(E) -> Substitution | None:
    """An mgu via one MMA run, or None when not unifiable."""
    tr = run(E, Variant.MMA)
    return mgu_of_solved(tr.final) if tr.outcome is Outcome.FINAL else None


def unify(s, t) -> Substitution | None:
    return mgu([Equation(s, t)])


def is_unifier(theta, E) -> bool:
    return all(apply(e.lhs, theta) == apply(e.rhs, theta) for e in as_equations(E))


def mgu_composition_trace(trace: RunTrace) -> tuple[list[Substitution], Substitution]:
    """The bindings {X/t} of every action-5 step, in order, and their composition.

    A final binding whose variable never occurred elsewhere was never selected
    by action 5; such bindings are appended last, in canonical order. Their
    variables occur once in the final set, so applying them there is a no-op.
    """
    if trace.variant is not Variant.MMA or trace.outcome is not Outcome.FINAL:
        raise ValueError("expected a successful MMA run")
    gammas = [
        Substitution({s.selected[0].lhs.name: s.selected[0].rhs})
        for _, s in trace.steps
        if s.action is Action.ELIMINATE
    ]
    eliminated = {next(iter(g)) for g in gammas}
    gammas += [Substitution({e.lhs.name: e.rhs}) for e in trace.final if e.lhs.name not in eliminated]
    theta = Substitution()
    for g in gammas:
        theta = compose(theta, g)
    return gammas, theta


# termination measure -----------------------------------------------------

def _max_arity(x) -> int:
    h = _head(x)
    if h is None:
        return 0
    return max([len(h[1]), *(_max_arity(a) for a in h[1])])


def max_arity(E: EquationSet) -> int:
    return max((max(_max_arity(e.lhs), _max_arity(e.rhs)) for e in E), default=0)


def default_k(E: EquationSet) -> int:
    return max(2, 1 + max_arity(E))


def equation_norm(e: Equation, k: int) -> int:
    return k ** max(e.lhs.size, e.rhs.size)


def norm(E: EquationSet, k: int | None = None) -> int:
    if k is None:
        k = default_k(E)
    if k <= 1 or k <= max_arity(E):
        raise ValueError(f"k={k} must exceed 1 and every arity in the set")
    return sum(equation_norm(e, k) for e in E)


def f45a(E: EquationSet) -> int:
    """Number of equations to which MMA⁻ action 4 or 5a applies."""
    counts = _occurrence_counts(E)
    n = 0
    for e in E:
        l, r = e.lhs, e.rhs
        if type(l) is not Var and type(r) is Var:
            n += 1
        elif type(l) is Var and type(r) is Var and l.name != r.name and counts[l.name] > 1:
            n += 1
    return n


def f5b(E: EquationSet) -> int:
    return sum(1 for e in E if type(e.lhs) is Var and type(e.rhs) is not Var)


def measure(E: EquationSet, k: int) -> tuple[int, int, int]:
    return (norm(E, k), f45a(E), f5b(E))


# rational trees -----------------------------------------------------------

def rational_unifiable(E) -> bool:
    """Solvability over rational trees: union-find closure without occur-check."""
    parent: dict = {}
    struct: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def node(t):
        if t not in parent:
            parent[t] = t
            if type(t) is not Var:
                struct[t] = t
        return t

    todo = [(e.lhs, e.rhs) for e in as_equations(E)]
    while todo:
        a, b = todo.pop()
        ra, rb = find(node(a)), find(node(b))
        if ra == rb:
            continue
        sa, sb = struct.get(ra), struct.get(rb)
        if sa is not None and sb is not None:
            ha, hb = _head(sa), _head(sb)
            if ha[0] != hb[0] or len(ha[1]) != len(hb[1]):
                return False
            todo.extend(zip(ha[1], hb[1]))
        parent[ra] = rb
        if sb is None and sa is not None:
            struct[rb] = sa
    return True


# exhaustive exploration -----------------------------------------------------

@dataclass
class StateGraph:
    variant: Variant
    root: EquationSet
    steps: dict[EquationSet, list[Step]] = field(default_factory=dict)

    def edges(self):
        for state, steps in self.steps.items():
            for s in steps:
                yield state, s

    def finals(self) -> list[EquationSet]:
        return [s for s, steps in self.steps.items() if not steps]


def explore(E, variant: Variant = Variant.MMA, budget: int | None = None) -> StateGraph:
    """All states reachable from ``E``, each with its applicable steps."""
    budget = default_budget() if budget is None else budget
    root = as_equations(E)
    g = StateGraph(variant, root)
    stack = [root]
    while stack:
        s = stack.pop()
        if s in g.steps:
            continue
        if len(g.steps) >= budget:
            raise BudgetExhausted(budget, len(g.steps))
        steps = applicable_steps(s, variant)
        g.steps[s] = steps
        for st in steps:
            if st.result is not None and st.result not in g.steps:
                stack.append(st.result)
    return g


@dataclass(frozen=True)
class NstoReport:
    """Verdicts are None when the budget ran out before they were settled."""

    nsto: bool | None
    wnsto: bool | None
    witness: RunTrace | None
    wnsto_witness: RunTrace | None
    states_explored: int
    budget_exhausted: bool = False

    @property
    def unifiable(self) -> bool | None:
        w = self.wnsto_witness
        return None if w is None else w.outcome is Outcome.FINAL


def _path_to(g: StateGraph, target: EquationSet) -> list[tuple[EquationSet, Step]]:
    parent: dict[EquationSet, tuple[EquationSet, Step] | None] = {g.root: None}
    frontier = [g.root]
    while frontier and target not in parent:
        nxt = []
        for s in frontier:
            for st in g.steps[s]:
                r = st.result
                if r is not None and r not in parent:
                    parent[r] = (s, st)
                    nxt.append(r)
        frontier = nxt
    path = []
    cur = target
    while parent[cur] is not None:
        s, st = parent[cur]
        path.append((s, st))
        cur = s
    path.reverse()
    return path


def decide_nsto_wnsto(E, budget: int | None = None) -> NstoReport:
    """Decide NSTO (no run performs action 6) and WNSTO (some run avoids it)."""
    budget = default_budget() if budget is None else budget
    if budget <= 0:
        raise ValueError("budget must be positive")
    try:
        g = explore(E, Variant.MMA, budget)
    except BudgetExhausted as exc:
        return NstoReport(None, None, None, None, exc.explored, True)

    root = g.root
    occur_state = None
    for state, steps in g.steps.items():
        if any(s.action is Action.OCCUR_FAIL for s in steps):
            occur_state = state
            break

    # good[s]: some maximal run from s never performs action 6
    good: dict[EquationSet, Step | None | bool] = {}
    order = _postorder(g)
    for s in order:
        steps = g.steps[s]
        if not steps:
            good[s] = None  # final: good, no further step
            continue
        choice = False
        for st in steps:
            if st.action is Action.CLASH:
                choice = st
                break
            if st.result is not None and good.get(st.result, False) is not False:
                choice = st
                break
        good[s] = choice

    wnsto = good[root] is not False
    witness = None
    if occur_state is not None:
        path = _path_to(g, occur_state)
        occ = next(s for s in g.steps[occur_state] if s.action is Action.OCCUR_FAIL)
        witness = RunTrace(Variant.MMA, root, tuple(path) + ((occur_state, occ),),
                           Outcome.OCCUR_CHECK, None)
    wwitness = None
    if wnsto:
        steps = []
        cur = root
        while True:
            ch = good[cur]
            if ch is None:
                wwitness = RunTrace(Variant.MMA, root, tuple(steps), Outcome.FINAL, cur)
                break
            steps.append((cur, ch))
            if ch.action is Action.CLASH:
                wwitness = RunTrace(Variant.MMA, root, tuple(steps), Outcome.CLASH, None)
                break
            cur = ch.result
    return NstoReport(occur_state is None, wnsto, witness, wwitness, len(g.steps))


def _postorder(g: StateGraph) -> list[EquationSet]:
    """States ordered so that every successor precedes its predecessors."""
    out = []
    done = set()
    stack = [(g.root, False)]
    while stack:
        s, expanded = stack.pop()
        if expanded:
            if s not in done:
                done.add(s)
                out.append(s)
            continue
        if s in done:
            continue
        stack.append((s, True))
        for st in g.steps[s]:
            r = st.result
            if r is not None and r not in done:
                stack.append((r, False))
    return out


def nsto(E, budget: int | None = None) -> bool | None:
    return decide_nsto_wnsto(E, budget).nsto


def wnsto(E, budget: int | None = None) -> bool | None:
    return decide_nsto_wnsto(E, budget).wnsto


def minus_outcomes(E, budget: int | None = None) -> tuple[StateGraph, list[EquationSet], bool]:
    """All MMA⁻ results: (graph, semi-solved finals, whether some run clashes)."""
    g = explore(E, Variant.MMA_MINUS, budget)
    clash = any(s.action is Action.CLASH for _, s in g.edges())
    return g, g.finals(), clash


def seq_equations(s: Iterable, t: Iterable) -> EquationSet:
    """s ⩦ t for equal-length term sequences."""
    s, t = list(s), list(t)
    if len(s) != len(t):
        raise ValueError("sequences differ in length")
    return EquationSet(Equation(a, b) for a, b in zip(s, t))
