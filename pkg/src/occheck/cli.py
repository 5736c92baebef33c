"""Command-line interface: ``occheck analyze|unify|derive|modesearch|corpus``.

Exit codes: 0 for a positive result (a corollary applies, the checked
tree property holds, a moding was found), 1 for a negative one, 2 for
errors. ``--json`` prints one JSON document on stdout.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import click

from .core import Program, Query
from .modes import (
    ConditionReport,
    Moding,
    SearchBoundExceeded,
    Status,
    is_nicely_moded,
    is_tidy_program,
    is_tidy_query,
    is_weakly_tidy,
    is_well_3_moded,
    is_well_moded,
    mode_search,
    weakly_linear_heads,
)
from .parser import ParseError, SourceFile, parse_equations, parse_mode, parse_program, parse_query, to_text
from .sld import DEFAULT_DEPTH, DEFAULT_NODES, Counterexample, parse_rule, verify_tree
from .unify import (
    Outcome,
    RunTrace,
    Variant,
    as_equations,
    decide_nsto_wnsto,
    default_budget,
    mgu_of_solved,
    run,
    solve_semi_solved,
)

SCHEMA_VERSION = 1


class Failure(click.ClickException):
    exit_code = 2


# input -----------------------------------------------------------------------

def corpus_names() -> list[str]:
    files = resources.files("occheck").joinpath("corpus").iterdir()
    return sorted(p.name[:-3] for p in files if p.name.endswith(".pl"))


def read_source(name: str) -> tuple[str, str]:
    """Text of a file, or of an embedded corpus program given by bare name."""
    path = Path(name)
    if path.is_file():
        return path.name, path.read_text()
    stem = name[:-3] if name.endswith(".pl") else name
    if stem in corpus_names():
        text = resources.files("occheck").joinpath("corpus", f"{stem}.pl").read_text()
        return f"{stem}.pl", text
    raise Failure(f"no such file or corpus program: {name}")


def load(name: str) -> tuple[str, SourceFile]:
    label, text = read_source(name)
    try:
        return label, parse_program(text)
    except ParseError as exc:
        raise Failure(f"{label}:{exc}") from None


def _modings(base: dict, overrides: tuple[str, ...]) -> Moding:
    m = dict(base)
    for text in overrides:
        try:
            sig, modes = parse_mode(text)
        except ParseError as exc:
            raise Failure(f"bad mode {text!r}: {exc}") from None
        m[sig] = modes
    return Moding.of(m)


def _signatures(P: Program, queries) -> list[tuple[str, int]]:
    sigs = []
    for c in P:
        for a in (c.head, *c.body):
            if a.signature not in sigs:
                sigs.append(a.signature)
    for q in queries:
        for a in q:
            if a.signature not in sigs:
                sigs.append(a.signature)
    return sigs


def _require(m: Moding, sigs, what: str):
    missing = m.missing(sigs)
    if missing:
        names = ", ".join(f"{n}/{k}" for n, k in missing)
        raise Failure(f"no {what} for {names}; add a directive or an override")


def _emit(doc: dict):
    click.echo(json.dumps({"schema_version": SCHEMA_VERSION, **doc}, indent=2, ensure_ascii=False))


# analyze -----------------------------------------------------------------------

@dataclass
class Corollary:
    id: str
    conclusion: str
    status: str = "inapplicable"  # applies | conditional | inapplicable
    selection_rule: str | None = None
    unmet: list[str] = field(default_factory=list)

    def to_dict(self):
        return {"id": self.id, "status": self.status, "conclusion": self.conclusion,
                "selection_rule": self.selection_rule, "unmet": self.unmet}


@dataclass
class AnalysisReport:
    program: str
    moding: Moding
    moding2: Moding | None
    queries: list[Query]
    conditions: list[tuple[str, ConditionReport]]
    corollaries: list[Corollary]

    @property
    def applies(self) -> bool:
        return any(c.status == "applies" for c in self.corollaries)

    def to_dict(self):
        return {
            "program": self.program,
            "moding": str(self.moding),
            "moding2": str(self.moding2) if self.moding2 is not None else None,
            "queries": [to_text(q) for q in self.queries],
            "conditions": [{"subject": s, **r.to_dict()} for s, r in self.conditions],
            "corollaries": [c.to_dict() for c in self.corollaries],
        }


def analyze_source(label: str, sf: SourceFile, mode: tuple[str, ...] = (),
                   mode2: tuple[str, ...] = ()) -> AnalysisReport:
    P = sf.program
    queries = list(sf.queries)
    sigs = _signatures(P, queries)
    m = _modings(sf.modings, mode)
    _require(m, sigs, "moding")
    m2 = None
    if sf.modings2 or mode2:
        m2 = _modings(sf.modings2, mode2)
        _require(m2, sigs, "second moding")
        if m2.has_neutral:
            raise Failure("the second moding may only use + and -")
    used = Moding.of({s: m[s] for s in sigs})

    conds: list[tuple[str, ConditionReport]] = []

    def check(subject, report):
        conds.append((subject, report))
        return report

    def on_queries(fn, mm):
        return [check(f"query {i + 1}", fn(q, mm)) for i, q in enumerate(queries)]

    tidy_p = check("program", is_tidy_program(P, m))
    tidy_q = on_queries(is_tidy_query, m)
    check("program", is_nicely_moded(P, m))
    on_queries(is_nicely_moded, m)
    check("program", is_well_moded(P, m))
    on_queries(is_well_moded, m)
    w3_p = check("program", is_well_3_moded(P, m))
    w3_q = on_queries(is_well_3_moded, m)
    wl = check("program", weakly_linear_heads(P, m))
    if m2 is not None:
        wt_p = check("program", is_weakly_tidy(P, m, m2))
        wt_q = [check(f"query {i + 1}", _relabel_query(is_tidy_query(q, m2)))
                for i, q in enumerate(queries)]

    any_rule = "prolog" if used.has_output else "any"

    def corollary(cid, conclusion, needs, rule):
        c = Corollary(cid, conclusion)
        c.unmet = [name for name, r in needs if not r]
        if not c.unmet:
            c.status, c.selection_rule = "applies", rule
        return c

    def qs(name, reports):
        return [(f"{name} (query {i + 1})", r) for i, r in enumerate(reports)]

    cors = [
        corollary("tidy", "occur-check free",
                  [("tidy (program)", tidy_p), *qs("tidy", tidy_q)], "any"),
    ]
    wlh = Corollary("weakly-linear-heads", "weakly occur-check free")
    if wl:
        wlh.status, wlh.selection_rule = "conditional", "compatible-with-moding"
    else:
        wlh.unmet = ["weakly linear heads"]
    cors.append(wlh)
    cors.append(corollary(
        "well-3-moded", "weakly occur-check free",
        [("well-3-moded (program)", w3_p), *qs("well-3-moded", w3_q),
         ("weakly linear heads", wl)], any_rule))
    if m2 is not None:
        cors.append(corollary(
            "weakly-tidy", "weakly occur-check free",
            [("weakly tidy (program)", wt_p), *qs("tidy under second moding", wt_q),
             ("well-3-moded (program)", w3_p), *qs("well-3-moded", w3_q)], any_rule))
    return AnalysisReport(label, m, m2, queries, conds, cors)


def _relabel_query(r: ConditionReport) -> ConditionReport:
    return ConditionReport("tidy-under-second-moding", r.status, r.reason, r.witness)


_RULE_TEXT = {
    "any": "under any selection rule",
    "prolog": "under the Prolog selection rule",
    "compatible-with-moding": "under selection rules compatible with the moding",
}


def _print_analysis(rep: AnalysisReport):
    click.echo(f"program: {rep.program}")
    click.echo(f"moding: {rep.moding}")
    if rep.moding2 is not None:
        click.echo(f"second moding: {rep.moding2}")
    for i, q in enumerate(rep.queries):
        click.echo(f"query {i + 1}: {to_text(q)}")
    click.echo("conditions:")
    for subject, r in rep.conditions:
        line = f"  {r.condition:<26} {subject:<9} {r.status.value}"
        if r.status is not Status.HOLDS and r.reason:
            line += f": {r.reason}"
        click.echo(line)
    click.echo("corollaries:")
    for c in rep.corollaries:
        if c.status == "applies":
            click.echo(f"  {c.id}: applies; {c.conclusion} {_RULE_TEXT[c.selection_rule]}")
        elif c.status == "conditional":
            click.echo(f"  {c.id}: conditional; {c.conclusion} {_RULE_TEXT[c.selection_rule]}")
        else:
            click.echo(f"  {c.id}: does not apply ({', '.join(c.unmet)})")


# traces ------------------------------------------------------------------------

def trace_dict(tr: RunTrace) -> dict:
    return {
        "algorithm": tr.variant.value,
        "steps": [
            {"state": to_text(state), "selected": [to_text(e) for e in st.selected],
             "action": st.action.value}
            for state, st in tr.steps
        ],
        "outcome": tr.outcome.value,
        "final": to_text(tr.final) if tr.final is not None else None,
    }


def _print_trace(tr: RunTrace, indent: str = "  "):
    for state, st in tr.steps:
        sel = "; ".join(to_text(e) for e in st.selected)
        click.echo(f"{indent}{{{to_text(state)}}}  action ({st.action.value}) on {sel}")
    end = to_text(tr.final) if tr.final is not None else tr.outcome.value
    click.echo(f"{indent}=> {end}")


def _yes_no(v) -> str:
    return {True: "yes", False: "no", None: "unknown (budget)"}[v]


# commands ----------------------------------------------------------------------

@click.group()
@click.version_option(package_name="artifact")
def main():
    """Analyse logic programs for safe omission of the occur-check."""


@main.command()
@click.argument("file")
@click.option("--mode", "mode", multiple=True, help="Override a moding, e.g. 'd(+,?,?)'.")
@click.option("--mode2", "mode2", multiple=True, help="Override the second moding.")
@click.option("--json", "as_json", is_flag=True)
def analyze(file, mode, mode2, as_json):
    """Check syntactic conditions and list the applicable corollaries."""
    label, sf = load(file)
    rep = analyze_source(label, sf, mode, mode2)
    if as_json:
        _emit(rep.to_dict())
    else:
        _print_analysis(rep)
    sys.exit(0 if rep.applies else 1)


@main.command()
@click.argument("equations")
@click.option("--algo", type=click.Choice(["mma", "mma-minus"]), default="mma")
@click.option("--enumerate", "enum", is_flag=True, help="Decide NSTO and WNSTO over all runs.")
@click.option("--trace", is_flag=True, help="Print the steps of the run (or witnesses).")
@click.option("--budget", type=int, default=None, help="State budget for --enumerate.")
@click.option("--json", "as_json", is_flag=True)
def unify(equations, algo, enum, trace, budget, as_json):
    """Run a unification algorithm on EQUATIONS (inline text or a file)."""
    path = Path(equations)
    text = path.read_text() if path.is_file() else equations
    try:
        E = as_equations(parse_equations(text))
    except ParseError as exc:
        raise Failure(str(exc)) from None
    if enum:
        budget = default_budget() if budget is None else budget
        rep = decide_nsto_wnsto(E, budget)
        if as_json:
            _emit({
                "equations": to_text(E),
                "nsto": rep.nsto,
                "wnsto": rep.wnsto,
                "states_explored": rep.states_explored,
                "budget_exhausted": rep.budget_exhausted,
                "occur_check_run": trace_dict(rep.witness) if rep.witness else None,
                "occur_check_free_run": trace_dict(rep.wnsto_witness) if rep.wnsto_witness else None,
            })
            return
        click.echo(f"NSTO: {_yes_no(rep.nsto)}, WNSTO: {_yes_no(rep.wnsto)}")
        click.echo(f"states explored: {rep.states_explored}")
        if trace and rep.witness is not None:
            click.echo("a run performing the occur-check:")
            _print_trace(rep.witness)
        if trace and rep.wnsto_witness is not None:
            click.echo("an occur-check free run:")
            _print_trace(rep.wnsto_witness)
        return

    variant = Variant(algo)
    tr = run(E, variant)
    doc = {"equations": to_text(E), "run": trace_dict(tr)}
    lines = []
    if tr.outcome is Outcome.CLASH:
        lines.append("failure: clash")
    elif tr.outcome is Outcome.OCCUR_CHECK:
        lines.append("failure: occur-check")
    elif variant is Variant.MMA:
        theta = mgu_of_solved(tr.final)
        doc["mgu"] = to_text(theta)
        lines.append(f"mgu: {to_text(theta)}")
    else:
        doc["semi_solved"] = to_text(tr.final)
        lines.append(f"semi-solved: {to_text(tr.final)}")
        theta = solve_semi_solved(tr.final)
        doc["mgu"] = to_text(theta) if theta is not None else None
        lines.append(f"mgu: {to_text(theta)}" if theta is not None
                     else "mgu: none (occur-check fails on the semi-solved form)")
    if as_json:
        _emit(doc)
        return
    if trace:
        _print_trace(tr, "")
    for line in lines:
        click.echo(line)


def _cex_dict(c: Counterexample | None):
    if c is None:
        return None
    return {"query": to_text(c.query), "selected": c.selected + 1,
            "atom": to_text(c.query[c.selected]), "clause": c.clause_index,
            "head": to_text(c.head), "run": trace_dict(c.trace) if c.trace else None}


@main.command()
@click.argument("file")
@click.option("--query", "query_text", default=None, help="Query to use instead of the file's.")
@click.option("--rule", default="leftmost",
              help="leftmost, rightmost, random:SEED or moding.")
@click.option("--depth", type=int, default=DEFAULT_DEPTH, show_default=True)
@click.option("--nodes", type=int, default=DEFAULT_NODES, show_default=True)
@click.option("--check", type=click.Choice(["nsto", "wnsto"]), default="nsto")
@click.option("--mode", "mode", multiple=True, help="Override a moding (for --rule moding).")
@click.option("--budget", type=int, default=None)
@click.option("--show-answers", type=int, default=10, show_default=True,
              help="Answers to list in human output; --json always lists all.")
@click.option("--json", "as_json", is_flag=True)
def derive(file, query_text, rule, depth, nodes, check, mode, budget, show_answers, as_json):
    """Explore the SLD-tree and check every available unification."""
    label, sf = load(file)
    if query_text is not None:
        try:
            q = parse_query(query_text)
        except ParseError as exc:
            raise Failure(f"query: {exc}") from None
    elif sf.queries:
        q = sf.queries[0]
    else:
        raise Failure(f"{label} has no query; pass --query")
    if depth <= 0 or nodes <= 0:
        raise Failure("--depth and --nodes must be positive")
    try:
        sel = parse_rule(rule, _modings(sf.modings, mode) if rule == "moding" else None)
    except ValueError as exc:
        raise Failure(str(exc)) from None
    v = verify_tree(sf.program, q, sel, depth, nodes, budget)
    verdict = v.occur_check_free if check == "nsto" else v.weakly_occur_check_free
    if as_json:
        _emit({
            "program": label,
            "query": to_text(q),
            "rule": sel.name,
            "check": check,
            "occur_check_free": v.occur_check_free,
            "weakly_occur_check_free": v.weakly_occur_check_free,
            "truncated": v.truncated,
            "nodes": v.nodes,
            "floundered_leaves": v.floundered_leaves,
            "unknown_decisions": v.unknown_decisions,
            "builtin_errors": v.builtin_errors,
            "compatibility_violations": v.compatibility_violations,
            "counterexample": _cex_dict(v.counterexample),
            "weak_counterexample": _cex_dict(v.weak_counterexample),
            "answers": [to_text(a) for a in v.answers],
        })
        sys.exit(0 if verdict else 1)
    bound = " up to bound" if v.truncated else ""
    click.echo(f"program: {label}")
    click.echo(f"query: {to_text(q)}")
    click.echo(f"rule: {sel.name}")
    click.echo(f"occur-check free{bound}: {_yes_no(v.occur_check_free).upper()}")
    click.echo(f"weakly occur-check free{bound}: {_yes_no(v.weakly_occur_check_free).upper()}")
    click.echo(f"nodes: {v.nodes}, truncated: {'yes' if v.truncated else 'no'}, "
               f"floundered leaves: {v.floundered_leaves}")
    for count, what in ((v.unknown_decisions, "undecided unifications (budget exhausted)"),
                        (v.builtin_errors, "insufficiently instantiated built-in calls"),
                        (v.compatibility_violations, "selections violating the moding")):
        if count:
            click.echo(f"{what}: {count}")
    cex = v.counterexample if check == "nsto" else v.weak_counterexample
    if cex is not None:
        click.echo(f"witness: atom {cex.selected + 1} of {to_text(cex.query)} "
                   f"against clause {cex.clause_index} (head {to_text(cex.head)})")
        if cex.trace is not None:
            _print_trace(cex.trace)
    click.echo(f"answers ({len(v.answers)}):")
    for a in v.answers[:max(show_answers, 0)]:
        click.echo(f"  {to_text(a)}")
    if len(v.answers) > show_answers >= 0:
        click.echo(f"  ... {len(v.answers) - show_answers} more")
    sys.exit(0 if verdict else 1)


_CONDITIONS = ("tidy", "nicely", "well3", "weakly-tidy")


@main.command()
@click.argument("file")
@click.option("--condition", type=click.Choice(_CONDITIONS), default="tidy")
@click.option("--max-positions", type=int, default=16, show_default=True)
@click.option("--with-query", is_flag=True, help="Also require the file's queries to qualify.")
@click.option("--json", "as_json", is_flag=True)
def modesearch(file, condition, max_positions, with_query, as_json):
    """List every moding under which the program satisfies a condition."""
    label, sf = load(file)
    P = sf.program
    fixed = {s: m for s, m in sf.modings.items() if s not in P.defined}
    query = None
    if with_query and sf.queries:
        query = Query(tuple(a for q in sf.queries for a in q))
    try:
        res = mode_search(P, condition, query, max_positions, fixed)
    except SearchBoundExceeded as exc:
        raise Failure(str(exc)) from None

    def show(m: Moding) -> str:
        return str(Moding.of({s: m[s] for s in res.free}))

    if condition == "weakly-tidy":
        found = [f"M = {show(g)}; M' = {show(t)}" for g, t in res.found]
    else:
        found = [show(m) for m in res.found]
    if as_json:
        _emit({"program": label, "condition": condition, "candidates": res.candidates,
               "modings": found})
    else:
        click.echo(f"{label}: {res.candidates} candidate modings, {len(found)} satisfy {condition}")
        for line in found:
            click.echo(f"  {line}")
        if not found:
            click.echo("  none")
    sys.exit(0 if found else 1)


@main.command()
@click.argument("name", required=False)
def corpus(name):
    """List the embedded example programs, or print one."""
    if name is None:
        for n in corpus_names():
            click.echo(n)
        return
    click.echo(read_source(name)[1], nl=False)
