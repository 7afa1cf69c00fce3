"""Weighted term rewriting systems: rules, schemas, steps, critical pairs,
joinability and strong-closure certification, sums, and confluence reports.

Rules may be schemas: their symbol parameters, weight, and side conditions
can mention rational parameters.  During rewriting, parameters are read off
the matched symbols; parameters that the left-hand side does not determine
(and fresh right-hand-side variables) are instantiated lazily — parameters
from the system's declared grid, fresh variables from a caller-supplied
candidate pool.  For critical-pair analysis the schemas are instantiated
over the grid up front, which keeps the enumeration finite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from .quantale import QuantaleError, QuantaleSpec, Value
from .ratexpr import Comparison, Env, Expr
from .term import (
    Application,
    Position,
    Renamer,
    Substitution,
    Symbol,
    Term,
    TermError,
    Variable,
    apply_substitution,
    function_positions,
    instantiate_params,
    is_linear,
    match,
    positions,
    replace_at,
    subterm_at,
    term_key,
    term_size,
    unify,
    variables,
)
from . import qrel as _qrel


@dataclass(frozen=True)
class SymbolFamily:
    """A declared symbol family: name, arity, parameter slots, display hints."""

    name: str
    arity: int
    param_names: Tuple[str, ...] = ()
    infix: bool = False
    grades: Optional[Tuple[Expr, ...]] = None  # per-argument sensitivities

    def make(self, *params: Fraction) -> Symbol:
        if len(params) != len(self.param_names):
            raise TermError(
                f"family {self.name} takes {len(self.param_names)} parameters")
        return Symbol(self.name, self.arity, tuple(Fraction(p) for p in params))


WeightSlot = object  # Value or Expr


@dataclass(frozen=True)
class Rule:
    rid: str
    lhs: Term
    rhs: Term
    weight: WeightSlot
    params: Tuple[str, ...] = ()
    conditions: Tuple[Comparison, ...] = ()
    origin: str = ""

    def __post_init__(self) -> None:
        if isinstance(self.lhs, Variable) and isinstance(self.rhs, Variable):
            raise TermError(f"rule {self.rid}: variable-to-variable rule")

    @property
    def is_schema(self) -> bool:
        return bool(self.params)

    def fresh_rhs_variables(self) -> Tuple[str, ...]:
        """Right-hand-side variables the left-hand side does not bind."""
        return tuple(sorted(variables(self.rhs) - variables(self.lhs)))

    def weight_value(self, quantale: QuantaleSpec, env: Env) -> Value:
        if hasattr(self.weight, "evaluate"):
            return quantale.check_value(self.weight.evaluate(env))
        return self.weight


@dataclass(frozen=True)
class RewriteStep:
    source: Term
    target: Term
    weight: Value
    position: Position
    rule_id: str
    substitution: Tuple[Tuple[str, Term], ...]


@dataclass(frozen=True)
class RewriteSystem:
    name: str
    quantale: QuantaleSpec
    signature: Tuple[SymbolFamily, ...]
    rules: Tuple[Rule, ...]
    grid: Tuple[Fraction, ...] = ()

    def __post_init__(self) -> None:
        seen = set()
        for fam in self.signature:
            if fam.name in seen:
                raise TermError(f"duplicate symbol family {fam.name!r}")
            seen.add(fam.name)
        for rule in self.rules:
            for t in (rule.lhs, rule.rhs):
                self._check_term(t, rule)
            if not rule.is_schema and rule.weight == self.quantale.bottom:
                raise QuantaleError(f"rule {rule.rid}: bottom weight")

    def _check_term(self, t: Term, rule: Rule) -> None:
        if isinstance(t, Variable):
            return
        fam = self.family(t.symbol.name)
        if fam is None:
            raise TermError(f"rule {rule.rid}: unknown symbol {t.symbol.name!r}")
        if fam.arity != t.symbol.arity or len(fam.param_names) != len(t.symbol.params):
            raise TermError(f"rule {rule.rid}: arity/parameter mismatch on {t.symbol}")
        for a in t.args:
            self._check_term(a, rule)

    def family(self, name: str) -> Optional[SymbolFamily]:
        for fam in self.signature:
            if fam.name == name:
                return fam
        return None

    @property
    def linear(self) -> bool:
        return all(is_linear(r.lhs) and is_linear(r.rhs) for r in self.rules)

    @property
    def left_linear(self) -> bool:
        return all(is_linear(r.lhs) for r in self.rules)

    @property
    def has_schemas(self) -> bool:
        return any(r.is_schema for r in self.rules)

    def variable_lhs_rules(self) -> Tuple[str, ...]:
        return tuple(r.rid for r in self.rules if isinstance(r.lhs, Variable))

    # -- schema instantiation ------------------------------------------------

    def instantiate(self, grid: Optional[Sequence[Fraction]] = None) -> "RewriteSystem":
        """Expand every schema rule over the grid; concrete rules pass through."""
        grid = tuple(grid) if grid is not None else self.grid
        out: List[Rule] = []
        for rule in self.rules:
            if not rule.is_schema:
                out.append(rule)
                continue
            if not grid:
                raise QuantaleError(
                    f"rule {rule.rid} is a schema but no parameter grid is declared")
            for combo in itertools.product(grid, repeat=len(rule.params)):
                env = dict(zip(rule.params, combo))
                if not all(c.holds(env) for c in rule.conditions):
                    continue
                w = rule.weight_value(self.quantale, env)
                if w == self.quantale.bottom:
                    continue
                tag = ",".join(f"{p}={env[p]}" for p in rule.params)
                out.append(Rule(
                    rid=f"{rule.rid}[{tag}]",
                    lhs=instantiate_params(rule.lhs, env),
                    rhs=instantiate_params(rule.rhs, env),
                    weight=w,
                    origin=rule.origin,
                ))
        return replace(self, rules=tuple(out))


def _lhs_rule_index(
    sys: RewriteSystem,
) -> Tuple[Tuple[Rule, ...], Dict[str, Tuple[Rule, ...]]]:
    """(variable-lhs rules, rules bucketed by lhs root symbol), cached."""
    idx = getattr(sys, "_lhs_index", None)
    if idx is None:
        var_rules: List[Rule] = []
        by_root: Dict[str, List[Rule]] = {}
        for rule in sys.rules:
            if isinstance(rule.lhs, Variable):
                var_rules.append(rule)
            else:
                by_root.setdefault(rule.lhs.symbol.name, []).append(rule)
        idx = (tuple(var_rules),
               {k: tuple(v) for k, v in by_root.items()})
        object.__setattr__(sys, "_lhs_index", idx)
    return idx


def _fresh_variable_for(t: Term, taken: Set[str]) -> Variable:
    avoid = variables(t) | taken
    i = 0
    while f"w{i}" in avoid:
        i += 1
    return Variable(f"w{i}")


def _rule_matches(
    sys: RewriteSystem, rule: Rule, sub: Term
) -> Iterator[Tuple[Substitution, Env, Value]]:
    """All ways ``rule`` fires on ``sub``: bindings, parameter env, weight."""
    m = match(rule.lhs, sub)
    if m is None:
        return
    sigma, env = m
    unbound = [p for p in rule.params if p not in env]
    if unbound and not sys.grid:
        raise QuantaleError(
            f"rule {rule.rid} has free parameters {unbound} but no grid")
    for combo in itertools.product(sys.grid, repeat=len(unbound)):
        full = dict(env)
        full.update(zip(unbound, combo))
        if not all(c.holds(full) for c in rule.conditions):
            continue
        w = rule.weight_value(sys.quantale, full)
        if w == sys.quantale.bottom:
            continue
        yield sigma, full, w


def one_step(
    sys: RewriteSystem,
    t: Term,
    fresh_pool: Optional[Sequence[Term]] = None,
) -> List[RewriteStep]:
    """Every single rewrite step from ``t``, duplicate-free.

    ``fresh_pool`` supplies candidate instantiations for right-hand-side
    variables the left-hand side does not bind; by default a single fresh
    variable is used.
    """
    steps: Dict[Tuple[Position, str, str], RewriteStep] = {}
    var_rules, by_root = _lhs_rule_index(sys)
    for p in positions(t):
        sub = subterm_at(t, p)
        if isinstance(sub, Variable):
            candidates = var_rules
        else:
            candidates = var_rules + by_root.get(sub.symbol.name, ())
        for rule in candidates:
            for sigma, env, weight in _rule_matches(sys, rule, sub):
                rhs = instantiate_params(rule.rhs, env)
                fresh = rule.fresh_rhs_variables()
                if fresh:
                    pool = list(fresh_pool) if fresh_pool else [
                        _fresh_variable_for(t, set(fresh))]
                    choices: Iterable[Tuple[Term, ...]] = itertools.product(
                        pool, repeat=len(fresh))
                else:
                    choices = [()]
                rid = rule.rid
                if env:
                    rid = f"{rule.rid}[{','.join(f'{k}={v}' for k, v in sorted(env.items()))}]"
                for picked in choices:
                    full_sigma = dict(sigma)
                    full_sigma.update(zip(fresh, picked))
                    target = replace_at(t, p, apply_substitution(rhs, full_sigma))
                    key = (p, rid, term_key(target))
                    step = RewriteStep(
                        source=t,
                        target=target,
                        weight=weight,
                        position=p,
                        rule_id=rid,
                        substitution=tuple(sorted(
                            (x, s) for x, s in full_sigma.items())),
                    )
                    old = steps.get(key)
                    if old is None or sys.quantale.strictly_below(old.weight, step.weight):
                        steps[key] = step
    return [steps[k] for k in sorted(steps, key=lambda k: (k[0], k[1], k[2]))]


# ---------------------------------------------------------------------------
# critical pairs


@dataclass(frozen=True)
class CriticalPeak:
    """A divergence from overlapping rule instances.

    ``left`` rewrites the overlap position with the inner rule (contractum in
    context); ``right`` rewrites at the root with the outer rule.
    """

    source: Term
    left: Tuple[Term, Value]
    right: Tuple[Term, Value]
    position: Position
    inner_rule: str
    outer_rule: str

    def tensor(self, quantale: QuantaleSpec) -> Value:
        return quantale.tensor(self.left[1], self.right[1])


def _canonical_peak_key(peak: CriticalPeak) -> str:
    mapping: Dict[str, str] = {}

    def canon(t: Term) -> Term:
        if isinstance(t, Variable):
            if t.name not in mapping:
                mapping[t.name] = f"v{len(mapping)}"
            return Variable(mapping[t.name])
        return Application(t.symbol, tuple(canon(a) for a in t.args))

    parts = [canon(peak.source), canon(peak.left[0]), canon(peak.right[0])]
    return "|".join(term_key(p) for p in parts) + f"|{peak.left[1]}|{peak.right[1]}"


def critical_pairs(
    sys: RewriteSystem,
    grid: Optional[Sequence[Fraction]] = None,
    pair_filter=None,
) -> List[CriticalPeak]:
    """Overlaps of rule instances at function-symbol positions.

    Root overlaps of a rule instance with itself are skipped, as are rules
    whose left-hand side is a bare variable in the inner role (they overlap
    everywhere; reported separately by ``variable_lhs_rules``).
    """
    conc = sys.instantiate(grid) if (sys.has_schemas or grid is not None) else sys
    peaks: Dict[str, CriticalPeak] = {}
    for outer in conc.rules:
        if isinstance(outer.lhs, Variable):
            continue
        for inner in conc.rules:
            if isinstance(inner.lhs, Variable):
                continue
            if pair_filter is not None and not pair_filter(inner, outer):
                continue
            renamer = Renamer()
            avoid = variables(outer.lhs) | variables(outer.rhs)
            (in_lhs, in_rhs), _ = renamer.rename_apart(
                [inner.lhs, inner.rhs], avoid)
            for p in function_positions(outer.lhs):
                if p == () and inner.rid == outer.rid:
                    continue  # a rule never critically overlaps itself at the root
                sigma = unify(subterm_at(outer.lhs, p), in_lhs)
                if sigma is None:
                    continue
                source = apply_substitution(outer.lhs, sigma)
                left = replace_at(source, p, apply_substitution(in_rhs, sigma))
                right = apply_substitution(outer.rhs, sigma)
                peak = CriticalPeak(
                    source=source,
                    left=(left, inner.weight),
                    right=(right, outer.weight),
                    position=p,
                    inner_rule=inner.rid,
                    outer_rule=outer.rid,
                )
                peaks.setdefault(_canonical_peak_key(peak), peak)
    return [peaks[k] for k in sorted(peaks)]


def sum_systems(sys1: RewriteSystem, sys2: RewriteSystem) -> RewriteSystem:
    """Disjoint union; the induced relation is the join of the components."""
    names1 = {f.name for f in sys1.signature}
    overlap = names1 & {f.name for f in sys2.signature}
    if overlap:
        raise TermError(f"sum requires disjoint signatures; shared: {sorted(overlap)}")
    sys1.quantale.check_same(sys2.quantale)

    def tag(rules: Tuple[Rule, ...], default: str) -> Tuple[Rule, ...]:
        return tuple(
            r if r.origin else replace(r, origin=default) for r in rules)

    return RewriteSystem(
        name=f"{sys1.name}+{sys2.name}",
        quantale=sys1.quantale,
        signature=sys1.signature + sys2.signature,
        rules=tag(sys1.rules, sys1.name) + tag(sys2.rules, sys2.name),
        grid=tuple(dict.fromkeys(sys1.grid + sys2.grid)),
    )


def cross_critical_pairs(
    sys1: RewriteSystem,
    sys2: RewriteSystem,
    grid: Optional[Sequence[Fraction]] = None,
) -> List[CriticalPeak]:
    """Peaks of the sum whose two rules come from different components."""
    combined = sum_systems(sys1, sys2)

    def different(inner: Rule, outer: Rule) -> bool:
        return inner.origin != outer.origin

    return critical_pairs(combined, grid=grid, pair_filter=different)


# ---------------------------------------------------------------------------
# bounded valley searches


def peak_subterm_pool(peak: CriticalPeak) -> List[Term]:
    pool: Dict[str, Term] = {}
    for t in (peak.source, peak.left[0], peak.right[0]):
        for p in positions(t):
            s = subterm_at(t, p)
            pool.setdefault(term_key(s), s)
    return [pool[k] for k in sorted(pool)]


def bounded_reducts(
    sys: RewriteSystem,
    t: Term,
    depth: int,
    fresh_pool: Optional[Sequence[Term]] = None,
    weight_bound: Optional[Value] = None,
    size_bound: Optional[int] = None,
) -> Dict[str, Tuple[Term, Value, List[RewriteStep]]]:
    """Best-weight reducts within ``depth`` steps, with witnessing paths.

    If ``weight_bound`` is given, paths whose accumulated weight drops below
    it in the quantale order are pruned (sound: tensors only descend).
    ``size_bound`` likewise drops reducts larger than the given term size;
    both prunings shrink the reduct set but never invent spurious entries.
    """
    q = sys.quantale
    best: Dict[str, Tuple[Term, Value, List[RewriteStep]]] = {
        term_key(t): (t, q.unit, [])}
    frontier = [term_key(t)]
    for _ in range(depth):
        next_frontier: List[str] = []
        for key in frontier:
            term, w, path = best[key]
            for step in one_step(sys, term, fresh_pool):
                nw = q.tensor(w, step.weight)
                if weight_bound is not None and not q.leq(weight_bound, nw):
                    continue
                if size_bound is not None and term_size(step.target) > size_bound:
                    continue
                nk = term_key(step.target)
                old = best.get(nk)
                if old is None or q.strictly_below(old[1], nw):
                    best[nk] = (step.target, nw, path + [step])
                    next_frontier.append(nk)
        if not next_frontier:
            break
        frontier = next_frontier
    return best


@dataclass(frozen=True)
class JoinVerdict:
    kind: str  # "joinable" | "unknown"
    peak_total: Value
    best_total: Optional[Value]
    meet: Optional[Term]
    left_path: Tuple[RewriteStep, ...]
    right_path: Tuple[RewriteStep, ...]


def join_check(
    sys: RewriteSystem, peak: CriticalPeak, depth_budget: int
) -> JoinVerdict:
    """Search for a valley whose tensor dominates the peak tensor.

    "Dominates" is in the quantale order (valley >= peak), i.e. numerically
    at most the peak total on cost quantales.  An exhausted budget yields
    "unknown", carrying the best valley found as a certificate.
    """
    q = sys.quantale
    pool = peak_subterm_pool(peak)
    peak_total = peak.tensor(q)
    lred = bounded_reducts(sys, peak.left[0], depth_budget, pool)
    rred = bounded_reducts(sys, peak.right[0], depth_budget, pool)
    best = None
    for key, (lt, lw, lp) in lred.items():
        hit = rred.get(key)
        if hit is None:
            continue
        _, rw, rp = hit
        total = q.tensor(lw, rw)
        if best is None or q.strictly_below(best[0], total):
            best = (total, lt, lp, rp)
    if best is not None and q.leq(peak_total, best[0]):
        return JoinVerdict("joinable", peak_total, best[0], best[1],
                           tuple(best[2]), tuple(best[3]))
    return JoinVerdict(
        "unknown", peak_total,
        best[0] if best else None,
        best[1] if best else None,
        tuple(best[2]) if best else (),
        tuple(best[3]) if best else ())


@dataclass(frozen=True)
class StrongClosureVerdict:
    holds: bool
    one_step_left: Optional[Tuple[Term, Value]]   # left ->= u *<- right
    one_step_right: Optional[Tuple[Term, Value]]  # left ->* v =<- right


def _one_sided_closure(
    sys: RewriteSystem,
    short_side: Term,
    long_side: Term,
    peak_total: Value,
    depth: int,
    pool: Sequence[Term],
) -> Optional[Tuple[Term, Value]]:
    q = sys.quantale
    candidates: Dict[str, Tuple[Term, Value]] = {
        term_key(short_side): (short_side, q.unit)}
    for step in one_step(sys, short_side, pool):
        key = term_key(step.target)
        old = candidates.get(key)
        if old is None or q.strictly_below(old[1], step.weight):
            candidates[key] = (step.target, step.weight)
    # the sought meet is one of the candidates, so reducts that outgrow them
    # (modulo slack for intermediate reshuffling) can never close the peak
    size_cap = 2 + max(term_size(long_side),
                       *(term_size(u) for u, _ in candidates.values()))

    def hit(term: Term, w: Value) -> Optional[Tuple[Term, Value]]:
        # critical pairs are open terms: the sides meet when one is an
        # instance of the other, not only when they are literally equal
        for u, wu in candidates.values():
            if (term_key(term) == term_key(u)
                    or match(term, u) is not None
                    or match(u, term) is not None):
                total = q.tensor(wu, w)
                if q.leq(peak_total, total):
                    return (u, total)
        return None

    found = hit(long_side, q.unit)
    if found is not None:
        return found
    best_seen: Dict[str, Value] = {term_key(long_side): q.unit}
    frontier: List[Tuple[Term, Value]] = [(long_side, q.unit)]
    for _ in range(depth):
        next_frontier: List[Tuple[Term, Value]] = []
        for term, w in frontier:
            for step in one_step(sys, term, pool):
                nw = q.tensor(w, step.weight)
                if not q.leq(peak_total, nw):
                    continue
                if term_size(step.target) > size_cap:
                    continue
                nk = term_key(step.target)
                old = best_seen.get(nk)
                if old is not None and not q.strictly_below(old, nw):
                    continue
                best_seen[nk] = nw
                found = hit(step.target, nw)
                if found is not None:
                    return found
                next_frontier.append((step.target, nw))
        if not next_frontier:
            break
        frontier = next_frontier
    return None


def strongly_closed_check(
    sys: RewriteSystem, peak: CriticalPeak, depth_budget: int
) -> StrongClosureVerdict:
    """Both one-sided valley conditions for the peak, weight-aware.

    Condition one: some u with left ->= u and right ->* u.  Condition two:
    some v with left ->* v and right ->= v.  Each valley tensor must dominate
    the peak tensor in the quantale order.
    """
    q = sys.quantale
    pool = peak_subterm_pool(peak)
    total = peak.tensor(q)
    c1 = _one_sided_closure(sys, peak.left[0], peak.right[0], total,
                            depth_budget, pool)
    c2 = _one_sided_closure(sys, peak.right[0], peak.left[0], total,
                            depth_budget, pool)
    return StrongClosureVerdict(c1 is not None and c2 is not None, c1, c2)


# ---------------------------------------------------------------------------
# term graphs and the confluence report


def term_graph(
    sys: RewriteSystem,
    seeds: Sequence[Term],
    max_terms: int = 2000,
    fresh_pool: Optional[Sequence[Term]] = None,
) -> Tuple[_qrel.FiniteQRel, bool]:
    """Explore the reduction graph; returns (relation, exhausted?)."""
    q = sys.quantale
    nodes: Dict[str, Term] = {}
    edges: Dict[Tuple[str, str], Value] = {}
    frontier = []
    for s in seeds:
        key = term_key(s)
        if key not in nodes:
            nodes[key] = s
            frontier.append(key)
    exhausted = True
    while frontier:
        key = frontier.pop()
        for step in one_step(sys, nodes[key], fresh_pool):
            tk = term_key(step.target)
            if tk not in nodes:
                if len(nodes) >= max_terms:
                    exhausted = False
                    continue
                nodes[tk] = step.target
                frontier.append(tk)
            ekey = (key, tk)
            old = edges.get(ekey)
            edges[ekey] = step.weight if old is None else q.join2(old, step.weight)
    rel = _qrel.FiniteQRel.make(sorted(nodes), edges, q)
    return rel, exhausted


@dataclass(frozen=True)
class ConfluenceReport:
    certificate: str
    evidence: Dict[str, object]


def confluence_report(
    sys: RewriteSystem,
    seeds: Sequence[Term] = (),
    depth_budget: int = 6,
    sn_max_terms: int = 2000,
    grid: Optional[Sequence[Fraction]] = None,
    components: Optional[Tuple[RewriteSystem, RewriteSystem]] = None,
) -> ConfluenceReport:
    """Run the certification pipeline and emit the strongest justified claim.

    Routes, in order: declared-sum modularity (empty cross peaks plus
    certified components), critical pairs + termination probe, strong
    closure.  Non-linear systems only enter the critical-pair routes when
    the quantale is idempotent, and that relaxation is flagged.
    """
    evidence: Dict[str, object] = {
        "linear": sys.linear,
        "left_linear": sys.left_linear,
        "variable_lhs_rules": sys.variable_lhs_rules(),
    }
    gate_ok = sys.linear
    if not gate_ok and sys.quantale.idempotent:
        gate_ok = True
        evidence["linearity_gate"] = (
            "relaxed: idempotent quantale (per-remark route, unproved in paper)")

    if components is not None:
        c1, c2 = components
        cross = cross_critical_pairs(c1, c2, grid=grid)
        evidence["cross_critical_pairs"] = len(cross)
        if not cross:
            def sub_seeds(c: RewriteSystem) -> List[Term]:
                fams = {f.name for f in c.signature}

                def ok(t: Term) -> bool:
                    if isinstance(t, Variable):
                        return True
                    return t.symbol.name in fams and all(ok(a) for a in t.args)

                return [s for s in seeds if ok(s)]

            subs = [
                confluence_report(c, sub_seeds(c), depth_budget,
                                  sn_max_terms, grid)
                for c in (c1, c2)
            ]
            evidence["component_certificates"] = [s.certificate for s in subs]
            if all(s.certificate != "inconclusive" for s in subs):
                return ConfluenceReport("confluent by Hindley-Rosen", evidence)

    peaks = critical_pairs(sys, grid=grid)
    evidence["critical_pairs"] = len(peaks)

    sn_status = "skipped"
    if seeds:
        rel, exhausted = term_graph(sys, seeds, sn_max_terms)
        if not rel.strongly_normalizing_check():
            sn_status = "cycle found"
        elif exhausted:
            sn_status = "passes on explored"
        else:
            sn_status = "inconclusive (truncated)"
    evidence["sn_probe"] = sn_status

    if gate_ok and sn_status == "passes on explored":
        verdicts = [join_check(sys, p, depth_budget) for p in peaks]
        evidence["joinable_peaks"] = sum(v.kind == "joinable" for v in verdicts)
        if all(v.kind == "joinable" for v in verdicts):
            return ConfluenceReport(
                "confluent by CP+Newman at explored scale", evidence)

    if gate_ok:
        strong = [strongly_closed_check(sys, p, depth_budget) for p in peaks]
        evidence["strongly_closed_peaks"] = sum(v.holds for v in strong)
        if all(v.holds for v in strong):
            return ConfluenceReport("confluent by strong closure", evidence)

    return ConfluenceReport("inconclusive", evidence)
