"""Metric word problems as budgeted best-first searches.

All searches run over the (possibly graded) one-step relation, accumulate
weights by tensor, and compare by the quantale order — so on cost quantales
they are ordinary shortest-path searches.  Answers are conservative: an
exact claim is made only when no pruned branch could still beat the
returned value; otherwise the best witness is returned as an upper bound.

Backward steps match a rule's right-hand side and rebuild the left-hand
side; variables the right-hand side erases are instantiated from a
candidate pool drawn from the query terms' subterms.
"""

from __future__ import annotations

import heapq
import itertools
import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from .quantale import QuantaleError, Value
from .term import (
    Position,
    Term,
    Variable,
    apply_substitution,
    instantiate_params,
    match,
    positions,
    replace_at,
    subterm_at,
    term_key,
    term_size,
    variables,
)
from .qtrs import RewriteSystem, _fresh_variable_for, one_step
from .graded import GradedSystem, degree_at_position, graded_one_step

AnySystem = Union[RewriteSystem, GradedSystem]

EXACT = "exact"
UPPER_BOUND = "upper-bound"
UNREACHABLE = "unreachable"
BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class SearchBudget:
    max_expanded: int = 20000
    max_depth: int = 50
    weight_cutoff: Optional[Value] = None
    max_term_size: Optional[int] = None

    def __post_init__(self) -> None:
        if self.max_expanded <= 0 or self.max_depth <= 0:
            raise ValueError("budget bounds must be positive")
        if self.max_term_size is not None and self.max_term_size <= 0:
            raise ValueError("budget bounds must be positive")


@dataclass(frozen=True)
class WitnessStep:
    direction: str  # "forward" | "backward", relative to the rewrite relation
    source: Term
    target: Term
    position: Position
    rule_id: str
    weight: Value

    def flipped(self) -> "WitnessStep":
        return WitnessStep(
            "backward" if self.direction == "forward" else "forward",
            self.target, self.source, self.position, self.rule_id, self.weight)


@dataclass(frozen=True)
class DistanceAnswer:
    kind: str
    value: Optional[Value]
    witness: Tuple[WitnessStep, ...]
    expanded: int = 0

    def to_json(self) -> str:
        return json.dumps({
            "kind": self.kind,
            "value": None if self.value is None else str(self.value),
            "witness": [
                {
                    "direction": w.direction,
                    "position": list(w.position),
                    "rule": w.rule_id,
                    "weight": str(w.weight),
                }
                for w in self.witness
            ],
        })


def _base_system(sys: AnySystem) -> RewriteSystem:
    return sys.system if isinstance(sys, GradedSystem) else sys


def _forward_steps(sys: AnySystem, t: Term, pool: Sequence[Term]) -> List[WitnessStep]:
    stepper = graded_one_step if isinstance(sys, GradedSystem) else one_step
    return [
        WitnessStep("forward", s.source, s.target, s.position, s.rule_id, s.weight)
        for s in stepper(sys, t, pool)
    ]


def _rhs_rule_index(base: RewriteSystem):
    """Rules bucketed by rhs root symbol (plus variable-rhs rules), cached."""
    idx = getattr(base, "_rhs_index", None)
    if idx is None:
        var_rules = []
        by_root = {}
        for rule in base.rules:
            if isinstance(rule.rhs, Variable):
                var_rules.append(rule)
            else:
                by_root.setdefault(rule.rhs.symbol.name, []).append(rule)
        idx = (tuple(var_rules), {k: tuple(v) for k, v in by_root.items()})
        object.__setattr__(base, "_rhs_index", idx)
    return idx


def _backward_steps(sys: AnySystem, t: Term, pool: Sequence[Term]) -> List[WitnessStep]:
    """Predecessors of ``t``: rebuild a left-hand-side instance wherever a
    right-hand-side instance occurs."""
    base = _base_system(sys)
    q = base.quantale
    out: Dict[Tuple[Position, str, str], WitnessStep] = {}
    var_rules, by_root = _rhs_rule_index(base)
    for p in positions(t):
        sub = subterm_at(t, p)
        if isinstance(sub, Variable):
            candidates = var_rules
        else:
            candidates = var_rules + by_root.get(sub.symbol.name, ())
        for rule in candidates:
            m = match(rule.rhs, sub)
            if m is None:
                continue
            sigma, env = m
            unbound = [x for x in rule.params if x not in env]
            if unbound and not base.grid:
                raise QuantaleError(
                    f"rule {rule.rid} has free parameters but no grid")
            erased = sorted(variables(rule.lhs) - variables(rule.rhs))
            candidates = list(pool) or [_fresh_variable_for(t, set(erased))]
            for combo in itertools.product(base.grid, repeat=len(unbound)):
                full_env = dict(env)
                full_env.update(zip(unbound, combo))
                if not all(c.holds(full_env) for c in rule.conditions):
                    continue
                w = rule.weight_value(q, full_env)
                if w == q.bottom:
                    continue
                lhs = instantiate_params(rule.lhs, full_env)
                for picks in itertools.product(candidates, repeat=len(erased)):
                    full = dict(sigma)
                    full.update(zip(erased, picks))
                    source = replace_at(t, p, apply_substitution(lhs, full))
                    if isinstance(sys, GradedSystem):
                        w2 = degree_at_position(
                            sys.signature, t, p).apply(q, w)
                    else:
                        w2 = w
                    step = WitnessStep("backward", t, source, p, rule.rid, w2)
                    key = (p, rule.rid, term_key(source))
                    old = out.get(key)
                    if old is None or q.strictly_below(old.weight, w2):
                        out[key] = step
    return [out[k] for k in sorted(out, key=lambda k: (k[0], k[1], k[2]))]


def _symmetrized_steps(sys: AnySystem, t: Term, pool: Sequence[Term]) -> List[WitnessStep]:
    return _forward_steps(sys, t, pool) + _backward_steps(sys, t, pool)


_STEPPERS = {"forward": _forward_steps, "symmetrized": _symmetrized_steps}

Relaxation = Tuple[str, Term, Value, WitnessStep]


def _pool_sensitivity(base: RewriteSystem) -> Tuple[bool, bool]:
    """Whether step generation depends on the candidate pool.

    Forward steps consult the pool only to invent right-hand-side variables
    absent from the left; backward steps only to fill variables the right-hand
    side erases.  Systems without such rules yield pool-independent steps.
    """
    sens = getattr(base, "_pool_sens", None)
    if sens is None:
        fwd = any(variables(r.rhs) - variables(r.lhs) for r in base.rules)
        bwd = any(variables(r.lhs) - variables(r.rhs) for r in base.rules)
        sens = (fwd, bwd)
        object.__setattr__(base, "_pool_sens", sens)
    return sens


def _relaxations(sys: AnySystem, mode: str, t: Term,
                 pool: Sequence[Term]) -> List[Relaxation]:
    """Step list for ``t`` deduplicated per target (best weight kept), cached
    on the system so repeated queries over shared state spaces amortize."""
    base = _base_system(sys)
    q = base.quantale
    fwd_sens, bwd_sens = _pool_sensitivity(base)
    sensitive = fwd_sens if mode == "forward" else (fwd_sens or bwd_sens)
    graded = isinstance(sys, GradedSystem)
    key: object = (mode, graded, term_key(t))
    if sensitive:
        key = (mode, graded, term_key(t), tuple(term_key(p) for p in pool))
    cache = getattr(base, "_step_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(base, "_step_cache", cache)
    out = cache.get(key)
    if out is None:
        best: Dict[str, Relaxation] = {}
        for step in _STEPPERS[mode](sys, t, pool):
            nk = term_key(step.target)
            old = best.get(nk)
            if old is None or q.strictly_below(old[2], step.weight):
                best[nk] = (nk, step.target, step.weight, step)
        out = [best[k] for k in sorted(best)]
        cache[key] = out
    return out


def _endpoint_pool(*terms: Term) -> List[Term]:
    pool: Dict[str, Term] = {}
    for t in terms:
        for p in positions(t):
            s = subterm_at(t, p)
            pool.setdefault(term_key(s), s)
    return [pool[k] for k in sorted(pool)]


class _SideSearch:
    """One uniform-cost frontier with budget pruning and prune accounting.

    ``best_pruned`` tracks the quantale-largest accumulated weight among
    pruned branches; no unexplored continuation can beat it, so it bounds
    what the truncated region might still contain.
    """

    def __init__(
        self,
        sys: AnySystem,
        start: Term,
        mode: str,
        pool: Sequence[Term],
        budget: SearchBudget,
    ) -> None:
        self.sys = sys
        self.q = _base_system(sys).quantale
        if not self.q.totally_ordered:
            raise QuantaleError(
                "uniform-cost search needs a totally ordered quantale")
        self.mode = mode
        self.pool = pool
        self.budget = budget
        self.dist: Dict[str, Tuple[Value, int, List[WitnessStep]]] = {
            term_key(start): (self.q.unit, 0, [])}
        self.settled: Set[str] = set()
        self.best_pruned: Optional[Value] = None
        self._terms: Dict[str, Term] = {term_key(start): start}
        self._heap: List[Tuple[object, int, str]] = []
        self._seq = 0
        self._push(term_key(start), self.q.unit)

    def _push(self, key: str, w: Value) -> None:
        heapq.heappush(self._heap, (self.q.sort_key(w), self._seq, key))
        self._seq += 1

    def _note_pruned(self, w: Value) -> None:
        if self.best_pruned is None or self.q.strictly_below(self.best_pruned, w):
            self.best_pruned = w

    def frontier_bound(self, include_pruned: bool = True) -> Optional[Value]:
        """Quantale-largest weight any future settlement could have.

        With ``include_pruned`` the bound also covers continuations of
        branches the budget cut off (they classify exact vs upper bound);
        without it, only live frontier nodes count (they alone can still be
        explored, so they alone decide when searching further is useless).
        """
        while self._heap and self._heap[0][2] in self.settled:
            heapq.heappop(self._heap)
        best = None
        if self._heap:
            best = self.dist[self._heap[0][2]][0]
        if include_pruned and self.best_pruned is not None:
            if best is None or self.q.strictly_below(best, self.best_pruned):
                best = self.best_pruned
        return best

    def pop(self) -> Optional[str]:
        """Settle and expand the best frontier node; returns its key."""
        q = self.q
        tensor, sb = q.tensor, q.strictly_below
        dist, terms, settled = self.dist, self._terms, self.settled
        cutoff = self.budget.weight_cutoff
        max_size = self.budget.max_term_size
        while self._heap:
            _, _, key = heapq.heappop(self._heap)
            if key in settled:
                continue
            settled.add(key)
            w, depth, path = dist[key]
            term = terms[key]
            if depth >= self.budget.max_depth:
                self._note_pruned(w)
                return key
            for nk, target, sw, step in _relaxations(
                    self.sys, self.mode, term, self.pool):
                nw = tensor(w, sw)
                if cutoff is not None and sb(nw, cutoff):
                    self._note_pruned(nw)
                    continue
                if max_size is not None and term_size(target) > max_size:
                    self._note_pruned(nw)
                    continue
                old = dist.get(nk)
                if old is not None and not sb(old[0], nw):
                    continue
                dist[nk] = (nw, depth + 1, path + [step])
                terms[nk] = target
                settled.discard(nk)
                self._push(nk, nw)
            return key
        return None

    def truncated(self) -> bool:
        return self.best_pruned is not None


def reduction_distance(
    sys: AnySystem, s: Term, t: Term, budget: SearchBudget = SearchBudget()
) -> DistanceAnswer:
    """Best accumulated weight of a rewrite path from ``s`` to ``t``."""
    q = _base_system(sys).quantale
    pool = _endpoint_pool(s, t)
    side = _SideSearch(sys, s, "forward", pool, budget)
    target = term_key(t)
    expanded = 0
    while expanded < budget.max_expanded:
        key = side.pop()
        if key is None:
            break
        expanded += 1
        if key == target:
            w, _, path = side.dist[key]
            # a pruned branch might still have beaten this settlement
            if side.best_pruned is not None and q.strictly_below(
                    w, side.best_pruned):
                return DistanceAnswer(UPPER_BOUND, w, tuple(path), expanded)
            return DistanceAnswer(EXACT, w, tuple(path), expanded)
    if target in side.dist:
        w, _, path = side.dist[target]
        return DistanceAnswer(UPPER_BOUND, w, tuple(path), expanded)
    if side.frontier_bound() is None and not side.truncated():
        return DistanceAnswer(UNREACHABLE, None, (), expanded)
    return DistanceAnswer(BUDGET_EXHAUSTED, None, (), expanded)


def _meet_search(
    sys: AnySystem,
    s: Term,
    t: Term,
    budget: SearchBudget,
    left_mode: str,
    right_mode: str,
) -> DistanceAnswer:
    """Bidirectional search; meets are scored by the tensor of both sides."""
    q = _base_system(sys).quantale
    pool = _endpoint_pool(s, t)
    left = _SideSearch(sys, s, left_mode, pool, budget)
    right = _SideSearch(sys, t, right_mode, pool, budget)
    best: Optional[Tuple[Value, str]] = None

    def consider(key: str) -> None:
        nonlocal best
        if key in left.dist and key in right.dist:
            total = q.tensor(left.dist[key][0], right.dist[key][0])
            if best is None or q.strictly_below(best[0], total):
                best = (total, key)

    def future_meet_bound(include_pruned: bool) -> Optional[Value]:
        """Quantale-largest total any yet-unseen meet could have.

        With both frontiers alive the bound is the tensor of the frontier
        minima (the classic bidirectional stopping bound); once one side has
        fully settled, only the other side's bound constrains new meets.
        The pruned-free bound governs loop termination (cut branches cannot
        be explored, so they cannot justify more work); the pruned-inclusive
        bound governs the exact/upper-bound classification.
        """
        lb_l = left.frontier_bound(include_pruned)
        lb_r = right.frontier_bound(include_pruned)
        if lb_l is None and lb_r is None:
            return None
        if lb_l is None:
            return lb_r
        if lb_r is None:
            return lb_l
        return q.tensor(lb_l, lb_r)

    consider(term_key(s))
    consider(term_key(t))
    expanded = 0
    exhausted_both = False
    while expanded < budget.max_expanded:
        progressed = False
        for side in (left, right):
            key = side.pop()
            if key is None:
                continue
            progressed = True
            expanded += 1
            consider(key)
        if not progressed:
            exhausted_both = True
            break
        if best is not None:
            live = future_meet_bound(include_pruned=False)
            if live is None or not q.strictly_below(best[0], live):
                break
    # tentative distances may hold meets the settle-time checks missed
    for key in left.dist.keys() & right.dist.keys():
        consider(key)
    if best is not None:
        total, key = best
        lpath = left.dist[key][2]
        rpath = right.dist[key][2]
        witness = tuple(lpath) + tuple(w.flipped() for w in reversed(rpath))
        bound = future_meet_bound(include_pruned=True)
        if bound is None or not q.strictly_below(total, bound):
            return DistanceAnswer(EXACT, total, witness, expanded)
        return DistanceAnswer(UPPER_BOUND, total, witness, expanded)
    if exhausted_both and not left.truncated() and not right.truncated():
        return DistanceAnswer(UNREACHABLE, None, (), expanded)
    return DistanceAnswer(BUDGET_EXHAUSTED, None, (), expanded)


def convertibility_distance(
    sys: AnySystem, s: Term, t: Term, budget: SearchBudget = SearchBudget()
) -> DistanceAnswer:
    """Best weight of a conversion (steps in either direction) from s to t."""
    return _meet_search(sys, s, t, budget, "symmetrized", "symmetrized")


def valley_distance(
    sys: AnySystem, s: Term, t: Term, budget: SearchBudget = SearchBudget()
) -> DistanceAnswer:
    """Best tensor over common reducts of forward reductions from s and t."""
    return _meet_search(sys, s, t, budget, "forward", "forward")


def reachability(
    sys: AnySystem, s: Term, t: Term, budget: SearchBudget = SearchBudget()
) -> str:
    """Tri-state: "reachable", "unreachable", or "unknown"."""
    ans = convertibility_distance(sys, s, t, budget)
    if ans.kind in (EXACT, UPPER_BOUND):
        return "reachable"
    if ans.kind == UNREACHABLE:
        return "unreachable"
    return "unknown"


def epsilon_reachability(
    sys: AnySystem, s: Term, t: Term, eps: Value,
    budget: SearchBudget = SearchBudget(),
) -> str:
    """Tri-state: is there a conversion of weight dominating ``eps``?"""
    q = _base_system(sys).quantale
    q.check_value(eps)
    cut = budget.weight_cutoff
    if cut is None or q.strictly_below(eps, cut):
        budget = SearchBudget(budget.max_expanded, budget.max_depth,
                              eps, budget.max_term_size)
    ans = convertibility_distance(sys, s, t, budget)
    if ans.value is not None and q.leq(eps, ans.value):
        return "true"
    if ans.kind == UNREACHABLE:
        return "false"
    return "unknown"


@dataclass(frozen=True)
class NormalizeResult:
    normal_forms: Tuple[Tuple[Term, Value], ...]
    exhausted: bool  # budget ran out before the strategy finished


def normalize(
    sys: AnySystem, t: Term, strategy: str = "leftmost-innermost",
    budget: SearchBudget = SearchBudget(),
) -> NormalizeResult:
    """Drive ``t`` to normal form(s) under the chosen strategy.

    Deterministic strategies follow one maximal path; "all" collects every
    normal form discovered by breadth-first closure under the budget.
    """
    q = _base_system(sys).quantale
    pool = _endpoint_pool(t)

    if strategy in ("leftmost-innermost", "leftmost-outermost"):
        def pick(steps: List[WitnessStep]) -> WitnessStep:
            if strategy == "leftmost-innermost":
                return min(steps, key=lambda s: (-len(s.position), s.position,
                                                 s.rule_id))
            return min(steps, key=lambda s: (len(s.position), s.position,
                                             s.rule_id))

        cur, w = t, q.unit
        for _ in range(budget.max_depth):
            steps = _forward_steps(sys, cur, pool)
            if not steps:
                return NormalizeResult(((cur, w),), False)
            step = pick(steps)
            cur = step.target
            w = q.tensor(w, step.weight)
        return NormalizeResult((), True)

    if strategy != "all":
        raise ValueError(f"unknown strategy {strategy!r}")

    seen: Dict[str, Tuple[Term, Value]] = {term_key(t): (t, q.unit)}
    frontier = [term_key(t)]
    nfs: Dict[str, Tuple[Term, Value]] = {}
    expanded = 0
    exhausted = False
    for _ in range(budget.max_depth):
        nxt: List[str] = []
        for key in frontier:
            term, w = seen[key]
            expanded += 1
            if expanded > budget.max_expanded:
                exhausted = True
                break
            steps = _forward_steps(sys, term, pool)
            if not steps:
                old = nfs.get(key)
                if old is None or q.strictly_below(old[1], w):
                    nfs[key] = (term, w)
                continue
            for step in steps:
                nw = q.tensor(w, step.weight)
                nk = term_key(step.target)
                old = seen.get(nk)
                if old is None or q.strictly_below(old[1], nw):
                    seen[nk] = (step.target, nw)
                    nxt.append(nk)
        if exhausted or not nxt:
            break
        frontier = nxt
    else:
        exhausted = exhausted or bool(frontier)
    if not nfs and exhausted:
        return NormalizeResult((), True)
    return NormalizeResult(
        tuple(nfs[k] for k in sorted(nfs)), exhausted)


def validate_witness(sys: AnySystem, s: Term, t: Term,
                     witness: Sequence[WitnessStep]) -> bool:
    """Re-derive every witness step through the one-step relation."""
    q = _base_system(sys).quantale
    pool = _endpoint_pool(s, t)
    cur = s
    for wstep in witness:
        if term_key(wstep.source) != term_key(cur):
            return False
        if wstep.direction == "forward":
            cands = _forward_steps(sys, wstep.source, pool)
            ok = any(term_key(c.target) == term_key(wstep.target)
                     and not q.strictly_below(c.weight, wstep.weight)
                     for c in cands if c.position == wstep.position)
        else:
            cands = _forward_steps(sys, wstep.target, pool)
            ok = any(term_key(c.target) == term_key(wstep.source)
                     and not q.strictly_below(c.weight, wstep.weight)
                     for c in cands if c.position == wstep.position)
        if not ok:
            return False
        cur = wstep.target
    return term_key(cur) == term_key(t)
