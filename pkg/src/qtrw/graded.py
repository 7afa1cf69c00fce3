"""Graded rewriting: per-argument sensitivities, degrees, balanced rules,
grade-scaled one-step reduction, parallel multi-steps, and orthogonality.

On additive cost quantales every sensitivity normalizes to a single
non-negative rational scalar c, acting by ε ↦ c·ε (identity is 1, the
constant-unit map is 0, composition is product, tensor is sum).  That makes
balancedness a rational-equality check.  Scalars may not be infinite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .quantale import INF, QuantaleSpec, Value
from .term import (
    Application,
    Context,
    Position,
    Symbol,
    Term,
    TermError,
    Variable,
    apply_substitution,
    instantiate_params,
    positions,
    subterm_at,
    term_key,
    variables,
)
from .qtrs import (
    RewriteStep,
    RewriteSystem,
    _fresh_variable_for,
    _rule_matches,
    critical_pairs,
    one_step,
)


class GradedError(ValueError):
    pass


@dataclass(frozen=True)
class Sensitivity:
    """A distance amplification factor: the map ε ↦ scalar·ε."""

    scalar: Fraction

    def __post_init__(self) -> None:
        if self.scalar < 0:
            raise GradedError(f"negative sensitivity {self.scalar}")

    def compose(self, other: "Sensitivity") -> "Sensitivity":
        return Sensitivity(self.scalar * other.scalar)

    def tensor(self, other: "Sensitivity") -> "Sensitivity":
        return Sensitivity(self.scalar + other.scalar)

    def apply(self, quantale: QuantaleSpec, value: Value) -> Value:
        quantale.check_value(value)
        if self.scalar == 0:
            return quantale.unit
        if value is INF:
            return INF
        return self.scalar * value

    def __str__(self) -> str:
        return str(self.scalar)


IDENTITY = Sensitivity(Fraction(1))
CONSTANT_UNIT = Sensitivity(Fraction(0))


class GradedSignature:
    """Per-argument sensitivities for each symbol family.

    Grades come from the family declarations; families without declared
    grades are non-expansive (all arguments graded 1).  Parametric families
    evaluate their grade expressions against the concrete symbol parameters.
    """

    def __init__(self, system: RewriteSystem) -> None:
        self.system = system

    def grades_of(self, symbol: Symbol) -> Tuple[Sensitivity, ...]:
        fam = self.system.family(symbol.name)
        if fam is None:
            raise TermError(f"unknown symbol {symbol.name!r}")
        if fam.grades is None:
            return (IDENTITY,) * symbol.arity
        if len(fam.grades) != symbol.arity:
            raise GradedError(f"{symbol.name}: grade list does not match arity")
        env = {}
        for name, val in zip(fam.param_names, symbol.params):
            if not isinstance(val, Fraction):
                raise GradedError(
                    f"{symbol}: grades need concrete symbol parameters")
            env[name] = val
        out = []
        for g in fam.grades:
            if hasattr(g, "evaluate"):
                out.append(Sensitivity(g.evaluate(env)))
            else:
                out.append(Sensitivity(Fraction(g)))
        return tuple(out)


def degree_at_position(sig: GradedSignature, t: Term, p: Position) -> Sensitivity:
    """Product of the argument grades along the path to ``p``."""
    deg = IDENTITY
    cur = t
    for i in p:
        if isinstance(cur, Variable):
            raise TermError(f"position {list(p)} runs through a variable")
        deg = deg.compose(sig.grades_of(cur.symbol)[i - 1])
        cur = cur.args[i - 1]
    return deg


def degree_of_variable(sig: GradedSignature, t: Term, x: str) -> Sensitivity:
    """Sum of the position degrees over every occurrence of ``x`` in ``t``."""
    total = CONSTANT_UNIT
    for p in positions(t):
        s = subterm_at(t, p)
        if isinstance(s, Variable) and s.name == x:
            total = total.tensor(degree_at_position(sig, t, p))
    return total


def context_degree(sig: GradedSignature, context: Context) -> Sensitivity:
    return degree_at_position(sig, context.term_with_hole, context.hole)


@dataclass(frozen=True)
class BalanceEntry:
    rule_id: str
    variable: str
    lhs_degree: Sensitivity
    rhs_degree: Sensitivity
    sampled: bool

    @property
    def balanced(self) -> bool:
        return self.lhs_degree == self.rhs_degree


def balanced_check(gsys: "GradedSystem") -> List[BalanceEntry]:
    """Per-rule, per-variable degree comparison between the two sides.

    Schema rules are checked at every grid assignment that passes their side
    conditions; those entries are marked sampled, since parameter-generic
    equality is only verified pointwise.
    """
    sig = gsys.signature
    entries: List[BalanceEntry] = []
    for rule in gsys.system.rules:
        if rule.is_schema:
            grid = gsys.system.grid
            if not grid:
                raise GradedError(
                    f"rule {rule.rid}: schema needs a grid for balance sampling")
            envs = [
                dict(zip(rule.params, combo))
                for combo in itertools.product(grid, repeat=len(rule.params))
            ]
            envs = [e for e in envs if all(c.holds(e) for c in rule.conditions)]
            sampled = True
        else:
            envs = [{}]
            sampled = False
        worst: Dict[str, BalanceEntry] = {}
        for env in envs:
            lhs = instantiate_params(rule.lhs, env)
            rhs = instantiate_params(rule.rhs, env)
            names = variables(lhs) | variables(rhs)
            for x in sorted(names):
                entry = BalanceEntry(
                    rule.rid, x,
                    degree_of_variable(sig, lhs, x),
                    degree_of_variable(sig, rhs, x),
                    sampled)
                old = worst.get(x)
                if old is None or (old.balanced and not entry.balanced):
                    worst[x] = entry
        entries.extend(worst[x] for x in sorted(worst))
    return entries


@dataclass(frozen=True)
class GradedSystem:
    system: RewriteSystem

    @property
    def signature(self) -> GradedSignature:
        return GradedSignature(self.system)

    @property
    def balanced(self) -> bool:
        return all(e.balanced for e in balanced_check(self))

    @property
    def left_linear(self) -> bool:
        return self.system.left_linear

    @property
    def orthogonal(self) -> bool:
        return orthogonality_check(self)[0]


def orthogonality_check(gsys: GradedSystem) -> Tuple[bool, Dict[str, object]]:
    """Left-linear, no critical pairs, no bare-variable left-hand sides."""
    sys = gsys.system
    peaks = critical_pairs(sys)
    var_lhs = sys.variable_lhs_rules()
    evidence = {
        "left_linear": sys.left_linear,
        "critical_pairs": len(peaks),
        "variable_lhs_rules": var_lhs,
    }
    return sys.left_linear and not peaks and not var_lhs, evidence


def graded_one_step(
    gsys: GradedSystem,
    t: Term,
    fresh_pool: Optional[Sequence[Term]] = None,
) -> List[RewriteStep]:
    """Single steps whose weight is the rule weight scaled by the degree of
    the surrounding context."""
    sig = gsys.signature
    q = gsys.system.quantale
    out = []
    for step in one_step(gsys.system, t, fresh_pool):
        deg = degree_at_position(sig, t, step.position)
        out.append(RewriteStep(
            source=step.source,
            target=step.target,
            weight=deg.apply(q, step.weight),
            position=step.position,
            rule_id=step.rule_id,
            substitution=step.substitution,
        ))
    return out


# ---------------------------------------------------------------------------
# parallel multi-steps


@dataclass(frozen=True)
class MultiStep:
    target: Term
    weight: Value
    nredex: int


def _pareto_insert(
    table: Dict[str, List[MultiStep]], ms: MultiStep, q: QuantaleSpec
) -> None:
    key = term_key(ms.target)
    row = table.setdefault(key, [])
    for other in row:
        if q.leq(ms.weight, other.weight) and other.nredex <= ms.nredex:
            return  # dominated
    row[:] = [o for o in row
              if not (q.leq(o.weight, ms.weight) and ms.nredex <= o.nredex)]
    row.append(ms)


def multi_step(
    gsys: GradedSystem,
    t: Term,
    width_budget: int = 4,
    fresh_pool: Optional[Sequence[Term]] = None,
) -> List[MultiStep]:
    """All parallel reductions of at most ``width_budget`` redexes.

    Weights follow the inductive clauses: a variable reduces to itself at
    the unit; a congruence tensors the grade-scaled argument weights; a rule
    fired at the root contributes its weight tensored with each bound
    variable's left-hand-side degree applied to that argument's multi-step
    weight.  Per target, only (weight, redex-count) Pareto optima are kept.
    """
    if not gsys.balanced:
        raise GradedError("multi-step reduction requires a balanced system")
    sys = gsys.system
    sig = gsys.signature
    q = sys.quantale
    memo: Dict[str, List[MultiStep]] = {}

    def rec(term: Term) -> List[MultiStep]:
        key = term_key(term)
        if key in memo:
            return memo[key]
        memo[key] = []  # cycle guard; rewriting terms is finite anyway
        table: Dict[str, List[MultiStep]] = {}
        if isinstance(term, Variable):
            _pareto_insert(table, MultiStep(term, q.unit, 0), q)
        else:
            grades = sig.grades_of(term.symbol)
            child_opts = [rec(a) for a in term.args]
            for combo in itertools.product(*child_opts):
                n = sum(c.nredex for c in combo)
                if n > width_budget:
                    continue
                w = q.unit
                for g, c in zip(grades, combo):
                    w = q.tensor(w, g.apply(q, c.weight))
                _pareto_insert(table, MultiStep(
                    Application(term.symbol, tuple(c.target for c in combo)),
                    w, n), q)
            for rule in sys.rules:
                for sigma, env, eps in _rule_matches(sys, rule, term):
                    lhs = instantiate_params(rule.lhs, env)
                    rhs = instantiate_params(rule.rhs, env)
                    bound = sorted(variables(lhs))
                    arg_opts = [rec(sigma[x]) for x in bound]
                    degs = [degree_of_variable(sig, lhs, x) for x in bound]
                    fresh = rule.fresh_rhs_variables()
                    pool = list(fresh_pool) if fresh_pool else (
                        [_fresh_variable_for(term, set(fresh))] if fresh else [])
                    for combo in itertools.product(*arg_opts):
                        n = 1 + sum(c.nredex for c in combo)
                        if n > width_budget:
                            continue
                        w = eps
                        for deg, c in zip(degs, combo):
                            w = q.tensor(w, deg.apply(q, c.weight))
                        tau: Dict[str, Term] = {
                            x: c.target for x, c in zip(bound, combo)}
                        for picks in itertools.product(pool, repeat=len(fresh)):
                            full = dict(tau)
                            full.update(zip(fresh, picks))
                            _pareto_insert(table, MultiStep(
                                apply_substitution(rhs, full), w, n), q)
        result = [ms for k in sorted(table) for ms in table[k]]
        memo[key] = result
        return result

    return rec(t)


def multistep_targets(steps: Sequence[MultiStep], q: QuantaleSpec) -> Dict[str, MultiStep]:
    """Best (quantale-largest weight) multi-step per target term."""
    best: Dict[str, MultiStep] = {}
    for ms in steps:
        key = term_key(ms.target)
        old = best.get(key)
        if old is None or q.strictly_below(old.weight, ms.weight):
            best[key] = ms
    return best


@dataclass(frozen=True)
class DiamondReport:
    peaks_checked: int
    peaks_closed: int
    violations: Tuple[Tuple[Term, Term, Term], ...]

    @property
    def holds(self) -> bool:
        return not self.violations


def multistep_diamond_probe(
    gsys: GradedSystem, t: Term, width_budget: int = 4
) -> DiamondReport:
    """Check the weighted diamond for every multi-step peak out of ``t``.

    For each pair t ↻_{ε₁} t₁, t ↻_{ε₂} t₂ we must find t' with
    t₁ ↻_{δ₁} t' and t₂ ↻_{δ₂} t' whose valley tensor dominates the peak
    tensor in the quantale order (numerically δ₁+δ₂ ≤ ε₁+ε₂ on cost
    quantales).  Any failure is reported as a violation.
    """
    ok, _ = orthogonality_check(gsys)
    if not ok:
        raise GradedError("diamond probe requires an orthogonal system")
    q = gsys.system.quantale
    outs = list(multistep_targets(multi_step(gsys, t, width_budget), q).values())
    closures: Dict[str, Dict[str, MultiStep]] = {}

    def closure(u: Term) -> Dict[str, MultiStep]:
        key = term_key(u)
        if key not in closures:
            closures[key] = multistep_targets(
                multi_step(gsys, u, width_budget), q)
        return closures[key]

    checked = closed = 0
    violations: List[Tuple[Term, Term, Term]] = []
    for i, m1 in enumerate(outs):
        c1 = closure(m1.target)
        for m2 in outs[i:]:
            checked += 1
            c2 = closure(m2.target)
            peak = q.tensor(m1.weight, m2.weight)
            found = False
            for key, d1 in c1.items():
                d2 = c2.get(key)
                if d2 is not None and q.leq(peak, q.tensor(d1.weight, d2.weight)):
                    found = True
                    break
            if found:
                closed += 1
            else:
                violations.append((t, m1.target, m2.target))
    return DiamondReport(checked, closed, tuple(violations))


@dataclass(frozen=True)
class SubstitutionLemmaReport:
    cases_checked: int
    failures: Tuple[Tuple[Term, Term], ...]

    @property
    def holds(self) -> bool:
        return not self.failures


def substitution_lemma_probe(
    gsys: GradedSystem,
    cases: Sequence[Tuple[Term, Dict[str, Term]]],
    width_budget: int = 4,
) -> SubstitutionLemmaReport:
    """Check that multi-steps compose with substitution at the claimed grade.

    For each body e with substitution σ, every e ↻_ε f combined with
    component multi-steps σ(x) ↻_{δₓ} τ(x) must be matched in the enumerated
    multi-steps of e·σ by the target f·τ at a weight dominating
    ε ⊗ ⊗ₓ deg_x(e)(δₓ).
    """
    sig = gsys.signature
    q = gsys.system.quantale
    checked = 0
    failures: List[Tuple[Term, Term]] = []
    for body, subst in cases:
        names = sorted(variables(body) & set(subst))
        whole = apply_substitution(body, {x: subst[x] for x in names})
        combined = multistep_targets(
            multi_step(gsys, whole, width_budget), q)
        body_steps = multistep_targets(multi_step(gsys, body, width_budget), q)
        comp_steps = {x: multistep_targets(
            multi_step(gsys, subst[x], width_budget), q) for x in names}
        degs = {x: degree_of_variable(sig, body, x) for x in names}
        for f_ms in body_steps.values():
            for picks in itertools.product(
                    *(list(comp_steps[x].values()) for x in names)):
                total_redex = f_ms.nredex + sum(p.nredex for p in picks)
                if total_redex > width_budget:
                    continue
                checked += 1
                claimed = f_ms.weight
                tau: Dict[str, Term] = {}
                for x, p in zip(names, picks):
                    claimed = q.tensor(claimed, degs[x].apply(q, p.weight))
                    tau[x] = p.target
                expected = apply_substitution(f_ms.target, tau)
                hit = combined.get(term_key(expected))
                if hit is None or not q.leq(claimed, hit.weight):
                    failures.append((whole, expected))
    return SubstitutionLemmaReport(checked, tuple(failures))
