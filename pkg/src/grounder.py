"""
Instantiates a lifted model over its objects and writes/reads the canonical
grounded-problem dump.
"""
from __future__ import annotations

import itertools
import time
from fractions import Fraction

import src.logger as Logger
from src.config import load_settings
from src.errors import GroundingLimitError, PddlSyntaxError, UnsupportedConstructError
from src.parser import Atom, Ignored, LAnd, LNot, LOr, LiftedModel, Quantified, SList, Token, read_sexprs
from src.planning import (
    FALSE,
    TRUE,
    And,
    GroundAction,
    GroundFact,
    Not,
    Or,
    PlanningProblem,
    Truth,
    condition_text,
)
from src.relaxed_graph import build_rpg


class Grounder:
    def __init__(self, model: LiftedModel):
        self.model = model
        self.domain = model.domain
        self.init = model.problem.init
        self.objects = model.objects
        fluents = {atom.predicate for schema in self.domain.actions
                   for atom in schema.add_effects + schema.del_effects}
        self.static = set(self.domain.predicates) - fluents
        self._typed = {}

    def objects_of_type(self, type_name: str) -> tuple[str, ...]:
        if type_name not in self._typed:
            self._typed[type_name] = tuple(
                name for name, otype in self.objects.items() if self.domain.is_subtype(otype, type_name))
        return self._typed[type_name]

    def instantiate(self, condition, binding):
        """Grounds a lifted condition, folding static atoms into truth values."""
        if isinstance(condition, Atom):
            args = tuple(binding.get(term, term) for term in condition.terms)
            if condition.predicate == "=":
                return Truth(args[0] == args[1])
            fact = GroundFact(condition.predicate, args)
            if condition.predicate in self.static:
                return Truth(fact in self.init)
            return fact
        if isinstance(condition, LNot):
            body = self.instantiate(condition.body, binding)
            if isinstance(body, Truth):
                return Truth(not body.value)
            return Not(body)
        if isinstance(condition, LAnd):
            return _conjoin(self.instantiate(p, binding) for p in condition.parts)
        if isinstance(condition, LOr):
            return _disjoin(self.instantiate(p, binding) for p in condition.parts)
        if isinstance(condition, Quantified):
            names = [p.name for p in condition.params]
            choices = [self.objects_of_type(p.type) for p in condition.params]
            instances = (self.instantiate(condition.body, {**binding, **dict(zip(names, values))})
                         for values in itertools.product(*choices))
            return _disjoin(instances) if condition.kind == "exists" else _conjoin(instances)
        if isinstance(condition, Ignored):
            return TRUE
        raise TypeError(f"unexpected condition node {condition!r}")

    def ground_actions(self, cap: int) -> list[GroundAction]:
        grounded = []
        for schema in self.domain.actions:
            names = [p.name for p in schema.parameters]
            choices = [self.objects_of_type(p.type) for p in schema.parameters]
            for values in itertools.product(*choices):
                binding = dict(zip(names, values))
                precondition = self.instantiate(schema.precondition, binding)
                if precondition == FALSE:
                    continue
                if precondition == TRUE:
                    precondition = And(())
                elif not isinstance(precondition, And):
                    precondition = And((precondition,))
                add = {GroundFact(a.predicate, tuple(binding.get(t, t) for t in a.terms)) for a in schema.add_effects}
                delete = {GroundFact(a.predicate, tuple(binding.get(t, t) for t in a.terms)) for a in schema.del_effects}
                grounded.append(GroundAction(schema.name, values, precondition, add, delete, schema.cost))
                if len(grounded) > cap:
                    raise GroundingLimitError(len(grounded), cap)
        return grounded

    def ground_goal(self) -> frozenset:
        goal = self.model.problem.goal
        if goal is None:
            return frozenset()
        parts = goal.parts if isinstance(goal, LAnd) else (goal,)
        facts = set()
        for part in parts:
            if not isinstance(part, Atom):
                raise UnsupportedConstructError("non-conjunctive goal")
            facts.add(GroundFact(part.predicate, part.terms))
        return frozenset(facts)


def _conjoin(parts) -> object:
    kept = []
    for part in parts:
        if part == FALSE:
            return FALSE
        if part == TRUE:
            continue
        kept.extend(part.parts if isinstance(part, And) else (part,))
    return And(tuple(kept)) if kept else TRUE


def _disjoin(parts) -> object:
    kept = []
    for part in parts:
        if part == TRUE:
            return TRUE
        if part == FALSE:
            continue
        kept.extend(part.parts if isinstance(part, Or) else (part,))
    return Or(tuple(kept)) if kept else FALSE


def ground(model: LiftedModel, cap: int | None = None, prune_unreachable: bool = True) -> PlanningProblem:
    """
    Instantiates every action schema over type-compatible objects (in sorted
    object order). Instances whose static preconditions fail are dropped and,
    unless disabled, so are instances that are not relaxed-reachable from s0.
    """
    cap = cap if cap is not None else load_settings().grounding_cap
    started = time.perf_counter()
    grounder = Grounder(model)
    actions = grounder.ground_actions(cap)
    problem = PlanningProblem(
        name=model.problem.name,
        objects=tuple(grounder.objects),
        init=model.problem.init,
        actions=tuple(actions),
        goal=grounder.ground_goal(),
        domain_name=model.domain.name,
    )
    if prune_unreachable:
        reachable = build_rpg(problem).action_level
        kept = tuple(a for a in problem.actions if a in reachable)
        if len(kept) != len(problem.actions):
            problem = PlanningProblem(problem.name, problem.objects, problem.init, kept, problem.goal,
                                      domain_name=problem.domain_name)
    Logger.log(f"Grounded {problem.name}: {len(problem.actions)} actions, {len(problem.facts)} facts "
               f"in {time.perf_counter() - started:.3f}s", Logger.DEBUG)
    return problem


def dump_problem(problem: PlanningProblem) -> str:
    """Canonical dump: one object, fact or action per line, each block sorted."""
    lines = [f"problem {problem.name} {problem.domain_name or '-'}"]
    lines += [f"object {name}" for name in problem.objects]
    lines += [f"fact {fact}" for fact in sorted(problem.facts)]
    lines += [f"init {fact}" for fact in sorted(problem.init)]
    lines += [f"goal {fact}" for fact in sorted(problem.goal)]
    for action in problem.actions:
        add = "(and" + "".join(f" {f}" for f in sorted(action.add)) + ")"
        delete = "(and" + "".join(f" {f}" for f in sorted(action.delete)) + ")"
        lines.append(f"action {action.text} {action.cost} {condition_text(action.precondition)} {add} {delete}")
    return "\n".join(lines) + "\n"


def _fact_from(expr) -> GroundFact:
    if not isinstance(expr, SList) or not expr or not all(isinstance(t, Token) for t in expr):
        raise PddlSyntaxError("expected a ground fact", expr.line, expr.column)
    return GroundFact(expr[0].value, tuple(t.value for t in expr[1:]))


def parse_facts(text: str) -> list[GroundFact]:
    """Ground facts written in canonical form, e.g. `(is-at ba3) (clean plate)`."""
    return [_fact_from(expr) for expr in read_sexprs(text)]


def _condition_from(expr):
    head = expr[0].value if expr and isinstance(expr[0], Token) else None
    if head == "and":
        return And(tuple(_condition_from(p) for p in expr[1:]))
    if head == "or":
        return Or(tuple(_condition_from(p) for p in expr[1:]))
    if head == "not":
        return Not(_condition_from(expr[1]))
    return _fact_from(expr)


def load_dump(text: str) -> PlanningProblem:
    name, domain_name = "problem", ""
    objects, facts, init, goal, actions = [], set(), set(), set(), []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        keyword, _, rest = line.partition(" ")
        if keyword == "problem":
            name, _, domain_name = rest.partition(" ")
            domain_name = "" if domain_name == "-" else domain_name
        elif keyword == "object":
            objects.append(rest.strip())
        elif keyword in ("fact", "init", "goal"):
            exprs = read_sexprs(rest)
            {"fact": facts, "init": init, "goal": goal}[keyword].add(_fact_from(exprs[0]))
        elif keyword == "action":
            exprs = read_sexprs(rest)
            if len(exprs) != 5:
                raise PddlSyntaxError("malformed action line", number, 1)
            head = _fact_from(exprs[0])
            add = {_fact_from(f) for f in exprs[3][1:]}
            delete = {_fact_from(f) for f in exprs[4][1:]}
            actions.append(GroundAction(head.predicate, head.args, _condition_from(exprs[2]), add, delete,
                                        Fraction(exprs[1].value)))
        else:
            raise PddlSyntaxError(f"unknown dump record '{keyword}'", number, 1)
    return PlanningProblem(name, tuple(objects), frozenset(init), tuple(actions), frozenset(goal),
                           facts=frozenset(facts), domain_name=domain_name)
