"""
Grounded planning model: facts, actions, states, problems and plans,
together with the state-transition and plan-validation semantics that the
landmark and recognition layers build on.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Union

from src.errors import InapplicableActionError, UnknownActionError


@dataclass(frozen=True)
class GroundFact:
    predicate: str
    args: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    @cached_property
    def text(self) -> str:
        return "(" + " ".join((self.predicate,) + self.args) + ")"

    def __str__(self):
        return self.text

    def __lt__(self, other):
        return self.text < other.text


@dataclass(frozen=True)
class Not:
    body: "Condition"


@dataclass(frozen=True)
class And:
    parts: tuple["Condition", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Condition", ...]


@dataclass(frozen=True)
class Truth:
    value: bool


TRUE = Truth(True)
FALSE = Truth(False)

# Ground condition trees only ever contain these node types.
Condition = Union[GroundFact, Not, And, Or, Truth]

State = frozenset


def flatten_precondition(condition: Condition) -> frozenset[GroundFact]:
    """
    Every positive fact occurring anywhere in the tree, as if the whole
    condition were one conjunction. Atoms below a negation are dropped.
    """
    if isinstance(condition, GroundFact):
        return frozenset((condition,))
    if isinstance(condition, (And, Or)):
        facts = set()
        for part in condition.parts:
            facts |= flatten_precondition(part)
        return frozenset(facts)
    return frozenset()


def condition_facts(condition: Condition) -> frozenset[GroundFact]:
    """All facts referenced by the tree regardless of polarity."""
    if isinstance(condition, GroundFact):
        return frozenset((condition,))
    if isinstance(condition, Not):
        return condition_facts(condition.body)
    if isinstance(condition, (And, Or)):
        facts = set()
        for part in condition.parts:
            facts |= condition_facts(part)
        return frozenset(facts)
    return frozenset()


def holds(condition: Condition, state: frozenset) -> bool:
    if isinstance(condition, GroundFact):
        return condition in state
    if isinstance(condition, And):
        return all(holds(part, state) for part in condition.parts)
    if isinstance(condition, Or):
        return any(holds(part, state) for part in condition.parts)
    if isinstance(condition, Not):
        return not holds(condition.body, state)
    return condition.value


def relaxed_holds(condition: Condition, facts: frozenset) -> bool:
    """Delete-relaxed evaluation: negative literals are treated as satisfied."""
    if isinstance(condition, GroundFact):
        return condition in facts
    if isinstance(condition, And):
        return all(relaxed_holds(part, facts) for part in condition.parts)
    if isinstance(condition, Or):
        return any(relaxed_holds(part, facts) for part in condition.parts)
    if isinstance(condition, Not):
        return True
    return condition.value


def condition_text(condition: Condition) -> str:
    if isinstance(condition, GroundFact):
        return condition.text
    if isinstance(condition, And):
        return "(and" + "".join(" " + condition_text(p) for p in condition.parts) + ")"
    if isinstance(condition, Or):
        return "(or" + "".join(" " + condition_text(p) for p in condition.parts) + ")"
    if isinstance(condition, Not):
        return f"(not {condition_text(condition.body)})"
    return "(and)" if condition.value else "(or)"


def conjunction(facts: Iterable[GroundFact]) -> And:
    return And(tuple(sorted(facts)))


@dataclass(frozen=True)
class GroundAction:
    """
    A grounded action. Identity (equality and hashing) is the canonical name
    `(name arg1 ... argk)`, which is unique within a grounded problem.
    A fact that is both added and deleted is kept in `add` only.
    """
    name: str
    args: tuple[str, ...] = ()
    precondition: Condition = field(default=TRUE, compare=False)
    add: frozenset = field(default=frozenset(), compare=False)
    delete: frozenset = field(default=frozenset(), compare=False)
    cost: Fraction = field(default=Fraction(1), compare=False)

    def __post_init__(self):
        if isinstance(self.precondition, (set, frozenset, list, tuple)):
            object.__setattr__(self, "precondition", conjunction(self.precondition))
        add = frozenset(self.add)
        object.__setattr__(self, "add", add)
        object.__setattr__(self, "delete", frozenset(self.delete) - add)
        object.__setattr__(self, "args", tuple(self.args))
        cost = Fraction(self.cost)
        if cost < 0:
            raise ValueError(f"action cost must be non-negative, got {cost}")
        object.__setattr__(self, "cost", cost)

    @cached_property
    def pre(self) -> frozenset[GroundFact]:
        return flatten_precondition(self.precondition)

    @cached_property
    def text(self) -> str:
        return "(" + " ".join((self.name,) + self.args) + ")"

    @cached_property
    def touched(self) -> frozenset[GroundFact]:
        """Pre(a) ∪ Add(a): the facts an observation of this action reveals."""
        return self.pre | self.add

    def is_applicable(self, state: frozenset) -> bool:
        return holds(self.precondition, state)

    def __str__(self):
        return self.text

    def __lt__(self, other):
        return self.text < other.text


def apply(state: frozenset, action: GroundAction) -> frozenset:
    if not action.is_applicable(state):
        raise InapplicableActionError(action, action.pre - state)
    return (frozenset(state) | action.add) - action.delete


@dataclass(frozen=True)
class PlanningProblem:
    name: str
    objects: tuple[str, ...]
    init: frozenset
    actions: tuple[GroundAction, ...]
    goal: frozenset = frozenset()
    facts: Optional[frozenset] = None
    domain_name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "init", frozenset(self.init))
        object.__setattr__(self, "goal", frozenset(self.goal))
        object.__setattr__(self, "objects", tuple(sorted(self.objects)))
        object.__setattr__(self, "actions", tuple(sorted(self.actions)))
        if self.facts is None:
            universe = set(self.init) | set(self.goal)
            for action in self.actions:
                universe |= condition_facts(action.precondition)
                universe |= action.add
                universe |= action.delete
            object.__setattr__(self, "facts", frozenset(universe))

    @classmethod
    def from_actions(cls, init, actions, goal=(), name="problem"):
        """Builds a problem whose objects are collected from the facts."""
        actions = tuple(actions)
        objects = set()
        for fact in set(init) | set(goal):
            objects.update(fact.args)
        for action in actions:
            objects.update(action.args)
            for fact in condition_facts(action.precondition) | action.add | action.delete:
                objects.update(fact.args)
        return cls(name=name, objects=tuple(objects), init=frozenset(init), actions=actions, goal=frozenset(goal))

    @cached_property
    def achievers(self) -> dict[GroundFact, tuple[GroundAction, ...]]:
        index = {}
        for action in self.actions:
            for fact in action.add:
                index.setdefault(fact, []).append(action)
        return {fact: tuple(actions) for fact, actions in index.items()}

    @cached_property
    def action_index(self) -> dict[str, GroundAction]:
        return {action.text: action for action in self.actions}

    def with_goal(self, goal: Iterable[GroundFact]) -> "PlanningProblem":
        return replace(self, goal=frozenset(goal), facts=None)

    def has_action(self, action: GroundAction) -> bool:
        return action.text in self.action_index


def resolve_action(problem: PlanningProblem, text: str, source=None, line=None) -> GroundAction:
    """
    Maps a canonical action text such as `(move c0 c1)` to the grounded action.
    Whitespace and letter case are normalised first.
    """
    tokens = text.replace("(", " ").replace(")", " ").lower().split()
    key = "(" + " ".join(tokens) + ")"
    try:
        return problem.action_index[key]
    except KeyError:
        raise UnknownActionError(text.strip(), source, line) from None


@dataclass(frozen=True)
class Plan:
    steps: tuple[GroundAction, ...] = ()

    @property
    def cost(self) -> Fraction:
        return sum((step.cost for step in self.steps), Fraction(0))

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class PlanValidation:
    valid: bool
    end_state: frozenset
    cost: Fraction
    failed_index: Optional[int] = None


def validate_plan(problem: PlanningProblem, plan: Plan) -> PlanValidation:
    """
    Executes the plan from the initial state. An inapplicable step reports its
    index; a plan that runs through but misses the goal reports len(plan).
    """
    state = problem.init
    cost = Fraction(0)
    for index, step in enumerate(plan.steps):
        if not step.is_applicable(state):
            return PlanValidation(False, state, cost, index)
        state = apply(state, step)
        cost += step.cost
    if problem.goal <= state:
        return PlanValidation(True, state, cost)
    return PlanValidation(False, state, cost, len(plan.steps))


@dataclass(frozen=True)
class GoalRecognitionProblem:
    """A grounded problem, named goal hypotheses, observations and the hidden goal."""
    name: str
    problem: PlanningProblem
    goals: Mapping[str, frozenset]
    observations: tuple[GroundAction, ...] = ()
    true_goal: Optional[str] = None
