from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from src.planning import GroundAction, GroundFact, PlanningProblem, relaxed_holds


@dataclass(frozen=True)
class Rpg:
    """
    Layered delete-relaxed reachability. Layers are cumulative (layer l is a
    subset of layer l+1) and the last two fact layers are equal.
    """
    fact_layers: tuple[frozenset, ...]
    action_layers: tuple[frozenset, ...]
    fact_level: dict
    action_level: dict

    def level(self, fact: GroundFact) -> float:
        return self.fact_level.get(fact, math.inf)

    @property
    def reached(self) -> frozenset:
        return self.fact_layers[-1]


def build_rpg(problem: PlanningProblem, excluded_actions: Iterable[GroundAction] = ()) -> Rpg:
    excluded = frozenset(excluded_actions)
    candidates = [a for a in problem.actions if a not in excluded]
    watchers = {}
    for action in candidates:
        for fact in action.pre:
            watchers.setdefault(fact, []).append(action)

    layer = frozenset(problem.init)
    fact_level = {fact: 0 for fact in layer}
    action_level = {}
    fact_layers, action_layers = [layer], []
    applicable = set()
    to_check = candidates
    level = 0
    while True:
        newly = [a for a in to_check if a not in action_level and relaxed_holds(a.precondition, layer)]
        for action in newly:
            action_level[action] = level
        applicable.update(newly)
        action_layers.append(frozenset(applicable))

        new_facts = set()
        for action in newly:
            new_facts |= action.add - layer
        layer = layer | new_facts
        fact_layers.append(layer)
        if not new_facts:
            break
        level += 1
        for fact in new_facts:
            fact_level[fact] = level
        to_check = {a for fact in new_facts for a in watchers.get(fact, ()) if a not in action_level}

    for fact in problem.facts:
        fact_level.setdefault(fact, math.inf)
    return Rpg(tuple(fact_layers), tuple(action_layers), fact_level, action_level)


def relaxed_solvable(rpg: Rpg, goal: Iterable[GroundFact]) -> bool:
    return frozenset(goal) <= rpg.reached


def dump_rpg(rpg: Rpg) -> str:
    lines = []
    for level, layer in enumerate(rpg.fact_layers):
        lines.append(f"level {level}: " + " ".join(str(f) for f in sorted(layer)))
    return "\n".join(lines) + "\n"
