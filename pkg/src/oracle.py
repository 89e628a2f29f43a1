"""
Brute-force reference computations for small problems: exhaustive acyclic
plan enumeration, delete-relaxed reachability and real solvability.
"""
from __future__ import annotations

from collections import deque
from typing import Iterable, Optional

from src.planning import GroundFact, PlanningProblem, apply, relaxed_holds


class SearchBudgetExceeded(RuntimeError):
    pass


def brute_force_landmarks(problem: PlanningProblem, goal: Iterable[GroundFact],
                          max_nodes: int = 1_000_000) -> Optional[frozenset]:
    """
    Facts true in some state of every acyclic plan reaching the goal, or None
    when no plan exists. Plans stop at the first goal state; longer plans
    visit a superset of states and cannot shrink the intersection.
    """
    goal = frozenset(goal)
    common = None
    expanded = 0
    stack = [(problem.init, (problem.init,), frozenset(problem.init))]
    while stack:
        state, path, seen_facts = stack.pop()
        if goal <= state:
            common = seen_facts if common is None else common & seen_facts
            continue
        expanded += 1
        if expanded > max_nodes:
            raise SearchBudgetExceeded(f"more than {max_nodes} search nodes")
        for action in problem.actions:
            if not action.is_applicable(state):
                continue
            successor = apply(state, action)
            if successor in path:
                continue
            stack.append((successor, path + (successor,), seen_facts | successor))
    return common


def enumerate_acyclic_plans(problem: PlanningProblem, goal: Iterable[GroundFact], max_plans: int = 100_000):
    """Yields (actions, states) for every acyclic plan that stops at its first goal state."""
    goal = frozenset(goal)
    produced = 0
    stack = [(problem.init, (), (problem.init,))]
    while stack:
        state, actions, states = stack.pop()
        if goal <= state:
            produced += 1
            if produced > max_plans:
                raise SearchBudgetExceeded(f"more than {max_plans} plans")
            yield actions, states
            continue
        for action in problem.actions:
            if action.is_applicable(state):
                successor = apply(state, action)
                if successor not in states:
                    stack.append((successor, actions + (action,), states + (successor,)))


def delete_relaxed_reachable(problem: PlanningProblem) -> frozenset:
    """Union of all states reachable when delete effects are ignored (BFS over fact sets)."""
    start = frozenset(problem.init)
    seen = {start}
    queue = deque([start])
    reached = set(start)
    while queue:
        state = queue.popleft()
        for action in problem.actions:
            if relaxed_holds(action.precondition, state):
                successor = state | action.add
                if successor not in seen:
                    seen.add(successor)
                    reached |= successor
                    queue.append(successor)
    return frozenset(reached)


def is_solvable(problem: PlanningProblem, goal: Iterable[GroundFact], max_states: int = 1_000_000) -> bool:
    goal = frozenset(goal)
    start = frozenset(problem.init)
    seen = {start}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        if goal <= state:
            return True
        for action in problem.actions:
            if action.is_applicable(state):
                successor = apply(state, action)
                if successor not in seen:
                    if len(seen) >= max_states:
                        raise SearchBudgetExceeded(f"more than {max_states} states")
                    seen.add(successor)
                    queue.append(successor)
    return False
