"""
Grid-world fixtures: a layout of named cells becomes a PDDL domain with
`(is-at ?x)` and moves between adjacent cells, plus oracle landmark sets
computed from every simple path between the start and each goal cell.

Cells in the same room (the alphabetic prefix of the name, e.g. `ba` for
`ba3`) connect when orthogonally adjacent; cells of different rooms only
through declared doors.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from textwrap import dedent

from src.errors import DisconnectedGridError
from src.models import GridSpec
from src.planning import GroundFact

_ROOM = re.compile(r"^[a-z]+")

GRID_DOMAIN = dedent("""\
    (define (domain gridworld)
      (:requirements :strips :typing)
      (:types cell)
      (:predicates (is-at ?x - cell) (adjacent ?from ?to - cell))
      (:action move
        :parameters (?from ?to - cell)
        :precondition (and (is-at ?from) (adjacent ?from ?to))
        :effect (and (is-at ?to) (not (is-at ?from)))))
    """)

# Kitchen k*, hallway h*, bathroom ba*. The only way from k2 to ba3 runs
# through the kitchen door h3 and the bathroom door ba1.
HOUSE = GridSpec(
    layout=dedent("""\
        k1 k2 h3 ba1 ba2
        k3 k4 h2 ba3 ba4
        .  .  h1 .   .
        """),
    doors=[("k2", "h3"), ("h3", "ba1")],
    init="k2",
    goals=["ba3"],
)


def is_at(cell: str) -> GroundFact:
    return GroundFact("is-at", (cell,))


def room_of(cell: str) -> str:
    match = _ROOM.match(cell)
    return match.group(0) if match else cell


@dataclass(frozen=True)
class GridWorld:
    spec: GridSpec
    cells: tuple[str, ...]
    adjacency: dict
    domain_text: str
    problem_text: str
    oracle: dict

    @property
    def hypotheses(self) -> dict[str, frozenset]:
        return {goal: frozenset({is_at(goal)}) for goal in self.spec.goals}



def parse_layout(spec: GridSpec) -> tuple[tuple[str, ...], dict[str, tuple[str, ...]]]:
    positions = {}
    for row, line in enumerate(spec.layout.strip().splitlines()):
        for column, name in enumerate(line.split()):
            if name == ".":
                continue
            name = name.lower()
            if name in positions:
                raise ValueError(f"cell {name} appears twice in the layout")
            positions[name] = (row, column)
    neighbours = {name: set() for name in positions}
    for name, (row, column) in positions.items():
        for other, (r, c) in positions.items():
            if abs(row - r) + abs(column - c) == 1 and room_of(name) == room_of(other):
                neighbours[name].add(other)
    for a, b in spec.doors:
        a, b = a.lower(), b.lower()
        if a not in positions or b not in positions:
            raise ValueError(f"door {a}-{b} references an unknown cell")
        neighbours[a].add(b)
        neighbours[b].add(a)
    return tuple(sorted(positions)), {name: tuple(sorted(cells)) for name, cells in neighbours.items()}


def reachable_cells(adjacency, start: str) -> set[str]:
    seen = {start}
    queue = deque([start])
    while queue:
        for other in adjacency[queue.popleft()]:
            if other not in seen:
                seen.add(other)
                queue.append(other)
    return seen


def shortest_path(adjacency, start: str, goal: str) -> list[str]:
    """Cells from start to goal inclusive; ties broken by cell name."""
    parents = {start: None}
    queue = deque([start])
    while queue:
        cell = queue.popleft()
        if cell == goal:
            break
        for other in adjacency[cell]:
            if other not in parents:
                parents[other] = cell
                queue.append(other)
    if goal not in parents:
        raise DisconnectedGridError({goal})
    path = [goal]
    while parents[path[-1]] is not None:
        path.append(parents[path[-1]])
    return path[::-1]


def simple_path_landmarks(adjacency, start: str, goal: str) -> frozenset[str]:
    """Cells visited by every simple path from start to goal."""
    common = None
    stack = [(start, (start,))]
    while stack:
        cell, path = stack.pop()
        if cell == goal:
            visited = frozenset(path)
            common = visited if common is None else common & visited
            continue
        for other in adjacency[cell]:
            if other not in path:
                stack.append((other, path + (other,)))
    return common if common is not None else frozenset()


def grid_problem_text(name: str, cells, adjacency, init: str, goal: str) -> str:
    facts = [f"(is-at {init})"]
    facts += [f"(adjacent {a} {b})" for a in cells for b in adjacency[a]]
    body = "\n    ".join(facts)
    return (f"(define (problem {name})\n"
            f"  (:domain gridworld)\n"
            f"  (:objects {' '.join(cells)} - cell)\n"
            f"  (:init\n    {body})\n"
            f"  (:goal (is-at {goal})))\n")


def generate_gridworld(spec: GridSpec, name: str = "grid") -> GridWorld:
    cells, adjacency = parse_layout(spec)
    init = spec.init.lower()
    goals = [g.lower() for g in spec.goals]
    for cell in [init] + goals:
        if cell not in adjacency:
            raise ValueError(f"cell {cell} is not part of the layout")
    unreachable = set(cells) - reachable_cells(adjacency, init)
    if unreachable:
        raise DisconnectedGridError(unreachable)
    oracle = {goal: frozenset(is_at(c) for c in simple_path_landmarks(adjacency, init, goal)) for goal in goals}
    spec = spec.model_copy(update={"init": init, "goals": goals})
    return GridWorld(spec, cells, adjacency, GRID_DOMAIN, grid_problem_text(name, cells, adjacency, init, goals[0]),
                     oracle)
