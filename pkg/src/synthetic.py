"""
Synthetic recognition suites on grid worlds. Each suite is a list of entries
(domain, problem, hypotheses and observation texts plus the true goal) that
can be turned into a RecognitionDataset in memory or written to disk with a
manifest.
"""
from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path
from textwrap import dedent
from typing import Iterable, Optional, Sequence

from src.evaluation import MANIFEST_COLUMNS, RecognitionDataset, dataset_from_texts
from src.gridworld import GridWorld, generate_gridworld, is_at, parse_layout, reachable_cells, shortest_path
from src.models import GridSpec

# Five rooms p, q, r, s, t hang off one hallway; each is entered through its
# own door cell (p2, q2, ...), which is a landmark of that room's goals only.
FIVE_ROOMS_LAYOUT = dedent("""\
    p1 .  q1 .  r1 .  s1 .  t1
    p2 .  q2 .  r2 .  s2 .  t2
    h1 h2 h3 h4 h5 h6 h7 h8 h9
    """)
FIVE_ROOMS_DOORS = [("h1", "p2"), ("h3", "q2"), ("h5", "r2"), ("h7", "s2"), ("h9", "t2")]

HABIT_GOALS = ("a", "b", "c", "d", "e")


@dataclass(frozen=True)
class SuiteEntry:
    name: str
    world: GridWorld
    observations: tuple[str, ...]
    true_goal: str

    @property
    def hypotheses_text(self) -> str:
        return "".join(f"{goal} {is_at(goal)}\n" for goal in self.world.spec.goals)

    @property
    def observations_text(self) -> str:
        return "".join(f"{step}\n" for step in self.observations)

    def as_texts(self) -> dict:
        return {
            "domain_text": self.world.domain_text,
            "problem_text": self.world.problem_text,
            "hypotheses_text": self.hypotheses_text,
            "observations_text": self.observations_text,
            "true_goal": self.true_goal,
        }


def path_moves(cells: Sequence[str]) -> list[str]:
    return [f"(move {a} {b})" for a, b in zip(cells, cells[1:])]


def to_dataset(entries: Iterable[SuiteEntry], name: str = "synthetic") -> RecognitionDataset:
    return dataset_from_texts((e.as_texts() for e in entries), name)


def write_suite(entries: Sequence[SuiteEntry], directory) -> Path:
    """Writes PDDL, hypotheses and observation files plus `manifest.csv`; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = {}
    rows = []
    for entry in entries:
        key = (entry.world.domain_text, entry.world.problem_text, entry.hypotheses_text)
        if key not in written:
            stem = f"world{len(written)}"
            (directory / f"{stem}-domain.pddl").write_text(entry.world.domain_text, encoding="utf-8")
            (directory / f"{stem}-problem.pddl").write_text(entry.world.problem_text, encoding="utf-8")
            (directory / f"{stem}.hyps").write_text(entry.hypotheses_text, encoding="utf-8")
            written[key] = stem
        stem = written[key]
        (directory / f"{entry.name}.obs").write_text(entry.observations_text, encoding="utf-8")
        rows.append({
            "domain": f"{stem}-domain.pddl",
            "problem": f"{stem}-problem.pddl",
            "hypotheses": f"{stem}.hyps",
            "observations": f"{entry.name}.obs",
            "true_goal": entry.true_goal,
        })
    manifest = directory / "manifest.csv"
    with open(manifest, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=MANIFEST_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    return manifest


def five_rooms(goals: Sequence[str]) -> GridWorld:
    spec = GridSpec(layout=FIVE_ROOMS_LAYOUT, doors=FIVE_ROOMS_DOORS, init="h5", goals=list(goals))
    return generate_gridworld(spec, name="five-rooms")


def junction_suite(per_goal: int = 2, seed: int = 0) -> list[SuiteEntry]:
    """
    Goals p1, q1, r1, s1, t1 of the five-room world. The agent walks the
    shortest path to its goal, sometimes after stepping one cell aside and
    back. Every goal has its own door cell, so the completion heuristic
    singles out the true goal before the last observation.
    """
    rng = random.Random(seed)
    world = five_rooms(["p1", "q1", "r1", "s1", "t1"])
    entries = []
    for goal in world.spec.goals:
        for i in range(per_goal):
            detour = rng.choice([(), ("h4", "h5"), ("h6", "h5")])
            cells = ["h5", *detour] + shortest_path(world.adjacency, "h5", goal)[1:]
            entries.append(SuiteEntry(f"junction-{goal}-{i}", world, tuple(path_moves(cells)), goal))
    return entries


def init_bias_suite(per_goal: int = 1) -> list[SuiteEntry]:
    """
    Five-room world where r2, the door cell next to the start, is a decoy
    hypothesis that is never pursued. Its only non-goal landmark is the start
    cell, so counting initial-state landmarks hands it a head start.
    """
    world = five_rooms(["p1", "q1", "r2", "s1", "t1"])
    entries = []
    for goal in ("p1", "q1", "s1", "t1"):
        cells = shortest_path(world.adjacency, "h5", goal)
        for i in range(per_goal):
            entries.append(SuiteEntry(f"bias-{goal}-{i}", world, tuple(path_moves(cells)), goal))
    return entries


def habit_world(goals: Sequence[str] = HABIT_GOALS) -> GridWorld:
    """
    Start cell s with a two-cell alcove loop per goal (x<g>1, x<g>2), an open
    area of two cells m1, m2 that both reach every entry cell e<g>, and the
    goal cell g<g> behind each entry. Only e<g> and g<g> are landmarks of g.
    """
    layout = "\n".join([
        "s",
        "m1 . m2",
        " . ".join(f"x{g}1 x{g}2" for g in goals),
        " . ".join(f"e{g}" for g in goals),
        " . ".join(f"g{g}" for g in goals),
    ])
    doors = [("s", "m1"), ("s", "m2")]
    for g in goals:
        doors += [("s", f"x{g}1"), ("s", f"x{g}2"), ("m1", f"e{g}"), ("m2", f"e{g}"), (f"e{g}", f"g{g}")]
    spec = GridSpec(layout=layout, doors=doors, init="s", goals=[f"g{g}" for g in goals])
    return generate_gridworld(spec, name="habits")


def habit_suite(per_goal: int = 4, seed: int = 0, misleading_every: int = 4) -> list[SuiteEntry]:
    """
    Agents circle their own alcove first, cross the open area and then enter
    their goal's entry cell. Every `misleading_every`-th sequence per goal
    circles the next goal's alcove instead. The alcove is the only early
    signal; the entry cell is the first landmark anyone reaches.
    """
    rng = random.Random(seed)
    world = habit_world()
    entries = []
    for index, g in enumerate(HABIT_GOALS):
        for i in range(per_goal):
            habit = g
            if misleading_every and (i + 1) % misleading_every == 0:
                habit = HABIT_GOALS[(index + 1) % len(HABIT_GOALS)]
            loop = [f"x{habit}1", f"x{habit}2"]
            if rng.random() < 0.5:
                loop.reverse()
            middle = rng.choice(["m1", "m2"])
            cells = ["s", *loop, "s", middle, f"e{g}", f"g{g}"]
            entries.append(SuiteEntry(f"habit-{g}-{i}", world, tuple(path_moves(cells)), f"g{g}"))
    return entries


def corridor_spec(length: int, init: int, goals: Iterable[int]) -> GridSpec:
    names = [f"c{i:02d}" for i in range(length)]
    return GridSpec(layout=" ".join(names), init=names[init], goals=[names[g] for g in goals])


def random_grid_spec(rng: random.Random, max_cells: int = 12, drop: float = 0.3) -> Optional[GridSpec]:
    """
    A single-room grid of at most max_cells cells with some cells removed,
    restricted to the part connected to a random start. None when fewer than
    two cells remain.
    """
    rows = rng.randint(1, 3)
    columns = rng.randint(2, max(2, max_cells // rows))
    while rows * columns > max_cells:
        columns -= 1
    grid = [[f"c{r}{c}" if rng.random() >= drop else "." for c in range(columns)] for r in range(rows)]
    cells = [name for row in grid for name in row if name != "."]
    if len(cells) < 2:
        return None
    init = rng.choice(cells)
    layout = "\n".join(" ".join(row) for row in grid)
    probe = generate_adjacency(layout)
    connected = reachable_cells(probe, init)
    grid = [[name if name in connected else "." for name in row] for row in grid]
    cells = sorted(connected - {init})
    if not cells:
        return None
    return GridSpec(layout="\n".join(" ".join(row) for row in grid), init=init, goals=[rng.choice(cells)])


def generate_adjacency(layout: str) -> dict:
    _, adjacency = parse_layout(GridSpec(layout=layout, init="-", goals=["-"]))
    return adjacency


def random_walk(world: GridWorld, steps: int, rng: random.Random) -> list[str]:
    cell = world.spec.init
    cells = [cell]
    for _ in range(steps):
        cell = rng.choice(world.adjacency[cell])
        cells.append(cell)
    return path_moves(cells)
