"""
Fact-landmark extraction: candidates are back-chained through the relaxed
planning graph, then each candidate is verified by removing its achievers and
checking that the goal is no longer relaxed-reachable. No ordering between
landmarks is produced.
"""
from __future__ import annotations

import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping

import src.logger as Logger
from src.config import load_settings
from src.errors import SubgoalExtractionError, UnsolvableGoalError
from src.planning import GroundFact, PlanningProblem, flatten_precondition
from src.relaxed_graph import Rpg, build_rpg, relaxed_solvable

__all__ = [
    "LandmarkSet",
    "flatten_precondition",
    "generate_candidates",
    "verify_candidate",
    "extract_landmarks",
    "extract_per_subgoal",
    "dump_landmarks",
]


@dataclass(frozen=True)
class LandmarkSet:
    goal: frozenset
    all: frozenset
    trivial_init: frozenset
    trivial_goal: frozenset
    non_trivial: frozenset

    @classmethod
    def classify(cls, goal: Iterable[GroundFact], landmarks: Iterable[GroundFact], init: frozenset) -> "LandmarkSet":
        goal = frozenset(goal)
        landmarks = frozenset(landmarks) | goal
        trivial_init = frozenset(f for f in landmarks if f in init)
        trivial_goal = frozenset(f for f in landmarks if f in goal)
        return cls(goal, landmarks, trivial_init, trivial_goal, landmarks - trivial_init - trivial_goal)

    @property
    def observable(self) -> frozenset:
        """L_g without initial-state landmarks."""
        return self.all - self.trivial_init


def generate_candidates(problem: PlanningProblem, goal: Iterable[GroundFact], rpg: Rpg) -> frozenset:
    goal = frozenset(goal)
    if not relaxed_solvable(rpg, goal):
        raise UnsolvableGoalError(goal)
    candidates = set()
    seen = set(goal)
    worklist = deque(sorted(goal))
    while worklist:
        fact = worklist.popleft()
        level = rpg.level(fact)
        if level == 0:
            continue
        achievers = [a for a in problem.achievers.get(fact, ()) if rpg.action_level.get(a) == level - 1]
        if not achievers:
            continue
        shared = set(achievers[0].pre)
        for action in achievers[1:]:
            shared &= action.pre
        for candidate in sorted(shared):
            candidates.add(candidate)
            if candidate not in seen:
                seen.add(candidate)
                worklist.append(candidate)
    return frozenset(candidates) | goal


def verify_candidate(problem: PlanningProblem, goal: Iterable[GroundFact], candidate: GroundFact) -> bool:
    goal = frozenset(goal)
    if candidate in problem.init or candidate in goal:
        return True
    probe = build_rpg(problem, excluded_actions=problem.achievers.get(candidate, ()))
    return not relaxed_solvable(probe, goal)


def extract_landmarks(problem: PlanningProblem, goal: Iterable[GroundFact], workers: int | None = None) -> LandmarkSet:
    goal = frozenset(goal)
    workers = workers or load_settings().verify_workers
    started = time.perf_counter()
    rpg = build_rpg(problem)
    candidates = generate_candidates(problem, goal, rpg)
    to_verify = sorted(c for c in candidates if c not in problem.init and c not in goal)
    if workers > 1 and len(to_verify) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            verdicts = list(pool.map(lambda c: verify_candidate(problem, goal, c), to_verify))
    else:
        verdicts = [verify_candidate(problem, goal, c) for c in to_verify]
    verified = {c for c, ok in zip(to_verify, verdicts) if ok}
    accepted = goal | verified | (candidates & problem.init)
    Logger.log(f"Extracted {len(accepted)} landmarks from {len(candidates)} candidates "
               f"in {time.perf_counter() - started:.3f}s", Logger.DEBUG)
    return LandmarkSet.classify(goal, accepted, problem.init)


def extract_per_subgoal(problem: PlanningProblem, goal: Iterable[GroundFact],
                        workers: int | None = None) -> dict[GroundFact, LandmarkSet]:
    results, failures = {}, {}
    for subgoal in sorted(frozenset(goal)):
        try:
            results[subgoal] = extract_landmarks(problem, {subgoal}, workers)
        except UnsolvableGoalError as e:
            failures[subgoal] = e
    if failures:
        raise SubgoalExtractionError(failures)
    return results


def dump_landmarks(landmarks: Mapping[str, LandmarkSet]) -> str:
    """`<goal-id> <TRIVIAL_INIT|TRIVIAL_GOAL|NONTRIVIAL> <fact>` lines, sorted."""
    lines = []
    for goal_id, landmark_set in landmarks.items():
        for fact in landmark_set.trivial_init:
            lines.append(f"{goal_id} TRIVIAL_INIT {fact}")
        for fact in landmark_set.trivial_goal:
            lines.append(f"{goal_id} TRIVIAL_GOAL {fact}")
        for fact in landmark_set.non_trivial:
            lines.append(f"{goal_id} NONTRIVIAL {fact}")
    return "\n".join(sorted(lines)) + ("\n" if lines else "")
