"""
Planning-landmark recognition: achieved landmarks from observed actions and
the completion / uniqueness heuristics over them. Scores are exact Fractions.
Initial-state landmarks are ignored unless `use_init_landmarks` is set.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import src.logger as Logger
from src.errors import EmptyGoalSetError, GoalRecognitionError, UndefinedLandmarkError
from src.landmarks import LandmarkSet, extract_landmarks, extract_per_subgoal
from src.planning import GroundAction, GroundFact, PlanningProblem

TIE_TOLERANCE = 1e-12

HEURISTICS = ("completion", "completion-subgoal", "uniqueness")


def relevant_landmarks(landmark_set: LandmarkSet, use_init_landmarks: bool = False) -> frozenset:
    return landmark_set.all if use_init_landmarks else landmark_set.observable


def compute_achieved(init: frozenset, goals: Iterable[str], observations: Iterable[GroundAction],
                     landmarks: Mapping[str, LandmarkSet], use_init_landmarks: bool = False) -> dict[str, frozenset]:
    """
    For every goal, the landmarks revealed by Pre(o) ∪ Add(o) of some observed
    action. Initial-state landmarks never count unless use_init_landmarks is
    set, in which case they are achieved from the start.
    """
    observations = tuple(observations)
    achieved = {}
    for goal in goals:
        candidates = relevant_landmarks(landmarks[goal], use_init_landmarks)
        found = set(landmarks[goal].trivial_init) if use_init_landmarks else set()
        for observation in observations:
            found |= candidates & observation.touched
        achieved[goal] = frozenset(found)
    return achieved


def h_completion(achieved: Iterable[GroundFact], landmarks: Iterable[GroundFact]) -> Fraction:
    landmarks = frozenset(landmarks)
    if not landmarks:
        return Fraction(0)
    return Fraction(len(frozenset(achieved) & landmarks), len(landmarks))


def h_completion_subgoal(achieved: Mapping[GroundFact, Iterable[GroundFact]],
                         landmarks: Mapping[GroundFact, Iterable[GroundFact]]) -> Fraction:
    """Average over sub-goals of |AL_sg| / |L_sg|; empty sub-goal sets add 0."""
    if not landmarks:
        return Fraction(0)
    total = sum((h_completion(achieved.get(sg, ()), lms) for sg, lms in landmarks.items()), Fraction(0))
    return total / len(landmarks)


def landmark_uniqueness(fact: GroundFact, landmark_sets: Mapping[str, Iterable[GroundFact]]) -> Fraction:
    count = sum(1 for landmarks in landmark_sets.values() if fact in landmarks)
    if count == 0:
        raise UndefinedLandmarkError(fact)
    return Fraction(1, count)


def h_uniqueness(achieved: Iterable[GroundFact], landmarks: Iterable[GroundFact],
                 landmark_sets: Mapping[str, Iterable[GroundFact]]) -> Fraction:
    landmarks = frozenset(landmarks)
    total = sum((landmark_uniqueness(l, landmark_sets) for l in landmarks), Fraction(0))
    if total == 0:
        return Fraction(0)
    reached = sum((landmark_uniqueness(l, landmark_sets) for l in frozenset(achieved) & landmarks), Fraction(0))
    return reached / total


@dataclass(frozen=True)
class GoalScores:
    scores: dict
    most_probable: frozenset


def rank_goals(scores: Mapping[str, object]) -> GoalScores:
    """Every goal within TIE_TOLERANCE of the maximum is most probable; ties are kept."""
    if not scores:
        raise EmptyGoalSetError()
    best = max(scores.values())
    most = frozenset(g for g, s in scores.items() if best - s <= TIE_TOLERANCE)
    return GoalScores(dict(scores), most)


@dataclass
class LandmarkModel:
    """Landmark sets for every goal of one problem, extracted once."""
    init: frozenset
    landmarks: dict
    subgoal_landmarks: dict = field(default_factory=dict)
    use_init_landmarks: bool = False
    dropped: dict = field(default_factory=dict)
    extraction_seconds: float = 0.0

    @property
    def goals(self) -> tuple[str, ...]:
        return tuple(self.landmarks)

    def relevant(self, goal: str) -> frozenset:
        return relevant_landmarks(self.landmarks[goal], self.use_init_landmarks)

    def relevant_subgoals(self, goal: str) -> dict:
        return {sg: relevant_landmarks(lms, self.use_init_landmarks)
                for sg, lms in self.subgoal_landmarks.get(goal, {}).items()}

    def relevant_sets(self) -> dict:
        return {goal: self.relevant(goal) for goal in self.landmarks}

    def uniqueness_weights(self) -> dict:
        sets = self.relevant_sets()
        weights = {}
        for landmarks in sets.values():
            for fact in landmarks:
                if fact not in weights:
                    weights[fact] = landmark_uniqueness(fact, sets)
        return weights

    def score(self, heuristic: str, achieved: Mapping[str, frozenset],
              achieved_subgoals: Mapping[str, Mapping] | None = None) -> dict[str, Fraction]:
        """Batch scoring of all goals from achieved-landmark sets."""
        if heuristic == "completion":
            return {g: h_completion(achieved[g], self.relevant(g)) for g in self.goals}
        if heuristic == "uniqueness":
            sets = self.relevant_sets()
            return {g: h_uniqueness(achieved[g], sets[g], sets) for g in self.goals}
        if heuristic == "completion-subgoal":
            achieved_subgoals = achieved_subgoals or {}
            return {g: h_completion_subgoal(achieved_subgoals.get(g, {}), self.relevant_subgoals(g))
                    for g in self.goals}
        raise ValueError(f"unknown heuristic '{heuristic}', expected one of {HEURISTICS}")


def build_landmark_model(problem: PlanningProblem, goals: Mapping[str, Iterable[GroundFact]],
                         subgoals: bool = False, use_init_landmarks: bool = False,
                         workers: int | None = None) -> LandmarkModel:
    """
    Extracts landmarks for every goal hypothesis. A goal whose extraction
    fails is dropped with a warning; an empty result is an error.
    """
    if not goals:
        raise EmptyGoalSetError()
    started = time.perf_counter()
    landmarks, per_subgoal, dropped = {}, {}, {}
    for name, facts in goals.items():
        try:
            landmarks[name] = extract_landmarks(problem, facts, workers)
            if subgoals:
                per_subgoal[name] = extract_per_subgoal(problem, facts, workers)
        except GoalRecognitionError as e:
            landmarks.pop(name, None)
            dropped[name] = str(e)
            Logger.log(f"[!] Dropping goal {name}: {e}", Logger.WARNING)
    if not landmarks:
        raise EmptyGoalSetError("no goal hypothesis survived landmark extraction")
    elapsed = time.perf_counter() - started
    Logger.log(f"Landmark extraction for {len(landmarks)} goals took {elapsed:.3f}s", Logger.DEBUG)
    return LandmarkModel(problem.init, landmarks, per_subgoal, use_init_landmarks, dropped, elapsed)
