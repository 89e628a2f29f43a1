"""
Online hybrid goal recognition. Landmarks are extracted once when a session
starts; each observed action then only updates the achieved-landmark
accumulators and the NBM evidence before the two estimates are combined as
w_PLR * plr_dist + w_NBM * nbm.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

import pandas as pd

import src.logger as Logger
from src.errors import UnknownActionError
from src.models import HybridConfig
from src.nbm import NbmModel, featurize, posterior, restrict
from src.planning import GroundAction, GroundFact, PlanningProblem, resolve_action
from src.recognizer import LandmarkModel, build_landmark_model, compute_achieved, rank_goals

SNAPSHOT_COLUMNS = ["t", "goal", "plr_score", "plr_dist", "nbm", "hybrid", "is_argmax", "plr_ms", "nbm_ms"]
SCORE_COLUMNS = ["t", "goal", "AL_size", "L_size", "h_gc", "h_uniq"]


def weight_nbm(n: float, a: float = 0.7, b: float = 0.45, c: float = 11.5) -> float:
    """Logistic NBM weight a / (1 + e^(-b(n - c))) in the training-set size n."""
    if n < 0:
        raise ValueError(f"training-set size must be non-negative, got {n}")
    exponent = -b * (n - c)
    if exponent > 700:
        return 0.0
    return a / (1.0 + math.exp(exponent))


def component_weights(config: HybridConfig) -> tuple[float, float]:
    """(w_PLR, w_NBM) for a configuration; the pair always sums to one."""
    if config.nbm_weight is not None:
        w_nbm = config.nbm_weight
    elif config.method == "plr":
        w_nbm = 0.0
    elif config.method == "nbm":
        w_nbm = 1.0
    else:
        w_nbm = weight_nbm(config.n, config.a, config.b, config.c)
    return 1.0 - w_nbm, w_nbm


@dataclass(frozen=True)
class RecognitionSnapshot:
    t: int
    plr_scores: dict
    plr_dist: dict
    nbm_posterior: dict
    hybrid: dict
    most_probable: frozenset
    plr_ms: float = 0.0
    nbm_ms: float = 0.0


def normalise_scores(scores: Mapping[str, Fraction]) -> dict[str, float]:
    """Scores as a distribution; uniform when every score is zero."""
    total = sum(scores.values(), Fraction(0))
    if total == 0:
        return {g: 1.0 / len(scores) for g in scores}
    return {g: float(Fraction(s) / total) for g, s in scores.items()}


def combine(plr_scores: Mapping[str, Fraction], nbm_posterior: Mapping[str, float],
            w_plr: float, w_nbm: float) -> tuple[dict, dict, frozenset]:
    plr_dist = normalise_scores(plr_scores)
    hybrid = {g: w_plr * plr_dist[g] + w_nbm * nbm_posterior[g] for g in plr_dist}
    return plr_dist, hybrid, rank_goals(hybrid).most_probable


class RecognitionSession:
    """
    One online recognition run over a single problem. Only step() mutates
    the session; emitted snapshots are immutable.
    """

    def __init__(self, problem: PlanningProblem, landmark_model: LandmarkModel,
                 nbm: Optional[NbmModel], config: HybridConfig):
        self.problem = problem
        self.landmarks = landmark_model
        self.nbm = nbm
        self.config = config
        self.goals = landmark_model.goals
        self.w_plr, self.w_nbm = component_weights(config)
        self.extraction_seconds = landmark_model.extraction_seconds
        self.t = 0
        self.observations = []
        self.timings = []
        self.evidence = set()

        use_init = landmark_model.use_init_landmarks
        if config.use_init_landmarks != use_init:
            raise ValueError(f"config has use_init_landmarks={config.use_init_landmarks} "
                             f"but the landmark model was built with {use_init}")
        self.relevant = {g: landmark_model.relevant(g) for g in self.goals}
        self.relevant_subgoals = {g: landmark_model.relevant_subgoals(g) for g in self.goals}
        self.weights = landmark_model.uniqueness_weights()
        self.total_weight = {g: sum((self.weights[f] for f in self.relevant[g]), Fraction(0)) for g in self.goals}

        self.achieved = {}
        self.achieved_subgoals = {}
        self.achieved_weight = {}
        self._goals_by_fact = {}
        self._subgoals_by_fact = {}
        for goal in self.goals:
            start = set(landmark_model.landmarks[goal].trivial_init) if use_init else set()
            self.achieved[goal] = start
            self.achieved_weight[goal] = sum((self.weights[f] for f in start), Fraction(0))
            for fact in self.relevant[goal]:
                self._goals_by_fact.setdefault(fact, []).append(goal)
            self.achieved_subgoals[goal] = {}
            for subgoal, landmarks in self.relevant_subgoals[goal].items():
                initial = landmark_model.subgoal_landmarks[goal][subgoal].trivial_init if use_init else ()
                self.achieved_subgoals[goal][subgoal] = set(initial)
                for fact in landmarks:
                    self._subgoals_by_fact.setdefault(fact, []).append((goal, subgoal))

        if nbm is None and self.w_nbm > 0:
            Logger.log("[!] No NBM model supplied, its component is uniform", Logger.WARNING)

    # -- scoring -------------------------------------------------------------

    def plr_scores(self) -> dict[str, Fraction]:
        heuristic = self.config.heuristic
        scores = {}
        for goal in self.goals:
            if heuristic == "completion":
                size = len(self.relevant[goal])
                scores[goal] = Fraction(len(self.achieved[goal]), size) if size else Fraction(0)
            elif heuristic == "uniqueness":
                total = self.total_weight[goal]
                scores[goal] = self.achieved_weight[goal] / total if total else Fraction(0)
            else:
                subgoals = self.relevant_subgoals[goal]
                ratios = [Fraction(len(self.achieved_subgoals[goal][sg]), len(lms)) if lms else Fraction(0)
                          for sg, lms in subgoals.items()]
                scores[goal] = sum(ratios, Fraction(0)) / len(ratios) if ratios else Fraction(0)
        return scores

    def nbm_posterior(self) -> dict[str, float]:
        if self.nbm is None:
            return {g: 1.0 / len(self.goals) for g in self.goals}
        return restrict(posterior(self.nbm, self.evidence), self.goals)

    def snapshot(self, plr_ms: float = 0.0, nbm_ms: float = 0.0) -> RecognitionSnapshot:
        scores = self.plr_scores()
        nbm = self.nbm_posterior()
        plr_dist, hybrid, most = combine(scores, nbm, self.w_plr, self.w_nbm)
        return RecognitionSnapshot(self.t, scores, plr_dist, nbm, hybrid, most, plr_ms, nbm_ms)

    def score_rows(self) -> list[dict]:
        """Per-goal `t,goal,AL_size,L_size,h_gc,h_uniq` rows for the current step."""
        rows = []
        for goal in self.goals:
            size = len(self.relevant[goal])
            total = self.total_weight[goal]
            rows.append({
                "t": self.t,
                "goal": goal,
                "AL_size": len(self.achieved[goal]),
                "L_size": size,
                "h_gc": float(Fraction(len(self.achieved[goal]), size)) if size else 0.0,
                "h_uniq": float(self.achieved_weight[goal] / total) if total else 0.0,
            })
        return rows

    # -- online loop ---------------------------------------------------------

    def _resolve(self, observation: Union[GroundAction, str]) -> GroundAction:
        if isinstance(observation, str):
            return resolve_action(self.problem, observation)
        if not self.problem.has_action(observation):
            raise UnknownActionError(observation.text)
        return observation

    def step(self, observation: Union[GroundAction, str]) -> RecognitionSnapshot:
        action = self._resolve(observation)
        self.t += 1
        self.observations.append(action)

        started = time.perf_counter()
        touched = action.touched
        for fact in touched:
            for goal in self._goals_by_fact.get(fact, ()):
                if fact not in self.achieved[goal]:
                    self.achieved[goal].add(fact)
                    self.achieved_weight[goal] += self.weights[fact]
            for goal, subgoal in self._subgoals_by_fact.get(fact, ()):
                self.achieved_subgoals[goal][subgoal].add(fact)
        scores = self.plr_scores()
        plr_ms = (time.perf_counter() - started) * 1000.0

        started = time.perf_counter()
        self.evidence |= touched
        nbm = self.nbm_posterior()
        nbm_ms = (time.perf_counter() - started) * 1000.0

        plr_dist, hybrid, most = combine(scores, nbm, self.w_plr, self.w_nbm)
        self.timings.append((self.t, plr_ms, nbm_ms))
        return RecognitionSnapshot(self.t, scores, plr_dist, nbm, hybrid, most, plr_ms, nbm_ms)


def start_session(problem: PlanningProblem, goals: Mapping[str, Iterable[GroundFact]],
                  nbm: Optional[NbmModel], config: HybridConfig,
                  landmark_model: Optional[LandmarkModel] = None,
                  workers: Optional[int] = None) -> RecognitionSession:
    """
    Extracts landmarks for every goal (the one-time t=0 cost, recorded in
    session.extraction_seconds) unless a prebuilt landmark model is passed.
    """
    if landmark_model is None:
        landmark_model = build_landmark_model(
            problem, goals,
            subgoals=config.heuristic == "completion-subgoal",
            use_init_landmarks=config.use_init_landmarks,
            workers=workers,
        )
    return RecognitionSession(problem, landmark_model, nbm, config)


def run_online(session: RecognitionSession, observations: Iterable[Union[GroundAction, str]]) -> list[RecognitionSnapshot]:
    """Steps through the observations; an unknown action stops the run and the prefix is returned."""
    snapshots = []
    for observation in observations:
        try:
            snapshots.append(session.step(observation))
        except UnknownActionError as e:
            Logger.log(f"[!] Online recognition aborted at t={session.t + 1}: {e}", Logger.ERROR)
            break
    return snapshots


def batch_snapshot(landmark_model: LandmarkModel, nbm: Optional[NbmModel], config: HybridConfig,
                   observations: Iterable[GroundAction]) -> RecognitionSnapshot:
    """Recomputes the snapshot for an observation prefix from scratch."""
    observations = tuple(observations)
    goals = landmark_model.goals
    achieved = compute_achieved(landmark_model.init, goals, observations, landmark_model.landmarks,
                                config.use_init_landmarks)
    achieved_subgoals = {
        goal: compute_achieved(landmark_model.init, list(subsets), observations, subsets, config.use_init_landmarks)
        for goal, subsets in landmark_model.subgoal_landmarks.items()
    }
    scores = landmark_model.score(config.heuristic, achieved, achieved_subgoals)
    if nbm is None:
        nbm_post = {g: 1.0 / len(goals) for g in goals}
    else:
        nbm_post = restrict(posterior(nbm, featurize(observations)), goals)
    w_plr, w_nbm = component_weights(config)
    plr_dist, hybrid, most = combine(scores, nbm_post, w_plr, w_nbm)
    return RecognitionSnapshot(len(observations), scores, plr_dist, nbm_post, hybrid, most)


def snapshots_frame(snapshots: Iterable[RecognitionSnapshot]) -> pd.DataFrame:
    rows = []
    for snap in snapshots:
        for goal in sorted(snap.hybrid):
            rows.append({
                "t": snap.t,
                "goal": goal,
                "plr_score": float(snap.plr_scores[goal]),
                "plr_dist": snap.plr_dist[goal],
                "nbm": snap.nbm_posterior[goal],
                "hybrid": snap.hybrid[goal],
                "is_argmax": int(goal in snap.most_probable),
                "plr_ms": snap.plr_ms,
                "nbm_ms": snap.nbm_ms,
            })
    return pd.DataFrame(rows, columns=SNAPSHOT_COLUMNS)
