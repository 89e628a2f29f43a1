"""
Evaluation harness: dataset loading from a CSV manifest, the cross-validation
plan, the accuracy metric over the lambda grid and the experiment driver.
"""
from __future__ import annotations

import csv
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import pandas as pd

import src.logger as Logger
from src.errors import CvPlanError, DatasetError, GoalRecognitionError
from src.grounder import ground, parse_facts
from src.inference import RecognitionSnapshot, run_online, start_session
from src.models import AccuracyRow, CvPlan, ExperimentConfig, Fold, HybridConfig
from src.nbm import NbmModel, train
from src.parser import LiftedModel, PddlParser, parse_domain_and_problem
from src.planning import GoalRecognitionProblem, PlanningProblem, resolve_action
from src.recognizer import LandmarkModel, build_landmark_model

MANIFEST_COLUMNS = ["domain", "problem", "hypotheses", "observations", "true_goal"]
TABLE_COLUMNS = ["method", "n", "lambda", "accuracy", "folds", "seed"]


@dataclass(frozen=True)
class RecognitionDataset:
    problems: tuple[GoalRecognitionProblem, ...]

    def __len__(self):
        return len(self.problems)

    def __getitem__(self, index: int) -> GoalRecognitionProblem:
        return self.problems[index]

    def __iter__(self):
        return iter(self.problems)

    @property
    def goal_names(self) -> tuple[str, ...]:
        names = set()
        for problem in self.problems:
            names |= set(problem.goals)
        return tuple(sorted(names))


# -- dataset loading -----------------------------------------------------------

def _content_lines(text: str):
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if line and not line.startswith("#"):
            yield number, line


def parse_hypotheses(text: str, source: str = "<hypotheses>") -> dict[str, frozenset]:
    """`<name> <fact> [<fact> ...]` per line."""
    goals = {}
    for number, line in _content_lines(text):
        name, _, facts = line.partition(" ")
        try:
            parsed = parse_facts(facts)
        except GoalRecognitionError as e:
            raise DatasetError([f"{source}:{number}: {e}"]) from None
        if not parsed:
            raise DatasetError([f"{source}:{number}: goal {name} has no facts"])
        if name in goals:
            raise DatasetError([f"{source}:{number}: duplicate goal {name}"])
        goals[name] = frozenset(parsed)
    return goals


def parse_observations(problem: PlanningProblem, text: str, source: str = "<observations>"):
    """One canonical grounded action per line; blank lines and `#` comments are skipped."""
    return tuple(resolve_action(problem, line, source, number) for number, line in _content_lines(text))


def dataset_from_texts(entries: Iterable[Mapping[str, str]], name: str = "synthetic") -> RecognitionDataset:
    """
    Builds a dataset from in-memory entries with the keys `domain_text`,
    `problem_text`, `hypotheses_text`, `observations_text` and `true_goal`.
    Identical domain/problem texts are grounded once.
    """
    grounded = {}
    problems = []
    for index, entry in enumerate(entries):
        key = (entry["domain_text"], entry["problem_text"])
        if key not in grounded:
            grounded[key] = ground(parse_domain_and_problem(*key))
        problem = grounded[key]
        goals = parse_hypotheses(entry["hypotheses_text"])
        observations = parse_observations(problem, entry["observations_text"])
        problems.append(GoalRecognitionProblem(f"{name}-{index}", problem, goals, observations, entry["true_goal"]))
    return RecognitionDataset(tuple(problems))


def _ground_files(domain_path: Path, problem_path: Path, where: str) -> PlanningProblem:
    parser = PddlParser()
    current = domain_path
    try:
        domain = parser.parse_domain(domain_path.read_text(encoding="utf-8"))
        current = problem_path
        problem = parser.parse_problem(problem_path.read_text(encoding="utf-8"), domain)
        return ground(LiftedModel(domain, problem))
    except (GoalRecognitionError, OSError) as e:
        raise DatasetError([f"{where}: {current}: {e}"]) from e


def load_dataset(manifest_path, strict: bool = True) -> RecognitionDataset:
    """
    Reads a manifest CSV (`domain,problem,hypotheses,observations,true_goal`,
    paths relative to the manifest). Every entry is checked; with strict=True
    all problems found are raised together, otherwise bad entries are skipped.
    """
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    grounded = {}
    problems, errors = [], []
    with open(manifest_path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        missing = [c for c in MANIFEST_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise DatasetError([f"{manifest_path}:1: missing columns {', '.join(missing)}"])
        for row in reader:
            where = f"{manifest_path}:{reader.line_num}"
            try:
                domain_path = base / row["domain"].strip()
                problem_path = base / row["problem"].strip()
                key = (domain_path.resolve(), problem_path.resolve())
                if key not in grounded:
                    grounded[key] = _ground_files(domain_path, problem_path, where)
                problem = grounded[key]
                hyp_path = base / row["hypotheses"].strip()
                goals = parse_hypotheses(hyp_path.read_text(encoding="utf-8"), str(hyp_path))
                obs_path = base / row["observations"].strip()
                observations = parse_observations(problem, obs_path.read_text(encoding="utf-8"), str(obs_path))
                true_goal = row["true_goal"].strip()
                if true_goal not in goals:
                    raise DatasetError([f"{where}: true goal {true_goal} is not a hypothesis"])
                if not observations:
                    raise DatasetError([f"{where}: {obs_path} contains no observations"])
            except DatasetError as e:
                errors.extend(e.errors)
                continue
            except (GoalRecognitionError, OSError) as e:
                errors.append(f"{where}: {e}")
                continue
            problems.append(GoalRecognitionProblem(f"{Path(row['observations']).stem}-{len(problems)}", problem,
                                                   goals, observations, true_goal))
    if errors:
        if strict:
            raise DatasetError(errors)
        for error in errors:
            Logger.log(f"[!] Skipping dataset entry: {error}", Logger.WARNING)
    Logger.log(f"Loaded {len(problems)} recognition problems from {manifest_path}", Logger.DEBUG)
    return RecognitionDataset(tuple(problems))


# -- cross validation ----------------------------------------------------------

def make_cv_plan(size: int, n: int, seed: int = 0) -> CvPlan:
    """
    Shuffles the indices with the seed and cuts them into floor(size/n)
    partitions of n. A remainder forms one more partition, topped up to n by
    sampling without replacement from the others. Each fold trains on one
    partition and validates on every index outside it.
    """
    if n < 1:
        raise CvPlanError(f"training-set size must be at least 1, got {n}")
    if n > size:
        raise CvPlanError(f"training-set size {n} exceeds dataset size {size}")
    rng = random.Random(seed)
    order = list(range(size))
    rng.shuffle(order)
    k = size // n
    partitions = [order[i * n:(i + 1) * n] for i in range(k)]
    remainder = order[k * n:]
    if remainder:
        others = order[:k * n]
        partitions.append(remainder + rng.sample(others, n - len(remainder)))
    folds = []
    for partition in partitions:
        chosen = set(partition)
        validation = [i for i in range(size) if i not in chosen]
        if not validation:
            raise CvPlanError("a fold has an empty validation set; use a smaller training-set size")
        folds.append(Fold(train=sorted(partition), validation=validation))
    return CvPlan(n=n, k=k, folds=folds, seed=seed)


# -- accuracy ------------------------------------------------------------------

@dataclass
class ProblemResult:
    """Snapshots of one online run; snapshots[t] is the state after t observations."""
    name: str
    true_goal: str
    length: int
    snapshots: list = field(default_factory=list)
    error: Optional[str] = None


def observation_index(length: int, lam: float) -> int:
    return math.floor(length * Fraction(str(lam)))


def is_correct(result: ProblemResult, lam: float, strict: bool = True) -> bool:
    t = observation_index(result.length, lam)
    if t >= len(result.snapshots):
        return False
    most = result.snapshots[t].most_probable
    if strict:
        return most == frozenset({result.true_goal})
    return result.true_goal in most


def accuracy(results: Sequence[ProblemResult], lam: float, strict: bool = True) -> float:
    """
    Mean over problems of the snapshot at t = floor(T * lam) naming the true
    goal as the only most probable goal. strict=False accepts ties.
    """
    if not results:
        return 0.0
    return sum(is_correct(r, lam, strict) for r in results) / len(results)


# -- experiments ---------------------------------------------------------------

@dataclass
class ExperimentResult:
    method: str
    n: int
    seed: int
    plan: CvPlan
    table: list
    lenient: list
    fold_tables: list
    results: list

    def accuracy_at(self, lam: float, strict: bool = True) -> float:
        rows = self.table if strict else self.lenient
        for row in rows:
            if row.lam == lam:
                return row.accuracy
        raise KeyError(lam)

    def to_frame(self, strict: bool = True) -> pd.DataFrame:
        rows = self.table if strict else self.lenient
        return pd.DataFrame([row.model_dump(by_alias=True) for row in rows], columns=TABLE_COLUMNS)

    def folds_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            [{"fold": i, "lambda": lam, "accuracy": acc}
             for i, table in enumerate(self.fold_tables) for lam, acc in table.items()],
            columns=["fold", "lambda", "accuracy"],
        )
        return frame


def evaluate_problem(problem: GoalRecognitionProblem, nbm: Optional[NbmModel], config: HybridConfig,
                     landmark_model: Optional[LandmarkModel] = None, workers: Optional[int] = None) -> ProblemResult:
    """One online run with the t=0 snapshot prepended. Failures give an empty result."""
    result = ProblemResult(problem.name, problem.true_goal, len(problem.observations))
    try:
        session = start_session(problem.problem, problem.goals, nbm, config, landmark_model, workers)
        result.snapshots = [session.snapshot()] + run_online(session, problem.observations)
    except GoalRecognitionError as e:
        result.error = str(e)
        Logger.log(f"[!] Recognition of {problem.name} failed: {e}", Logger.WARNING)
    return result


def run_experiment(dataset: RecognitionDataset, method: str, n: int, seed: int = 0,
                   config: Optional[ExperimentConfig] = None) -> ExperimentResult:
    """
    Cross-validated accuracy of one method at training-set size n. Landmarks
    are extracted once per problem; the NBM is retrained per fold.
    """
    config = config or ExperimentConfig()
    hybrid = config.hybrid.model_copy(update={"method": method, "n": n})
    plan = make_cv_plan(len(dataset), n, seed)
    goals = dataset.goal_names
    landmark_models = {}
    started = time.perf_counter()

    all_results, fold_tables = [], []
    for number, fold in enumerate(plan.folds):
        nbm = None
        if method != "plr":
            nbm = train([(dataset[i].observations, dataset[i].true_goal) for i in fold.train], goals, config.alpha)
        fold_results = []
        for index in fold.validation:
            problem = dataset[index]
            if index not in landmark_models:
                try:
                    landmark_models[index] = build_landmark_model(
                        problem.problem, problem.goals,
                        subgoals=hybrid.heuristic == "completion-subgoal",
                        use_init_landmarks=hybrid.use_init_landmarks,
                        workers=config.workers,
                    )
                except GoalRecognitionError as e:
                    Logger.log(f"[!] Landmark extraction for {problem.name} failed: {e}", Logger.WARNING)
                    landmark_models[index] = None
            if landmark_models[index] is None:
                fold_results.append(ProblemResult(problem.name, problem.true_goal, len(problem.observations),
                                                  error="landmark extraction failed"))
                continue
            fold_results.append(evaluate_problem(problem, nbm, hybrid, landmark_models[index]))
        fold_tables.append({lam: accuracy(fold_results, lam) for lam in config.lambda_grid})
        all_results.extend(fold_results)
        Logger.log(f"{method} n={n} fold {number + 1}/{len(plan.folds)}: "
                   f"{len(fold_results)} problems evaluated", Logger.DEBUG)

    def rows(strict):
        return [AccuracyRow(method=method, n=n, lam=lam, accuracy=accuracy(all_results, lam, strict),
                            folds=len(plan.folds), seed=seed)
                for lam in config.lambda_grid]

    Logger.log(f"Experiment {method} n={n} finished in {time.perf_counter() - started:.2f}s", Logger.DEBUG)
    return ExperimentResult(method, n, seed, plan, rows(True), rows(False), fold_tables, all_results)


def write_table(results: Iterable[ExperimentResult], path, strict: bool = True) -> pd.DataFrame:
    frames = [r.to_frame(strict) for r in results]
    frame = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=TABLE_COLUMNS)
    frame.to_csv(path, index=False)
    return frame
