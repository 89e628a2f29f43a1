"""
Naive Bayes goal model over observable planning facts: one Bernoulli variable
per fact, conditionally independent given the goal.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from src.config import load_settings
from src.errors import EmptyGoalSetError, ModelFormatError
from src.planning import GroundAction, GroundFact

HEADER = "nbm-v1"

FactEvidence = frozenset

_CPT_LINE = re.compile(r"^cpt (\([^()]*\)) (\S+) (\S+)$")
_FACT = re.compile(r"^\(([^()\s]+)((?:\s+[^()\s]+)*)\)$")


def featurize(observations: Iterable[GroundAction]) -> FactEvidence:
    """Facts revealed by the observations: the union of Pre(o) ∪ Add(o)."""
    true_facts = set()
    for observation in observations:
        true_facts |= observation.touched
    return frozenset(true_facts)


@dataclass(frozen=True, eq=False)
class NbmModel:
    goals: tuple[str, ...]
    prior: dict
    vocabulary: tuple[GroundFact, ...]
    probabilities: np.ndarray
    smoothing: float = 1.0

    @cached_property
    def index(self) -> dict[GroundFact, int]:
        return {fact: row for row, fact in enumerate(self.vocabulary)}

    @cached_property
    def log_prior(self) -> np.ndarray:
        return np.log(np.array([self.prior[g] for g in self.goals], dtype=float))

    @cached_property
    def log_true(self) -> np.ndarray:
        return np.log(self.probabilities)

    @cached_property
    def log_false(self) -> np.ndarray:
        return np.log1p(-self.probabilities)

    def cpt(self, fact: GroundFact, goal: str) -> float:
        return float(self.probabilities[self.index[fact], self.goals.index(goal)])


def train(dataset: Sequence[tuple[Sequence[GroundAction], str]], goals: Sequence[str],
          alpha: float | None = None, extra_vocabulary: Iterable[GroundFact] = ()) -> NbmModel:
    """
    Laplace-smoothed Bernoulli parameters per (fact, goal) and a uniform prior
    over the declared goals. Goals without training sequences get 1/2
    everywhere.
    """
    goals = tuple(dict.fromkeys(goals))
    if not goals:
        raise EmptyGoalSetError()
    alpha = load_settings().alpha if alpha is None else alpha
    if alpha <= 0:
        raise ValueError(f"smoothing pseudo-count must be positive, got {alpha}")

    featurized = []
    for observations, label in dataset:
        if label not in goals:
            raise ValueError(f"training label '{label}' is not a declared goal")
        featurized.append((featurize(observations), label))
    vocabulary = set(extra_vocabulary)
    for facts, _ in featurized:
        vocabulary |= facts
    vocabulary = tuple(sorted(vocabulary))
    row_of = {fact: row for row, fact in enumerate(vocabulary)}
    column_of = {goal: column for column, goal in enumerate(goals)}

    counts = np.zeros((len(vocabulary), len(goals)))
    sequences = np.zeros(len(goals))
    for facts, label in featurized:
        column = column_of[label]
        sequences[column] += 1
        for fact in facts:
            counts[row_of[fact], column] += 1
    probabilities = (counts + alpha) / (sequences + 2 * alpha)
    prior = {goal: 1.0 / len(goals) for goal in goals}
    return NbmModel(goals, prior, vocabulary, probabilities, float(alpha))


def _normalise(log_joint: np.ndarray) -> np.ndarray:
    shifted = log_joint - log_joint.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


def posterior(model: NbmModel, evidence: Iterable[GroundFact]) -> dict[str, float]:
    """P(g | evidence) computed in log space; facts outside the vocabulary are ignored."""
    present = np.zeros(len(model.vocabulary), dtype=bool)
    for fact in evidence:
        row = model.index.get(fact)
        if row is not None:
            present[row] = True
    log_joint = (model.log_prior
                 + model.log_true[present].sum(axis=0)
                 + model.log_false[~present].sum(axis=0))
    return dict(zip(model.goals, (float(p) for p in _normalise(log_joint))))


def restrict(distribution: Mapping[str, float], goals: Iterable[str]) -> dict[str, float]:
    """Renormalises a posterior over a subset of goals (uniform if it has no mass there)."""
    goals = tuple(goals)
    mass = {g: distribution.get(g, 0.0) for g in goals}
    total = sum(mass.values())
    if total <= 0:
        return {g: 1.0 / len(goals) for g in goals}
    return {g: p / total for g, p in mass.items()}


def save_model(model: NbmModel, path) -> None:
    lines = [HEADER, f"# alpha {model.smoothing!r}"]
    lines += [f"goal {goal} {model.prior[goal]!r}" for goal in model.goals]
    for fact in model.vocabulary:
        for goal in model.goals:
            lines.append(f"cpt {fact} {goal} {model.cpt(fact, goal)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_fact(text: str) -> GroundFact:
    match = _FACT.match(text)
    if not match:
        raise ModelFormatError(f"malformed fact {text}")
    return GroundFact(match.group(1), tuple(match.group(2).split()))


def _number(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ModelFormatError(f"{where}: expected a number, got '{text}'") from None


def load_model(path) -> NbmModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise ModelFormatError(f"{path}: missing '{HEADER}' header")
    goals, prior, entries, alpha = [], {}, {}, 1.0
    for number, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "alpha":
                alpha = _number(parts[1], f"{path}:{number}")
            continue
        if line.startswith("goal "):
            parts = line.split()
            if len(parts) != 3:
                raise ModelFormatError(f"{path}:{number}: malformed goal line")
            goals.append(parts[1])
            prior[parts[1]] = _number(parts[2], f"{path}:{number}")
            continue
        match = _CPT_LINE.match(line)
        if not match:
            raise ModelFormatError(f"{path}:{number}: unrecognised line")
        entries[(_parse_fact(match.group(1)), match.group(2))] = _number(match.group(3), f"{path}:{number}")
    vocabulary = tuple(sorted({fact for fact, _ in entries}))
    probabilities = np.zeros((len(vocabulary), len(goals)))
    for row, fact in enumerate(vocabulary):
        for column, goal in enumerate(goals):
            if (fact, goal) not in entries:
                raise ModelFormatError(f"{path}: no cpt entry for {fact} {goal}")
            probabilities[row, column] = entries[(fact, goal)]
    if not goals:
        raise ModelFormatError(f"{path}: no goals")
    return NbmModel(tuple(goals), prior, vocabulary, probabilities, alpha)
