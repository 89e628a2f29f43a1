from fractions import Fraction

import pytest

from src.errors import EmptyGoalSetError, UndefinedLandmarkError
from src.gridworld import is_at
from src.landmarks import LandmarkSet
from src.models import GridSpec
from src.planning import GroundFact, resolve_action
from src.recognizer import (
    build_landmark_model,
    compute_achieved,
    h_completion,
    h_completion_subgoal,
    h_uniqueness,
    landmark_uniqueness,
    rank_goals,
)
from src.synthetic import FIVE_ROOMS_DOORS, FIVE_ROOMS_LAYOUT, path_moves

ROOM_GOALS = ["p1", "q1", "r1", "s1", "t1"]


@pytest.fixture
def five_rooms_model(grid_problem):
    spec = GridSpec(layout=FIVE_ROOMS_LAYOUT, doors=FIVE_ROOMS_DOORS, init="h5", goals=ROOM_GOALS)
    world, problem = grid_problem(spec, "five-rooms")
    return world, problem, build_landmark_model(problem, world.hypotheses, subgoals=True)


def lm(name):
    return GroundFact("lm", (name,))


def test_worked_example_subgoal_average_and_completion():
    subgoals = [GroundFact("sg", (str(i),)) for i in range(5)]
    landmarks = {sg: {lm(f"{i}")} for i, sg in enumerate(subgoals[:4])}
    landmarks[subgoals[4]] = {lm(f"deep{i}") for i in range(30)}
    achieved = {sg: set(landmarks[sg]) for sg in subgoals[:4]}
    achieved[subgoals[4]] = set()

    assert h_completion_subgoal(achieved, landmarks) == Fraction(4, 5)

    everything = set().union(*landmarks.values())
    reached = set().union(*achieved.values())
    assert len(everything) == 34
    assert h_completion(reached, everything) == Fraction(4, 34)


def test_completion_edge_cases():
    seven = {lm(str(i)) for i in range(7)}
    assert h_completion(seven, seven) == 1
    assert h_completion(set(), seven) == 0
    assert h_completion(set(), set()) == 0


def test_subgoal_average_edge_cases():
    sg = GroundFact("sg")
    only = {sg: {lm("a"), lm("b")}}
    assert h_completion_subgoal({sg: {lm("a")}}, only) == h_completion({lm("a")}, only[sg])
    both = {sg: {lm("a")}, GroundFact("other"): {lm("b")}}
    assert h_completion_subgoal({sg: {lm("a")}, GroundFact("other"): {lm("b")}}, both) == 1
    assert h_completion_subgoal({}, {sg: set()}) == 0


def test_landmark_uniqueness_counts_containing_sets():
    a, b = lm("a"), lm("b")
    sets = {"g1": {a, b}, "g2": {b}, "g3": set()}
    assert landmark_uniqueness(a, sets) == 1
    assert landmark_uniqueness(b, sets) == Fraction(1, 2)
    everywhere = {f"g{i}": {a} for i in range(5)}
    assert landmark_uniqueness(a, everywhere) == Fraction(1, 5)
    with pytest.raises(UndefinedLandmarkError):
        landmark_uniqueness(lm("c"), sets)


def test_uniqueness_heuristic():
    unique, shared = lm("u"), lm("s")
    sets = {"g1": {unique, shared}, "g2": {shared}}
    assert h_uniqueness({unique}, sets["g1"], sets) == Fraction(2, 3)
    assert h_uniqueness(sets["g1"], sets["g1"], sets) == 1
    assert h_uniqueness(set(), sets["g1"], sets) == 0
    assert h_uniqueness(set(), set(), sets) == 0


def test_rank_goals_keeps_ties():
    assert rank_goals({"g1": 0.4, "g2": 0.7}).most_probable == {"g2"}
    assert rank_goals({"g1": 0.5, "g2": 0.5}).most_probable == {"g1", "g2"}
    assert rank_goals({"g1": 0, "g2": 0, "g3": 0}).most_probable == {"g1", "g2", "g3"}
    assert rank_goals({"g1": Fraction(1, 3), "g2": 1 / 3}).most_probable == {"g1", "g2"}
    with pytest.raises(EmptyGoalSetError):
        rank_goals({})


def test_compute_achieved_on_house(house):
    world, problem = house
    model = build_landmark_model(problem, world.hypotheses)
    move = resolve_action(problem, "(move k2 h3)")

    assert compute_achieved(problem.init, ["ba3"], [], model.landmarks) == {"ba3": frozenset()}
    # k2 is touched by the move but only counts when initial landmarks are used
    assert compute_achieved(problem.init, ["ba3"], [move], model.landmarks) == {"ba3": {is_at("h3")}}
    with_init = compute_achieved(problem.init, ["ba3"], [move], model.landmarks, use_init_landmarks=True)
    assert with_init == {"ba3": {is_at("h3"), is_at("k2")}}


def test_achieved_is_order_insensitive(house):
    world, problem = house
    model = build_landmark_model(problem, world.hypotheses)
    steps = [resolve_action(problem, text) for text in ("(move k2 h3)", "(move h3 ba1)", "(move ba1 ba3)")]
    forward = compute_achieved(problem.init, ["ba3"], steps, model.landmarks)
    backward = compute_achieved(problem.init, ["ba3"], steps[::-1], model.landmarks)
    assert forward == backward == {"ba3": {is_at("h3"), is_at("ba1"), is_at("ba3")}}


def test_five_rooms_landmark_sizes(five_rooms_model):
    _, _, model = five_rooms_model
    sizes = {goal: len(model.relevant(goal)) for goal in ROOM_GOALS}
    assert sizes == {"p1": 6, "q1": 4, "r1": 2, "s1": 4, "t1": 6}
    assert model.relevant("q1") == {is_at("h4"), is_at("h3"), is_at("q2"), is_at("q1")}
    weights = model.uniqueness_weights()
    assert weights[is_at("h4")] == Fraction(1, 2)
    assert weights[is_at("r2")] == 1


def test_init_filter_leaves_scores_unchanged(five_rooms_model):
    _, problem, model = five_rooms_model
    steps = [resolve_action(problem, m) for m in path_moves(["h5", "h4", "h3"])]
    achieved = compute_achieved(problem.init, model.goals, steps, model.landmarks)
    padded = dict(model.landmarks)
    static = GroundFact("adjacent", ("h4", "h5"))
    padded["q1"] = LandmarkSet.classify(padded["q1"].goal, padded["q1"].all | {static}, problem.init)
    again = compute_achieved(problem.init, model.goals, steps, padded)
    assert achieved == again
    assert model.score("completion", achieved) == model.score("completion", again)


def test_scores_grow_along_a_path(five_rooms_model):
    _, problem, model = five_rooms_model
    cells = ["h5", "h4", "h3", "h2", "h1", "p2", "p1"]
    steps = [resolve_action(problem, m) for m in path_moves(cells)]
    previous = None
    for t in range(len(steps) + 1):
        achieved = compute_achieved(problem.init, model.goals, steps[:t], model.landmarks)
        current = {h: model.score(h, achieved) for h in ("completion", "uniqueness")}
        for heuristic, scores in current.items():
            assert all(0 <= s <= 1 for s in scores.values())
            if previous is not None:
                assert all(scores[g] >= previous[heuristic][g] for g in scores)
        previous = current
    assert current["completion"]["p1"] == 1
    assert rank_goals(current["completion"]).most_probable == {"p1"}


def test_subgoal_scores_match_completion_for_single_fact_goals(five_rooms_model):
    _, problem, model = five_rooms_model
    steps = [resolve_action(problem, m) for m in path_moves(["h5", "h6", "h7", "s2"])]
    achieved = compute_achieved(problem.init, model.goals, steps, model.landmarks)
    per_subgoal = {
        goal: compute_achieved(problem.init, list(subsets), steps, subsets)
        for goal, subsets in model.subgoal_landmarks.items()
    }
    assert model.score("completion-subgoal", achieved, per_subgoal) == model.score("completion", achieved)
    assert model.score("completion", achieved)["s1"] == Fraction(3, 4)


def test_unknown_heuristic_is_rejected(five_rooms_model):
    _, _, model = five_rooms_model
    with pytest.raises(ValueError):
        model.score("closest", {g: frozenset() for g in model.goals})


def test_unreachable_goal_is_dropped(house):
    world, problem = house
    goals = dict(world.hypotheses, ghost=frozenset({is_at("nowhere")}))
    model = build_landmark_model(problem, goals)
    assert model.goals == ("ba3",)
    assert "ghost" in model.dropped


def test_empty_or_fully_dropped_goal_sets_are_errors(house):
    _, problem = house
    with pytest.raises(EmptyGoalSetError):
        build_landmark_model(problem, {})
    with pytest.raises(EmptyGoalSetError):
        build_landmark_model(problem, {"ghost": frozenset({is_at("nowhere")})})
