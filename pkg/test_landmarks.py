import random

import pytest

from src.errors import SubgoalExtractionError, UnsolvableGoalError
from src.gridworld import generate_gridworld, is_at
from src.grounder import ground
from src.landmarks import (
    dump_landmarks,
    extract_landmarks,
    extract_per_subgoal,
    generate_candidates,
    verify_candidate,
)
from src.models import GridSpec
from src.oracle import SearchBudgetExceeded, brute_force_landmarks, enumerate_acyclic_plans, is_solvable
from src.parser import parse_domain_and_problem
from src.planning import GroundAction, GroundFact, PlanningProblem
from src.recognizer import build_landmark_model
from src.relaxed_graph import build_rpg, relaxed_solvable
from src.synthetic import corridor_spec, five_rooms, random_grid_spec

DIAMOND = GridSpec(layout="c00 c01\nc10 c11", init="c00", goals=["c11"])


def fork_problem():
    """s -> a1 -> a2 and s -> b1 -> b2, delete-free."""
    s, a1, a2, b1, b2 = (GroundFact(n) for n in ("s", "a1", "a2", "b1", "b2"))
    actions = [
        GroundAction("x1", (), {s}, {a1}),
        GroundAction("x2", (), {a1}, {a2}),
        GroundAction("y1", (), {s}, {b1}),
        GroundAction("y2", (), {b1}, {b2}),
    ]
    return PlanningProblem.from_actions({s}, actions)


def test_house_candidates(house):
    _, problem = house
    goal = {is_at("ba3")}
    candidates = generate_candidates(problem, goal, build_rpg(problem))
    assert candidates == {is_at("ba3"), is_at("ba1"), is_at("h3"), is_at("k2")}


def test_house_landmarks(house):
    world, problem = house
    landmarks = extract_landmarks(problem, {is_at("ba3")})
    assert landmarks.non_trivial == {is_at("h3"), is_at("ba1")}
    assert landmarks.trivial_init == {is_at("k2")}
    assert landmarks.trivial_goal == {is_at("ba3")}
    assert landmarks.all == world.oracle["ba3"]
    assert landmarks.observable == {is_at("h3"), is_at("ba1"), is_at("ba3")}


def test_house_dump(house):
    world, problem = house
    model = build_landmark_model(problem, world.hypotheses)
    assert dump_landmarks(model.landmarks).splitlines() == [
        "ba3 NONTRIVIAL (is-at ba1)",
        "ba3 NONTRIVIAL (is-at h3)",
        "ba3 TRIVIAL_GOAL (is-at ba3)",
        "ba3 TRIVIAL_INIT (is-at k2)",
    ]


def test_goal_in_initial_state_is_its_own_landmark(house):
    _, problem = house
    landmarks = extract_landmarks(problem, {is_at("k2")})
    assert landmarks.all == {is_at("k2")}
    assert landmarks.non_trivial == frozenset()
    assert landmarks.observable == frozenset()


def test_disjoint_achievers_yield_only_the_goal():
    s, p, q, g = (GroundFact(n) for n in ("s", "p", "q", "g"))
    problem = PlanningProblem.from_actions({s}, [
        GroundAction("to-p", (), {s}, {p}),
        GroundAction("to-q", (), {s}, {q}),
        GroundAction("via-p", (), {p}, {g}),
        GroundAction("via-q", (), {q}, {g}),
    ])
    assert generate_candidates(problem, {g}, build_rpg(problem)) == {g}
    assert extract_landmarks(problem, {g}).non_trivial == frozenset()


def test_diamond_has_no_interior_landmark(grid_problem):
    world, problem = grid_problem(DIAMOND)
    goal = {is_at("c11")}
    assert not verify_candidate(problem, goal, is_at("c01"))
    assert not verify_candidate(problem, goal, is_at("c10"))
    assert extract_landmarks(problem, goal).non_trivial == frozenset()
    assert world.oracle["c11"] == {is_at("c00"), is_at("c11")}


def test_corridor_interior_cells_are_landmarks(grid_problem):
    world, problem = grid_problem(corridor_spec(4, 0, [3]))
    landmarks = extract_landmarks(problem, {is_at("c03")})
    assert landmarks.non_trivial == {is_at("c01"), is_at("c02")}
    assert landmarks.all == world.oracle["c03"]


def test_unreachable_goal_raises(house):
    _, problem = house
    with pytest.raises(UnsolvableGoalError):
        extract_landmarks(problem, {is_at("nowhere")})


def test_verification_accepts_initial_and_goal_facts(house):
    _, problem = house
    goal = {is_at("ba3")}
    assert verify_candidate(problem, goal, is_at("k2"))
    assert verify_candidate(problem, goal, is_at("ba3"))
    assert verify_candidate(problem, goal, is_at("h3"))
    assert not verify_candidate(problem, goal, is_at("k1"))


def test_fork_per_subgoal_sets():
    problem = fork_problem()
    a1, a2, b1, b2 = (GroundFact(n) for n in ("a1", "a2", "b1", "b2"))
    per_subgoal = extract_per_subgoal(problem, {a2, b2})
    assert set(per_subgoal) == {a2, b2}
    assert per_subgoal[a2].non_trivial == {a1}
    assert per_subgoal[b2].non_trivial == {b1}
    assert extract_landmarks(problem, {a2, b2}).non_trivial == {a1, b1}


def test_per_subgoal_failures_are_collected():
    problem = fork_problem()
    missing = GroundFact("z")
    with pytest.raises(SubgoalExtractionError) as e:
        extract_per_subgoal(problem, {GroundFact("a2"), missing})
    assert set(e.value.failures) == {missing}


def test_parallel_verification_gives_the_same_sets():
    world = five_rooms(["p1", "q1", "r1", "s1", "t1"])
    problem = ground(parse_domain_and_problem(world.domain_text, world.problem_text))
    for goal in world.hypotheses.values():
        assert extract_landmarks(problem, goal, workers=1) == extract_landmarks(problem, goal, workers=4)


def test_random_grids_agree_with_the_oracles():
    rng = random.Random(2024)
    checked = 0
    while checked < 100:
        spec = random_grid_spec(rng)
        if spec is None:
            continue
        world = generate_gridworld(spec)
        problem = ground(parse_domain_and_problem(world.domain_text, world.problem_text))
        cell = world.spec.goals[0]
        goal = world.hypotheses[cell]
        landmarks = extract_landmarks(problem, goal)
        assert landmarks.all <= world.oracle[cell]
        assert landmarks.all <= brute_force_landmarks(problem, goal)
        checked += 1


def test_random_strips_landmarks_are_sound(random_strips):
    rng = random.Random(5)
    checked = 0
    for _ in range(300):
        problem = random_strips(rng, max_facts=6)
        goal = set(rng.sample(sorted(problem.facts), 1))
        if not relaxed_solvable(build_rpg(problem), goal) or not is_solvable(problem, goal):
            continue
        try:
            reference = brute_force_landmarks(problem, goal, max_nodes=50_000)
            plans = list(enumerate_acyclic_plans(problem, goal, max_plans=20_000))
        except SearchBudgetExceeded:
            continue
        landmarks = extract_landmarks(problem, goal).all
        visited = [frozenset().union(*states) for _, states in plans]
        for facts in visited:
            assert landmarks <= facts
        assert frozenset.intersection(*visited) == reference
        checked += 1
    assert checked > 0
