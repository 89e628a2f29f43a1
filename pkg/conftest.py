from textwrap import dedent

import pytest

import src.logger as Logger
from src.gridworld import HOUSE, generate_gridworld
from src.grounder import ground
from src.parser import parse_domain_and_problem
from src.planning import GroundAction, GroundFact, PlanningProblem

CORRIDOR_DOMAIN = dedent("""\
    (define (domain corridor)
      (:requirements :strips :typing)
      (:types cell)
      (:predicates (is-at ?x - cell))
      (:action move
        :parameters (?from ?to - cell)
        :precondition (is-at ?from)
        :effect (and (is-at ?to) (not (is-at ?from)))))
    """)


def corridor_problem_text(n, goal=None):
    cells = " ".join(f"c{i}" for i in range(n))
    goal = n - 1 if goal is None else goal
    return dedent(f"""\
        (define (problem corridor-{n})
          (:domain corridor)
          (:objects {cells} - cell)
          (:init (is-at c0))
          (:goal (is-at c{goal})))
        """)


@pytest.fixture(autouse=True)
def quiet_logger():
    previous = Logger.verbosity
    Logger.verbosity = Logger.ERROR
    yield
    Logger.verbosity = previous
    Logger.clear()


@pytest.fixture
def corridor_texts():
    def build(n, goal=None):
        return CORRIDOR_DOMAIN, corridor_problem_text(n, goal)
    return build


@pytest.fixture
def grid_problem():
    """Grounds a GridSpec; returns (world, problem)."""
    def build(spec, name="grid"):
        world = generate_gridworld(spec, name)
        return world, ground(parse_domain_and_problem(world.domain_text, world.problem_text))
    return build


@pytest.fixture
def house(grid_problem):
    return grid_problem(HOUSE, "house")


def make_random_strips(rng, max_facts=8):
    facts = [GroundFact("p", (f"o{i}",)) for i in range(rng.randint(3, max_facts))]
    init = rng.sample(facts, rng.randint(1, 2))
    actions = []
    for i in range(rng.randint(2, 8)):
        pre = rng.sample(facts, rng.randint(0, 2))
        add = rng.sample(facts, rng.randint(1, 2))
        delete = rng.sample(facts, rng.randint(0, 2))
        actions.append(GroundAction("a", (f"x{i}",), pre, add, delete))
    return PlanningProblem.from_actions(init, actions)


@pytest.fixture
def random_strips():
    return make_random_strips
