import random
from fractions import Fraction
from textwrap import dedent

import pytest

from src.errors import (
    GroundingLimitError,
    InapplicableActionError,
    PddlSyntaxError,
    UnknownActionError,
    UnsupportedConstructError,
)
from src.gridworld import generate_gridworld, is_at
from src.grounder import dump_problem, ground, load_dump
from src.parser import PddlParser, parse_domain_and_problem, read_sexprs
from src.planning import (
    And,
    GroundAction,
    GroundFact,
    Not,
    Or,
    Plan,
    apply,
    flatten_precondition,
    resolve_action,
    validate_plan,
)
from src.synthetic import corridor_spec

KITCHEN_DOMAIN = dedent("""\
    (define (domain kitchen)
      (:requirements :strips :typing :negative-preconditions :disjunctive-preconditions
                     :existential-preconditions :action-costs)
      (:types item place)
      (:predicates (at ?i - item ?p - place) (clean ?i - item) (holding ?i - item) (hand-free))
      (:functions (total-cost))
      (:action take
        :parameters (?i - item ?p - place)
        :precondition (and (at ?i ?p) (hand-free) (or (clean ?i) (not (holding ?i))))
        :effect (and (holding ?i) (not (hand-free)) (not (at ?i ?p)) (increase (total-cost) 2)))
      (:action wash
        :parameters (?i - item)
        :precondition (exists (?p - place) (at ?i ?p))
        :effect (clean ?i)))
    """)

KITCHEN_PROBLEM = dedent("""\
    (define (problem breakfast)
      (:domain kitchen)
      (:objects cup - item table shelf - place)
      (:init (at cup table) (hand-free) (= (total-cost) 0))
      (:goal (holding cup))
      (:metric minimize (total-cost)))
    """)

MISSING_EFFECT = dedent("""\
    (define (domain broken)
      (:requirements :strips)
      (:predicates (is-at ?x))
      (:action move
        :parameters (?from ?to)
        :precondition (is-at ?from)))
    """)


def test_parse_corridor_domain(corridor_texts):
    model = parse_domain_and_problem(*corridor_texts(4))
    assert list(model.objects) == ["c0", "c1", "c2", "c3"]
    assert set(model.domain.predicates) - {"="} == {"is-at"}
    assert [a.name for a in model.domain.actions] == ["move"]


def test_parse_is_deterministic(corridor_texts):
    assert parse_domain_and_problem(*corridor_texts(4)) == parse_domain_and_problem(*corridor_texts(4))


def test_missing_effect_reports_the_action_line():
    with pytest.raises(PddlSyntaxError) as e:
        PddlParser().parse_domain(MISSING_EFFECT)
    assert e.value.line == 4
    assert "line 4" in str(e.value)


def test_unbalanced_parenthesis_is_a_syntax_error():
    with pytest.raises(PddlSyntaxError):
        PddlParser().parse_domain("(define (domain d)\n  (:predicates (p))\n")


def test_unclosed_list_reports_where_it_was_opened():
    with pytest.raises(PddlSyntaxError, match="never closed") as e:
        read_sexprs("; header\n  (define (domain d)\n  (:predicates (p))\n")
    assert (e.value.line, e.value.column) == (2, 3)


def test_stray_closing_parenthesis_is_located():
    with pytest.raises(PddlSyntaxError, match="unexpected") as e:
        read_sexprs("(a b)\n(c))")
    assert (e.value.line, e.value.column) == (2, 4)


def test_reader_lowercases_and_skips_comments():
    (expr,) = read_sexprs("(Is-At ; trailing remark\n\tC0)")
    assert [token.value for token in expr] == ["is-at", "c0"]
    assert (expr.line, expr.column) == (1, 1)
    assert (expr[1].line, expr[1].column) == (2, 2)


def test_empty_domain_section_in_problem_is_a_syntax_error(corridor_texts):
    domain, _ = corridor_texts(3)
    with pytest.raises(PddlSyntaxError, match="domain name") as e:
        parse_domain_and_problem(domain, "(define (problem q)\n  (:domain))")
    assert e.value.line == 2


def test_empty_predicate_declaration_is_a_syntax_error():
    text = MISSING_EFFECT.replace("(:predicates (is-at ?x))", "(:predicates ())")
    with pytest.raises(PddlSyntaxError, match="empty predicate") as e:
        PddlParser().parse_domain(text)
    assert e.value.line == 3


def test_goal_section_needs_one_condition(corridor_texts):
    domain, problem = corridor_texts(3)
    with pytest.raises(PddlSyntaxError, match="goal condition"):
        parse_domain_and_problem(domain, problem.replace("(:goal (is-at c2))", "(:goal)"))


def test_conditional_effects_requirement_is_rejected():
    text = MISSING_EFFECT.replace(":strips", ":strips :conditional-effects")
    with pytest.raises(UnsupportedConstructError, match="conditional-effects"):
        PddlParser().parse_domain(text)


def test_when_effect_is_rejected():
    text = MISSING_EFFECT.replace(
        ":precondition (is-at ?from)))",
        ":precondition (is-at ?from)\n    :effect (when (is-at ?from) (is-at ?to))))",
    )
    with pytest.raises(UnsupportedConstructError, match="when"):
        PddlParser().parse_domain(text)


def test_durative_actions_are_rejected():
    text = "(define (domain d) (:predicates (p)) (:durative-action go :parameters () :duration (= ?duration 1)))"
    with pytest.raises(UnsupportedConstructError):
        PddlParser().parse_domain(text)


def test_corridor_grounds_to_two_moves_per_adjacent_pair(grid_problem):
    for n in (2, 4, 7):
        _, problem = grid_problem(corridor_spec(n, 0, [n - 1]))
        assert len(problem.actions) == 2 * (n - 1)
        # adjacency is static and folded away
        assert all(action.pre == {is_at(action.args[0])} for action in problem.actions)


def test_empty_type_grounds_no_instances():
    domain = dedent("""\
        (define (domain carry)
          (:requirements :strips :typing)
          (:types cell item)
          (:predicates (is-at ?c - cell) (holding ?i - item))
          (:action pick
            :parameters (?i - item ?c - cell)
            :precondition (is-at ?c)
            :effect (holding ?i))
          (:action move
            :parameters (?from ?to - cell)
            :precondition (is-at ?from)
            :effect (and (is-at ?to) (not (is-at ?from)))))
        """)
    problem_text = "(define (problem p) (:domain carry) (:objects c0 c1 - cell) (:init (is-at c0)))"
    problem = ground(parse_domain_and_problem(domain, problem_text))
    assert {a.name for a in problem.actions} == {"move"}


def test_grounding_cap_aborts():
    world = generate_gridworld(corridor_spec(100, 0, [99]))
    model = parse_domain_and_problem(world.domain_text, world.problem_text)
    with pytest.raises(GroundingLimitError):
        ground(model, cap=10)


def test_kitchen_preconditions_costs_and_numeric_parts():
    problem = ground(parse_domain_and_problem(KITCHEN_DOMAIN, KITCHEN_PROBLEM))
    take = resolve_action(problem, "(take cup table)")
    wash = resolve_action(problem, "(wash cup)")
    assert take.cost == 2
    assert {str(f) for f in take.pre} == {"(at cup table)", "(hand-free)", "(clean cup)"}
    assert {str(f) for f in wash.pre} == {"(at cup shelf)", "(at cup table)"}
    # never relaxed-reachable: the cup is not on the shelf
    assert "(take cup shelf)" not in problem.action_index
    assert {str(f) for f in problem.goal} == {"(holding cup)"}


def test_apply_examples():
    move = GroundAction("move", ("c0", "c1"), {is_at("c0")}, {is_at("c1")}, {is_at("c0")})
    assert apply(frozenset({is_at("c0")}), move) == {is_at("c1")}

    idle = GroundAction("wait", (), (), (), ())
    state = frozenset({is_at("c0")})
    assert apply(state, idle) == state

    with pytest.raises(InapplicableActionError) as e:
        apply(frozenset(), move)
    assert e.value.missing == (is_at("c0"),)


def test_add_wins_over_delete():
    action = GroundAction("toggle", (), (), {is_at("c0")}, {is_at("c0"), is_at("c1")})
    assert action.add == {is_at("c0")}
    assert action.delete == {is_at("c1")}
    assert apply(frozenset({is_at("c1")}), action) == {is_at("c0")}


def test_negative_cost_is_rejected():
    with pytest.raises(ValueError):
        GroundAction("bad", (), (), (), (), cost=-1)


def test_validate_plan(grid_problem):
    _, problem = grid_problem(corridor_spec(4, 0, [3]))
    steps = [resolve_action(problem, f"(move c0{i} c0{i + 1})") for i in range(3)]
    result = validate_plan(problem, Plan(tuple(steps)))
    assert result.valid
    assert result.cost == 3
    assert result.end_state >= {is_at("c03")}

    repeated = Plan((steps[0], steps[0]))
    result = validate_plan(problem, repeated)
    assert not result.valid
    assert result.failed_index == 1

    short = validate_plan(problem, Plan(tuple(steps[:2])))
    assert not short.valid
    assert short.failed_index == 2


def test_empty_plan_is_valid_when_goal_holds_initially(grid_problem):
    _, problem = grid_problem(corridor_spec(3, 0, [1]))
    problem = problem.with_goal({is_at("c00")})
    result = validate_plan(problem, Plan())
    assert result.valid
    assert result.cost == Fraction(0)


def test_resolve_action_normalises_text(grid_problem):
    _, problem = grid_problem(corridor_spec(3, 0, [2]))
    assert resolve_action(problem, "( MOVE c00   c01 )").text == "(move c00 c01)"
    with pytest.raises(UnknownActionError, match="obs.txt:7"):
        resolve_action(problem, "(move c00 c02)", "obs.txt", 7)


def test_dump_round_trip(house):
    _, problem = house
    text = dump_problem(problem)
    reloaded = load_dump(text)
    assert dump_problem(reloaded) == text
    assert reloaded.init == problem.init
    assert reloaded.facts == problem.facts
    assert [a.precondition for a in reloaded.actions] == [a.precondition for a in problem.actions]


def test_dump_round_trip_keeps_costs_and_disjunctions():
    problem = ground(parse_domain_and_problem(KITCHEN_DOMAIN, KITCHEN_PROBLEM))
    reloaded = load_dump(dump_problem(problem))
    assert resolve_action(reloaded, "(take cup table)").cost == 2
    assert resolve_action(reloaded, "(wash cup)").precondition == resolve_action(problem, "(wash cup)").precondition


def random_walk(problem, rng, length):
    state, steps = problem.init, []
    for _ in range(length):
        applicable = [a for a in problem.actions if a.is_applicable(state)]
        if not applicable:
            break
        steps.append(rng.choice(applicable))
        state = apply(state, steps[-1])
    return steps, state


def test_delete_free_actions_only_grow_the_state(random_strips):
    rng = random.Random(3)
    for _ in range(100):
        problem = random_strips(rng)
        relaxed = [GroundAction(a.name, a.args, a.precondition, a.add, ()) for a in problem.actions]
        state = problem.init
        for _ in range(6):
            larger = state | set(rng.sample(sorted(problem.facts), 2))
            applicable = [a for a in relaxed if a.is_applicable(state)]
            if not applicable:
                break
            action = rng.choice(applicable)
            after = apply(state, action)
            assert state <= after
            assert after <= apply(larger, action)
            state = after


def test_valid_plans_have_applicable_prefixes(random_strips):
    rng = random.Random(5)
    checked = 0
    for _ in range(150):
        problem = random_strips(rng)
        steps, end = random_walk(problem, rng, rng.randint(0, 6))
        if rng.random() < 0.5 and problem.actions:
            steps.insert(rng.randrange(len(steps) + 1), rng.choice(problem.actions))
        goal = set(rng.sample(sorted(end), 1)) if end else set()
        if not validate_plan(problem.with_goal(goal), Plan(tuple(steps))).valid:
            continue
        checked += 1
        no_goal = problem.with_goal(())
        for i in range(len(steps) + 1):
            assert validate_plan(no_goal, Plan(tuple(steps[:i]))).valid
    assert checked > 40


def test_flatten_precondition_keeps_positive_atoms_only():
    p, q, r, s = (GroundFact(n) for n in "pqrs")
    tree = And((p, Or((q, Not(r))), Not(And((s,)))))
    assert flatten_precondition(tree) == {p, q}
    assert flatten_precondition(Or(())) == frozenset()
    assert flatten_precondition(p) == {p}
