"""
Reader for the STRIPS-oriented PDDL subset the toolkit accepts: typing,
negative/disjunctive/quantified preconditions, costs via total-cost and
ignored numeric fluents. Produces a lifted model; see src/grounder.py.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from pyparsing import Forward, ParseBaseException, Regex, StringEnd, Suppress, ZeroOrMore, col, lineno, rest_of_line

from src.errors import PddlSyntaxError, UnsupportedConstructError
from src.planning import GroundFact

UNSUPPORTED_REQUIREMENTS = {
    ":conditional-effects",
    ":durative-actions",
    ":derived-predicates",
    ":timed-initial-literals",
    ":preferences",
    ":constraints",
}

NUMERIC_COMPARISONS = {"<", ">", "<=", ">="}
NUMERIC_EFFECTS = {"increase", "decrease", "assign", "scale-up", "scale-down"}


@dataclass(frozen=True)
class Token:
    value: str
    line: int
    column: int


class SList(list):
    """A parenthesised expression; remembers where it was opened."""

    def __init__(self, items=(), line=0, column=0):
        super().__init__(items)
        self.line = line
        self.column = column


Expr = Union[Token, SList]


def _position(expr: Expr) -> tuple[int, int]:
    return expr.line, expr.column


def _symbol(text, loc, tokens):
    return Token(tokens[0].lower(), lineno(loc, text), col(loc, text))


def _group(text, loc, tokens):
    return [SList(tokens, lineno(loc, text), col(loc, text))]


_SYMBOL = Regex(r"[^\s();]+").set_parse_action(_symbol)
_EXPR = Forward()
_LIST = (Suppress("(") + ZeroOrMore(_EXPR) + Suppress(")")).set_parse_action(_group)
_EXPR <<= _SYMBOL | _LIST
_DOCUMENT = ZeroOrMore(_EXPR) + StringEnd()
_DOCUMENT.ignore(";" + rest_of_line)
_DOCUMENT.parse_with_tabs()


def read_sexprs(text: str) -> list[Expr]:
    """Reads text into nested SLists. Identifiers are lower-cased."""
    try:
        return list(_DOCUMENT.parse_string(text))
    except ParseBaseException as e:
        found = text[e.loc] if e.loc < len(text) else ""
        if found == ")":
            message = "unexpected ')'"
        elif found == "(":
            message = "unbalanced '(' never closed"
        else:
            message = e.msg
        raise PddlSyntaxError(message, e.lineno, e.col) from None


@dataclass(frozen=True)
class TypedName:
    name: str
    type: str = "object"


@dataclass(frozen=True)
class Atom:
    predicate: str
    terms: tuple[str, ...]


@dataclass(frozen=True)
class LNot:
    body: "LiftedCondition"


@dataclass(frozen=True)
class LAnd:
    parts: tuple["LiftedCondition", ...]


@dataclass(frozen=True)
class LOr:
    parts: tuple["LiftedCondition", ...]


@dataclass(frozen=True)
class Quantified:
    kind: str
    params: tuple[TypedName, ...]
    body: "LiftedCondition"


@dataclass(frozen=True)
class Ignored:
    """A numeric condition; it never constrains the landmark logic."""
    text: str


LiftedCondition = Union[Atom, LNot, LAnd, LOr, Quantified, Ignored]


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: tuple[TypedName, ...]
    precondition: LiftedCondition
    add_effects: tuple[Atom, ...]
    del_effects: tuple[Atom, ...]
    cost: Fraction = Fraction(1)


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple[str, ...]
    types: dict = field(default_factory=dict)
    constants: tuple[TypedName, ...] = ()
    predicates: dict = field(default_factory=dict)
    actions: tuple[ActionSchema, ...] = ()

    def is_subtype(self, type_name: str, ancestor: str) -> bool:
        seen = set()
        while type_name not in seen:
            if type_name == ancestor:
                return True
            seen.add(type_name)
            type_name = self.types.get(type_name, "object")
        return ancestor == "object"


@dataclass(frozen=True)
class ProblemDescription:
    name: str
    domain_name: str
    objects: tuple[TypedName, ...]
    init: frozenset
    goal: Optional[LiftedCondition]


@dataclass(frozen=True)
class LiftedModel:
    domain: Domain
    problem: ProblemDescription

    @property
    def objects(self) -> dict[str, str]:
        """Object table (constants and problem objects), name -> type."""
        table = {c.name: c.type for c in self.domain.constants}
        table.update({o.name: o.type for o in self.problem.objects})
        return dict(sorted(table.items()))


class PddlParser:
    """Recursive-descent builder over the expressions produced by read_sexprs."""

    def __init__(self):
        self.predicates = {}

    # -- helpers -------------------------------------------------------------

    def _expect_list(self, expr, what):
        if not isinstance(expr, SList):
            raise PddlSyntaxError(f"expected {what}, got '{expr.value}'", *_position(expr))
        return expr

    def _expect_token(self, expr, what):
        if not isinstance(expr, Token):
            raise PddlSyntaxError(f"expected {what}, got a parenthesised expression", *_position(expr))
        return expr

    def _argument(self, section, what):
        if len(section) != 2:
            raise PddlSyntaxError(f"{section[0].value} takes exactly one {what}", *_position(section))
        return section[1]

    def _head(self, expr):
        if isinstance(expr, SList) and expr and isinstance(expr[0], Token):
            return expr[0].value
        return None

    def _define(self, text, kind):
        exprs = read_sexprs(text)
        if len(exprs) != 1:
            where = exprs[1] if len(exprs) > 1 else Token("", 1, 1)
            raise PddlSyntaxError(f"expected exactly one (define ...) form", *_position(where))
        root = self._expect_list(exprs[0], "(define ...)")
        if self._head(root) != "define" or len(root) < 2:
            raise PddlSyntaxError("expected (define ...)", *_position(root))
        header = self._expect_list(root[1], f"({kind} <name>)")
        if self._head(header) != kind or len(header) != 2:
            raise PddlSyntaxError(f"expected ({kind} <name>)", *_position(header))
        return self._expect_token(header[1], "name").value, root[2:]

    def _typed_list(self, items):
        result, pending = [], []
        i = 0
        while i < len(items):
            item = self._expect_token(items[i], "name")
            if item.value == "-":
                if i + 1 >= len(items):
                    raise PddlSyntaxError("type expected after '-'", *_position(item))
                type_expr = items[i + 1]
                if isinstance(type_expr, SList):
                    raise UnsupportedConstructError("either types", type_expr.line)
                result.extend(TypedName(name, type_expr.value) for name in pending)
                pending = []
                i += 2
                continue
            pending.append(item.value)
            i += 1
        result.extend(TypedName(name) for name in pending)
        return tuple(result)

    # -- domain --------------------------------------------------------------

    def parse_domain(self, text: str) -> Domain:
        name, sections = self._define(text, "domain")
        requirements, types, constants, actions = (), {}, (), []
        self.predicates = {"=": 2}
        for section in sections:
            section = self._expect_list(section, "a domain section")
            head = self._head(section)
            if head == ":requirements":
                requirements = tuple(self._expect_token(r, "requirement").value for r in section[1:])
                for requirement in requirements:
                    if requirement in UNSUPPORTED_REQUIREMENTS:
                        raise UnsupportedConstructError(requirement, section.line)
            elif head == ":types":
                types = {t.name: t.type for t in self._typed_list(section[1:])}
            elif head == ":constants":
                constants = self._typed_list(section[1:])
            elif head == ":predicates":
                for predicate in section[1:]:
                    predicate = self._expect_list(predicate, "predicate declaration")
                    if not predicate:
                        raise PddlSyntaxError("empty predicate declaration", *_position(predicate))
                    pname = self._expect_token(predicate[0], "predicate name").value
                    self.predicates[pname] = len(self._typed_list(predicate[1:]))
            elif head == ":functions":
                continue
            elif head == ":action":
                actions.append(self._parse_action(section))
            elif head in (":durative-action", ":derived", ":process", ":event"):
                raise UnsupportedConstructError(head, section.line)
            else:
                raise PddlSyntaxError(f"unknown domain section '{head}'", *_position(section))
        return Domain(name, requirements, types, constants, dict(self.predicates), tuple(actions))

    def _parse_action(self, section):
        if len(section) < 2:
            raise PddlSyntaxError("action name expected", *_position(section))
        name = self._expect_token(section[1], "action name").value
        fields = {}
        i = 2
        while i < len(section):
            key = self._expect_token(section[i], "action keyword")
            if i + 1 >= len(section):
                raise PddlSyntaxError(f"value expected after {key.value}", *_position(key))
            fields[key.value] = section[i + 1]
            i += 2
        unknown = set(fields) - {":parameters", ":precondition", ":effect"}
        if unknown:
            raise PddlSyntaxError(f"unknown action keyword {sorted(unknown)[0]} in {name}", *_position(section))
        if ":effect" not in fields:
            raise PddlSyntaxError(f"action {name} is missing its :effect block", *_position(section))
        parameters = ()
        if ":parameters" in fields:
            parameters = self._typed_list(self._expect_list(fields[":parameters"], "parameter list"))
        variables = {p.name for p in parameters}
        precondition = LAnd(())
        if ":precondition" in fields:
            precondition = self._condition(fields[":precondition"], variables)
        adds, dels, cost = [], [], None
        cost = self._effect(fields[":effect"], variables, adds, dels)
        return ActionSchema(name, parameters, precondition, tuple(adds), tuple(dels),
                            Fraction(1) if cost is None else cost)

    def _atom(self, expr, variables, objects=None):
        if not expr or not isinstance(expr[0], Token):
            raise PddlSyntaxError("expected an atom", *_position(expr))
        predicate = expr[0].value
        terms = tuple(self._expect_token(t, "term").value for t in expr[1:])
        if predicate not in self.predicates:
            raise PddlSyntaxError(f"undeclared predicate '{predicate}'", *_position(expr))
        if self.predicates[predicate] != len(terms):
            raise PddlSyntaxError(f"predicate '{predicate}' expects {self.predicates[predicate]} arguments",
                                  *_position(expr))
        for term in terms:
            if term.startswith("?") and term not in variables:
                raise PddlSyntaxError(f"unbound variable {term}", *_position(expr))
            if objects is not None and not term.startswith("?") and term not in objects:
                raise PddlSyntaxError(f"unknown object '{term}'", *_position(expr))
        return Atom(predicate, terms)

    def _condition(self, expr, variables, objects=None) -> LiftedCondition:
        expr = self._expect_list(expr, "a condition")
        if not expr:
            return LAnd(())
        head = self._head(expr)
        if head is None:
            raise PddlSyntaxError("condition must start with a keyword or predicate", *_position(expr))
        if head == "and":
            return LAnd(tuple(self._condition(p, variables, objects) for p in expr[1:]))
        if head == "or":
            return LOr(tuple(self._condition(p, variables, objects) for p in expr[1:]))
        if head == "not":
            if len(expr) != 2:
                raise PddlSyntaxError("'not' takes exactly one argument", *_position(expr))
            return LNot(self._condition(expr[1], variables, objects))
        if head in ("exists", "forall"):
            if len(expr) != 3:
                raise PddlSyntaxError(f"'{head}' takes a parameter list and a body", *_position(expr))
            params = self._typed_list(self._expect_list(expr[1], "parameter list"))
            inner = variables | {p.name for p in params}
            return Quantified(head, params, self._condition(expr[2], inner, objects))
        if head == "imply":
            raise UnsupportedConstructError("imply", expr.line)
        if head in NUMERIC_COMPARISONS or (head == "=" and any(isinstance(t, SList) for t in expr[1:])):
            return Ignored(head)
        return self._atom(expr, variables, objects)

    def _effect(self, expr, variables, adds, dels):
        expr = self._expect_list(expr, "an effect")
        cost = None
        if not expr:
            return cost
        head = self._head(expr)
        if head == "and":
            for part in expr[1:]:
                part_cost = self._effect(part, variables, adds, dels)
                if part_cost is not None:
                    cost = part_cost
            return cost
        if head == "not":
            if len(expr) != 2:
                raise PddlSyntaxError("'not' takes exactly one argument", *_position(expr))
            dels.append(self._atom(self._expect_list(expr[1], "an atom"), variables))
            return cost
        if head == "when":
            raise UnsupportedConstructError("when (conditional effect)", expr.line)
        if head == "forall":
            raise UnsupportedConstructError("forall effect", expr.line)
        if head in NUMERIC_EFFECTS:
            target = expr[1] if len(expr) > 1 else None
            if head == "increase" and self._head(target) == "total-cost" and len(expr) == 3 \
                    and isinstance(expr[2], Token):
                try:
                    cost = Fraction(expr[2].value)
                except ValueError:
                    cost = None
            return cost
        adds.append(self._atom(expr, variables))
        return cost

    # -- problem -------------------------------------------------------------

    def parse_problem(self, text: str, domain: Domain) -> ProblemDescription:
        name, sections = self._define(text, "problem")
        self.predicates = dict(domain.predicates)
        domain_name, objects, init, goal = domain.name, (), set(), None
        for section in sections:
            section = self._expect_list(section, "a problem section")
            head = self._head(section)
            if head == ":domain":
                domain_name = self._expect_token(self._argument(section, "domain name"), "domain name").value
                if domain_name != domain.name:
                    raise PddlSyntaxError(f"problem is for domain '{domain_name}', not '{domain.name}'",
                                          *_position(section))
            elif head == ":objects":
                objects = self._typed_list(section[1:])
            elif head == ":init":
                known = {o.name for o in objects} | {c.name for c in domain.constants}
                for fact in section[1:]:
                    fact = self._expect_list(fact, "an initial fact")
                    if self._head(fact) == "=" and any(isinstance(t, SList) for t in fact[1:]):
                        continue
                    atom = self._atom(fact, set(), known)
                    init.add(GroundFact(atom.predicate, atom.terms))
            elif head == ":goal":
                known = {o.name for o in objects} | {c.name for c in domain.constants}
                goal = self._condition(self._argument(section, "goal condition"), set(), known)
            elif head == ":metric":
                continue
            else:
                raise PddlSyntaxError(f"unknown problem section '{head}'", *_position(section))
        return ProblemDescription(name, domain_name, objects, frozenset(init), goal)


def parse_domain_and_problem(domain_text: str, problem_text: str) -> LiftedModel:
    parser = PddlParser()
    domain = parser.parse_domain(domain_text)
    problem = parser.parse_problem(problem_text, domain)
    return LiftedModel(domain, problem)
