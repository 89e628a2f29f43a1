class GoalRecognitionError(Exception):
    """Root of every error raised by the toolkit."""


class PddlSyntaxError(GoalRecognitionError):
    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class UnsupportedConstructError(GoalRecognitionError):
    def __init__(self, construct, line=None):
        self.construct = construct
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"unsupported PDDL construct: {construct}{where}")


class GroundingLimitError(GoalRecognitionError):
    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"grounding produced more than {cap} actions (reached {count})")


class InapplicableActionError(GoalRecognitionError):
    def __init__(self, action, missing):
        self.action = action
        self.missing = tuple(sorted(missing, key=str))
        facts = " ".join(str(f) for f in self.missing) or "<non-conjunctive condition>"
        super().__init__(f"{action} is not applicable, missing: {facts}")


class UnknownActionError(GoalRecognitionError):
    def __init__(self, text, source=None, line=None):
        self.text = text
        self.source = source
        self.line = line
        prefix = ""
        if source is not None:
            prefix = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(f"{prefix}no grounded action matches {text}")


class UnsolvableGoalError(GoalRecognitionError):
    def __init__(self, goal):
        self.goal = frozenset(goal)
        facts = " ".join(sorted(str(f) for f in self.goal))
        super().__init__(f"goal is not relaxed-solvable from the initial state: {facts}")


class SubgoalExtractionError(GoalRecognitionError):
    def __init__(self, failures):
        self.failures = dict(failures)
        names = ", ".join(sorted(str(f) for f in self.failures))
        super().__init__(f"landmark extraction failed for sub-goals: {names}")


class UndefinedLandmarkError(GoalRecognitionError):
    def __init__(self, fact):
        self.fact = fact
        super().__init__(f"{fact} is not a landmark of any goal")


class EmptyGoalSetError(GoalRecognitionError, ValueError):
    def __init__(self, message="the goal set is empty"):
        super().__init__(message)


class DatasetError(GoalRecognitionError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("dataset could not be loaded:\n" + "\n".join(self.errors))


class CvPlanError(GoalRecognitionError, ValueError):
    pass


class DisconnectedGridError(GoalRecognitionError):
    def __init__(self, unreachable):
        self.unreachable = tuple(sorted(unreachable))
        super().__init__(f"grid is not connected, unreachable cells: {' '.join(self.unreachable)}")


class ModelFormatError(GoalRecognitionError, ValueError):
    pass
