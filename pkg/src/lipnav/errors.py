"""Exception hierarchy shared by the planner modules."""


class LipNavError(Exception):
    """Base class for all errors raised by lipnav."""


class InvalidParameter(LipNavError, ValueError):
    pass


class DegenerateInput(LipNavError, ValueError):
    """Point set has fewer than three distinct points or is collinear."""


class QueryInsideObstacle(LipNavError):
    """A closest-point query was made from inside a polygon."""


class DegenerateNormal(LipNavError):
    """The outward normal is undefined (query coincides with a vertex)."""


class AtGoal(LipNavError):
    """Position and goal coincide, so no heading can be derived."""


class NoPathFound(LipNavError):
    pass


class GenerationFailed(LipNavError):
    pass


class SafetyFault(LipNavError):
    """The planning state lies inside a keep-out polygon."""


class SolverFault(LipNavError):
    """The hard constraints of a replan are infeasible."""


class ConfigError(LipNavError, ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
