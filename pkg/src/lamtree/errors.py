class SolverError(Exception):
    """Base class for every error raised by the library."""


class ContractionCollapse(SolverError):
    """A crossing edge turned into a loop while building the contracted graph.

    No left-compatible edge set exists for such a triple.
    """


class DisconnectedGraph(SolverError):
    pass


class NumericalFailure(SolverError):
    pass


class NotInPolytope(SolverError):
    pass


class NoFeasibleRelaxation(SolverError):
    pass


class RoundingExhausted(SolverError):
    pass


class NoFeasibleSolution(SolverError):
    pass


class NotLaminar(SolverError):
    pass


class TooManyOddVertices(SolverError):
    pass


class NotConnectedJoin(SolverError):
    pass


class TooLarge(SolverError):
    pass


class SchemaError(SolverError):
    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class LaminarityError(SchemaError, NotLaminar):
    pass


class MetricError(SchemaError):
    def __init__(self, message, triple=None, location=None):
        self.triple = triple
        super().__init__(message, location)
