"""Exception hierarchy shared by solvers, evaluators and the CLI."""


class OffloadError(Exception):
    """Base class; ``code`` is a short machine-readable tag."""

    code = "error"


class GraphValidationError(OffloadError):
    code = "invalid-graph"

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class SchemaError(OffloadError):
    code = "schema"


class InfeasibleError(OffloadError):
    code = "infeasible-deadline"


class InfeasibleRegionError(OffloadError):
    code = "infeasible-region"


class ExceedsCapError(OffloadError):
    code = "exceeds-cap"


class UnsupportedStructureError(OffloadError):
    code = "unsupported-structure"


class NotATreeError(UnsupportedStructureError):
    code = "not-a-tree"


class LimitExceededError(OffloadError):
    code = "limit-exceeded"


class StalledScheduleError(OffloadError):
    code = "stalled-schedule"

    def __init__(self, message, stuck_nodes=()):
        self.stuck_nodes = tuple(stuck_nodes)
        super().__init__(message)


class PlanMismatchError(OffloadError):
    code = "plan-mismatch"
