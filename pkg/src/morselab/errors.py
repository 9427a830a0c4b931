"""Exception types shared across the toolkit."""


class MorseLabError(Exception):
    pass


class UnsupportedKind(MorseLabError, ValueError):
    pass


class MarginError(MorseLabError, ValueError):
    """A query or search region does not fit inside the ball's valid core."""


class BallBudgetError(MorseLabError):
    def __init__(self, budget, attempted, radius):
        self.budget = budget
        self.attempted = attempted
        self.radius = radius
        super().__init__(
            f"ball of radius {radius} exceeds vertex budget {budget} "
            f"(reached {attempted} vertices before stopping)"
        )


class PathError(MorseLabError, ValueError):
    pass


class PreconditionError(MorseLabError, ValueError):
    """Hypotheses of a checked statement do not hold for the given input."""


class ConfigError(MorseLabError, ValueError):
    pass
