"""Exception types shared across the package."""


class ScenarioError(ValueError):
    """A scenario file or Scenario object violates the schema or an invariant."""


class SingularMatrixError(ValueError):
    """A reduction step met a numerically singular matrix.

    `what` names the offending matrix, `cond` carries the condition-number
    estimate that tripped the guard.
    """

    def __init__(self, what: str, cond: float):
        super().__init__(
            f"{what} is numerically singular (condition estimate {cond:.3e})"
        )
        self.what = what
        self.cond = cond


class DivergenceError(RuntimeError):
    """The integrated state left the trust region (non-finite or runaway speed).

    Carries the divergence time and the trajectory sampled up to that point so
    callers can flush partial results.
    """

    def __init__(self, time: float, trajectory=None, reason: str = "non-finite state"):
        super().__init__(f"simulation diverged at t = {time:.6f} s ({reason})")
        self.time = time
        self.trajectory = trajectory
        self.reason = reason
