"""Exception types raised across the package."""


class FrontlabError(Exception):
    """Base class for all package errors."""


class NotEvaluableError(FrontlabError, ValueError):
    """A distributional defect (Dirac) was asked for a pointwise value."""


class DomainError(FrontlabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class StiffnessError(FrontlabError, RuntimeError):
    """The adaptive step size fell below the underflow floor."""

    def __init__(self, t, h):
        super().__init__(f"stiff failure: step size {h:.3e} underflowed at t={t:.6g}")
        self.t = t
        self.h = h


class DivergenceError(FrontlabError, RuntimeError):
    """The state became non-finite during integration."""

    def __init__(self, t):
        super().__init__(f"divergence: non-finite state at t={t:.6g}")
        self.t = t


class FrontNotVisibleError(FrontlabError, ValueError):
    """No kink could be located in a field snapshot."""


class FrontNotContainedError(FrontlabError, ValueError):
    """The front touches the domain boundary or has the wrong orientation."""


class FitNotConvergedError(FrontlabError, RuntimeError):
    """The kink fit hit its iteration cap. ``best`` holds the best-so-far fit."""

    def __init__(self, message, best=None, error=None):
        super().__init__(message)
        self.best = best
        self.error = error


class UndecidedError(FrontlabError, RuntimeError):
    """Neither the pinned nor the passed rule fired; increase t_max."""


class NoSignChangeError(FrontlabError, ValueError):
    """A threshold bracket gives the same pinning verdict at both ends."""


class ConfigError(FrontlabError, ValueError):
    """An experiment config failed validation. ``violations`` lists the problems."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class SnapshotFitError(FrontlabError, RuntimeError):
    """A fit failed inside a trajectory; ``index`` is the snapshot position."""

    def __init__(self, index, cause):
        super().__init__(f"snapshot {index}: {cause}")
        self.index = index
        self.cause = cause


class RunError(FrontlabError, RuntimeError):
    """A pipeline stage failed while running an experiment; ``stage`` names it."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage} failed: {cause}")
        self.stage = stage
        self.cause = cause
