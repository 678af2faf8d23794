"""Shared exception types.

Everything user-facing distinguishes two failure families: bad parameters
(rejected before any work happens) and numerical trouble discovered mid-run.
The CLI maps the former to exit code 2 and the latter to exit code 3.
"""


class ValidationError(ValueError):
    """A parameter or configuration value is outside its admissible set."""


class AdmissibilityError(ValidationError):
    """Structured rejection naming the violated inequality.

    Parameters
    ----------
    parameter : str
        Dotted name of the offending field, e.g. ``"noise.hurst"``.
    value
        The rejected value.
    requirement : str
        Human-readable statement of the inequality that failed.
    """

    def __init__(self, parameter, value, requirement):
        self.parameter = parameter
        self.value = value
        self.requirement = requirement
        super().__init__(f"{parameter} = {value!r} violates: {requirement}")


class NumericalAbort(RuntimeError):
    """A solver detected divergence or a guard trip and gave up.

    Carries a short machine-readable ``reason`` plus an ``advice`` string
    suggesting the usual remedy (smaller dt, shorter slab, finer grid).
    """

    def __init__(self, reason, advice=""):
        self.reason = reason
        self.advice = advice
        msg = reason if not advice else f"{reason} ({advice})"
        super().__init__(msg)
