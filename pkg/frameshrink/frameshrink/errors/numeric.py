import json

import pydantic


class FrameshrinkError(Exception):
    def __init__(self, msg: str):
        self.msg = msg

    def __str__(self):
        return f"{type(self).__name__}: {self.msg}"

    __repr__ = __str__


class ParameterDomainError(FrameshrinkError):
    """A parameter lies outside the domain an operation is defined on."""


class ConvexityViolationError(FrameshrinkError):
    """The scalar prox objective or the u-subproblem is not convex."""


class FrameConstructionError(FrameshrinkError):
    """The supplied analysis operator does not satisfy A^T A = rI."""


class InputError(FrameshrinkError):
    """Observation data is non-finite or has the wrong shape."""


class PgmFormatError(FrameshrinkError):
    pass


class ConfigurationError(FrameshrinkError):
    @classmethod
    def from_pydantic_validation_error(cls, exc: pydantic.ValidationError):
        problems = [
            {"field": ".".join(str(p) for p in err["loc"]), "error": err["msg"]}
            for err in exc.errors()
        ]
        return cls(json.dumps(problems))
