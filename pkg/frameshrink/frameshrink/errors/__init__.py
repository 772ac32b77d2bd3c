from frameshrink.errors.numeric import (
    ConfigurationError,
    ConvexityViolationError,
    FrameConstructionError,
    FrameshrinkError,
    InputError,
    ParameterDomainError,
    PgmFormatError,
)

__all__ = [
    "ConfigurationError",
    "ConvexityViolationError",
    "FrameConstructionError",
    "FrameshrinkError",
    "InputError",
    "ParameterDomainError",
    "PgmFormatError",
]
