from frameshrink.schemas.base import ArrayModel, PropertyCheck, PropertyReport

__all__ = ["ArrayModel", "PropertyCheck", "PropertyReport"]
