import abc

import numpy as np
import pydantic


class ArrayModel(pydantic.BaseModel, abc.ABC):
    """Immutable value object that carries numpy arrays."""

    model_config = pydantic.ConfigDict(arbitrary_types_allowed=True, frozen=True)


class PropertyCheck(pydantic.BaseModel):
    name: str
    passed: bool
    worst: float = 0.0
    detail: str = ""

    @pydantic.field_validator("worst", mode="before")
    def coerce_worst(cls, v) -> float:
        return float(np.asarray(v, dtype=float).max()) if np.size(v) else 0.0


class PropertyReport(pydantic.BaseModel):
    subject: str
    checks: list[PropertyCheck] = []

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list[PropertyCheck]:
        return [check for check in self.checks if not check.passed]

    def get(self, name: str) -> PropertyCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)
