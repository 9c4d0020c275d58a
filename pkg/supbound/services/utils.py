import pathlib
from fractions import Fraction
from typing import Any


class Rational:
    """Pydantic field type parsing ``3``, ``3/2`` or ``0.25`` into an exact Fraction."""

    @classmethod
    def __get_validators__(cls):
        yield cls.validate

    @classmethod
    def validate(cls, v: Any) -> Fraction:
        if isinstance(v, Fraction):
            return v
        if isinstance(v, float):
            raise ValueError("floats are not exact, pass the value as a string")
        try:
            return Fraction(str(v).strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"Invalid rational number '{v}': {str(e)}")

    @classmethod
    def __modify_schema__(cls, field_schema):
        field_schema.update(type="string", example="3/2", description="Exact rational number")


def read_text(path: pathlib.Path) -> str:
    return pathlib.Path(path).read_text(encoding="utf-8")


def write_text(path: pathlib.Path, text: str):
    pathlib.Path(path).write_text(text, encoding="utf-8")


def jsonable(value: Any) -> Any:
    """Recursively turn Fractions into strings so results serialize deterministically."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, pathlib.PurePath):
        return str(value)
    return value
