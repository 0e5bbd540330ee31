import argparse
import types
from dataclasses import dataclass
from typing import Annotated, Any, Optional, Union

from pydantic import TypeAdapter, ValidationError
from pydantic.fields import FieldInfo
from pydantic_core import PydanticUndefined

from .constants import NOT_SET, CommandConfigError, ParamType

Undefined = PydanticUndefined
UnionType = getattr(types, "UnionType", Union)


@dataclass
class ModelField:
    """One command line option: its flags, default and validator."""

    field_info: FieldInfo
    name: str
    sequence: bool = False

    @property
    def alias(self) -> str:
        a = self.field_info.alias
        return a if a is not None else self.name

    @property
    def required(self) -> bool:
        return self.field_info.is_required()

    @property
    def default(self) -> Any:
        if self.required:
            return Undefined
        return self.field_info.get_default(call_default_factory=True)

    @property
    def description(self) -> str:
        return self.field_info.description or ""

    @property
    def kind(self) -> ParamType:
        return getattr(self.field_info, "kind", ParamType.OPTION)

    @property
    def metavar(self) -> Optional[str]:
        return getattr(self.field_info, "metavar", None)

    @property
    def flags(self) -> list[str]:
        flags = getattr(self.field_info, "flags", None)
        return list(flags) if flags else [f"--{self.alias}"]

    def __post_init__(self) -> None:
        self.type_adapter: TypeAdapter[Any] = TypeAdapter(
            Annotated[self.field_info.annotation, self.field_info]
        )

    def add_argument(self, parser: argparse.ArgumentParser) -> None:
        # NOT_SET marks an option that was not given
        kwargs: dict[str, Any] = {
            "dest": self.name,
            "default": NOT_SET,
            "help": self.description or None,
        }
        if self.kind == ParamType.FLAG:
            parser.add_argument(*self.flags, action="store_true", **kwargs)
            return
        if self.sequence:
            kwargs["nargs"] = "+"
        parser.add_argument(*self.flags, metavar=self.metavar, **kwargs)

    def parse(self, raw: Any) -> Any:
        """Validated value of the raw argparse value ``raw``."""
        if raw is NOT_SET:
            if self.required:
                raise CommandConfigError(f"Missing required option {self.flags[0]}.")
            return self.default
        try:
            return self.type_adapter.validate_python(raw)
        except ValidationError as validation_error:
            raise CommandConfigError(
                f"Invalid value for {self.flags[0]}: {raw!r}.",
                errors=validation_error.errors(include_url=False),
            ) from validation_error

    def __hash__(self) -> int:
        return id(self)
