from __future__ import annotations

from typing import Any, Optional, Sequence

from pydantic.fields import FieldInfo

from sl2lab.constants import CommandConfigError, ParamType
from sl2lab.model_field import Undefined


class CliParam(FieldInfo):
    """Field info of a command parameter, with its command line spelling."""

    kind: ParamType

    def __init__(
        self,
        default: Any = Undefined,
        *,
        flags: Optional[Sequence[str]] = None,
        metavar: Optional[str] = None,
        alias: Optional[str] = None,
        description: Optional[str] = None,
        **constraints: Any,
    ):
        if flags is not None and not all(flag.startswith("-") for flag in flags):
            raise CommandConfigError(f"Flags must start with a dash, got {list(flags)}.")
        self.flags = tuple(flags) if flags else None
        self.metavar = metavar
        super().__init__(
            default=default, alias=alias, description=description, **constraints
        )

    def __repr__(self) -> str:
        spelling = "/".join(self.flags) if self.flags else self.alias
        return f"{self.__class__.__name__}({spelling}, default={self.default!r})"


class Option(CliParam):
    """A ``--name VALUE`` argument; constraints such as ``ge`` are checked on parse."""

    kind = ParamType.OPTION


class Flag(CliParam):
    """A ``--name`` switch, false unless given."""

    kind = ParamType.FLAG

    def __init__(
        self,
        default: Any = False,
        *,
        flags: Optional[Sequence[str]] = None,
        alias: Optional[str] = None,
        description: Optional[str] = None,
        **extra: Any,
    ):
        extra.pop("metavar", None)
        super().__init__(
            default=default, flags=flags, alias=alias, description=description, **extra
        )
