from typing import Any, Optional, Sequence

from . import param
from .model_field import Undefined


def Option(
    default: Any = Undefined,
    *,
    flags: Optional[Sequence[str]] = None,
    metavar: Optional[str] = None,
    alias: Optional[str] = None,
    description: Optional[str] = None,
    gt: Optional[float] = None,
    ge: Optional[float] = None,
    lt: Optional[float] = None,
    le: Optional[float] = None,
) -> Any:
    """Declares a command option, e.g. ``trials: int = Option(1, ge=1)``.

    Without a default the option is required.
    """
    return param.Option(
        default=default,
        flags=flags,
        metavar=metavar,
        alias=alias,
        description=description,
        gt=gt,
        ge=ge,
        lt=lt,
        le=le,
    )


def Flag(
    *,
    flags: Optional[Sequence[str]] = None,
    alias: Optional[str] = None,
    description: Optional[str] = None,
) -> Any:
    return param.Flag(flags=flags, alias=alias, description=description)
