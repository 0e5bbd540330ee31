# pylint: disable=protected-access
import dataclasses
import inspect
from typing import Annotated, Any, Mapping, Optional, Type, Union, get_args, get_origin

from pydantic import BaseModel
from pydantic._internal._utils import lenient_issubclass
from pydantic.fields import FieldInfo

from sl2lab import param
from sl2lab.constants import CommandConfigError
from sl2lab.model_field import ModelField, Undefined, UnionType
from sl2lab.param import CliParam

SEQUENCE_TYPES = (list, set, tuple)


def create_model_field(
    name: str,
    type_: Type[Any],
    default: Optional[Any] = Undefined,
    field_info: Optional[FieldInfo] = None,
    alias: Optional[str] = None,
) -> ModelField:
    field_info = field_info or param.Option(
        annotation=type_, default=default, alias=alias
    )
    return ModelField(
        name=name,
        field_info=field_info,
        sequence=field_annotation_is_scalar_sequence(field_info.annotation),
    )


def _union_args(annotation: Any) -> Optional[tuple[Any, ...]]:
    origin = get_origin(annotation)
    if origin is Union or origin is UnionType:
        return tuple(arg for arg in get_args(annotation) if arg is not type(None))
    return None


def _is_sequence(annotation: Any) -> bool:
    return lenient_issubclass(get_origin(annotation) or annotation, SEQUENCE_TYPES)


def field_annotation_is_scalar(annotation: Any) -> bool:
    """A value argparse reads from one token: no containers, models or mappings."""
    if annotation is Ellipsis:
        return True
    args = _union_args(annotation)
    if args is not None:
        return all(field_annotation_is_scalar(arg) for arg in args)
    cls = get_origin(annotation) or annotation
    return not (
        _is_sequence(annotation)
        or lenient_issubclass(cls, (BaseModel, Mapping))
        or dataclasses.is_dataclass(cls)
    )


def field_annotation_is_scalar_sequence(annotation: Any) -> bool:
    """``list[int]``, ``Optional[tuple[str, ...]]`` and the like, read from one or more tokens."""
    args = _union_args(annotation)
    if args is not None:
        return any(field_annotation_is_scalar_sequence(arg) for arg in args) and all(
            field_annotation_is_scalar_sequence(arg) or field_annotation_is_scalar(arg)
            for arg in args
        )
    return _is_sequence(annotation) and all(
        field_annotation_is_scalar(arg) for arg in get_args(annotation)
    )


def _is_bool(annotation: Any) -> bool:
    return annotation is bool


def _as_param(cls: Type[CliParam], *infos: FieldInfo) -> CliParam:
    """A ``cls`` with the attributes and constraints of ``infos``, later ones winning."""
    attributes: dict[str, Any] = {}
    metadata: dict[type, Any] = {}
    for info in infos:
        attributes |= info._attributes_set
        metadata |= {type(item): item for item in info.metadata}
    merged = cls(**attributes)
    merged.metadata = list(metadata.values())
    return merged


def analyze_param(*, param_name: str, annotation: Any, value: Any) -> ModelField:
    """Converts an inspected command parameter into a ModelField.

    Extra argument info is given as the default value, e.g.
    ``def diameter(p: int = Option(description="The prime")):``.
    Booleans become flags, scalars and scalar sequences become options.
    """

    field_info = None
    type_annotation: Any = Any

    if (
        annotation is not inspect.Signature.empty
        and get_origin(annotation) is Annotated
    ):
        annotated_args = get_args(annotation)
        type_annotation = annotated_args[0]
        annotations = [arg for arg in annotated_args[1:] if isinstance(arg, FieldInfo)]
        if len(annotations) > 1:
            raise CommandConfigError(
                f"Cannot specify multiple `Annotated` arguments for {param_name!r}"
            )
        if annotations:
            field_info = type(annotations[0]).from_annotation(annotation)
            type_annotation = field_info.annotation
        else:
            # keep plain validators such as AfterValidator
            type_annotation = annotation

    elif annotation is not inspect.Signature.empty:
        type_annotation = annotation

    if field_info is None:
        if value is inspect.Signature.empty or isinstance(value, FieldInfo):
            field_info = FieldInfo(annotation=type_annotation)
        else:
            field_info = FieldInfo(annotation=type_annotation, default=value)

    if isinstance(value, CliParam):
        merged = _as_param(value.__class__, value, field_info)
        merged.flags = value.flags
        merged.metavar = value.metavar
        field_info = merged

    if not isinstance(field_info, CliParam):
        if _is_bool(type_annotation):
            field_info = _as_param(param.Flag, field_info)
        else:
            field_info = _as_param(param.Option, field_info)

    if isinstance(field_info, param.Flag) and not _is_bool(field_info.annotation):
        raise CommandConfigError(f"Flag {param_name!r} must be a bool.")

    if not (
        field_annotation_is_scalar(field_info.annotation)
        or field_annotation_is_scalar_sequence(field_info.annotation)
    ):
        raise CommandConfigError(
            f"Option {param_name!r} must be a scalar or a sequence of scalars."
        )

    field_info.alias = field_info.alias or param_name.replace("_", "-")

    return ModelField(
        name=param_name,
        field_info=field_info,
        sequence=field_annotation_is_scalar_sequence(field_info.annotation),
    )
