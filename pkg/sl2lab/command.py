import argparse
import inspect
from typing import Any, Callable, Optional, Type, cast, get_args, get_origin

from docstring_parser import parse as doc_parse
from pydantic import BaseModel, ConfigDict, ValidationError
from pydantic._internal._utils import lenient_issubclass

from .constants import NOT_SET, CommandConfigError, OutputFormat
from .model_field import ModelField
from .models import ExperimentConfig, Record
from .utils import analyze_param

COMMON_FIELDS = ("p", "p_range", "gens", "trials", "seed", "depth_cap", "size_cap", "force")
RESERVED_NAMES = ("format", "out", "command")


class SerializationModel(BaseModel):
    data: Any

    model_config = ConfigDict(arbitrary_types_allowed=True)


class Command:
    """Command represents the handler for one subcommand."""

    def __init__(
        self,
        name: str,
        view_func: Callable,
        summary: str = "",
        description: str = "",
        params: Optional[list[ModelField]] = None,
    ):
        self.name = name
        self.view_func = view_func
        self.record_type = self._sanitize_records(view_func)
        self.summary = summary
        self.description = description
        self.params = params or self._parse_params()

    @staticmethod
    def _sanitize_records(view_func: Callable) -> Type[Record]:
        func_return_type = view_func.__annotations__.get("return")
        if func_return_type is None:
            raise CommandConfigError("Return type not specified.")
        args = get_args(func_return_type)
        if get_origin(func_return_type) is not list or not lenient_issubclass(
            args[0] if args else None, Record
        ):
            raise CommandConfigError(
                f"Command must return a list of records, not {func_return_type}."
            )
        return cast(Type[Record], args[0])

    def _parse_params(self) -> list[ModelField]:
        """Parse parameters of the command function.

        Descriptions missing on the parameter itself are taken from the
        docstring.
        """
        param_docs = {
            param.arg_name: param.description or ""
            for param in doc_parse(self.view_func.__doc__ or "").params
        }

        fields = []
        for param_name, param in inspect.signature(self.view_func).parameters.items():
            if param_name in RESERVED_NAMES:
                raise CommandConfigError(f"Parameter name {param_name!r} is reserved.")
            model_field = analyze_param(
                param_name=param_name,
                annotation=param.annotation,
                value=param.default,
            )
            if param.name in param_docs and not model_field.field_info.description:
                model_field.field_info.description = param_docs[param.name]
            fields.append(model_field)

        flags = [flag for field in fields for flag in field.flags]
        if len(flags) != len(set(flags)):
            raise CommandConfigError(f"Duplicate flags in command {self.name!r}.")
        return fields

    def add_parser(
        self, subparsers: Any, parents: Optional[list[argparse.ArgumentParser]] = None
    ) -> argparse.ArgumentParser:
        """Register this command and its options on ``subparsers``."""
        doc = doc_parse(self.view_func.__doc__ or "")
        parser = subparsers.add_parser(
            self.name,
            help=doc.short_description or self.summary,
            description=doc.long_description or self.description or None,
            parents=parents or [],
        )
        for param in self.params:
            param.add_argument(parser)
        parser.set_defaults(command=self.name)
        return parser

    def validate(self, namespace: argparse.Namespace) -> dict[str, Any]:
        """Validated keyword arguments of the command function."""
        return {
            param.name: param.parse(getattr(namespace, param.name, NOT_SET))
            for param in self.params
        }

    def config(self, kwargs: dict[str, Any], output_format: OutputFormat) -> ExperimentConfig:
        common = {key: kwargs[key] for key in COMMON_FIELDS if key in kwargs}
        options = {key: value for key, value in kwargs.items() if key not in COMMON_FIELDS}
        try:
            return ExperimentConfig(
                command=self.name,
                format=output_format.value,
                options=self.serialize(options),
                **common,
            )
        except ValidationError as validation_error:
            raise CommandConfigError(
                "Invalid configuration.", errors=validation_error.errors(include_url=False)
            ) from validation_error

    def run(
        self, namespace: argparse.Namespace, output_format: OutputFormat = OutputFormat.JSON
    ) -> tuple[ExperimentConfig, list[Record]]:
        kwargs = self.validate(namespace)
        config = self.config(kwargs, output_format)
        records = self.view_func(**kwargs)
        stamped = []
        for record in records:
            if not isinstance(record, Record):
                raise CommandConfigError(f"No record schema matches returned type {type(record)}")
            stamped.append(record.model_copy(update={"config_hash": config.config_hash}))
        return config, stamped

    @classmethod
    def serialize(cls, resp: Any) -> Any:
        """Convert an object into a json serializable one."""
        return SerializationModel(data=resp).model_dump(mode="json")["data"]

    def add_prefix(self, prefix: str) -> None:
        self.name = prefix + self.name
