"""CSV and JSON-lines writers for experiment records."""
import csv
import json
from typing import Any, Optional, TextIO, Type

from pydantic import BaseModel

from .constants import OutputFormat
from .models import ExperimentConfig


def _dumps(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return _dumps(value)


class RecordWriter:
    """Writes records one per line.

    JSON lines have sorted keys, and the first line is the run configuration.
    CSV writes a header from the field order of the record model, and a new
    header whenever the model changes; nested values are JSON encoded.
    """

    def __init__(self, stream: TextIO, output_format: OutputFormat = OutputFormat.JSON):
        self.stream = stream
        self.output_format = output_format
        self._csv = csv.writer(stream, lineterminator="\n")
        self._header: Optional[Type[BaseModel]] = None

    def write_config(self, config: ExperimentConfig) -> None:
        if self.output_format == OutputFormat.JSON:
            self.stream.write(_dumps({"config": config.model_dump(mode="json")}) + "\n")

    def write(self, record: BaseModel) -> None:
        data = record.model_dump(mode="json")
        if self.output_format == OutputFormat.JSON:
            self.stream.write(_dumps(data) + "\n")
            return
        if self._header is not type(record):
            self._header = type(record)
            self._csv.writerow(list(data))
        self._csv.writerow([_cell(value) for value in data.values()])

    def write_all(self, config: ExperimentConfig, records: list[BaseModel]) -> None:
        self.write_config(config)
        for record in records:
            self.write(record)
        self.stream.flush()
