import csv
import io
import json

from sl2lab.constants import OutputFormat
from sl2lab.models import CayleyRecord, ExperimentConfig, SummaryRecord
from sl2lab.output import RecordWriter

CONFIG = ExperimentConfig(command="diameter", p=5)
RECORDS = [
    CayleyRecord(p=5, trial=0, generates=True, diameter=4, seed=0),
    CayleyRecord(p=5, trial=1, generates=False, seed=0),
    SummaryRecord(command="diameter", seed=0, records=2, failures=1, stats={"diameter_max": 4.0}),
]


def write(output_format):
    stream = io.StringIO()
    RecordWriter(stream, output_format).write_all(CONFIG, RECORDS)
    return stream.getvalue()


def test_json_lines():
    lines = write(OutputFormat.JSON).splitlines()
    assert len(lines) == 4
    assert json.loads(lines[0]) == {"config": CONFIG.model_dump(mode="json")}
    assert lines[2] == (
        '{"config_hash":"","diameter":null,"generates":false,"girth":null,'
        '"lambda2":null,"mixing_n":null,"p":5,"seed":0,"trial":1}'
    )
    assert json.loads(lines[3])["stats"] == {"diameter_max": 4.0}


def test_csv_headers():
    rows = list(csv.reader(io.StringIO(write(OutputFormat.CSV))))
    assert rows == [
        ["p", "trial", "generates", "girth", "diameter", "mixing_n", "lambda2", "seed", "config_hash"],
        ["5", "0", "true", "", "4", "", "", "0", ""],
        ["5", "1", "false", "", "", "", "", "0", ""],
        ["command", "seed", "records", "failures", "stats", "config_hash"],
        ["diameter", "0", "2", "1", '{"diameter_max":4.0}', ""],
    ]


def test_header_repeats_on_type_change():
    stream = io.StringIO()
    writer = RecordWriter(stream, OutputFormat.CSV)
    for record in [RECORDS[0], RECORDS[2], RECORDS[1]]:
        writer.write(record)
    assert len(stream.getvalue().splitlines()) == 6
