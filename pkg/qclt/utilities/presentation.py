import csv
import json
import os
from types import MappingProxyType
from typing import Any, Final, Union

from qclt.data_structures.output_format import OutputFormat
from qclt.data_structures.output_keys import OutputKeys
from qclt.data_structures.typing import OutputFunction

__all__ = ("dump_csv_output", "dump_json_output", "format_cell", "OUTPUT_MAPPING")

NOT_AVAILABLE: Final[str] = "N/A"


def format_cell(value: Any) -> str:
    """Render one CSV cell; floats go through repr so equal values give equal bytes"""
    if value is None:
        return NOT_AVAILABLE
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_csv_output(
    output_mapping: dict[str, Any], filepath: Union[str, os.PathLike[str]]
) -> None:
    """
    Dump tabular results to a CSV file

    :param output_mapping: mapping holding the column order and the rows
    :type output_mapping: dict[str, Any]

    :param filepath: Output file to write results to
    :type filepath: Union[str, os.PathLike[str]]
    """
    columns: list[str] = output_mapping[OutputKeys.COLUMNS]
    with open(filepath, "w", newline="", encoding="utf-8") as output_file:
        writer = csv.writer(output_file, lineterminator="\n")
        writer.writerow(columns)
        for row in output_mapping[OutputKeys.ROWS]:
            writer.writerow(format_cell(row[column]) for column in columns)


def dump_json_output(
    output_mapping: dict[str, Any], filepath: Union[str, os.PathLike[str]]
) -> None:
    """Dump output to JSON file, with proper formatting"""
    with open(filepath, mode="w", encoding="utf-8") as output_file:
        output_file.write(json.dumps(output_mapping, indent=2))
        output_file.write("\n")


OUTPUT_MAPPING: Final[MappingProxyType[OutputFormat, OutputFunction]] = MappingProxyType(
    {
        OutputFormat.CSV: dump_csv_output,
        OutputFormat.JSON: dump_json_output,
    }
)
