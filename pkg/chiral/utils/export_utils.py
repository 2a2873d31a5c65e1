import csv
import io
import json
import logging
import math

from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import click
import numpy as np
import openpyxl
from openpyxl.styles import Font
from openpyxl.utils import get_column_letter

from chiral.config.const import (
    DEFAULT_LOG_LEVEL,
    NUMBER_FORMAT,
    UNITS_NOTE,
    XLSX_COLUMN_WIDTH,
    XLSX_DATA_SHEET_TITLE,
    XLSX_PARAMETERS_SHEET_TITLE,
    OutputFormat,
)
from chiral.config.logging_config import log_handler, console_handler
from chiral.errors import InvalidParameter

logger = logging.getLogger(__name__)
logger.setLevel(DEFAULT_LOG_LEVEL)
logger.addHandler(log_handler)
logger.addHandler(console_handler)


@dataclass
class DataTable:
    """
    Column-oriented result of one command. parameters echo the run configuration, metadata holds
    values computed during the run (sample counts, resampling, matching variant).
    """

    parameters: Dict[str, object]
    columns: List[str]
    data: List[Sequence] = field(repr=False)
    metadata: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.columns) != len(self.data):
            raise InvalidParameter(f"{len(self.columns)} column names for {len(self.data)} columns")
        lengths = {len(column) for column in self.data}
        if len(lengths) > 1:
            raise InvalidParameter(f"Columns have different lengths: {sorted(lengths)}")

    @property
    def n_rows(self) -> int:
        return len(self.data[0]) if self.data else 0

    def rows(self):
        for index in range(self.n_rows):
            yield [column[index] for column in self.data]


def _plain(value):
    """Converts numpy scalars to Python values."""
    if isinstance(value, np.generic):
        return value.item()
    return value


def format_value(value) -> str:
    value = _plain(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return NUMBER_FORMAT % value
    if value is None:
        return ""
    return str(value)


def json_value(value):
    value = _plain(value)
    if isinstance(value, float) and not math.isfinite(value):
        # JSON has no nan/inf
        return None
    if isinstance(value, (list, tuple)):
        return [json_value(item) for item in value]
    if isinstance(value, dict):
        return {key: json_value(item) for key, item in value.items()}
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    return str(value)


def render_csv(table: DataTable) -> str:
    buffer = io.StringIO()
    for key, value in table.parameters.items():
        buffer.write(f"# {key} = {format_value(value)}\n")
    for key, value in table.metadata.items():
        buffer.write(f"# {key} = {format_value(value)}\n")
    buffer.write(f"# {UNITS_NOTE}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows():
        writer.writerow([format_value(value) for value in row])
    return buffer.getvalue()


def render_json(table: DataTable) -> str:
    document = {
        "parameters": json_value(table.parameters),
        "metadata": json_value(table.metadata),
        "units": UNITS_NOTE,
        "columns": list(table.columns),
        "rows": [json_value(row) for row in table.rows()],
    }
    return json.dumps(document, allow_nan=False) + "\n"


def define_columns(page, columns):
    """
    Columns are defined the same way for each page, with bold headers.
    """
    for col_num, column in enumerate(columns, 1):
        column_letter = get_column_letter(col_num)
        page.column_dimensions[column_letter].width = column["width"]
        page.cell(row=1, column=col_num, value=column["header"]).font = Font(bold=True)


def _xlsx_value(value):
    value = _plain(value)
    if isinstance(value, float) and not math.isfinite(value):
        return format_value(value)
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    return str(value)


def write_data_page(page, table: DataTable):
    define_columns(page, [{"header": name, "width": XLSX_COLUMN_WIDTH} for name in table.columns])
    for row_num, row in enumerate(table.rows(), 2):
        for col_num, value in enumerate(row, 1):
            page.cell(row=row_num, column=col_num, value=_xlsx_value(value))


def write_parameters_page(page, table: DataTable):
    define_columns(page, [{"header": "Parameter", "width": XLSX_COLUMN_WIDTH}, {"header": "Value", "width": XLSX_COLUMN_WIDTH}])
    entries = list(table.parameters.items()) + list(table.metadata.items())
    for row_num, (key, value) in enumerate(entries, 2):
        page.cell(row=row_num, column=1, value=str(key))
        page.cell(row=row_num, column=2, value=format_value(value))
    # Write a note under the table
    page.cell(row=len(entries) + 3, column=1, value=UNITS_NOTE).font = Font(italic=True)


def render_xlsx(table: DataTable) -> bytes:
    wb = openpyxl.Workbook()

    data_page = wb.active
    data_page.title = XLSX_DATA_SHEET_TITLE
    write_data_page(data_page, table)

    parameters_page = wb.create_sheet(title=XLSX_PARAMETERS_SHEET_TITLE)
    write_parameters_page(parameters_page, table)

    temp_file = io.BytesIO()
    wb.save(temp_file)
    return temp_file.getvalue()


def render(table: DataTable, output_format: OutputFormat):
    if output_format == OutputFormat.CSV:
        return render_csv(table)
    if output_format == OutputFormat.JSON:
        return render_json(table)
    return render_xlsx(table)


def write_table(table: DataTable, output_format: OutputFormat, path=None):
    """
    Writes the table to path, or to stdout when path is None. xlsx needs a path.
    """
    output_format = OutputFormat(str(output_format))
    if output_format == OutputFormat.XLSX and path is None:
        raise InvalidParameter("The xlsx format needs an output path (--out)")
    content = render(table, output_format)
    if path is None:
        click.echo(content, nl=False)
        return
    if isinstance(content, bytes):
        with open(path, "wb") as file:
            file.write(content)
    else:
        with open(path, "w", encoding="utf-8", newline="") as file:
            file.write(content)
    logger.info("Wrote %s: path=%s, rows=%d, columns=%d", output_format, path, table.n_rows, len(table.columns))
