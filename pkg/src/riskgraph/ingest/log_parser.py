"""CSV reading and writing of driving logs.

Logs arrive as CSV with one record per row. Surrounding vehicles are stored as
repeated column groups ``trk{i}_{id,dx,dy,dvx,dvy}`` whose cells are empty when
the slot holds no vehicle. Malformed rows are counted and skipped; the parser
never reorders rows.
"""

from __future__ import annotations

import io
import logging
import math
import re
from collections.abc import Sequence

import pandas as pd

from riskgraph.ingest.exceptions import EmptyLogError, IngestError, LogSchemaError
from riskgraph.ingest.log_models import (
    REQUIRED_FIELDS,
    TRACK_DY_MAX,
    TRACK_DY_MIN,
    DriverLogRecord,
    LogSchema,
    ParsedLog,
    TrackObservation,
)

logger = logging.getLogger(__name__)

_TRACK_FIELDS: tuple[str, ...] = ("id", "dx", "dy", "dvx", "dvy")


def _track_groups(columns: Sequence[str], prefix: str) -> list[int]:
    """Finds the track slot indices present in the header.

    Raises:
        LogSchemaError: If a slot lacks one of its five columns
    """
    pattern = re.compile(rf"^{re.escape(prefix)}(\d+)_({'|'.join(_TRACK_FIELDS)})$")
    found: dict[int, set[str]] = {}
    for column in columns:
        match = pattern.match(column)
        if match:
            found.setdefault(int(match.group(1)), set()).add(match.group(2))
    for slot, fields in found.items():
        missing = set(_TRACK_FIELDS) - fields
        if missing:
            raise LogSchemaError(
                f"Track slot {prefix}{slot} is missing columns: "
                f"{', '.join(sorted(missing))}\n"
                f"Suggestion: every slot needs {prefix}{slot}_id, _dx, _dy, _dvx, _dvy"
            )
    return sorted(found)


def _parse_row(
    row: dict[str, str],
    schema: LogSchema,
    slots: list[int],
    has_cipv: bool,
) -> DriverLogRecord:
    values = {name: float(row[schema.column_for(name)]) for name in REQUIRED_FIELDS}
    if not all(math.isfinite(v) for v in values.values()):
        raise ValueError("non-finite value in a required column")
    lanes = sorted(float(row[col]) for col in schema.lane_lines if row[col].strip())

    tracks: list[TrackObservation] = []
    for slot in slots:
        key = f"{schema.track_prefix}{slot}_"
        if not row[key + "id"].strip():
            continue
        dy = float(row[key + "dy"])
        track_id = int(float(row[key + "id"]))
        if not TRACK_DY_MIN <= dy <= TRACK_DY_MAX:
            logger.debug("Dropping track %s with dy=%s outside range", track_id, dy)
            continue
        tracks.append(
            TrackObservation(
                track_id=track_id,
                dx=float(row[key + "dx"]),
                dy=dy,
                dvx=float(row[key + "dvx"]),
                dvy=float(row[key + "dvy"]),
            )
        )

    cipv: int | None = None
    if has_cipv and schema.cipv is not None and row[schema.cipv].strip():
        cipv = int(float(row[schema.cipv]))

    return DriverLogRecord(
        timestamp=values["timestamp"],
        ax=values["ax"],
        ay=values["ay"],
        steer=values["steer"],
        brake=values["brake"],
        throttle=values["throttle"],
        vx=values["vx"],
        vy=values["vy"],
        lane_offsets=tuple(lanes),
        tracks=tuple(tracks),
        cipv_id=cipv,
    )


def parse_log(content: bytes, schema: LogSchema | None = None) -> ParsedLog:
    """Parse CSV log content into driver log records.

    Args:
        content: Raw CSV bytes with a header row
        schema: Column map; the default matches logs written by ``serialize_csv``

    Returns:
        ParsedLog holding the valid records in file order and the count of
        skipped malformed rows

    Raises:
        LogSchemaError: If a required column is missing from the header
        EmptyLogError: If the content holds no valid row

    Example:
        >>> parsed = parse_log(path.read_bytes())
        >>> parsed.skipped_rows
        0
    """
    schema = schema or LogSchema()
    bad_lines: list[list[str]] = []

    def _on_bad_line(fields: list[str]) -> None:
        bad_lines.append(fields)
        return None

    try:
        frame = pd.read_csv(
            io.BytesIO(content),
            dtype=str,
            keep_default_na=False,
            comment="#",
            engine="python",
            on_bad_lines=_on_bad_line,
        )
    except pd.errors.EmptyDataError as e:
        raise EmptyLogError(
            "Log is empty: no header row found.\n"
            "Suggestion: provide a CSV file with a header and at least one row"
        ) from e

    columns = [str(c) for c in frame.columns]
    required_columns = [schema.column_for(n) for n in REQUIRED_FIELDS]
    missing = [c for c in (*required_columns, *schema.lane_lines) if c not in columns]
    if missing:
        raise LogSchemaError(
            f"Log is missing required columns: {', '.join(missing)}\n"
            f"Suggestions:\n"
            f"  - Check the column map passed with --schema\n"
            f"  - Header found: {', '.join(columns[:12])}"
            f"{' ...' if len(columns) > 12 else ''}"
        )
    slots = _track_groups(columns, schema.track_prefix)
    has_cipv = schema.cipv is not None and schema.cipv in columns

    records: list[DriverLogRecord] = []
    skipped = len(bad_lines)
    for row_number, row in enumerate(frame.to_dict(orient="records"), start=2):
        try:
            record = _parse_row(
                {str(k): str(v) for k, v in row.items()}, schema, slots, has_cipv
            )
        except (ValueError, IngestError) as e:
            logger.debug("Skipping malformed row %d: %s", row_number, e)
            skipped += 1
            continue
        if records and record.timestamp <= records[-1].timestamp:
            logger.debug("Skipping out-of-order row %d", row_number)
            skipped += 1
            continue
        records.append(record)

    if not records:
        raise EmptyLogError(
            f"Log contains no valid rows ({skipped} malformed rows skipped).\n"
            f"Suggestions:\n"
            f"  - Verify numeric cells use '.' as decimal separator\n"
            f"  - Check that brake and throttle lie in [0, 1]"
        )
    if skipped:
        logger.warning("Skipped %d malformed rows out of %d", skipped, len(frame))
    return ParsedLog(records=tuple(records), skipped_rows=skipped)


def _cell(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def serialize_csv(
    records: Sequence[DriverLogRecord], schema: LogSchema | None = None
) -> bytes:
    """Serialize records to canonical CSV bytes.

    Floats are written in shortest round-trip form, so parsing the output with
    the same schema reproduces the records exactly.

    Args:
        records: Records to write, in order
        schema: Column map to write with

    Returns:
        UTF-8 encoded CSV content
    """
    schema = schema or LogSchema()
    lane_count = max([len(schema.lane_lines), *(len(r.lane_offsets) for r in records)])
    lane_columns = [
        schema.lane_lines[i] if i < len(schema.lane_lines) else f"lane_{i}"
        for i in range(lane_count)
    ]
    slot_count = max([0, *(len(r.tracks) for r in records)])
    columns = [schema.column_for(n) for n in REQUIRED_FIELDS] + lane_columns
    if schema.cipv is not None:
        columns.append(schema.cipv)
    for slot in range(slot_count):
        columns.extend(f"{schema.track_prefix}{slot}_{f}" for f in _TRACK_FIELDS)

    rows: list[list[str]] = []
    for record in records:
        row = [_cell(record.channel(n)) for n in REQUIRED_FIELDS[1:]]
        row.insert(0, _cell(record.timestamp))
        lanes = list(record.lane_offsets)
        row.extend(_cell(lanes[i]) if i < len(lanes) else "" for i in range(lane_count))
        if schema.cipv is not None:
            row.append(_cell(record.cipv_id))
        for slot in range(slot_count):
            if slot < len(record.tracks):
                t = record.tracks[slot]
                row.extend(
                    [_cell(t.track_id), _cell(t.dx), _cell(t.dy)]
                    + [_cell(t.dvx), _cell(t.dvy)]
                )
            else:
                row.extend([""] * len(_TRACK_FIELDS))
        rows.append(row)

    frame = pd.DataFrame(rows, columns=columns, dtype=str)
    text: str = frame.to_csv(index=False, lineterminator="\n")
    return text.encode("utf-8")
