"""Process log CSV IO, interval slicing, and ground-truth files.

The log schema is one header row: a required integer-seconds or ISO-8601
Timestamp column, any number of numeric channel columns, and an optional
Label column holding Normal/Attack (case-insensitive). Sampling must be
uniform at 1 Hz, i.e. timestamps strictly increase by 1; non-uniform
files are rejected rather than resampled, and labels are carried through
untouched.

Channel kinds are inferred on read: a column whose cells are all exact
integers drawn from a small alphabet is discrete, everything else is
continuous.

Ground truth lives in a separate CSV with columns
start,end,targets,category,affects_process where targets joins multiple
channel names with ';' and category is one of SSSP/SSMP/MSSP/MSMP.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .detection import AttackInterval
from .distances import CONTINUOUS, DISCRETE, Channel
from .errors import InvalidDataError, ParseError, SchemaError
from .ioutil import atomic_write_text

ATTACKS_HEADER = "start,end,targets,category,affects_process"


@dataclass
class ProcessLog:
    """A uniformly sampled multichannel log."""

    timestamps: np.ndarray = field(repr=False)
    channels: dict[str, Channel]
    labels: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        n = self.timestamps.size
        if n > 1 and not np.all(np.diff(self.timestamps) == 1):
            gap = int(np.flatnonzero(np.diff(self.timestamps) != 1)[0])
            raise SchemaError(
                f"timestamps must increase by exactly 1; broken after row {gap} "
                f"({self.timestamps[gap]} -> {self.timestamps[gap + 1]})"
            )
        for name, ch in self.channels.items():
            if len(ch) != n:
                raise SchemaError(
                    f"channel {name!r} has {len(ch)} samples, timestamps have {n}"
                )
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=bool)
            if self.labels.size != n:
                raise SchemaError(f"labels have {self.labels.size} entries, expected {n}")

    @property
    def n(self) -> int:
        return int(self.timestamps.size)

    def channel(self, name: str) -> Channel:
        if name not in self.channels:
            raise SchemaError(
                f"no channel {name!r}; have {sorted(self.channels)}"
            )
        return self.channels[name]


def infer_kind(values: np.ndarray, alphabet_cap: int = 5) -> str:
    if values.size and np.array_equal(values, np.rint(values)):
        if np.unique(values).size <= alphabet_cap:
            return DISCRETE
    return CONTINUOUS


def _parse_timestamp_mode(cell: str, path, row: int):
    try:
        return int(cell), "int"
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(cell)
    except ValueError:
        raise ParseError(
            f"{path}: row {row}, column Timestamp: {cell!r} is neither an "
            f"integer nor ISO-8601"
        ) from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp()), "iso"


def _parse_timestamp(cell: str, mode: str, path, row: int) -> int:
    if mode == "int":
        try:
            return int(cell)
        except ValueError:
            raise ParseError(
                f"{path}: row {row}, column Timestamp: expected an integer, got {cell!r}"
            ) from None
    try:
        dt = datetime.fromisoformat(cell)
    except ValueError:
        raise ParseError(
            f"{path}: row {row}, column Timestamp: expected ISO-8601, got {cell!r}"
        ) from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def read_csv(
    path,
    timestamp_col: str = "Timestamp",
    label_col: str = "Label",
    alphabet_cap: int = 5,
) -> ProcessLog:
    """Parse a process log CSV; errors name the offending row and column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            dup = sorted({h for h in header if header.count(h) > 1})
            raise SchemaError(f"{path}: duplicate column names {dup}")
        if timestamp_col not in header:
            raise SchemaError(f"{path}: required column {timestamp_col!r} missing")
        ts_idx = header.index(timestamp_col)
        label_idx = header.index(label_col) if label_col in header else None
        chan_names = [
            h for i, h in enumerate(header) if i not in (ts_idx, label_idx)
        ]
        if not chan_names:
            raise SchemaError(f"{path}: no channel columns")

        timestamps: list[int] = []
        labels: list[bool] = []
        cols: dict[str, list[float]] = {name: [] for name in chan_names}
        mode = None
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: row {rownum}: expected {len(header)} fields, got {len(row)}"
                )
            cell = row[ts_idx].strip()
            if mode is None:
                ts, mode = _parse_timestamp_mode(cell, path, rownum)
            else:
                ts = _parse_timestamp(cell, mode, path, rownum)
            timestamps.append(ts)
            if label_idx is not None:
                token = row[label_idx].strip().lower()
                if token == "normal":
                    labels.append(False)
                elif token == "attack":
                    labels.append(True)
                else:
                    raise ParseError(
                        f"{path}: row {rownum}, column {label_col}: "
                        f"unknown label {row[label_idx]!r}"
                    )
            for i, h in enumerate(header):
                if i in (ts_idx, label_idx):
                    continue
                try:
                    cols[h].append(float(row[i]))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {rownum}, column {h}: "
                        f"could not parse {row[i]!r} as a number"
                    ) from None

    channels = {}
    for name in chan_names:
        values = np.asarray(cols[name], dtype=np.float64)
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ParseError(
                f"{path}: row {bad + 2}, column {name}: non-finite value"
            )
        channels[name] = Channel(name, values, kind=infer_kind(values, alphabet_cap))
    return ProcessLog(
        timestamps=np.asarray(timestamps, dtype=np.int64),
        channels=channels,
        labels=np.asarray(labels, dtype=bool) if label_idx is not None else None,
    )


def _format_value(ch: Channel, i: int) -> str:
    if ch.kind == DISCRETE:
        return str(int(ch.values[i]))
    return repr(float(ch.values[i]))


def write_csv(log: ProcessLog, path) -> None:
    """Inverse of read_csv; continuous values round-trip exactly via repr."""
    names = list(log.channels)
    header = ["Timestamp", *names]
    if log.labels is not None:
        header.append("Label")
    lines = [",".join(header)]
    for i in range(log.n):
        row = [str(int(log.timestamps[i]))]
        row += [_format_value(log.channels[name], i) for name in names]
        if log.labels is not None:
            row.append("Attack" if log.labels[i] else "Normal")
        lines.append(",".join(row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def slice_interval(log: ProcessLog, start: int, end: int) -> ProcessLog:
    """Samples start..end inclusive, timestamps renumbered from 0."""
    if not (0 <= start <= end < log.n):
        raise InvalidDataError(
            f"slice [{start}, {end}] out of range for {log.n} samples"
        )
    count = end - start + 1
    channels = {
        name: Channel(name, ch.values[start:end + 1].copy(), kind=ch.kind)
        for name, ch in log.channels.items()
    }
    return ProcessLog(
        timestamps=np.arange(count, dtype=np.int64),
        channels=channels,
        labels=None if log.labels is None else log.labels[start:end + 1].copy(),
    )


def concat(a: ProcessLog, b: ProcessLog) -> ProcessLog:
    """Append b to a; channel names and kinds must line up exactly."""
    if set(a.channels) != set(b.channels):
        raise SchemaError(
            f"channel sets differ: {sorted(a.channels)} vs {sorted(b.channels)}"
        )
    channels = {}
    for name, ca in a.channels.items():
        cb = b.channels[name]
        if ca.kind != cb.kind:
            raise SchemaError(
                f"channel {name!r} kind differs: {ca.kind} vs {cb.kind}"
            )
        channels[name] = Channel(
            name, np.concatenate([ca.values, cb.values]), kind=ca.kind
        )
    labels = None
    if a.labels is not None or b.labels is not None:
        la = a.labels if a.labels is not None else np.zeros(a.n, dtype=bool)
        lb = b.labels if b.labels is not None else np.zeros(b.n, dtype=bool)
        labels = np.concatenate([la, lb])
    return ProcessLog(
        timestamps=np.arange(a.n + b.n, dtype=np.int64),
        channels=channels,
        labels=labels,
    )


# ------------------------------------------------------------ ground truth

def _parse_bool(cell: str, path, row: int) -> bool:
    token = cell.strip().lower()
    if token in ("true", "1", "yes"):
        return True
    if token in ("false", "0", "no"):
        return False
    raise ParseError(
        f"{path}: row {row}, column affects_process: unknown value {cell!r}"
    )


def read_attacks(path) -> list[AttackInterval]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if [h.strip() for h in header] != ATTACKS_HEADER.split(","):
            raise ParseError(
                f"{path}: expected header {ATTACKS_HEADER!r}, got {','.join(header)!r}"
            )
        out = []
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ParseError(f"{path}: row {rownum}: expected 5 fields")
            try:
                start, end = int(row[0]), int(row[1])
            except ValueError:
                raise ParseError(
                    f"{path}: row {rownum}: bad interval {row[0]!r},{row[1]!r}"
                ) from None
            targets = tuple(t.strip() for t in row[2].split(";") if t.strip())
            try:
                out.append(
                    AttackInterval(
                        start=start,
                        end=end,
                        targets=targets,
                        category=row[3].strip(),
                        affects_process=_parse_bool(row[4], path, rownum),
                    )
                )
            except InvalidDataError as exc:
                raise ParseError(f"{path}: row {rownum}: {exc}") from None
    return out


def write_attacks(attacks, path) -> None:
    lines = [ATTACKS_HEADER]
    for a in attacks:
        lines.append(
            f"{a.start},{a.end},{';'.join(a.targets)},{a.category},"
            f"{'true' if a.affects_process else 'false'}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")
