"""Logged simulation trace and its CSV form."""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import IoFailure, ParseFailure, SchemaMismatch


class TraceRecord(NamedTuple):
    t: float
    load_torque: float
    speed_ref: float
    speed_actual: float
    speed_rad: float
    te: float
    ia: float
    ib: float
    ic: float
    ea: float
    eb: float
    ec: float
    emf_norm_a: float
    emf_norm_b: float
    emf_norm_c: float
    hall_a: int
    hall_b: int
    hall_c: int
    pwm_a: int
    pwm_b: int
    pwm_c: int
    pwm_d: int
    pwm_e: int
    pwm_f: int
    duty: float


COLUMNS = TraceRecord._fields
BINARY_COLUMNS = ("hall_a", "hall_b", "hall_c", "pwm_a", "pwm_b", "pwm_c", "pwm_d", "pwm_e", "pwm_f")
HALL_COLUMNS = BINARY_COLUMNS[:3]
PWM_COLUMNS = BINARY_COLUMNS[3:]
EMF_NORM_COLUMNS = ("emf_norm_a", "emf_norm_b", "emf_norm_c")


@dataclass
class Trace:
    """Column-major trace: one float array per :class:`TraceRecord` field."""

    data: np.ndarray  # shape (n, len(COLUMNS))
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != len(COLUMNS):
            raise SchemaMismatch(f"trace data must have {len(COLUMNS)} columns")

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.data[:, COLUMNS.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def __contains__(self, name):
        return name in COLUMNS

    @property
    def columns(self):
        return COLUMNS

    def record(self, i: int) -> TraceRecord:
        row = self.data[i]
        return TraceRecord(*(int(v) if c in BINARY_COLUMNS else float(v) for c, v in zip(COLUMNS, row)))

    def records(self):
        for i in range(len(self)):
            yield self.record(i)


_FMT = ["%d" if c in BINARY_COLUMNS else "%.9g" for c in COLUMNS]


def trace_to_csv_text(trace: Trace) -> str:
    buf = io.StringIO()
    np.savetxt(buf, trace.data, fmt=_FMT, delimiter=",", header=",".join(COLUMNS), comments="")
    return buf.getvalue()


def export_csv(trace: Trace, destination) -> None:
    """Write ``trace`` with a header row; floats at 9 significant digits."""
    if len(trace) == 0:
        raise ValueError("cannot export an empty trace")
    text = trace_to_csv_text(trace)
    try:
        with open(destination, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write trace to {destination}: {exc}") from exc


def import_csv(source) -> Trace:
    try:
        fh = open(source, newline="") if isinstance(source, (str, os.PathLike)) else source
    except OSError as exc:
        raise IoFailure(f"cannot read {source}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != COLUMNS:
            raise SchemaMismatch(f"trace header does not match schema: {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(COLUMNS):
                raise ParseFailure(f"line {lineno}: expected {len(COLUMNS)} fields, got {len(row)}",
                                   row=lineno)
            values = []
            for col, cell in zip(COLUMNS, row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseFailure(f"line {lineno}, column {col!r}: cannot parse {cell!r}",
                                       row=lineno, column=col) from None
            rows.append(values)
    return Trace(np.array(rows, dtype=float).reshape(-1, len(COLUMNS)))
