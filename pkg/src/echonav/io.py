"""CSV persistence for flight logs and summary tables.

Floats are written with ``repr`` so every value re-reads bit-identically;
absent values are empty cells. Column orders are fixed and documented in
the README.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

from .sim import FlightRecord, FlightRow

FLIGHT_COLUMNS = [f.name for f in fields(FlightRow)]
SUMMARY_COLUMNS = ["run_id", "sensor", "seed", "time_s", "crash", "distance_m", "outcome"]


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "item"):  # numpy scalar
        return format_cell(value.item())
    return str(value)


def write_rows(path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return path


def read_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


def _opt_float(cell: str) -> float | None:
    return None if cell == "" else float(cell)


def _opt_int(cell: str) -> int | None:
    return None if cell == "" else int(cell)


def write_flight_csv(path, record: FlightRecord) -> Path:
    return write_rows(
        path, FLIGHT_COLUMNS, ([getattr(row, c) for c in FLIGHT_COLUMNS] for row in record.rows)
    )


def read_flight_csv(path) -> list[FlightRow]:
    header, body = read_rows(path)
    if header != FLIGHT_COLUMNS:
        raise ValueError(f"{path}: unexpected flight log header {header}")
    rows = []
    for cells in body:
        c = dict(zip(header, cells))
        rows.append(
            FlightRow(
                tick=int(c["tick"]),
                elapsed=float(c["elapsed"]),
                x=float(c["x"]),
                y=float(c["y"]),
                heading=float(c["heading"]),
                sensor=c["sensor"],
                distance=_opt_float(c["distance"]),
                sample_index=_opt_int(c["sample_index"]),
                peak_value=float(c["peak_value"]),
                source_tick=int(c["source_tick"]),
                velocity=float(c["velocity"]),
                yaw_rate=float(c["yaw_rate"]),
            )
        )
    return rows


@dataclass(frozen=True)
class SummaryRow:
    run_id: str
    sensor: str
    seed: int
    time_s: float
    crash: bool
    distance_m: float
    outcome: str

    @classmethod
    def from_record(cls, record: FlightRecord) -> "SummaryRow":
        return cls(
            f"{record.sensor}-{record.seed}",
            record.sensor,
            int(record.seed),
            float(record.total_time),
            record.crashed,
            float(record.total_distance),
            record.outcome,
        )


@dataclass
class SummaryTable:
    """Per-run outcomes; every aggregate is recomputed from the rows."""

    rows: list[SummaryRow]

    def __len__(self):
        return len(self.rows)

    @property
    def mean_time(self) -> float:
        return sum(r.time_s for r in self.rows) / len(self.rows) if self.rows else 0.0

    @property
    def mean_distance(self) -> float:
        return sum(r.distance_m for r in self.rows) / len(self.rows) if self.rows else 0.0

    @property
    def crash_rate(self) -> float:
        return sum(r.crash for r in self.rows) / len(self.rows) if self.rows else 0.0

    @property
    def time_per_crash(self) -> float | None:
        crashes = sum(r.crash for r in self.rows)
        return sum(r.time_s for r in self.rows) / crashes if crashes else None

    @property
    def distance_per_crash(self) -> float | None:
        crashes = sum(r.crash for r in self.rows)
        return sum(r.distance_m for r in self.rows) / crashes if crashes else None

    def filter(self, sensor: str) -> "SummaryTable":
        return SummaryTable([r for r in self.rows if r.sensor == sensor])

    def format(self) -> str:
        lines = [f"{'run':>10} {'time [s]':>9} {'crash':>6} {'distance [m]':>13}"]
        for r in self.rows:
            lines.append(f"{r.run_id:>10} {r.time_s:9.1f} {'yes' if r.crash else 'no':>6} {r.distance_m:13.1f}")
        lines.append(
            f"{'average':>10} {self.mean_time:9.1f} {100 * self.crash_rate:5.0f}% {self.mean_distance:13.1f}"
        )
        if self.distance_per_crash is not None:
            lines.append(
                f"{'per crash':>10} {self.time_per_crash:9.1f} {'':>6} {self.distance_per_crash:13.1f}"
            )
        return "\n".join(lines)


def write_summary_csv(path, table: SummaryTable) -> Path:
    body = [[getattr(r, c) for c in SUMMARY_COLUMNS] for r in table.rows]
    body.append(["average", "", "", table.mean_time, table.crash_rate, table.mean_distance, ""])
    return write_rows(path, SUMMARY_COLUMNS, body)


def read_summary_csv(path) -> SummaryTable:
    """Parse per-run rows; the trailing averages row is checked, not trusted."""
    header, body = read_rows(path)
    if header != SUMMARY_COLUMNS:
        raise ValueError(f"{path}: unexpected summary header {header}")
    rows = []
    averages = None
    for cells in body:
        c = dict(zip(header, cells))
        if c["run_id"] == "average":
            averages = c
            continue
        rows.append(
            SummaryRow(
                c["run_id"],
                c["sensor"],
                int(c["seed"]),
                float(c["time_s"]),
                c["crash"] == "1",
                float(c["distance_m"]),
                c["outcome"],
            )
        )
    table = SummaryTable(rows)
    if averages is not None and rows:
        if abs(float(averages["distance_m"]) - table.mean_distance) > 1e-9 * max(1.0, table.mean_distance):
            raise ValueError(f"{path}: averages row disagrees with per-run rows")
    return table
