"""Drive-cycle container and CSV loader.

Cycle files are two-column CSV with header ``time_s,speed_mph`` or
``time_s,speed_mps``; timestamps must be uniformly spaced.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Tuple

from .units import MPH_TO_MPS


class CycleFormatError(ValueError):
    """Raised for malformed cycle files; message names the offending row."""


@dataclass(frozen=True)
class DriveCycle:
    name: str
    timestamps_s: Tuple[float, ...]
    speeds_mps: Tuple[float, ...]

    @property
    def dt_s(self) -> float:
        return self.timestamps_s[1] - self.timestamps_s[0]

    @property
    def n_samples(self) -> int:
        return len(self.timestamps_s)

    @property
    def duration_s(self) -> float:
        return self.timestamps_s[-1] - self.timestamps_s[0]

    @property
    def max_speed_mps(self) -> float:
        return max(self.speeds_mps)


def load_cycle(path: str, name: str = "") -> DriveCycle:
    """Parse a cycle CSV, validating header, spacing and speed signs."""
    with open(path, "r", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].lstrip().startswith("#")]
    if not rows:
        raise CycleFormatError(f"{path}: empty cycle file")
    header = [c.strip().lower() for c in rows[0]]
    if len(header) < 2 or header[0] != "time_s" or header[1] not in ("speed_mph", "speed_mps"):
        raise CycleFormatError(
            f"{path}: missing header; expected 'time_s,speed_mph' or 'time_s,speed_mps'"
        )
    to_mps = MPH_TO_MPS if header[1] == "speed_mph" else 1.0

    times = []
    speeds = []
    for i, row in enumerate(rows[1:], start=1):
        try:
            t = float(row[0])
            v = float(row[1])
        except (ValueError, IndexError) as exc:
            raise CycleFormatError(f"{path}: unparseable values at row {i}") from exc
        if v < 0.0:
            raise CycleFormatError(f"{path}: negative speed at row {i}")
        times.append(t)
        speeds.append(v * to_mps)
    if len(times) < 2:
        raise CycleFormatError(f"{path}: cycle needs at least two samples")

    # Cycles are sampled at 1 Hz; flag the first row breaking the spacing.
    for i in range(1, len(times)):
        if abs((times[i] - times[i - 1]) - 1.0) > 1e-9:
            raise CycleFormatError(f"{path}: non-uniform timestep at row {i + 1}")

    return DriveCycle(
        name=name or path,
        timestamps_s=tuple(times),
        speeds_mps=tuple(speeds),
    )
