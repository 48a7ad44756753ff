"""Simulation traces and their CSV form."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["DivergenceReport", "SimTrace", "export_csv", "read_csv"]

_COLUMN = re.compile(r"^(?P<channel>.+)\[(?P<k>\d+)\]$")
_DIVERGED = "# diverged"


@dataclass(frozen=True)
class DivergenceReport:
    time: float
    signal: str

    def __str__(self) -> str:
        return f"diverged at t={self.time:.6g} s: {self.signal}"


@dataclass
class SimTrace:
    """Time axis plus named channels, each an array of shape (len(times), k)."""

    times: np.ndarray
    channels: dict[str, np.ndarray]
    divergence: DivergenceReport | None = None
    final_state: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        fixed = {}
        for name, values in self.channels.items():
            values = np.asarray(values, dtype=float)
            if values.ndim == 1:
                values = values[:, None]
            elif values.ndim > 2:
                values = values.reshape(values.shape[0], -1)
            if values.shape[0] != self.times.shape[0]:
                raise ValueError(f"channel {name!r} has {values.shape[0]} samples, expected {self.times.shape[0]}")
            fixed[name] = values
        self.channels = fixed

    @property
    def diverged(self) -> bool:
        return self.divergence is not None

    def __len__(self) -> int:
        return int(self.times.shape[0])

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    def __contains__(self, name: str) -> bool:
        return name in self.channels

    def agents(self) -> list[int]:
        found = set()
        for name in self.channels:
            m = re.match(r"agent(\d+)\.", name)
            if m:
                found.add(int(m.group(1)))
        return sorted(found)

    def channel(self, agent: int, name: str) -> np.ndarray:
        return self.channels[f"agent{agent}.{name}"]

    def has(self, agent: int, name: str) -> bool:
        return f"agent{agent}.{name}" in self.channels

    def decimate(self, every: int) -> "SimTrace":
        if every <= 1:
            return self
        idx = np.arange(0, len(self), every)
        if idx[-1] != len(self) - 1:
            idx = np.append(idx, len(self) - 1)
        return SimTrace(
            self.times[idx],
            {k: v[idx] for k, v in self.channels.items()},
            self.divergence,
            self.final_state,
            dict(self.meta),
        )


def export_csv(trace: SimTrace, path) -> Path:
    """Write ``t`` then one ``channel[k]`` column per component."""
    if len(trace) == 0:
        raise ValueError("refusing to export an empty trace")
    path = Path(path)
    names = ["t"]
    blocks = [trace.times[:, None]]
    for name, values in trace.channels.items():
        names.extend(f"{name}[{k}]" for k in range(values.shape[1]))
        blocks.append(values)
    table = np.hstack(blocks)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(names) + "\n")
        np.savetxt(fh, table, delimiter=",", fmt="%.17g")
        if trace.divergence is not None:
            fh.write(f"{_DIVERGED} t={trace.divergence.time!r} signal={trace.divergence.signal}\n")
    return path


def read_csv(path) -> SimTrace:
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        lines = fh.read().splitlines()
    if not header or header[0] != "t":
        raise ValueError(f"{path}: first column must be 't'")
    divergence = None
    body = []
    for line in lines:
        if line.startswith(_DIVERGED):
            m = re.match(r"# diverged t=(\S+) signal=(.*)$", line)
            if m:
                divergence = DivergenceReport(float(m.group(1)), m.group(2))
        elif line.strip():
            body.append(line)
    if not body:
        raise ValueError(f"{path}: no samples")
    table = np.loadtxt(body, delimiter=",", ndmin=2)
    channels: dict[str, list[int]] = {}
    for col, name in enumerate(header[1:], start=1):
        m = _COLUMN.match(name)
        if not m:
            raise ValueError(f"{path}: malformed column name {name!r}")
        channels.setdefault(m.group("channel"), []).append(col)
    return SimTrace(table[:, 0], {k: table[:, cols] for k, cols in channels.items()}, divergence)
