"""Named real-valued channels sampled on a strictly increasing time grid."""

from __future__ import annotations

import os
import tempfile

import numpy as np

CSV_FLOAT_FORMAT = "%.17g"


class TimeSeries:
    """Immutable container: one time grid, several equally long channels.

    Channel order is preserved and defines the CSV column order.
    """

    __slots__ = ("times", "channels")

    def __init__(self, times, channels: dict[str, np.ndarray]):
        times = np.array(times, dtype=float).reshape(-1)
        if times.size == 0:
            raise ValueError("time grid is empty")
        if times.size > 1 and not np.all(np.diff(times) > 0.0):
            raise ValueError("time grid must be strictly increasing")
        clean: dict[str, np.ndarray] = {}
        for name, values in channels.items():
            values = np.array(values, dtype=float).reshape(-1)
            if values.shape != times.shape:
                raise ValueError(
                    f"channel {name!r} has length {values.size}, expected {times.size}"
                )
            values.setflags(write=False)
            clean[str(name)] = values
        times.setflags(write=False)
        self.times = times
        self.channels = clean

    def channel(self, name: str) -> np.ndarray:
        if name not in self.channels:
            raise KeyError(f"no channel {name!r}; available: {sorted(self.channels)}")
        return self.channels[name]

    def __len__(self) -> int:
        return self.times.size

    def to_csv(self, path) -> None:
        """Write ``t`` plus all channels, 17 significant digits, atomically."""
        path = os.fspath(path)
        names = ["t", *self.channels.keys()]
        columns = [self.times, *self.channels.values()]
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(",".join(names) + "\n")
                for row in zip(*columns):
                    fh.write(",".join(CSV_FLOAT_FORMAT % v for v in row) + "\n")
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise

    @classmethod
    def from_csv(cls, path) -> "TimeSeries":
        with open(path, "r", newline="") as fh:
            header = fh.readline().strip()
            names = header.split(",")
            if not names or names[0] != "t":
                raise ValueError(f"malformed trajectory CSV header: {header!r}")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        if data.shape[1] != len(names):
            raise ValueError(f"CSV has {data.shape[1]} columns, header names {len(names)}")
        channels = {name: data[:, k] for k, name in enumerate(names[1:], start=1)}
        return cls(data[:, 0], channels)
