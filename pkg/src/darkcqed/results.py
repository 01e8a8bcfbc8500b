"""Tabulated results and their CSV form."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ScanResult", "MapResult", "Record", "format_value", "write_csv"]

SIG_DIGITS = 12


@dataclass
class ScanResult:
    """One abscissa and any number of named observable columns."""

    abscissa_name: str
    abscissa: np.ndarray
    columns: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.abscissa = np.asarray(self.abscissa, dtype=float)
        if self.abscissa.ndim != 1 or self.abscissa.size == 0:
            raise ValueError("abscissa must be a non-empty 1-D array")
        steps = np.diff(self.abscissa)
        if self.abscissa.size > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("abscissa must be strictly monotone")
        self.columns = {k: np.asarray(v) for k, v in self.columns.items()}
        for name, col in self.columns.items():
            if col.shape != self.abscissa.shape:
                raise ValueError(
                    f"column {name!r} has shape {col.shape}, expected {self.abscissa.shape}"
                )

    def __getitem__(self, name: str) -> np.ndarray:
        if name == self.abscissa_name:
            return self.abscissa
        return self.columns[name]

    def __len__(self) -> int:
        return self.abscissa.size

    @property
    def header(self) -> list[str]:
        return [self.abscissa_name, *self.columns]

    def rows(self):
        cols = [self.abscissa, *self.columns.values()]
        for i in range(len(self)):
            yield [c[i] for c in cols]


@dataclass
class MapResult:
    """Observables on a rectangular ``(x, y)`` grid, ``shape == (len(x), len(y))``."""

    x_name: str
    x: np.ndarray
    y_name: str
    y: np.ndarray
    columns: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        shape = (self.x.size, self.y.size)
        self.columns = {k: np.asarray(v) for k, v in self.columns.items()}
        for name, col in self.columns.items():
            if col.shape != shape:
                raise ValueError(f"column {name!r} has shape {col.shape}, expected {shape}")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __len__(self) -> int:
        return self.x.size * self.y.size

    @property
    def header(self) -> list[str]:
        return [self.x_name, self.y_name, *self.columns]

    def rows(self):
        """Long format, ``x`` slowest."""
        for i, xv in enumerate(self.x):
            for j, yv in enumerate(self.y):
                yield [xv, yv, *(c[i, j] for c in self.columns.values())]


@dataclass
class Record:
    """A single row of named scalars."""

    values: dict

    def __getitem__(self, name: str):
        return self.values[name]

    def __len__(self) -> int:
        return 1

    @property
    def header(self) -> list[str]:
        return list(self.values)

    def rows(self):
        yield list(self.values.values())


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if v == 0.0:
        return "0"  # drop the sign of -0.0 so output is stable
    return f"{v:.{SIG_DIGITS}g}"


def write_csv(result, path=None, comments=()) -> str:
    """Render ``result`` as CSV text (LF endings) and optionally write it.

    ``comments`` are emitted first, each prefixed with ``# ``.
    """
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    buf.write(",".join(result.header) + "\n")
    for row in result.rows():
        buf.write(",".join(format_value(v) for v in row) + "\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text
