"""
CSV writers. Every file is written to a temporary sibling and renamed into
place, so a failed run never leaves a partial file.
"""
import csv
import io
import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np

from fsikit.core.config import settings
from fsikit.schemas.results import Limit, SimTrace, SweepGrid

logger = logging.getLogger(__name__)


def fmt(value: float) -> str:
    """Fixed significant-digit formatting; +inf is written as ALWAYS_STABLE."""
    if isinstance(value, Limit):
        return value.value
    if np.isinf(value) and value > 0:
        return Limit.ALWAYS_STABLE.value
    return f"{float(value):.{settings.CSV_SIG_DIGITS}g}"


class ExportService:
    """Atomic CSV output for sweeps, curves and traces."""

    @staticmethod
    def write_atomic(path: Union[str, Path], text: str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        logger.info("Wrote %s", path)
        return path

    @staticmethod
    def to_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buffer.getvalue()

    @staticmethod
    def sweep_csv(grid: SweepGrid) -> str:
        """D,<p|z>,stable,<kmax|ktildemax>,straddle per cell, rows in D-major order."""
        bound_name = "kmax" if grid.axis_name == "p" else "ktildemax"
        rows = []
        for i, d in enumerate(grid.d_values):
            for j, a in enumerate(grid.axis_values):
                rows.append([fmt(d), fmt(a), str(bool(grid.stable[i, j])).lower(),
                             fmt(grid.bound[i, j]), str(bool(grid.straddle[i, j])).lower()])
        return ExportService.to_csv(["D", grid.axis_name, "stable", bound_name, "straddle"], rows)

    @staticmethod
    def overlay_csv(d_values: Sequence[float], bounds: Sequence[float]) -> str:
        return ExportService.to_csv(["D", "bound"], ([fmt(d), fmt(b)] for d, b in zip(d_values, bounds)))

    @staticmethod
    def curve_csv(d_values: Sequence[float], values: Sequence[float], name: str = "kmax") -> str:
        return ExportService.to_csv(["D", name], ([fmt(d), fmt(v)] for d, v in zip(d_values, values)))

    @staticmethod
    def pm_region_csv(d_values: Sequence[float], p_values: Sequence[float], pm: np.ndarray) -> str:
        rows = ([fmt(d), fmt(p), fmt(pm[i, j])] for i, d in enumerate(d_values) for j, p in enumerate(p_values))
        return ExportService.to_csv(["D", "p", "pm_deg"], rows)

    @staticmethod
    def trace_csv(trace: SimTrace) -> str:
        """t, states, v_o, y, h, switch at the output sample rate."""
        header: List[str] = ["t", *trace.state_labels, "v_o", "y", "h", "switch"]
        rows = []
        for k, t in enumerate(trace.times):
            rows.append([fmt(t), *(fmt(v) for v in trace.states[k]), fmt(trace.v_o[k]),
                         fmt(trace.y[k]), fmt(trace.h[k]), str(int(trace.switch[k]))])
        return ExportService.to_csv(header, rows)
