"""Per-epoch trace records shared by solvers, metrics, and the harness."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

CSV_HEADER = "epoch,iters_cumulative,gap,near_stationarity,radius,eta_x,eta_y,wallclock_ns"


@dataclass
class TraceRow:
    """One solver checkpoint.

    Exactly one of ``gap`` (SCSC solvers and baselines) or
    ``near_stationarity`` (WCSC solver) is populated per solver family;
    ``primal_value`` is an in-memory extra for WCSC traces and is not part
    of the CSV schema.
    """

    epoch: int
    iters_cumulative: int
    gap: Optional[float] = None
    near_stationarity: Optional[float] = None
    radius: Optional[float] = None
    eta_x: float = 0.0
    eta_y: float = 0.0
    wallclock_ns: int = 0
    primal_value: Optional[float] = None


Trace = list[TraceRow]
