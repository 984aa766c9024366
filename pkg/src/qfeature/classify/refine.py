"""Grid-shrinking search for the bump peak of an unknown process."""
from dataclasses import dataclass, field

import numpy as np

from .distance import ReferencePoint, nearest_reference


@dataclass
class RefineStage:
    grid: list
    reports: list
    best: float


@dataclass
class RefineResult:
    estimate: float
    stages: list = field(default_factory=list)


def next_grid(grid, totals, cells=6):
    """Cell centres between the argmin and its closer neighbour.

    For an argmin at 240 with neighbour 120 and six cells this yields
    130, 150, ..., 230.
    """
    grid = list(grid)
    totals = np.asarray(totals, dtype=np.float64)
    order = np.argsort(grid)
    g = np.asarray(grid, dtype=np.float64)[order]
    t = totals[order]
    i = int(np.argmin(t))
    if len(g) == 1:
        return [float(g[0])]
    if i == 0:
        j = 1
    elif i == len(g) - 1:
        j = i - 1
    else:
        j = i - 1 if t[i - 1] <= t[i + 1] else i + 1
    lo, hi = sorted((g[i], g[j]))
    return [float(lo + (hi - lo) * (c + 0.5) / cells) for c in range(cells)]


def refine_peak_search(unknown_cluster, make_reference, grid_of_peaks, budget, cells=6):
    """Iteratively compare the cluster against references on shrinking grids.

    ``make_reference(peak)`` returns the QFS point of the candidate process;
    ``budget`` is the number of stages.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    grid = [float(g) for g in grid_of_peaks]
    result = RefineResult(estimate=float("nan"))
    for _ in range(budget):
        refs = [ReferencePoint(f"{g:g}", make_reference(g)) for g in grid]
        _, reports, _ = nearest_reference(unknown_cluster, refs)
        totals = [r.total for r in reports]
        best = grid[int(np.argmin(totals))]
        result.stages.append(RefineStage(list(grid), reports, best))
        result.estimate = best
        grid = next_grid(grid, totals, cells)
    return result
