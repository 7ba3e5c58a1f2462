"""TSV array count per adjacent-layer boundary (exhaustive search on C3).

For a candidate count i, arrays are dropped uniformly at random on the upper
layer's grid-cell centers; every component with traffic crossing the boundary
attaches to its nearest array (planar Manhattan distance). The objective
    C3(i) = w_area * i * K  +  w_util * sum_j b_j * d_j
trades KOZ area against expected approach wiring, with b_j the bandwidth the
j-th array attracts and d_j its bandwidth-weighted mean approach distance.
Counts are small, so the argmin over i is found exhaustively.
"""

from __future__ import annotations

import random
from typing import NamedTuple, Sequence

from .anneal import mix_seed
from .errors import TooManyArraysError
from .model import CoreGraph, MeshFloorplan, ObjectiveWeights


class ArrayEstimate(NamedTuple):
    bandwidth: float  # b_j, Mb/s attracted by the array
    distance: float   # d_j, bandwidth-weighted mean Manhattan approach, mm


class TsvChoice(NamedTuple):
    count: int
    c3_by_count: dict[int, float]


def cross_boundary_traffic(core_graph: CoreGraph, layer_of: dict[str, int],
                           boundary: int) -> dict[str, float]:
    """Per-component bandwidth crossing the boundary (upward + downward)."""
    traffic: dict[str, float] = {}
    for flow in core_graph.flows:
        lo = min(layer_of[flow.src], layer_of[flow.dst])
        hi = max(layer_of[flow.src], layer_of[flow.dst])
        if lo <= boundary < hi:
            traffic[flow.src] = traffic.get(flow.src, 0.0) + flow.bandwidth
            traffic[flow.dst] = traffic.get(flow.dst, 0.0) + flow.bandwidth
    return traffic


def _component_positions(floorplans: Sequence[MeshFloorplan]) -> dict[str, tuple[float, float]]:
    return {comp: fp.cell_center(r, c)
            for fp in floorplans for (r, c), comp in fp.occupied_cells()}


def _layer_of(floorplans: Sequence[MeshFloorplan]) -> dict[str, int]:
    return {comp: fp.layer for fp in floorplans for _cell, comp in fp.occupied_cells()}


def estimate_arrays(floorplans: Sequence[MeshFloorplan], boundary: int,
                    core_graph: CoreGraph, i: int, samples: int,
                    seed: int) -> list[ArrayEstimate]:
    """Average per-array (b_j, d_j) over `samples` random array placements.

    Arrays land on upper-layer grid cell centers, sampled without
    replacement; within a trial they are canonically ordered by position so
    rank j is stable across trials.
    """
    if i < 1:
        raise TooManyArraysError(f"array count must be >= 1, got {i}")
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    upper = next(fp for fp in floorplans if fp.layer == boundary + 1)
    cells = [(r, c) for r in range(upper.rows) for c in range(upper.cols)]
    if i > len(cells):
        raise TooManyArraysError(
            f"{i} arrays requested but the upper grid has only {len(cells)} cells")

    traffic = cross_boundary_traffic(core_graph, _layer_of(floorplans), boundary)
    positions = _component_positions(floorplans)
    comps = sorted(traffic)

    acc_b = [0.0] * i
    acc_wd = [0.0] * i
    for trial in range(samples):
        rng = random.Random(mix_seed(seed, boundary, i, trial))
        chosen = rng.sample(cells, i)
        spots = sorted(upper.cell_center(r, c) for r, c in chosen)
        for comp in comps:
            px, py = positions[comp]
            best_j = 0
            best_dist = None
            for j, (ax, ay) in enumerate(spots):
                dist = abs(px - ax) + abs(py - ay)
                if best_dist is None or dist < best_dist - 1e-12:
                    best_j, best_dist = j, dist
            acc_b[best_j] += traffic[comp]
            acc_wd[best_j] += traffic[comp] * best_dist

    # bandwidth-weighted mean distance across trials keeps sum_j b_j * d_j an
    # unbiased estimate of the expected total approach wiring
    return [ArrayEstimate(acc_b[j] / samples,
                          (acc_wd[j] / acc_b[j]) if acc_b[j] > 0 else 0.0)
            for j in range(i)]


def c3_value(estimates: Sequence[ArrayEstimate], koz_area: float,
             weights: ObjectiveWeights) -> float:
    wiring = sum(e.bandwidth * e.distance for e in estimates)
    return weights.w_area * len(estimates) * koz_area + weights.w_util * wiring


def choose_count(floorplans: Sequence[MeshFloorplan], boundary: int,
                 core_graph: CoreGraph, koz_area: float, weights: ObjectiveWeights,
                 max_i: int, samples: int, seed: int) -> TsvChoice:
    """Exhaustive argmin of C3 over 1..max_i; ties go to the smaller count.
    A boundary without crossing traffic needs no arrays at all (count 0)."""
    traffic = cross_boundary_traffic(core_graph, _layer_of(floorplans), boundary)
    if not traffic:
        return TsvChoice(0, {0: 0.0})

    curve: dict[int, float] = {}
    best_i = None
    for i in range(1, max_i + 1):
        estimates = estimate_arrays(floorplans, boundary, core_graph, i, samples, seed)
        curve[i] = c3_value(estimates, koz_area, weights)
        if best_i is None or curve[i] < curve[best_i]:
            best_i = i
    if best_i is None:
        raise TooManyArraysError("max_i must be >= 1 for a boundary with traffic")
    return TsvChoice(best_i, curve)
