"""Per-layer floorplanning by simulated annealing, and post-placement
legalization once 3D routers and KOZs are known.

The annealer state is the cell->component map of a near-square grid
(ceil(sqrt(n)) columns x ceil(n / cols) rows); a move swaps two cells. Each
state is priced with the LP area kernel plus dimension-order (XY) routing of
the layer's internal flows on the LP geometry; the best state is re-sized
once with the exact kernel. Interlayer traffic is deliberately ignored here,
it is handled by the TSV and vertical-link steps.
"""

from __future__ import annotations

import math
import random
from typing import Optional, Sequence

from .anneal import SaParams, anneal, mix_seed
from .area_kernel import min_area_exact, min_area_exact_cached, min_area_lp
from .model import (
    ROUTER_2D,
    ROUTER_3D_BOTH,
    ROUTER_3D_DOWN,
    ROUTER_3D_UP,
    Instance,
    MeshFloorplan,
    ObjectiveWeights,
    VerticalLink,
    demand_grid,
    empty_floorplan,
    router_connects_down,
    router_is_3d,
)

State = tuple[Optional[str], ...]  # row-major cell contents


def step2_cost(instance: Instance, fp: MeshFloorplan,
               weights: ObjectiveWeights) -> float:
    """The annealer's objective for an existing placement: LP area plus the
    XY-routed intralayer communication (reporting / post-hoc comparison)."""
    if fp.rows == 0:
        return 0.0
    state: State = tuple(fp.cell_of[r][c] for r in range(fp.rows)
                         for c in range(fp.cols))
    demands = _demands_for_state(instance, fp.layer, state, fp.rows, fp.cols)
    lp = min_area_lp(demands)
    ids = {comp for comp in state if comp is not None}
    intra = [(f.src, f.dst, f.bandwidth) for f in instance.core_graph.flows
             if f.src in ids and f.dst in ids]
    comm = _xy_cost(state, fp.rows, fp.cols, lp.col_widths, lp.row_heights,
                    intra, instance.tech.link_capacity, weights.w_peak,
                    weights.w_util)
    return weights.w_area * lp.area + comm


def grid_dims(n: int) -> tuple[int, int]:
    """Near-square grid with at least n cells: ceil(sqrt(n)) columns."""
    if n == 0:
        return (0, 0)
    cols = math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    return rows, cols


def _state_to_cells(state: State, rows: int, cols: int):
    return tuple(tuple(state[r * cols + c] for c in range(cols)) for r in range(rows))


def _demands_for_state(instance: Instance, layer: int, state: State,
                       rows: int, cols: int) -> list[list[float]]:
    router_area = instance.router_entry(layer, three_d=False).area
    grid = [[0.0] * cols for _ in range(rows)]
    for idx, comp in enumerate(state):
        if comp is None:
            continue
        entry = instance.component_entry(comp, layer)
        grid[idx // cols][idx % cols] = entry.area + router_area
    return grid


def _xy_cost(state: State, rows: int, cols: int, widths: Sequence[float],
             heights: Sequence[float], intra_flows, capacity: float,
             w_peak: float, w_util: float) -> float:
    """Dimension-order routing over the full grid: columns first, then rows.
    Per-hop length is the center-to-center distance of the kernel geometry."""
    if not intra_flows or (w_peak == 0.0 and w_util == 0.0):
        return 0.0
    cell_index = {comp: i for i, comp in enumerate(state) if comp is not None}
    xs = []
    acc = 0.0
    for w in widths:
        xs.append(acc + w / 2.0)
        acc += w
    ys = []
    acc = 0.0
    for h in heights:
        ys.append(acc + h / 2.0)
        acc += h

    util = 0.0
    loads: dict[tuple[int, int, int, int], float] = {}
    for src, dst, bw in intra_flows:
        si, di = cell_index[src], cell_index[dst]
        r1, c1 = si // cols, si % cols
        r2, c2 = di // cols, di % cols
        util += bw * (abs(xs[c2] - xs[c1]) + abs(ys[r2] - ys[r1]))
        if w_peak > 0.0:
            r, c = r1, c1
            step = 1 if c2 > c else -1
            while c != c2:
                key = (r, c, r, c + step)
                loads[key] = loads.get(key, 0.0) + bw
                c += step
            step = 1 if r2 > r else -1
            while r != r2:
                key = (r, c, r + step, c)
                loads[key] = loads.get(key, 0.0) + bw
                r += step
    peak = sum(max(0.0, load - capacity) for load in loads.values())
    return w_peak * peak + w_util * util


def floorplan_layer(instance: Instance, layer: int, members: Sequence[str],
                    weights: ObjectiveWeights, sa_params: SaParams,
                    dims: Optional[tuple[int, int]] = None,
                    kernel_trace: Optional[list] = None) -> MeshFloorplan:
    """Anneal one layer's placement and return it with exact-kernel sizing.

    members must all be assigned to this layer. An empty layer yields the
    trivial 0x0 plan.
    """
    members = sorted(members)
    if not members:
        return empty_floorplan(layer)
    rows, cols = dims if dims is not None else grid_dims(len(members))
    if rows * cols < len(members):
        raise ValueError(f"grid {rows}x{cols} cannot hold {len(members)} components")

    ids = set(members)
    intra_flows = [(f.src, f.dst, f.bandwidth) for f in instance.core_graph.flows
                   if f.src in ids and f.dst in ids]
    capacity = instance.tech.link_capacity

    initial: State = tuple(members[i] if i < len(members) else None
                           for i in range(rows * cols))

    def cost(state: State) -> float:
        demands = _demands_for_state(instance, layer, state, rows, cols)
        lp = min_area_lp(demands)
        if kernel_trace is not None:
            kernel_trace.append({"layer": layer, "demands": demands, "area": lp.area})
        comm = _xy_cost(state, rows, cols, lp.col_widths, lp.row_heights,
                        intra_flows, capacity, weights.w_peak, weights.w_util)
        return weights.w_area * lp.area + comm

    def neighbor(state: State, rng: random.Random) -> State:
        n = len(state)
        for _ in range(16):
            i, j = rng.randrange(n), rng.randrange(n)
            if i != j and not (state[i] is None and state[j] is None):
                cells = list(state)
                cells[i], cells[j] = cells[j], cells[i]
                return tuple(cells)
        return state

    if len(members) == rows * cols == 1:
        best = initial
    else:
        best, _, _ = anneal(initial, neighbor, cost, sa_params)

    demands = _demands_for_state(instance, layer, best, rows, cols)
    sized = min_area_exact(demands)
    cells = _state_to_cells(best, rows, cols)
    router = tuple(tuple(ROUTER_2D if comp is not None else None for comp in row)
                   for row in cells)
    koz = tuple(tuple(0 for _ in range(cols)) for _ in range(rows))
    return MeshFloorplan(layer=layer, rows=rows, cols=cols, cell_of=cells,
                         col_widths=sized.col_widths, row_heights=sized.row_heights,
                         router_kind=router, koz_of=koz)


# ---------------------------------------------------------------------------
# legalization (router kinds, KOZ charging, re-sizing)
# ---------------------------------------------------------------------------

def _router_kinds_from_vlinks(floorplans: Sequence[MeshFloorplan],
                              vlinks: Sequence[VerticalLink]):
    kinds: dict[tuple[int, int, int], str] = {}

    def add(key, direction):
        prev = kinds.get(key)
        if prev is None:
            kinds[key] = direction
        elif prev != direction:
            kinds[key] = ROUTER_3D_BOTH

    for v in vlinks:
        add(v.lower, ROUTER_3D_UP)
        add(v.upper, ROUTER_3D_DOWN)
    return kinds


def _apply_router_kinds(fp: MeshFloorplan, kinds) -> MeshFloorplan:
    router = [[None] * fp.cols for _ in range(fp.rows)]
    for (r, c), _comp in fp.occupied_cells():
        router[r][c] = kinds.get((fp.layer, r, c), ROUTER_2D)
    return MeshFloorplan(layer=fp.layer, rows=fp.rows, cols=fp.cols,
                         cell_of=fp.cell_of, col_widths=fp.col_widths,
                         row_heights=fp.row_heights,
                         router_kind=tuple(tuple(row) for row in router),
                         koz_of=fp.koz_of)


def _with_koz(fp: MeshFloorplan, koz) -> MeshFloorplan:
    return MeshFloorplan(layer=fp.layer, rows=fp.rows, cols=fp.cols,
                         cell_of=fp.cell_of, col_widths=fp.col_widths,
                         row_heights=fp.row_heights, router_kind=fp.router_kind,
                         koz_of=tuple(tuple(row) for row in koz))


def _with_sizing(fp: MeshFloorplan, widths, heights) -> MeshFloorplan:
    return MeshFloorplan(layer=fp.layer, rows=fp.rows, cols=fp.cols,
                         cell_of=fp.cell_of, col_widths=tuple(widths),
                         row_heights=tuple(heights), router_kind=fp.router_kind,
                         koz_of=fp.koz_of)


def _place_kozs(instance: Instance, fp: MeshFloorplan,
                redistribute: bool) -> MeshFloorplan:
    """Charge one KOZ per downward-connecting router. With redistribution the
    KOZ may move to the cell within reach whose extra demand hurts the layer
    area least (ties: nearest cell, then row/col order)."""
    koz = [[0] * fp.cols for _ in range(fp.rows)]
    down_routers = [(r, c) for (r, c), _comp in fp.occupied_cells()
                    if router_connects_down(fp.router_kind[r][c])]
    reach = instance.tech.rd_max_length
    for r, c in down_routers:
        if not redistribute or reach <= 0.0:
            koz[r][c] += 1
            continue
        center = fp.cell_center(r, c)
        candidates = []
        for rr in range(fp.rows):
            for cc in range(fp.cols):
                other = fp.cell_center(rr, cc)
                dist = abs(other[0] - center[0]) + abs(other[1] - center[1])
                if dist <= reach + 1e-9:
                    candidates.append((dist, rr, cc))
        candidates.sort()
        best = None
        for dist, rr, cc in candidates:
            koz[rr][cc] += 1
            trial = _with_koz(fp, koz)
            area = min_area_exact_cached(demand_grid(instance, trial)).area
            koz[rr][cc] -= 1
            key = (area, dist, rr, cc)
            if best is None or key < best[0]:
                best = (key, rr, cc)
        koz[best[1]][best[2]] += 1
    return _with_koz(fp, koz)


def legalize(instance: Instance, floorplans: Sequence[MeshFloorplan],
             vlinks: Sequence[VerticalLink], redistribute: bool = True,
             colocated: bool = False) -> list[MeshFloorplan]:
    """Re-size every layer with the full demands: component + router kind
    (2D or 3D) + KOZs of downward connections. Placements stay fixed.

    With colocated=True all layers share one sizing solved on the per-cell
    maximum demand, keeping routers of different layers exactly stacked
    (the conventional no-redistribution protocol).
    """
    kinds = _router_kinds_from_vlinks(floorplans, vlinks)
    staged = []
    for fp in floorplans:
        if fp.rows == 0:
            staged.append(fp)
            continue
        fp2 = _apply_router_kinds(fp, kinds)
        fp2 = _place_kozs(instance, fp2, redistribute=redistribute and not colocated)
        staged.append(fp2)

    if colocated:
        sized = [fp for fp in staged if fp.rows > 0]
        if not sized:
            return staged
        rows = sized[0].rows
        cols = sized[0].cols
        if any(fp.rows != rows or fp.cols != cols for fp in sized):
            raise ValueError("colocated legalization requires identical grid dims")
        combined = [[max(cell_d) for cell_d in zip(*rows_d)]
                    for rows_d in zip(*(demand_grid(instance, fp) for fp in sized))]
        solution = min_area_exact_cached(combined)
        return [fp if fp.rows == 0 else
                _with_sizing(fp, solution.col_widths, solution.row_heights)
                for fp in staged]

    out = []
    for fp in staged:
        if fp.rows == 0:
            out.append(fp)
            continue
        demands = demand_grid(instance, fp)
        solution = min_area_exact_cached(demands)
        out.append(_with_sizing(fp, solution.col_widths, solution.row_heights))
    return out


def joint_size(instance: Instance, floorplans: Sequence[MeshFloorplan]) -> list[MeshFloorplan]:
    """Share one sizing across layers (per-cell max demand); used before the
    TSV steps when routers must be exactly stacked (no redistribution)."""
    return legalize(instance, floorplans, vlinks=(), redistribute=False, colocated=True)
