"""Domain model: core graph, PPA tables, floorplans, network graphs.

Instances are described by three JSON documents (see schemas/instance.schema.json):
  coregraph.json  components + bandwidth-weighted directed flows
  ppa.json        layer stack + per-kind per-node area/perf/power tables
  tech.json       keep-out-zone area, redistribution reach, link capacity

All types are immutable after validation and safe to share across workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Optional, Sequence, Union

from .errors import ValidationError

INFEASIBLE_MARKERS = ("infeasible", "n.a.", "na", "n/a")

ROUTER_2D = "2d"
ROUTER_3D_UP = "3d-up"
ROUTER_3D_DOWN = "3d-down"
ROUTER_3D_BOTH = "3d-both"
ROUTER_KINDS = (ROUTER_2D, ROUTER_3D_UP, ROUTER_3D_DOWN, ROUTER_3D_BOTH)


# ---------------------------------------------------------------------------
# core types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Component:
    id: str
    kind: str


@dataclass(frozen=True)
class Flow:
    src: str
    dst: str
    bandwidth: float  # Mb/s


@dataclass(frozen=True)
class CoreGraph:
    components: tuple[Component, ...]
    flows: tuple[Flow, ...]

    def component_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.components)

    def kind_of(self, comp_id: str) -> str:
        for c in self.components:
            if c.id == comp_id:
                return c.kind
        raise KeyError(comp_id)

    def kinds(self) -> dict[str, str]:
        return {c.id: c.kind for c in self.components}


@dataclass(frozen=True)
class Layer:
    index: int
    node_name: str  # technology node, e.g. "28nm"


@dataclass(frozen=True)
class PpaEntry:
    area: float   # mm^2
    perf: float   # relative (larger = slower)
    power: float  # relative


@dataclass(frozen=True)
class PpaTable:
    """Per-kind, per-node PPA values. A missing entry marks an infeasible node.

    Routers always have entries for every node; only component kinds may be
    infeasible in a node.
    """

    components: Mapping[str, Mapping[str, Optional[PpaEntry]]]
    router_2d: Mapping[str, PpaEntry]
    router_3d: Mapping[str, PpaEntry]

    def component_entry(self, kind: str, node: str) -> Optional[PpaEntry]:
        table = self.components.get(kind)
        if table is None:
            return None
        return table.get(node)


@dataclass(frozen=True)
class TechParams:
    koz_area: float        # mm^2 reserved per downward vertical connection
    rd_max_length: float   # mm, max redistribution wire length
    link_capacity: float   # Mb/s per directed link


@dataclass(frozen=True)
class ObjectiveWeights:
    w_area: float = 1.0
    w_power: float = 1.0
    w_perf: float = 1.0
    w_peak: float = 1.0
    w_util: float = 1.0

    def __post_init__(self):
        vals = (self.w_area, self.w_power, self.w_perf, self.w_peak, self.w_util)
        if any(w < 0 for w in vals):
            raise ValueError("objective weights must be nonnegative")
        if all(w == 0 for w in vals):
            raise ValueError("at least one objective weight must be positive")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.w_area, self.w_power, self.w_perf, self.w_peak, self.w_util)


@dataclass(frozen=True)
class Instance:
    """A validated problem instance; the only way to build one is validate_instance."""

    core_graph: CoreGraph
    ppa: PpaTable
    tech: TechParams
    layers: tuple[Layer, ...]
    kinds: Mapping[str, str] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.kinds is None:
            object.__setattr__(self, "kinds", self.core_graph.kinds())

    def node_of(self, layer_index: int) -> str:
        return self.layers[layer_index].node_name

    def component_entry(self, comp_id: str, layer_index: int) -> Optional[PpaEntry]:
        return self.ppa.component_entry(self.kinds[comp_id], self.node_of(layer_index))

    def area_of(self, comp_id: str, layer_index: int) -> Optional[float]:
        entry = self.component_entry(comp_id, layer_index)
        return None if entry is None else entry.area

    def feasible_layers(self, comp_id: str) -> tuple[int, ...]:
        return tuple(l.index for l in self.layers
                     if self.component_entry(comp_id, l.index) is not None)

    def router_entry(self, layer_index: int, three_d: bool) -> PpaEntry:
        node = self.node_of(layer_index)
        return self.ppa.router_3d[node] if three_d else self.ppa.router_2d[node]

    def boundaries(self) -> tuple[int, ...]:
        """Adjacent-layer boundaries; boundary b joins layers b and b+1."""
        return tuple(range(len(self.layers) - 1))


# ---------------------------------------------------------------------------
# floorplan / network / traffic types
# ---------------------------------------------------------------------------

Cell = tuple[int, int]          # (row, col)
NodeKey = tuple[int, int, int]  # (layer, row, col)


@dataclass(frozen=True)
class MeshFloorplan:
    """One layer's mesh floorplan: a grid of cells with shared column widths
    and row heights. Cells are addressed [row][col]."""

    layer: int
    rows: int
    cols: int
    cell_of: tuple[tuple[Optional[str], ...], ...]       # component id or None
    col_widths: tuple[float, ...]
    row_heights: tuple[float, ...]
    router_kind: tuple[tuple[Optional[str], ...], ...]   # ROUTER_* or None for empty cells
    koz_of: tuple[tuple[int, ...], ...]                  # KOZ count charged per cell

    @property
    def width(self) -> float:
        return sum(self.col_widths)

    @property
    def height(self) -> float:
        return sum(self.row_heights)

    @property
    def area(self) -> float:
        return self.width * self.height

    def occupied_cells(self) -> Iterator[tuple[Cell, str]]:
        for r in range(self.rows):
            for c in range(self.cols):
                comp = self.cell_of[r][c]
                if comp is not None:
                    yield (r, c), comp

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        x = sum(self.col_widths[:col]) + self.col_widths[col] / 2.0
        y = sum(self.row_heights[:row]) + self.row_heights[row] / 2.0
        return x, y

    def position_of(self, comp_id: str) -> Cell:
        for (r, c), comp in self.occupied_cells():
            if comp == comp_id:
                return (r, c)
        raise KeyError(comp_id)


def empty_floorplan(layer: int) -> MeshFloorplan:
    return MeshFloorplan(layer=layer, rows=0, cols=0, cell_of=(), col_widths=(),
                         row_heights=(), router_kind=(), koz_of=())


@dataclass(frozen=True)
class VerticalLink:
    lower: NodeKey
    upper: NodeKey
    rd_length: float  # mm, planar Manhattan distance between the two router centers

    def __post_init__(self):
        if self.upper[0] != self.lower[0] + 1:
            raise ValueError("vertical links join adjacent layers only")


@dataclass(frozen=True)
class TrafficEval:
    """Measured network outcome for one routing of all flows."""

    loads: Mapping[tuple[NodeKey, NodeKey], float]  # per directed link, Mb/s
    bw_times_distance: float                        # mm * Mb/s
    bw_times_hops: float                            # hops * Mb/s (secondary metric)
    max_link_load: float                            # Mb/s
    peak_penalty: float                             # Mb/s over-capacity excess, summed
    whitespace_per_layer: tuple[float, ...] = ()
    whitespace_total: float = 0.0


# ---------------------------------------------------------------------------
# cell demand rules (router + KOZ geometry)
# ---------------------------------------------------------------------------

def router_is_3d(kind: Optional[str]) -> bool:
    return kind in (ROUTER_3D_UP, ROUTER_3D_DOWN, ROUTER_3D_BOTH)


def router_connects_down(kind: Optional[str]) -> bool:
    return kind in (ROUTER_3D_DOWN, ROUTER_3D_BOTH)


def cell_demand(instance: Instance, fp: MeshFloorplan, row: int, col: int) -> float:
    """Area a cell must provide: component + router + any KOZ charged there.

    Bonding is face-to-back, so a downward-connecting router carries a KOZ on
    its own layer; with redistribution the KOZ may have been charged to a
    nearby cell instead (tracked by koz_of).
    """
    comp = fp.cell_of[row][col]
    demand = fp.koz_of[row][col] * instance.tech.koz_area
    if comp is not None:
        entry = instance.component_entry(comp, fp.layer)
        if entry is None:
            raise ValueError(f"component {comp!r} infeasible in layer {fp.layer}")
        demand += entry.area
        demand += instance.router_entry(fp.layer, router_is_3d(fp.router_kind[row][col])).area
    return demand


def demand_grid(instance: Instance, fp: MeshFloorplan) -> list[list[float]]:
    return [[cell_demand(instance, fp, r, c) for c in range(fp.cols)]
            for r in range(fp.rows)]


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    code: str
    message: str


def _positive(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) and x > 0


def _nonnegative(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) and x >= 0


def instance_violations(core_graph: CoreGraph, ppa: PpaTable, tech: TechParams,
                        layers: Sequence[Layer]) -> list[Violation]:
    """Collect every invariant violation; empty list means the instance is valid."""
    out: list[Violation] = []

    # layer stack
    indices = [l.index for l in layers]
    if sorted(indices) != list(range(len(layers))):
        out.append(Violation("MalformedTable", f"layer indices must be contiguous from 0, got {indices}"))
    nodes = {l.node_name for l in layers}

    # PPA tables
    for node in nodes:
        for name, table in (("2d", ppa.router_2d), ("3d", ppa.router_3d)):
            entry = table.get(node)
            if entry is None:
                out.append(Violation("MalformedTable", f"router {name} table has no entry for node {node!r}"))
            elif not all(_positive(v) for v in (entry.area, entry.perf, entry.power)):
                out.append(Violation("MalformedTable", f"router {name} entry for node {node!r} must be positive"))
    for kind, table in sorted(ppa.components.items()):
        for node, entry in sorted(table.items()):
            if entry is None:
                continue
            if not all(_positive(v) for v in (entry.area, entry.perf, entry.power)):
                out.append(Violation("MalformedTable", f"PPA entry for {kind!r} in {node!r} must be positive"))

    # tech params
    if not _nonnegative(tech.koz_area):
        out.append(Violation("MalformedTable", f"koz_area must be >= 0, got {tech.koz_area}"))
    if not _nonnegative(tech.rd_max_length):
        out.append(Violation("MalformedTable", f"rd_max_length must be >= 0, got {tech.rd_max_length}"))
    if not _positive(tech.link_capacity):
        out.append(Violation("MalformedTable", f"link_capacity must be > 0, got {tech.link_capacity}"))

    # components
    seen: set[str] = set()
    for comp in core_graph.components:
        if comp.id in seen:
            out.append(Violation("DuplicateComponent", f"component id {comp.id!r} appears more than once"))
        seen.add(comp.id)
        feasible = [l for l in layers
                    if ppa.component_entry(comp.kind, l.node_name) is not None]
        if layers and not feasible:
            out.append(Violation("NoFeasibleLayer", f"component {comp.id!r} ({comp.kind!r}) is feasible in no layer"))

    # flows
    ids = {c.id for c in core_graph.components}
    for flow in core_graph.flows:
        if flow.src not in ids:
            out.append(Violation("UnknownComponent", f"flow source {flow.src!r} is not a component"))
        if flow.dst not in ids:
            out.append(Violation("UnknownComponent", f"flow destination {flow.dst!r} is not a component"))
        if flow.src == flow.dst:
            out.append(Violation("SelfFlow", f"flow {flow.src!r} -> {flow.dst!r} loops onto itself"))
        if not _positive(flow.bandwidth):
            out.append(Violation("NegativeBandwidth",
                                 f"flow {flow.src!r} -> {flow.dst!r} bandwidth must be > 0, got {flow.bandwidth}"))
    return out


def validate_instance(core_graph: CoreGraph, ppa: PpaTable, tech: TechParams,
                      layers: Sequence[Layer]) -> Instance:
    """Validate everything and return an immutable Instance, or raise ValidationError."""
    violations = instance_violations(core_graph, ppa, tech, layers)
    if violations:
        raise ValidationError(violations)
    ordered = tuple(sorted(layers, key=lambda l: l.index))
    return Instance(core_graph=core_graph, ppa=ppa, tech=tech, layers=ordered)


# ---------------------------------------------------------------------------
# JSON parsing / serialization
# ---------------------------------------------------------------------------

def parse_core_graph(doc: dict) -> CoreGraph:
    comps = tuple(Component(id=str(c["id"]), kind=str(c["kind"]))
                  for c in doc.get("components", []))
    flows = tuple(Flow(src=str(f["src"]), dst=str(f["dst"]), bandwidth=float(f["bandwidth"]))
                  for f in doc.get("flows", []))
    return CoreGraph(components=comps, flows=flows)


def core_graph_to_json(cg: CoreGraph) -> dict:
    return {
        "components": [{"id": c.id, "kind": c.kind} for c in cg.components],
        "flows": [{"src": f.src, "dst": f.dst, "bandwidth": f.bandwidth} for f in cg.flows],
    }


def _parse_entry(raw) -> Optional[PpaEntry]:
    if raw is None:
        return None
    if isinstance(raw, str):
        if raw.strip().lower() in INFEASIBLE_MARKERS:
            return None
        raise ValueError(f"unrecognized PPA entry {raw!r}")
    return PpaEntry(area=float(raw["area"]), perf=float(raw["perf"]), power=float(raw["power"]))


def _entry_to_json(entry: Optional[PpaEntry]):
    if entry is None:
        return "infeasible"
    return {"area": entry.area, "perf": entry.perf, "power": entry.power}


def parse_ppa(doc: dict) -> tuple[PpaTable, tuple[Layer, ...]]:
    layers = tuple(Layer(index=int(l["index"]), node_name=str(l["node"]))
                   for l in doc["layers"])
    comps = {str(kind): {str(node): _parse_entry(raw) for node, raw in table.items()}
             for kind, table in doc.get("components", {}).items()}
    routers = doc.get("routers", {})

    def router_table(key: str) -> dict[str, PpaEntry]:
        table = {}
        for node, raw in routers.get(key, {}).items():
            entry = _parse_entry(raw)
            if entry is None:
                raise ValueError(f"router {key!r} may not be infeasible (node {node!r})")
            table[str(node)] = entry
        return table

    ppa = PpaTable(components=comps, router_2d=router_table("2d"), router_3d=router_table("3d"))
    return ppa, layers


def ppa_to_json(ppa: PpaTable, layers: Sequence[Layer]) -> dict:
    return {
        "layers": [{"index": l.index, "node": l.node_name}
                   for l in sorted(layers, key=lambda l: l.index)],
        "components": {kind: {node: _entry_to_json(e) for node, e in sorted(table.items())}
                       for kind, table in sorted(ppa.components.items())},
        "routers": {
            "2d": {node: _entry_to_json(e) for node, e in sorted(ppa.router_2d.items())},
            "3d": {node: _entry_to_json(e) for node, e in sorted(ppa.router_3d.items())},
        },
    }


def parse_tech(doc: dict) -> TechParams:
    return TechParams(koz_area=float(doc["koz_area"]),
                      rd_max_length=float(doc["rd_max_length"]),
                      link_capacity=float(doc["link_capacity"]))


def tech_to_json(tech: TechParams) -> dict:
    return {"koz_area": tech.koz_area, "rd_max_length": tech.rd_max_length,
            "link_capacity": tech.link_capacity}


def load_instance(path: Union[str, Path]) -> Instance:
    """Load and validate an instance directory holding coregraph/ppa/tech JSON files."""
    base = Path(path)
    with open(base / "coregraph.json") as f:
        cg = parse_core_graph(json.load(f))
    with open(base / "ppa.json") as f:
        ppa, layers = parse_ppa(json.load(f))
    with open(base / "tech.json") as f:
        tech = parse_tech(json.load(f))
    return validate_instance(cg, ppa, tech, layers)


def save_instance(instance: Instance, path: Union[str, Path]) -> None:
    base = Path(path)
    base.mkdir(parents=True, exist_ok=True)
    with open(base / "coregraph.json", "w") as f:
        json.dump(core_graph_to_json(instance.core_graph), f, indent=2, sort_keys=True)
        f.write("\n")
    with open(base / "ppa.json", "w") as f:
        json.dump(ppa_to_json(instance.ppa, instance.layers), f, indent=2, sort_keys=True)
        f.write("\n")
    with open(base / "tech.json", "w") as f:
        json.dump(tech_to_json(instance.tech), f, indent=2, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------------------
# solution artifact serialization
# ---------------------------------------------------------------------------

def floorplan_to_json(fp: MeshFloorplan) -> dict:
    return {
        "layer": fp.layer,
        "rows": fp.rows,
        "cols": fp.cols,
        "cells": [list(row) for row in fp.cell_of],
        "col_widths": list(fp.col_widths),
        "row_heights": list(fp.row_heights),
        "router_kind": [list(row) for row in fp.router_kind],
        "koz": [list(row) for row in fp.koz_of],
        "area": fp.area,
    }


def parse_floorplan(doc: dict) -> MeshFloorplan:
    return MeshFloorplan(
        layer=int(doc["layer"]),
        rows=int(doc["rows"]),
        cols=int(doc["cols"]),
        cell_of=tuple(tuple(c if c is None else str(c) for c in row) for row in doc["cells"]),
        col_widths=tuple(float(w) for w in doc["col_widths"]),
        row_heights=tuple(float(h) for h in doc["row_heights"]),
        router_kind=tuple(tuple(k if k is None else str(k) for k in row) for row in doc["router_kind"]),
        koz_of=tuple(tuple(int(k) for k in row) for row in doc["koz"]),
    )


def vlink_to_json(v: VerticalLink) -> dict:
    return {"lower": list(v.lower), "upper": list(v.upper), "rd_length": v.rd_length}


def parse_vlink(doc: dict) -> VerticalLink:
    return VerticalLink(lower=tuple(int(x) for x in doc["lower"]),
                        upper=tuple(int(x) for x in doc["upper"]),
                        rd_length=float(doc["rd_length"]))


def traffic_to_json(te: TrafficEval) -> dict:
    return {
        "loads": [{"from": list(a), "to": list(b), "load": load}
                  for (a, b), load in sorted(te.loads.items())],
        "bw_times_distance": te.bw_times_distance,
        "bw_times_hops": te.bw_times_hops,
        "max_link_load": te.max_link_load,
        "peak_penalty": te.peak_penalty,
        "whitespace_per_layer": list(te.whitespace_per_layer),
        "whitespace_total": te.whitespace_total,
    }
