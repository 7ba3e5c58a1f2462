"""meshstack: application- and technology-aware synthesis of partially
vertically connected 3D mesh NoC designs."""

from .model import (
    Component,
    CoreGraph,
    Flow,
    Instance,
    Layer,
    MeshFloorplan,
    ObjectiveWeights,
    PpaEntry,
    PpaTable,
    TechParams,
    TrafficEval,
    VerticalLink,
    load_instance,
    validate_instance,
)

__all__ = [
    "Component", "CoreGraph", "Flow", "Instance", "Layer", "MeshFloorplan",
    "ObjectiveWeights", "PpaEntry", "PpaTable", "TechParams", "TrafficEval",
    "VerticalLink", "load_instance", "validate_instance",
]

__version__ = "0.1.0"
