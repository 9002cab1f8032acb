"""Flow graphs over cube cells and critical-node selection."""

from __future__ import annotations

from dataclasses import dataclass, field

from geocube import grid

Cell = tuple[int, int]


@dataclass
class FlowEdge:
    origin: Cell
    dest: Cell
    flow: int
    flow_flu: int = 0


@dataclass
class FlowNode:
    cell: Cell
    lon: float
    lat: float
    in_degree: float = 0.0
    out_degree: float = 0.0

    @property
    def score(self) -> float:
        return self.in_degree + self.out_degree


@dataclass
class FlowGraph:
    level: int
    nodes: dict[Cell, FlowNode] = field(default_factory=dict)
    edges: list[FlowEdge] = field(default_factory=list)

    @classmethod
    def from_flow_rows(cls, rows, level: int, centroids: dict[Cell, tuple[float, float]] | None = None) -> "FlowGraph":
        """Build from (origin, dest, F, F_flu, F_migration) query rows.

        Node positions default to cell centers; pass `centroids` to place
        nodes at activity centroids instead.
        """
        g = cls(level)
        for origin, dest, f, f_flu, _fm in rows:
            if origin == dest or f <= 0:
                continue
            g.edges.append(FlowEdge(origin, dest, f, f_flu))
            for cell in (origin, dest):
                if cell not in g.nodes:
                    if centroids and cell in centroids:
                        lon, lat = centroids[cell]
                    else:
                        lon, lat = grid.cell_center(cell[0], cell[1], level)
                    g.nodes[cell] = FlowNode(cell, lon, lat)
            g.nodes[origin].out_degree += f
            g.nodes[dest].in_degree += f
        return g


def critical_nodes(
    g: FlowGraph,
    global_fraction: float = 0.2,
    neighbor_radius_cells: int = 2,
    local_top_k: int = 1,
) -> set[Cell]:
    """Nodes whose degree score ranks high enough globally and locally.

    A node passes when (a) it is within the top `global_fraction` of all
    node scores and (b) it is among the top `local_top_k` scores within
    Chebyshev distance `neighbor_radius_cells` of its cell.  Ties break
    toward the lower cell index, so selection is deterministic.
    """
    if not g.nodes:
        return set()
    if not 0 < global_fraction <= 1:
        raise ValueError("global_fraction must be in (0, 1]")

    def rank_key(node: FlowNode):
        return (-node.score, node.cell)

    ordered = sorted(g.nodes.values(), key=rank_key)
    cutoff = -(-len(ordered) * global_fraction // 1)  # ceil
    global_pass = {n.cell for n in ordered[: int(cutoff)]}

    keep: set[Cell] = set()
    r = neighbor_radius_cells
    for cell in global_pass:
        node = g.nodes[cell]
        better = 0
        for dc in range(-r, r + 1):
            for dr in range(-r, r + 1):
                other = g.nodes.get((cell[0] + dc, cell[1] + dr))
                if other is not None and other.cell != cell and rank_key(other) < rank_key(node):
                    better += 1
        if better < local_top_k:
            keep.add(cell)
    return keep
