"""
Topologies - how the entity network is wired.

A TopologySpec is declared in the metastable regime and turned into one Milieu
per entity at actualization. Milieus are ordered: rules address neighbours by
position, so the generation order below is part of the contract.
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from ..errors import ExplicitIndexOutOfRange, TopologyError


class TopologyKind(str, Enum):
    RING = "ring"
    GRID = "grid"
    EXPLICIT = "explicit"


class Neighborhood(str, Enum):
    MOORE = "moore"
    VON_NEUMANN = "vonneumann"


# Row-major offsets; (0, 0) marks where the entity itself goes when include_self is set
_MOORE_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 0), (0, 1), (1, -1), (1, 0), (1, 1))
_VON_NEUMANN_OFFSETS = ((-1, 0), (0, -1), (0, 0), (0, 1), (1, 0))


@dataclass(frozen=True)
class Milieu:
    """Ordered neighbour indices of one entity"""

    neighbors: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.neighbors)


@dataclass(frozen=True)
class TopologySpec:
    kind: TopologyKind
    include_self: bool = False
    radius: int = 1
    width: int = 0
    height: int = 0
    neighborhood: Neighborhood = Neighborhood.MOORE
    wrap: bool = True
    adjacency: Tuple[Tuple[int, ...], ...] = ()

    @classmethod
    def ring(cls, radius: int, include_self: bool = False) -> "TopologySpec":
        return cls(TopologyKind.RING, include_self=include_self, radius=radius)

    @classmethod
    def grid(
        cls,
        width: int,
        height: int,
        neighborhood: Neighborhood = Neighborhood.MOORE,
        wrap: bool = True,
        include_self: bool = False
    ) -> "TopologySpec":
        return cls(
            TopologyKind.GRID,
            include_self=include_self,
            width=width,
            height=height,
            neighborhood=neighborhood,
            wrap=wrap
        )

    @classmethod
    def explicit(cls, adjacency: Sequence[Sequence[int]], include_self: bool = False) -> "TopologySpec":
        return cls(
            TopologyKind.EXPLICIT,
            include_self=include_self,
            adjacency=tuple(tuple(row) for row in adjacency)
        )

    def describe(self) -> str:
        if self.kind is TopologyKind.RING:
            text = f"ring {self.radius}"
        elif self.kind is TopologyKind.GRID:
            text = (f"grid {self.width} {self.height} {self.neighborhood.value} "
                    f"{'wrap' if self.wrap else 'nowrap'}")
        else:
            text = f"explicit ({len(self.adjacency)} rows)"
        if self.include_self:
            text += " +self"
        return text


def build_topology(spec: TopologySpec, n: int) -> List[Milieu]:
    """
    Materialise the milieu of every entity.

    Ring(r): entity i sees [i-r, ..., i-1, i+1, ..., i+r] modulo n, with i itself in
    the middle when include_self is set. Indices repeat when 2r >= n.
    Grid2D: neighbours in row-major order of the Moore or von Neumann offsets; with
    nowrap, an off-grid position holds the entity itself, so every milieu keeps the
    full length and edge cells see their own state past the border.
    Explicit: rows copied verbatim.

    Args:
        spec: Topology declaration
        n: Entity count

    Returns:
        One Milieu per entity, in entity order

    Raises:
        TopologyError: If the spec cannot produce n milieus
        ExplicitIndexOutOfRange: If an explicit row references a missing entity
    """
    if n <= 0:
        raise TopologyError(f"entity count must be positive, got {n}")

    if spec.kind is TopologyKind.RING:
        return _ring(spec, n)
    if spec.kind is TopologyKind.GRID:
        return _grid(spec, n)
    return _explicit(spec, n)


def _ring(spec: TopologySpec, n: int) -> List[Milieu]:
    r = spec.radius
    if r < 0:
        raise TopologyError(f"ring radius must be non-negative, got {r}")
    offsets = list(range(-r, 0))
    if spec.include_self:
        offsets.append(0)
    offsets.extend(range(1, r + 1))
    return [Milieu(tuple((i + d) % n for d in offsets)) for i in range(n)]


def _grid(spec: TopologySpec, n: int) -> List[Milieu]:
    w, h = spec.width, spec.height
    if w <= 0 or h <= 0:
        raise TopologyError(f"grid dimensions must be positive, got {w}x{h}")
    if w * h != n:
        raise TopologyError(f"grid {w}x{h} holds {w * h} entities, system has {n}")

    table = _MOORE_OFFSETS if spec.neighborhood is Neighborhood.MOORE else _VON_NEUMANN_OFFSETS
    offsets = [o for o in table if o != (0, 0) or spec.include_self]

    milieus = []
    for i in range(n):
        row, col = divmod(i, w)
        neighbors = []
        for dr, dc in offsets:
            r, c = row + dr, col + dc
            if spec.wrap:
                r, c = r % h, c % w
            elif not (0 <= r < h and 0 <= c < w):
                r, c = row, col
            neighbors.append(r * w + c)
        milieus.append(Milieu(tuple(neighbors)))
    return milieus


def _explicit(spec: TopologySpec, n: int) -> List[Milieu]:
    if len(spec.adjacency) != n:
        raise TopologyError(f"explicit adjacency has {len(spec.adjacency)} rows, system has {n} entities")
    milieus = []
    for i, row in enumerate(spec.adjacency):
        for j in row:
            if not 0 <= j < n:
                raise ExplicitIndexOutOfRange(f"entity {i} references missing entity {j} (n={n})")
            if j == i and not spec.include_self:
                raise TopologyError(f"entity {i} lists itself but include_self is false")
        milieus.append(Milieu(tuple(row)))
    return milieus


def shortest_milieu(milieus: Sequence[Milieu], members: Optional[Sequence[int]] = None) -> int:
    """Length of the shortest milieu among members (all entities by default)"""
    if members is None:
        return min(len(m) for m in milieus)
    return min(len(milieus[i]) for i in members)
