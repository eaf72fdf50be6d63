"""Hexagonal cluster layout, zones and co-channel interferer sets.

Cells are hexagons of circumradius ``R`` whose edges face the neighbours, so
adjacent centers sit ``sqrt(3) * R`` apart and the vertices point along
bearings 30, 90, ..., 330 degrees. Cell 1 is the reference cell at the origin, cells 2..7
form the first ring (cell ``k`` at bearing ``60 * (k - 2)`` degrees) and cells
8..19 form the second ring.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

Point = tuple[float, float]

REFERENCE_CELL = 1
FIRST_GROUP = (3, 5, 7)
SECOND_GROUP = (2, 4, 6)

# axial unit steps, counter-clockwise starting at bearing 0
_AXIAL_DIRS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))
# first-ring positions (axial) of cluster-local indices 2..7
_LOCAL_OFFSETS = {1: (0, 0), **{k: _AXIAL_DIRS[k - 2] for k in range(2, 8)}}
# reuse-7 cluster shift (i=2, j=1) and its rotations
_REUSE7_SHIFTS = ((2, 1), (-1, 3), (-3, 2), (-2, -1), (1, -3), (3, -2))


class GeometryError(ValueError):
    """Unsupported layout request (e.g. a tier count other than 1 or 2)."""


class Zone(enum.Enum):
    INNER = "Inner"
    OUTER = "Outer"


class ScenarioBand(enum.Enum):
    """Which band the reference cell serves a user on."""

    ORIGINAL = "X"
    BORROWED_A = "A"
    BORROWED_B = "B"


def band_of_local_index(index: int) -> str:
    if index == 1:
        return "X"
    return "A" if index % 2 == 0 else "B"


@dataclass(frozen=True)
class CellSite:
    id: int
    center: Point
    tier: int
    band_label: str

    @property
    def band(self) -> str:
        """Band letter without the cell suffix (``"A4"`` -> ``"A"``)."""
        return self.band_label[0]


@dataclass(frozen=True)
class ClusterLayout:
    """Cells of the cluster plus the reuse-7 co-channel repeat sites.

    ``repeat_sites`` are the six sites one reuse-7 cluster shift away from the
    reference cell (distance ``sqrt(21) * R``); they stand for the surrounding
    clusters' co-channel transmitters and form the second interference tier.
    They are only populated when ``tier_count == 2``.
    """

    cells: tuple[CellSite, ...]
    cell_radius: float
    tier_count: int
    repeat_sites: tuple[CellSite, ...] = ()

    def cell(self, cell_id: int) -> CellSite:
        for site in self.cells:
            if site.id == cell_id:
                return site
        for site in self.repeat_sites:
            if site.id == cell_id:
                return site
        raise KeyError(f"unknown cell id {cell_id}")

    @property
    def cell_ids(self) -> list[int]:
        return [c.id for c in self.cells]

    def tier_cells(self, tier: int) -> list[CellSite]:
        return [c for c in self.cells if c.tier == tier]


def _axial_to_xy(q: int, r: int, spacing: float) -> Point:
    # axial basis: e1 = (spacing, 0), e2 = (spacing/2, spacing*sqrt(3)/2)
    return (spacing * (q + r / 2.0), spacing * r * math.sqrt(3) / 2.0)


def _hex_ring(radius: int) -> list[tuple[int, int]]:
    """Axial coordinates of ring ``radius``, counter-clockwise from bearing 0."""
    if radius == 0:
        return [(0, 0)]
    out = []
    q, r = radius, 0
    for side in range(6):
        dq, dr = _AXIAL_DIRS[(side + 2) % 6]
        for _ in range(radius):
            out.append((q, r))
            q, r = q + dq, r + dr
    return out


def _local_index(q: int, r: int) -> int:
    """Cluster-local index (1..7) of an axial cell under reuse-7 tiling."""
    for shift_q, shift_r in ((0, 0),) + _REUSE7_SHIFTS:
        for idx, (oq, orr) in _LOCAL_OFFSETS.items():
            if (q, r) == (shift_q + oq, shift_r + orr):
                return idx
    raise GeometryError(f"axial cell {(q, r)} outside the supported tiers")


def build_cluster(cell_radius: float, tier_count: int = 2) -> ClusterLayout:
    """Build the reference cell plus ``tier_count`` rings around it.

    Args:
        cell_radius: Hexagon circumradius in km.
        tier_count: Number of rings, 1 or 2.

    Returns:
        ClusterLayout with ``1 + sum(6 * t)`` cells.
    """
    if not cell_radius > 0:
        raise GeometryError(f"cell_radius must be positive, got {cell_radius}")
    if tier_count not in (1, 2):
        raise GeometryError(f"unsupported tier_count {tier_count}; expected 1 or 2")

    spacing = math.sqrt(3) * cell_radius
    cells = [CellSite(REFERENCE_CELL, (0.0, 0.0), 0, "X1")]
    next_id = 2
    for tier in range(1, tier_count + 1):
        for q, r in _hex_ring(tier):
            idx = _local_index(q, r)
            cells.append(
                CellSite(next_id, _axial_to_xy(q, r, spacing), tier,
                         f"{band_of_local_index(idx)}{idx}")
            )
            next_id += 1

    repeats: list[CellSite] = []
    if tier_count == 2:
        for n, (q, r) in enumerate(_REUSE7_SHIFTS):
            repeats.append(CellSite(100 + n, _axial_to_xy(q, r, spacing), 2, "X1"))
    return ClusterLayout(tuple(cells), cell_radius, tier_count, tuple(repeats))


def distance(layout: ClusterLayout, cell_id: int, point: Point) -> float:
    cx, cy = layout.cell(cell_id).center
    return math.hypot(point[0] - cx, point[1] - cy)


def zone_of(layout: ClusterLayout, cell_id: int, point: Point,
            inner_ratio: float = 0.5) -> Zone:
    """Inner iff the point lies in the closed disk of radius ``inner_ratio * R``."""
    if not 0 < inner_ratio < 1:
        raise ValueError(f"inner_ratio must be in (0, 1), got {inner_ratio}")
    d = distance(layout, cell_id, point)
    return Zone.INNER if d <= inner_ratio * layout.cell_radius else Zone.OUTER


def same_band_partners(donor: int) -> tuple[int, ...]:
    """First-ring cells sharing the donor's band, excluding the donor."""
    group = SECOND_GROUP if donor in SECOND_GROUP else FIRST_GROUP
    if donor not in group:
        raise KeyError(f"cell {donor} is not a first-ring donor")
    return tuple(c for c in group if c != donor)


def donor_for_band(band: str) -> int:
    """Default donor of a borrowed band: cell 6 lends A, cell 7 lends B."""
    try:
        return {"A": 6, "B": 7}[band]
    except KeyError:
        raise ValueError(f"band {band!r} is not a borrowable band") from None


def cochannel_interferers(layout: ClusterLayout, band: str | ScenarioBand,
                          point: Point = (0.0, 0.0)) -> list[tuple[int, float, int]]:
    """Co-channel interferers of the reference cell for a band in service.

    Returns ``(cell_id, distance_to_point, tier)`` triples. X-band service has
    no first-ring co-channel cell; a borrowed band A or B is also transmitted by
    the donor's two group partners. Both get the second-tier repeat sites.
    """
    if isinstance(band, ScenarioBand):
        band = band.value
    if band not in ("X", "A", "B"):
        raise ValueError(f"unknown band {band!r}")

    out: list[tuple[int, float, int]] = []
    if band != "X":
        for cell_id in same_band_partners(donor_for_band(band)):
            out.append((cell_id, distance(layout, cell_id, point), 1))
    for site in layout.repeat_sites:
        out.append((site.id, distance(layout, site.id, point), 2))
    return out
