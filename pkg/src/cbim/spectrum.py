"""Per-cell channel pools and the channel lifecycle state machine.

Every cell owns ``channels_per_cell`` channels. Channel ids are global:
channel ``k`` (0-based local index) of cell ``c`` has id
``(c - 1) * channels_per_cell + k`` when cell ids are 1..N. Channels with the
same local index in cells of the same band share a frequency.

Borrowing is recorded twice: the owner keeps the channel as ``LentOut`` and
the borrower keeps an ``Occupied`` record for the same id in
``SpectrumPlan.borrowed``.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Union

from .geometry import ClusterLayout, Zone


class TrafficClass(enum.Enum):
    REAL_TIME = "RT"
    NON_REAL_TIME = "NRT"


@dataclass(frozen=True)
class Free:
    pass


@dataclass(frozen=True)
class Occupied:
    traffic_class: TrafficClass
    zone: Zone
    serving_cell: int


@dataclass(frozen=True)
class LentOut:
    to_cell: int


@dataclass(frozen=True)
class Blocked:
    pass


ChannelState = Union[Free, Occupied, LentOut, Blocked]

LEGAL_TRANSITIONS = {
    (Free, Occupied),
    (Free, LentOut),
    (Free, Blocked),
    (Occupied, Free),
    (LentOut, Free),
    (Blocked, Free),
    (Blocked, Occupied),
}


class SpectrumError(Exception):
    pass


class ConfigError(SpectrumError, ValueError):
    pass


class InvalidPartition(SpectrumError, ValueError):
    pass


class IllegalTransition(SpectrumError):
    """Rejected lifecycle transition; carries the channel and both states."""

    def __init__(self, channel_id: int, old: ChannelState, new: ChannelState):
        self.channel_id = channel_id
        self.old = old
        self.new = new
        super().__init__(
            f"channel {channel_id}: illegal transition "
            f"{type(old).__name__} -> {type(new).__name__}"
        )


@dataclass
class Channel:
    id: int
    owner_cell: int
    index: int
    band: str
    state: ChannelState = field(default_factory=Free)
    sub_band_tag: str | None = None


@dataclass
class SpectrumPlan:
    channels_per_cell: int
    pools: dict[int, list[Channel]]
    # borrower-side records: channel id -> Occupied at the borrower, None while idle
    borrowed: dict[int, Occupied | None] = field(default_factory=dict)

    def __post_init__(self):
        self._by_id = {ch.id: ch for pool in self.pools.values() for ch in pool}

    def channel(self, channel_id: int) -> Channel:
        try:
            return self._by_id[channel_id]
        except KeyError:
            raise KeyError(f"unknown channel id {channel_id}") from None

    def pool(self, cell_id: int) -> list[Channel]:
        try:
            return self.pools[cell_id]
        except KeyError:
            raise KeyError(f"unknown cell id {cell_id}") from None

    def free_count(self, cell_id: int) -> int:
        return sum(isinstance(ch.state, Free) for ch in self.pool(cell_id))

    def free_channels(self, cell_id: int) -> list[Channel]:
        return [ch for ch in self.pool(cell_id) if isinstance(ch.state, Free)]

    def state_counts(self, cell_id: int) -> Counter:
        return Counter(type(ch.state).__name__ for ch in self.pool(cell_id))

    def lent_count(self, donor: int, to_cell: int | None = None) -> int:
        return sum(
            isinstance(ch.state, LentOut) and (to_cell is None or ch.state.to_cell == to_cell)
            for ch in self.pool(donor)
        )

    def matching(self, channel: Channel, cells: Iterable[int]) -> list[Channel]:
        """Channels of ``cells`` on the same frequency as ``channel``."""
        return [self.pool(c)[channel.index] for c in cells]

    def transition(self, channel_id: int, new_state: ChannelState) -> "SpectrumPlan":
        ch = self.channel(channel_id)
        if (type(ch.state), type(new_state)) not in LEGAL_TRANSITIONS:
            raise IllegalTransition(channel_id, ch.state, new_state)
        ch.state = new_state
        return self

    def set_zone(self, channel_id: int, zone: Zone) -> Zone:
        """Move an occupied channel to another zone; returns the previous zone."""
        ch = self.channel(channel_id)
        if not isinstance(ch.state, Occupied):
            raise IllegalTransition(channel_id, ch.state, ch.state)
        previous = ch.state.zone
        ch.state = replace(ch.state, zone=zone)
        return previous

    def partition_band(self, cell_id: int,
                       partition: Mapping[str, Iterable[int]]) -> dict[str, int]:
        """Tag sub-bands of a cell's pool. Returns the size of every tag in the cell.

        ``partition`` maps a label (e.g. ``"X1'"``) to channel ids of that
        cell. Labels must be disjoint and a channel may carry one tag only.
        """
        pool_ids = {ch.id for ch in self.pool(cell_id)}
        seen: dict[int, str] = {}
        for label, ids in partition.items():
            for cid in ids:
                if cid not in pool_ids:
                    raise InvalidPartition(f"channel {cid} not owned by cell {cell_id}")
                if cid in seen:
                    raise InvalidPartition(
                        f"channel {cid} in both {seen[cid]!r} and {label!r}")
                seen[cid] = label
        for cid, label in seen.items():
            tag = self._by_id[cid].sub_band_tag
            if tag is not None and tag != label:
                raise InvalidPartition(f"channel {cid} already tagged {tag!r}")
        for cid, label in seen.items():
            self._by_id[cid].sub_band_tag = label
        return dict(Counter(ch.sub_band_tag for ch in self.pool(cell_id)
                            if ch.sub_band_tag is not None))

    def snapshot(self) -> dict[int, ChannelState]:
        return {cid: ch.state for cid, ch in self._by_id.items()}

    def check_conservation(self) -> list[str]:
        """Return a list of violated invariants; empty when consistent."""
        problems = []
        for cell_id, pool in self.pools.items():
            if len(pool) != self.channels_per_cell:
                problems.append(f"cell {cell_id}: pool size {len(pool)}")
            counts = self.state_counts(cell_id)
            if sum(counts.values()) != self.channels_per_cell:
                problems.append(f"cell {cell_id}: state counts {dict(counts)}")
            for ch in pool:
                if ch.owner_cell != cell_id:
                    problems.append(f"channel {ch.id}: owner {ch.owner_cell} in pool {cell_id}")
                if not isinstance(ch.state, (Free, Occupied, LentOut, Blocked)):
                    problems.append(f"channel {ch.id}: bad state {ch.state!r}")
        lent = {ch.id for ch in self._by_id.values() if isinstance(ch.state, LentOut)}
        if lent != set(self.borrowed):
            problems.append(
                f"lent-out {sorted(lent)} != borrower records {sorted(self.borrowed)}")
        for cid, occ in self.borrowed.items():
            ch = self._by_id.get(cid)
            if occ is not None and ch is not None and isinstance(ch.state, LentOut) \
                    and ch.state.to_cell != occ.serving_cell:
                problems.append(f"channel {cid}: lent to {ch.state.to_cell}, served by {occ.serving_cell}")
        return problems


def init_spectrum(layout: ClusterLayout | Iterable[int], channels_per_cell: int,
                  bands: Mapping[int, str] | None = None) -> SpectrumPlan:
    """Create an all-Free plan for every cell of ``layout``.

    ``layout`` may also be a plain iterable of cell ids, in which case band
    letters come from ``bands`` (default: ``"X"`` for cell 1, A for even ids,
    B for odd ids).
    """
    if not isinstance(channels_per_cell, int) or channels_per_cell < 1:
        raise ConfigError(f"channels_per_cell must be a positive integer, got {channels_per_cell}")
    if isinstance(layout, ClusterLayout):
        cells = [(c.id, c.band) for c in layout.cells]
    else:
        bands = bands or {}
        cells = [(c, bands.get(c, "X" if c == 1 else ("A" if c % 2 == 0 else "B")))
                 for c in layout]
    pools: dict[int, list[Channel]] = {}
    for n, (cell_id, band) in enumerate(sorted(cells)):
        base = n * channels_per_cell
        pools[cell_id] = [Channel(base + k, cell_id, k, band) for k in range(channels_per_cell)]
    return SpectrumPlan(channels_per_cell, pools)
