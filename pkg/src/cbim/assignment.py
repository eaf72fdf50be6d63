"""Channel borrowing, class-based admission and interference control.

The reference cell (cell 1) serves every call. When its own channels are
exhausted it borrows from the first-ring cells: first the group {3, 5, 7}
(band B) up to ``first_threshold`` channels per donor, then the group
{2, 4, 6} (band A) up to ``second_threshold``. Borrowed channels only ever
serve the inner zone. A real-time arrival that would land on a borrowed
channel instead takes an original channel held by a non-real-time call,
which moves to the borrowed channel.

Each borrowed channel shares its frequency with the matching channel of the
donor's two group partners. Those partner channels are blocked when free and
pushed to the partner's inner zone when occupied, for as long as the borrow
lasts.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from .geometry import (
    FIRST_GROUP,
    REFERENCE_CELL,
    SECOND_GROUP,
    ClusterLayout,
    Point,
    Zone,
    zone_of,
)
from .spectrum import (
    Blocked,
    Channel,
    Free,
    LentOut,
    Occupied,
    SpectrumPlan,
    TrafficClass,
)

log = logging.getLogger(__name__)

RT = TrafficClass.REAL_TIME
NRT = TrafficClass.NON_REAL_TIME


class OutOfScopeRequest(ValueError):
    """Request position lies outside the reference cell."""


class Outcome(enum.Enum):
    ASSIGNED_ORIGINAL = "AssignedOriginal"
    ASSIGNED_BORROWED = "AssignedBorrowed"
    SWAPPED_ONTO_ORIGINAL = "SwappedOntoOriginal"
    BLOCKED = "Blocked"


@dataclass(frozen=True)
class TrafficRequest:
    id: int
    traffic_class: TrafficClass
    position: Point


@dataclass(frozen=True)
class BorrowPolicy:
    first_threshold: int
    second_threshold: int
    first_group: tuple[int, ...] = FIRST_GROUP
    second_group: tuple[int, ...] = SECOND_GROUP
    donors_per_group: int = 1

    def __post_init__(self):
        if self.first_threshold < 0 or self.second_threshold < 0:
            raise ValueError("thresholds must be non-negative")
        if set(self.first_group) & set(self.second_group):
            raise ValueError("donor groups must be disjoint")
        if self.donors_per_group < 1:
            raise ValueError("donors_per_group must be at least 1")

    @classmethod
    def default(cls, channels_per_cell: int, **kwargs) -> "BorrowPolicy":
        """Both thresholds at a quarter of the per-cell channel count."""
        th = channels_per_cell // 4
        return cls(th, th, **kwargs)

    def groups(self) -> list[tuple[tuple[int, ...], int]]:
        return [(self.first_group, self.first_threshold),
                (self.second_group, self.second_threshold)]

    def group_of(self, cell_id: int) -> tuple[int, ...]:
        if cell_id in self.first_group:
            return self.first_group
        if cell_id in self.second_group:
            return self.second_group
        raise KeyError(f"cell {cell_id} is not a donor")

    def threshold_of(self, cell_id: int) -> int:
        return self.first_threshold if cell_id in self.first_group else self.second_threshold


@dataclass(frozen=True)
class SideEffect:
    """One interference-control action.

    ``action`` is one of ``"block"``, ``"unblock"``, ``"move_inner"``,
    ``"restore_zone"``, ``"activate_inner"`` or ``"bifurcate"``.
    """

    action: str
    cell_id: int
    channel_id: int | None = None


@dataclass(frozen=True)
class AssignmentDecision:
    request_id: int
    outcome: Outcome
    channel_id: int | None = None
    displaced: tuple[int, int] | None = None
    side_effects: tuple[SideEffect, ...] = ()

    def __post_init__(self):
        if (self.outcome is Outcome.BLOCKED) != (self.channel_id is None):
            raise ValueError("a blocked decision carries no channel, any other does")


@dataclass
class Call:
    request: TrafficRequest
    channel_id: int
    borrowed: bool


def _eligible(plan: SpectrumPlan, donor: int, group: Sequence[int]) -> list[Channel]:
    """Free donor channels whose frequency is not already lent by a group sibling."""
    out = []
    for ch in plan.free_channels(donor):
        if not any(isinstance(plan.pool(c)[ch.index].state, LentOut)
                   for c in group if c != donor):
            out.append(ch)
    return out


def borrow_channels(plan: SpectrumPlan, policy: BorrowPolicy, demand: int,
                    borrower: int = REFERENCE_CELL) -> list[tuple[int, list[int]]]:
    """Borrow up to ``demand`` channels for ``borrower``.

    Within each group (first, then second) the donor with the most free
    channels is chosen (ties to the lowest id) and lends
    ``min(remaining, eligible, threshold - already_lent)`` channels, lowest
    ids first. Up to ``policy.donors_per_group`` donors are tapped per group.
    Lent channels go Free -> LentOut and get an idle borrower record.
    """
    if demand < 1:
        raise ValueError(f"demand must be at least 1, got {demand}")
    remaining = demand
    result: list[tuple[int, list[int]]] = []
    for group, threshold in policy.groups():
        used: set[int] = set()
        for _ in range(policy.donors_per_group):
            if remaining == 0:
                break
            candidates = []
            for donor in group:
                if donor in used or donor not in plan.pools:
                    continue
                headroom = threshold - plan.lent_count(donor)
                if headroom > 0 and _eligible(plan, donor, group):
                    candidates.append(donor)
            if not candidates:
                break
            donor = min(candidates, key=lambda c: (-plan.free_count(c), c))
            used.add(donor)
            headroom = threshold - plan.lent_count(donor)
            take = _eligible(plan, donor, group)[:min(remaining, headroom)]
            ids = []
            for ch in take:
                plan.transition(ch.id, LentOut(borrower))
                plan.borrowed[ch.id] = None
                ids.append(ch.id)
            if ids:
                result.append((donor, ids))
                remaining -= len(ids)
    return result


def in_reference_cell(layout: ClusterLayout, point: Point, tol: float = 1e-9) -> bool:
    """Point-in-hexagon test for the reference cell (boundary included)."""
    apothem = math.sqrt(3) / 2 * layout.cell_radius
    x, y = point
    for k in range(6):
        theta = math.radians(60 * k)
        if x * math.cos(theta) + y * math.sin(theta) > apothem + tol:
            return False
    return True


@dataclass
class AssignmentEngine:
    """Single-threaded admission state machine around a :class:`SpectrumPlan`."""

    plan: SpectrumPlan
    layout: ClusterLayout
    policy: BorrowPolicy
    inner_ratio: float = 0.5
    calls: dict[int, Call] = field(default_factory=dict)
    # partner channel id -> borrowed channel ids protecting it
    _protected_by: dict[int, set[int]] = field(default_factory=dict)
    # borrowed channel id -> partner channel ids it protects
    _protects: dict[int, list[int]] = field(default_factory=dict)
    # partner channel id -> zone before it was pushed inside
    _prior_zone: dict[int, Zone] = field(default_factory=dict)

    # -- queries -----------------------------------------------------------

    @property
    def originals(self) -> list[Channel]:
        return self.plan.pool(REFERENCE_CELL)

    def reference_bifurcated(self) -> bool:
        return any(st is not None for st in self.plan.borrowed.values())

    def cell_bifurcated(self, cell_id: int) -> bool:
        if cell_id == REFERENCE_CELL:
            return self.reference_bifurcated()
        return any(ch.id in self._protected_by and isinstance(ch.state, Occupied)
                   for ch in self.plan.pool(cell_id))

    def request_on_channel(self, channel_id: int) -> int | None:
        for rid, call in self.calls.items():
            if call.channel_id == channel_id:
                return rid
        return None

    def check_invariants(self) -> list[str]:
        problems = self.plan.check_conservation()
        for donor in self.policy.first_group + self.policy.second_group:
            if donor in self.plan.pools:
                lent = self.plan.lent_count(donor)
                if lent > self.policy.threshold_of(donor):
                    problems.append(f"donor {donor}: {lent} lent above threshold")
        for cid, occ in self.plan.borrowed.items():
            if occ is not None and occ.zone is not Zone.INNER:
                problems.append(f"borrowed channel {cid} served in {occ.zone.value} zone")
        for rid, call in self.calls.items():
            if call.borrowed:
                occ = self.plan.borrowed.get(call.channel_id)
            else:
                occ = self.plan.channel(call.channel_id).state
            if not isinstance(occ, Occupied) or occ.traffic_class is not call.request.traffic_class:
                problems.append(f"request {rid}: channel {call.channel_id} state {occ!r}")
        return problems

    # -- control -----------------------------------------------------------

    def admit(self, request: TrafficRequest) -> AssignmentDecision:
        if request.id in self.calls:
            raise ValueError(f"request {request.id} is already being served")
        if not in_reference_cell(self.layout, request.position):
            raise OutOfScopeRequest(f"request {request.id} at {request.position} "
                                    "lies outside the reference cell")
        zone = zone_of(self.layout, REFERENCE_CELL, request.position, self.inner_ratio)

        free = [ch for ch in self.originals if isinstance(ch.state, Free)]
        if free:
            ch = free[0]
            self.plan.transition(ch.id, Occupied(request.traffic_class, zone, REFERENCE_CELL))
            self.calls[request.id] = Call(request, ch.id, borrowed=False)
            return AssignmentDecision(request.id, Outcome.ASSIGNED_ORIGINAL, ch.id)

        borrowed = borrow_channels(self.plan, self.policy, 1)
        if not borrowed:
            log.debug("request %d blocked: nothing borrowable", request.id)
            return AssignmentDecision(request.id, Outcome.BLOCKED)
        b_id = borrowed[0][1][0]
        was_bifurcated = self.reference_bifurcated()

        if request.traffic_class is RT:
            nrt_originals = [ch for ch in self.originals
                             if isinstance(ch.state, Occupied) and ch.state.traffic_class is NRT]
            if nrt_originals:
                orig = nrt_originals[0]
                displaced_id = self.request_on_channel(orig.id)
                self.plan.borrowed[b_id] = Occupied(NRT, Zone.INNER, REFERENCE_CELL)
                self.calls[displaced_id] = Call(self.calls[displaced_id].request, b_id, borrowed=True)
                self.plan.transition(orig.id, Free())
                self.plan.transition(orig.id, Occupied(RT, zone, REFERENCE_CELL))
                self.calls[request.id] = Call(request, orig.id, borrowed=False)
                effects = self._control(borrowed, was_bifurcated)
                return AssignmentDecision(request.id, Outcome.SWAPPED_ONTO_ORIGINAL, orig.id,
                                          (displaced_id, b_id), effects)

        self.plan.borrowed[b_id] = Occupied(request.traffic_class, Zone.INNER, REFERENCE_CELL)
        self.calls[request.id] = Call(request, b_id, borrowed=True)
        effects = self._control(borrowed, was_bifurcated)
        return AssignmentDecision(request.id, Outcome.ASSIGNED_BORROWED, b_id, None, effects)

    def _control(self, borrowed, was_bifurcated: bool) -> tuple[SideEffect, ...]:
        effects = []
        if not was_bifurcated:
            effects.append(SideEffect("bifurcate", REFERENCE_CELL))
        effects.extend(self.apply_interference_control(borrowed))
        return tuple(effects)

    def apply_interference_control(self, borrowed: Sequence[tuple[int, Sequence[int]]]
                                   ) -> list[SideEffect]:
        """Protect newly borrowed channels at the donors' group partners.

        Free matching channels are blocked; occupied ones move to the
        partner's inner zone, which bifurcates that partner.
        """
        if not borrowed:
            raise ValueError("nothing borrowed")
        effects: list[SideEffect] = []
        for donor, ids in borrowed:
            partners = [c for c in self.policy.group_of(donor)
                        if c != donor and c in self.plan.pools]
            for b_id in ids:
                b_ch = self.plan.channel(b_id)
                protected = self._protects.setdefault(b_id, [])
                for p_ch in self.plan.matching(b_ch, partners):
                    holders = self._protected_by.setdefault(p_ch.id, set())
                    first = not holders
                    holders.add(b_id)
                    protected.append(p_ch.id)
                    if not first:
                        continue
                    if isinstance(p_ch.state, Free):
                        self.plan.transition(p_ch.id, Blocked())
                        effects.append(SideEffect("block", p_ch.owner_cell, p_ch.id))
                    elif isinstance(p_ch.state, Occupied):
                        was = self._bifurcated_without(p_ch.owner_cell, p_ch.id)
                        self._prior_zone[p_ch.id] = self.plan.set_zone(p_ch.id, Zone.INNER)
                        effects.append(SideEffect("move_inner", p_ch.owner_cell, p_ch.id))
                        if not was:
                            effects.append(SideEffect("bifurcate", p_ch.owner_cell))
        return effects

    def _bifurcated_without(self, cell_id: int, channel_id: int) -> bool:
        return any(ch.id != channel_id and ch.id in self._protected_by
                   and isinstance(ch.state, Occupied) for ch in self.plan.pool(cell_id))

    def release(self, request_id: int) -> tuple[SideEffect, ...]:
        """End a call. Borrowed channels return to their owner and lift their protection."""
        try:
            call = self.calls.pop(request_id)
        except KeyError:
            raise KeyError(f"unknown request {request_id}") from None
        if not call.borrowed:
            self.plan.transition(call.channel_id, Free())
            return ()
        del self.plan.borrowed[call.channel_id]
        self.plan.transition(call.channel_id, Free())
        effects = []
        for p_id in self._protects.pop(call.channel_id, []):
            holders = self._protected_by[p_id]
            holders.discard(call.channel_id)
            if holders:
                continue
            del self._protected_by[p_id]
            p_ch = self.plan.channel(p_id)
            if isinstance(p_ch.state, Blocked):
                self.plan.transition(p_id, Free())
                effects.append(SideEffect("unblock", p_ch.owner_cell, p_id))
            elif isinstance(p_ch.state, Occupied) and p_id in self._prior_zone:
                self.plan.set_zone(p_id, self._prior_zone.pop(p_id))
                effects.append(SideEffect("restore_zone", p_ch.owner_cell, p_id))
            self._prior_zone.pop(p_id, None)
        return tuple(effects)

    # -- traffic of the other cells ------------------------------------------

    def occupy_local(self, cell_id: int, traffic_class: TrafficClass = NRT,
                     zone: Zone = Zone.OUTER) -> tuple[int, tuple[SideEffect, ...]] | None:
        """Serve a call of a first-ring cell on its own spectrum.

        Free channels are used first. Failing that, a blocked channel is
        reactivated for the cell's inner zone. Returns ``None`` when the cell
        has nothing left.
        """
        if cell_id == REFERENCE_CELL:
            raise ValueError("reference-cell traffic goes through admit()")
        free = self.plan.free_channels(cell_id)
        if free:
            ch = free[0]
            self.plan.transition(ch.id, Occupied(traffic_class, zone, cell_id))
            return ch.id, ()
        blocked = [ch for ch in self.plan.pool(cell_id) if isinstance(ch.state, Blocked)]
        if not blocked:
            return None
        return blocked[0].id, self.activate_blocked(blocked[0].id, traffic_class)

    def activate_blocked(self, channel_id: int,
                         traffic_class: TrafficClass = NRT) -> tuple[SideEffect, ...]:
        """Put a blocked partner channel into service for its cell's inner zone."""
        ch = self.plan.channel(channel_id)
        was = self.cell_bifurcated(ch.owner_cell)
        self.plan.transition(channel_id, Occupied(traffic_class, Zone.INNER, ch.owner_cell))
        self._prior_zone[channel_id] = Zone.INNER
        effects = [SideEffect("activate_inner", ch.owner_cell, channel_id)]
        if not was:
            effects.append(SideEffect("bifurcate", ch.owner_cell))
        return tuple(effects)

    def release_local(self, channel_id: int) -> tuple[SideEffect, ...]:
        """End a first-ring cell's own call; a still-protected channel is re-blocked."""
        ch = self.plan.channel(channel_id)
        if ch.owner_cell == REFERENCE_CELL:
            raise ValueError("reference-cell calls are released by request id")
        self.plan.transition(channel_id, Free())
        self._prior_zone.pop(channel_id, None)
        if self._protected_by.get(channel_id):
            self.plan.transition(channel_id, Blocked())
            return (SideEffect("block", ch.owner_cell, channel_id),)
        return ()
