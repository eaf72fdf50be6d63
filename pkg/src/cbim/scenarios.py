"""Scenario interference construction and distance sweeps.

The evaluated user sits on the ray from the reference base station toward the
vertex shared with cells 6 and 7 (bearing 270 degrees), ``user_distance`` km
from the reference site.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import propagation as prop
from .geometry import ClusterLayout, Point, cochannel_interferers
from .propagation import InterferenceSet, RadioEnvironment

USER_BEARING_DEG = 270.0


class ScenarioKind(enum.Enum):
    SCHEME_REAL_TIME = "SchemeRealTime"
    SCHEME_NON_REAL_TIME = "SchemeNonRealTime"
    NO_MANAGEMENT_BASELINE = "NoManagementBaseline"

    @classmethod
    def parse(cls, name: str) -> "ScenarioKind":
        for kind in cls:
            if name in (kind.value, kind.name):
                return kind
        raise ValueError(f"unknown scenario {name!r}")


ALL_KINDS = tuple(ScenarioKind)


@dataclass(frozen=True)
class MetricsRecord:
    distance_km: float
    scenario: ScenarioKind
    sinr_db: float
    capacity_bps_hz: float
    outage_prob: float


@dataclass(frozen=True)
class ScenarioSettings:
    """Knobs shared by every scenario.

    ``inner_power_factor`` of ``None`` means ``inner_ratio ** alpha`` where
    ``alpha`` is the path-loss slope divided by 10, i.e. the transmit power cut
    that keeps the received power at the inner-zone edge equal to the
    full-power level at the cell edge.
    """

    inner_ratio: float = 0.5
    borrowed_band: str = "A"
    noise_w: float = 0.0
    inner_power_factor: float | None = None

    def power_factor(self, env: RadioEnvironment) -> float:
        if self.inner_power_factor is not None:
            return self.inner_power_factor
        return self.inner_ratio ** (env.distance_slope_db / 10.0)


def user_position(user_distance: float) -> Point:
    theta = math.radians(USER_BEARING_DEG)
    return (user_distance * math.cos(theta), user_distance * math.sin(theta))


def build_interference(kind: ScenarioKind, layout: ClusterLayout, env: RadioEnvironment,
                       user_distance: float,
                       settings: ScenarioSettings = ScenarioSettings()) -> InterferenceSet:
    """Received interference at the evaluated user for one scenario."""
    if not 0 < user_distance <= layout.cell_radius:
        raise prop.PropagationError(
            f"user distance {user_distance} km outside (0, {layout.cell_radius}]")
    point = user_position(user_distance)
    if kind is ScenarioKind.SCHEME_REAL_TIME:
        band, tier1_factor = "X", 1.0
    elif kind is ScenarioKind.SCHEME_NON_REAL_TIME:
        band, tier1_factor = settings.borrowed_band, settings.power_factor(env)
    else:
        band, tier1_factor = settings.borrowed_band, 1.0

    ids, dists, powers, tiers = [], [], [], []
    for cell_id, d, tier in cochannel_interferers(layout, band, point):
        factor = tier1_factor if tier == 1 else 1.0
        ids.append(cell_id)
        dists.append(d)
        powers.append(prop.received_power(env, d, factor))
        tiers.append(tier)
    return InterferenceSet(tuple(dists), tuple(powers), tuple(tiers), tuple(ids))


def evaluate(kind: ScenarioKind, layout: ClusterLayout, env: RadioEnvironment,
             user_distance: float,
             settings: ScenarioSettings = ScenarioSettings()) -> MetricsRecord:
    interference = build_interference(kind, layout, env, user_distance, settings)
    s0 = prop.received_power(env, user_distance)
    ratio = prop.sinr(s0, interference, settings.noise_w)
    return MetricsRecord(
        distance_km=user_distance,
        scenario=kind,
        sinr_db=prop.linear_to_db(ratio),
        capacity_bps_hz=prop.capacity(ratio),
        outage_prob=prop.outage_probability(env.gamma_db, s0, interference),
    )


def run_sweep(layout: ClusterLayout, env: RadioEnvironment, distances: Sequence[float],
              kinds: Iterable[ScenarioKind] = ALL_KINDS,
              settings: ScenarioSettings = ScenarioSettings(),
              workers: int = 1) -> list[MetricsRecord]:
    """Evaluate every (scenario, distance) pair, scenario-major."""
    distances = list(distances)
    kinds = list(kinds)
    if not distances:
        raise ValueError("distances must not be empty")
    jobs = [(k, d) for k in kinds for d in distances]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda job: evaluate(job[0], layout, env, job[1], settings), jobs))
    return [evaluate(k, layout, env, d, settings) for k, d in jobs]


def sweep_distances(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid, rounded to 9 decimals to avoid float drift."""
    if step <= 0:
        raise ValueError("step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 9) for i in range(n + 1)]
