"""Okumura-Hata link budget, SINR, Shannon capacity and outage probability."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

D_MIN_KM = 0.001


class PropagationError(ValueError):
    pass


@dataclass(frozen=True)
class RadioEnvironment:
    """Physical parameters of the downlink.

    Attributes:
        f_c: Carrier frequency in MHz.
        h_b: Base-station antenna height in m.
        h_m: Mobile antenna height in m.
        l_ow: Penetration loss in dB.
        p_tx: Base-station transmit power in W.
        gamma_db: SINR outage threshold in dB.
    """

    f_c: float = 1800.0
    h_b: float = 100.0
    h_m: float = 5.0
    l_ow: float = 10.0
    p_tx: float = 1500.0
    gamma_db: float = 9.0

    def __post_init__(self):
        for name in ("f_c", "h_b", "h_m", "l_ow", "p_tx"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise PropagationError(f"{name} must be positive and finite, got {value}")
        if not math.isfinite(self.gamma_db):
            raise PropagationError(f"gamma_db must be finite, got {self.gamma_db}")

    @property
    def gamma_linear(self) -> float:
        return db_to_linear(self.gamma_db)

    @property
    def distance_slope_db(self) -> float:
        """Path-loss slope in dB per decade of distance."""
        return 44.9 - 6.55 * math.log10(self.h_b)


@dataclass(frozen=True)
class InterferenceSet:
    """Received interference powers with their tier (1 or 2)."""

    distances: tuple[float, ...] = ()
    powers: tuple[float, ...] = ()
    tiers: tuple[int, ...] = ()
    cell_ids: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not len(self.distances) == len(self.powers) == len(self.tiers):
            raise PropagationError("distances, powers and tiers must have equal length")
        if any(p < 0 for p in self.powers):
            raise PropagationError("interference powers must be non-negative")
        if any(t not in (1, 2) for t in self.tiers):
            raise PropagationError("tier tags must be 1 or 2")

    @classmethod
    def from_powers(cls, powers: Iterable[float], tier: int = 1) -> "InterferenceSet":
        powers = tuple(float(p) for p in powers)
        return cls(tuple(math.nan for _ in powers), powers, tuple(tier for _ in powers))

    def __len__(self):
        return len(self.powers)

    def tier_total(self, tier: int) -> float:
        return math.fsum(p for p, t in zip(self.powers, self.tiers) if t == tier)

    @property
    def total(self) -> float:
        return math.fsum(self.powers)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def antenna_correction(env: RadioEnvironment) -> float:
    """Mobile antenna height correction a(h_m) in dB (small/medium city)."""
    log_f = math.log10(env.f_c)
    return 1.1 * (log_f - 0.7) * env.h_m - (1.56 * log_f - 0.8)


def path_loss(env: RadioEnvironment, d: float) -> float:
    """Okumura-Hata path loss in dB at distance ``d`` km, penetration loss included."""
    if not d >= D_MIN_KM:
        raise PropagationError(f"distance {d} km below the {D_MIN_KM} km minimum")
    return (
        69.55
        + 26.16 * math.log10(env.f_c)
        - 13.82 * math.log10(env.h_b)
        - antenna_correction(env)
        + env.distance_slope_db * math.log10(d)
        + env.l_ow
    )


def received_power(env: RadioEnvironment, d: float, power_factor: float = 1.0) -> float:
    """Received power in W from a transmitter ``d`` km away.

    ``power_factor`` scales the transmit power (e.g. reduced inner-zone power).
    """
    return env.p_tx * power_factor / db_to_linear(path_loss(env, d))


def sinr(s0: float, interference: InterferenceSet, noise: float = 0.0) -> float:
    if not s0 > 0:
        raise PropagationError(f"signal power must be positive, got {s0}")
    if noise < 0:
        raise PropagationError(f"noise power must be non-negative, got {noise}")
    denom = interference.tier_total(1) + interference.tier_total(2) + noise
    if denom == 0:
        raise PropagationError("SINR undefined: no interference and zero noise")
    return s0 / denom


def capacity(sinr_linear: float) -> float:
    """Shannon spectral efficiency in bps/Hz."""
    if sinr_linear < 0:
        raise PropagationError(f"SINR must be non-negative, got {sinr_linear}")
    return math.log2(1.0 + sinr_linear)


def outage_probability(gamma_db: float, s0: float,
                       interference: InterferenceSet | Sequence[float]) -> float:
    """Outage probability as a product over the individual interferers.

    P_out = 1 - prod_i exp(-(gamma / s0) * I_i), gamma in linear scale.
    """
    if not s0 > 0:
        raise PropagationError(f"signal power must be positive, got {s0}")
    powers = interference.powers if isinstance(interference, InterferenceSet) else interference
    ratio = db_to_linear(gamma_db) / s0
    # q is the plain product; m tracks q - 1 via (1 + m)(1 + a) - 1 = m + a + m*a
    # with a = expm1(-x), so small outages keep full relative precision
    q, m = 1.0, 0.0
    for i_power in powers:
        x = ratio * i_power
        q *= math.exp(-x)
        a = math.expm1(-x)
        m = m + a + m * a
    p = -m if q > 0.5 else 1.0 - q
    return min(1.0, max(0.0, p))
