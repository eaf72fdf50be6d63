"""Run configuration: JSON ingestion with the reference parameter set as defaults and validation."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .assignment import BorrowPolicy
from .propagation import RadioEnvironment
from .scenarios import ALL_KINDS, ScenarioKind, ScenarioSettings, sweep_distances


class ConfigValidationError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


# alternative spellings accepted in JSON documents
_ALIASES = {
    "A_Th": "a_th",
    "B_Th": "b_th",
    "L_ow": "l_ow",
    "fc": "f_c",
    "hb": "h_b",
    "hm": "h_m",
    "gamma": "gamma_db",
    "radius": "cell_radius",
}


@dataclass
class RunConfig:
    f_c: float = 1800.0
    h_b: float = 100.0
    h_m: float = 5.0
    l_ow: float = 10.0
    p_tx: float = 1500.0
    gamma_db: float = 9.0
    cell_radius: float = 1.0
    channels_per_cell: int = 120
    inner_ratio: float = 0.5
    a_th: int | None = None
    b_th: int | None = None
    donors_per_group: int = 1
    tier_count: int = 2
    d_start: float = 0.1
    d_stop: float = 1.0
    d_step: float = 0.1
    scenarios: list[str] = field(default_factory=lambda: [k.value for k in ALL_KINDS])
    borrowed_band: str = "A"
    noise_w: float = 0.0
    inner_power_factor: float | None = None
    out_dir: str = "."

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def positive(name):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or v <= 0:
                raise ConfigValidationError(name, f"must be a positive number, got {v!r}")

        for name in ("f_c", "h_b", "h_m", "l_ow", "p_tx", "cell_radius", "d_start", "d_step"):
            positive(name)
        if not isinstance(self.gamma_db, (int, float)) or not math.isfinite(self.gamma_db):
            raise ConfigValidationError("gamma_db", f"must be finite, got {self.gamma_db!r}")
        for name in ("channels_per_cell", "donors_per_group"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigValidationError(name, f"must be a positive integer, got {v!r}")
        for name in ("a_th", "b_th"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 0):
                raise ConfigValidationError(name, f"must be a non-negative integer, got {v!r}")
        if self.tier_count not in (1, 2):
            raise ConfigValidationError("tier_count", f"must be 1 or 2, got {self.tier_count!r}")
        if not (isinstance(self.inner_ratio, (int, float)) and 0 < self.inner_ratio < 1):
            raise ConfigValidationError("inner_ratio", f"must lie in (0, 1), got {self.inner_ratio!r}")
        if not isinstance(self.d_stop, (int, float)) or self.d_stop < self.d_start:
            raise ConfigValidationError("d_stop", f"must be >= d_start, got {self.d_stop!r}")
        if self.d_stop > self.cell_radius:
            raise ConfigValidationError("d_stop", f"must not exceed cell_radius {self.cell_radius}")
        if not isinstance(self.noise_w, (int, float)) or self.noise_w < 0:
            raise ConfigValidationError("noise_w", f"must be non-negative, got {self.noise_w!r}")
        if self.inner_power_factor is not None and not (0 < self.inner_power_factor <= 1):
            raise ConfigValidationError("inner_power_factor", "must lie in (0, 1]")
        if self.borrowed_band not in ("A", "B"):
            raise ConfigValidationError("borrowed_band", f"must be 'A' or 'B', got {self.borrowed_band!r}")
        if not isinstance(self.scenarios, list) or not self.scenarios:
            raise ConfigValidationError("scenarios", "must be a non-empty list")
        for name in self.scenarios:
            try:
                ScenarioKind.parse(name)
            except (ValueError, TypeError):
                raise ConfigValidationError("scenarios", f"unknown scenario {name!r}") from None

    @property
    def environment(self) -> RadioEnvironment:
        return RadioEnvironment(self.f_c, self.h_b, self.h_m, self.l_ow, self.p_tx, self.gamma_db)

    @property
    def policy(self) -> BorrowPolicy:
        default = self.channels_per_cell // 4
        return BorrowPolicy(
            self.a_th if self.a_th is not None else default,
            self.b_th if self.b_th is not None else default,
            donors_per_group=self.donors_per_group,
        )

    @property
    def settings(self) -> ScenarioSettings:
        return ScenarioSettings(self.inner_ratio, self.borrowed_band, self.noise_w,
                                self.inner_power_factor)

    @property
    def kinds(self) -> list[ScenarioKind]:
        return [ScenarioKind.parse(s) for s in self.scenarios]

    @property
    def distances(self) -> list[float]:
        return sweep_distances(self.d_start, self.d_stop, self.d_step)

    def resolved(self) -> dict[str, Any]:
        out = asdict(self)
        policy = self.policy
        out["a_th"], out["b_th"] = policy.first_threshold, policy.second_threshold
        return out


def config_from_mapping(doc: dict[str, Any]) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigValidationError("<document>", "top level must be a JSON object")
    flat: dict[str, Any] = {}
    for key, value in doc.items():
        if key in ("sweep", "environment") and isinstance(value, dict):
            for k, v in value.items():
                flat[_ALIASES.get(k, k)] = v
        else:
            flat[_ALIASES.get(key, key)] = value
    known = {f.name for f in fields(RunConfig)}
    for key in flat:
        if key not in known:
            raise ConfigValidationError(key, "unknown field")
    try:
        return RunConfig(**flat)
    except TypeError as exc:
        raise ConfigValidationError("<document>", str(exc)) from None


def load_config(path: str | Path | None) -> RunConfig:
    """Read a JSON config; omitted fields take the reference defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigValidationError("config", f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigValidationError("config", f"{path} is not valid JSON: {exc}") from None
    return config_from_mapping(doc)
