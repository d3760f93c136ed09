"""Run configuration: per-source presets and the YAML config document."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .baseline import DesignSpec
from .errors import DataError
from .profiles import Family, ProfileBank


@dataclass(frozen=True)
class Preset:
    family: Family
    S: int
    method: str


PRESETS = {
    "ED": Preset(Family.LOGNORMAL, 7, "ewma"),
    "OTC": Preset(Family.GAUSSIAN, 12, "mlrss"),
    "TH": Preset(Family.BIMODAL, 10, "mlrss"),
}


@dataclass(frozen=True)
class DetectorSettings:
    S: int | None = None
    min_window: int = 10
    gamma: float = 23.0
    remediation: bool = True
    iterative_remediation: bool = False
    score_scale: str = "linear"
    log_cap: float = 700.0
    # None keeps every start the window reaches; "support" expires starts
    # once every bank profile has fallen below 5% of its peak.
    max_lookback: int | str | None = "support"


@dataclass(frozen=True)
class SimSettings:
    horizon_days: int = 730
    n_outbreaks: int = 20
    jitter: float = 0.25
    central: tuple[float, ...] | None = None


@dataclass(frozen=True)
class RunConfig:
    preset: str = "OTC"
    seed: int = 0
    family: Family | None = None
    form: str = "sum"
    method: str | None = None
    phi: float = 0.25
    buffer: int = 5
    threshold_grid: tuple[float, ...] | None = None
    design: DesignSpec = field(default_factory=DesignSpec)
    detector: DetectorSettings = field(default_factory=DetectorSettings)
    simulate: SimSettings = field(default_factory=SimSettings)

    def __post_init__(self):
        if self.preset not in (*PRESETS, "custom"):
            raise DataError(f"unknown preset {self.preset!r}; choose from {[*PRESETS, 'custom']}")
        p = PRESETS.get(self.preset)
        if self.family is None:
            object.__setattr__(self, "family", p.family if p else Family.GAUSSIAN)
        else:
            object.__setattr__(self, "family", Family(self.family))
        if self.method is None:
            object.__setattr__(self, "method", p.method if p else "mlrss")
        if self.method not in ("mlrss", "ewma"):
            raise DataError(f"unknown method {self.method!r}")
        if self.detector.S is None:
            object.__setattr__(self, "detector", replace(self.detector, S=p.S if p else 10))

    def lookback(self, bank: ProfileBank) -> int | None:
        lb = self.detector.max_lookback
        if lb == "support":
            return max(bank.support(), self.detector.min_window)
        return None if lb is None else int(lb)

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "preset" in kw and kw["preset"] != self.preset:
            # a new preset re-derives family, method and S unless they were set explicitly
            kw.setdefault("family", None)
            kw.setdefault("method", None)
            kw.setdefault("detector", replace(self.detector, S=None))
        return replace(self, **kw)


def load_config(path=None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(doc)


def config_from_dict(doc: dict) -> RunConfig:
    doc = dict(doc)
    try:
        design = DesignSpec.from_dict(doc.pop("baseline", {}))
        detector = DetectorSettings(**doc.pop("detector", {}))
        sim = doc.pop("simulate", {})
        if sim.get("central") is not None:
            sim["central"] = tuple(float(x) for x in sim["central"])
        sim = SimSettings(**sim)
        profiles = doc.pop("profiles", {})
        ewma = doc.pop("ewma", {})
        evaluation = doc.pop("evaluation", {})
        grid = evaluation.get("threshold_grid")
        return RunConfig(
            preset=doc.pop("preset", "OTC"),
            seed=int(doc.pop("seed", 0)),
            family=profiles.get("family"),
            form=profiles.get("form", "sum"),
            method=doc.pop("method", None),
            phi=float(ewma.get("phi", 0.25)),
            buffer=int(evaluation.get("buffer", 5)),
            threshold_grid=tuple(float(x) for x in grid) if grid is not None else None,
            design=design, detector=detector, simulate=sim,
            **_reject_unknown(doc),
        )
    except (TypeError, ValueError) as exc:
        raise DataError(f"invalid config: {exc}") from exc


def _reject_unknown(doc: dict) -> dict:
    if doc:
        raise DataError(f"unknown config keys: {sorted(doc)}")
    return {}
