"""Run configuration for the grid simulation."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

from ..surface.genome import GenomeLayout
from ..surface.sites import POLICIES, validate_slot_count


class ConfigError(ValueError):
    """A run configuration that cannot be executed as requested."""


@dataclass(frozen=True)
class Treatment:
    """Fitness mutation regime applied after selection each generation.

    * neutral: fitness untouched (the only mode tagged layouts allow).
    * purifying: with probability ``deleterious_p`` per offspring,
      subtract a half-normal magnitude from fitness.
    * adaptive: purifying, plus with probability ``beneficial_p`` add a
      half-normal magnitude.
    """

    mode: str = "neutral"
    deleterious_p: float = 1.0 / 3.0
    deleterious_sigma: float = 1.0
    beneficial_p: float = 0.003
    beneficial_sigma: float = 1.0

    def validate(self) -> None:
        if self.mode not in ("neutral", "purifying", "adaptive"):
            raise ConfigError(f"unknown treatment mode {self.mode!r}")
        for name in ("deleterious_p", "beneficial_p"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must be a probability, got {p}")
        for name in ("deleterious_sigma", "beneficial_sigma"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")


@dataclass(frozen=True)
class GridConfig:
    """Geometry, genome format, and scheduling knobs for one run."""

    width: int
    height: int
    generations: int
    population: int = 32
    layout: str = "tagged"
    policy: str = "tilted"
    slot_count: int = 64
    differentia_bits: int = 1
    tournament_size: int = 5
    torus: bool = False
    loss_rate: float = 0.0
    seed: int = 0
    track_perfect: bool = False
    sample_per_pe: int = 1
    treatment: Treatment = field(default_factory=Treatment)

    RECEIVE_CAPACITY = 4  # migrants accumulated before a stage fires

    @property
    def n_pes(self) -> int:
        return self.width * self.height

    def genome_layout(self) -> GenomeLayout:
        return GenomeLayout(self.layout, self.slot_count, self.differentia_bits)

    def validate(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ConfigError(f"grid must be at least 1x1, got {self.width}x{self.height}")
        if self.population < 1:
            raise ConfigError("population per PE must be positive")
        if self.generations < 0:
            raise ConfigError("generations must be non-negative")
        if self.tournament_size < 1:
            raise ConfigError("tournament size must be positive")
        if not 0.0 <= self.loss_rate < 1.0:
            raise ConfigError(f"loss_rate must be in [0, 1), got {self.loss_rate}")
        if self.sample_per_pe < 1:
            raise ConfigError("sample_per_pe must be positive")
        if self.layout not in ("tagged", "fitness"):
            raise ConfigError(f"unknown layout {self.layout!r}")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}")
        try:
            validate_slot_count(self.policy, self.slot_count)
        except ValueError as err:
            raise ConfigError(str(err)) from None
        if not 1 <= self.differentia_bits <= 8:
            raise ConfigError(
                f"differentia_bits must be 1..8, got {self.differentia_bits}"
            )
        self.treatment.validate()
        if self.layout == "tagged" and self.treatment.mode != "neutral":
            raise ConfigError(
                "tagged layout carries no fitness field; "
                f"treatment {self.treatment.mode!r} needs layout='fitness'"
            )
        capacity = self.genome_layout().counter_capacity
        if self.generations >= capacity:
            raise ConfigError(
                f"{self.generations} generations would overflow the "
                f"{self.layout} layout's deposit counter (capacity {capacity})"
            )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["treatment"] = asdict(self.treatment)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> GridConfig:
        payload = dict(data)
        treatment = payload.pop("treatment", None)
        if treatment is not None:
            if not isinstance(treatment, dict):
                raise ConfigError("treatment must be a mapping")
            unknown = set(treatment) - {f.name for f in fields(Treatment)}
            if unknown:
                raise ConfigError(f"unknown treatment keys: {sorted(unknown)}")
            payload["treatment"] = Treatment(**treatment)
        unknown = set(payload) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**payload)
        except TypeError as err:
            raise ConfigError(str(err)) from None
