"""
Pydantic configuration models for training, mining, scoring and experiments.
"""

from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from rulegate import config
from rulegate.utils.enums import Aggregation, TrainMode


class _Config(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LeafBankConfig(_Config):
    """Leaf concept bank training settings."""

    feature_dim: int = Field(config.DEFAULT_FEATURE_DIM, gt=0)
    encoder_hidden: Tuple[int, ...] = ()
    epochs: int = Field(config.DEFAULT_LEAF_EPOCHS, ge=0)
    lr: float = Field(config.DEFAULT_LEARNING_RATE, ge=0.0)
    batch_size: int = Field(config.DEFAULT_BATCH_SIZE, gt=0)
    use_pos_weight: bool = False
    temperature_scaling: bool = True
    calibration_frac: float = Field(0.1, ge=0.0, lt=1.0)
    seed: int = config.DEFAULT_SEED

    @field_validator("encoder_hidden")
    @classmethod
    def _positive_widths(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(width <= 0 for width in value):
            raise ValueError("encoder_hidden widths must be positive")
        return value


class GateTrainingConfig(_Config):
    """Subtree gate training settings."""

    epochs_level: int = Field(config.DEFAULT_LEVEL_EPOCHS, ge=0)
    lr: float = Field(config.DEFAULT_LEARNING_RATE, ge=0.0)
    batch_size: int = Field(config.DEFAULT_BATCH_SIZE, ge=2)
    negatives: TrainMode = TrainMode.ChimerasOnly
    chimera_pairs: int = Field(1, ge=1)
    hidden_layers: int = Field(config.DEFAULT_GATE_HIDDEN_LAYERS, ge=1)
    train_missing_only: bool = True
    train_frac: float = Field(1.0, gt=0.0, le=1.0)
    threads: int = Field(1, ge=1)
    seed: int = config.DEFAULT_SEED

    def arch_tag(self, feature_dim: int) -> str:
        """Gate architecture tag; part of every cache key."""
        return f"gate-mlp-relu-{self.hidden_layers}x{feature_dim}-v1"


class MiningConfig(_Config):
    """Rule mining thresholds and caps."""

    support_thresh: float = Field(config.DEFAULT_SUPPORT_THRESH, ge=0.0, le=1.0)
    confidence_pos: float = Field(config.DEFAULT_CONFIDENCE_POS, ge=0.0, le=1.0)
    confidence_neg: float = Field(config.DEFAULT_CONFIDENCE_NEG, ge=0.0, le=1.0)
    max_rules: int = Field(config.DEFAULT_MAX_RULES, ge=0)
    compound: bool = False
    compound_conf: float = Field(config.DEFAULT_CONFIDENCE_POS, ge=0.0, le=1.0)
    per_parent_pair_limit: int = Field(config.DEFAULT_PER_PARENT_PAIR_LIMIT, ge=0)
    compound_pool: int = Field(config.DEFAULT_COMPOUND_POOL, ge=2)

    @model_validator(mode="after")
    def _ordered_thresholds(self) -> "MiningConfig":
        if self.confidence_neg >= self.confidence_pos:
            raise ValueError("confidence_neg must be below confidence_pos")
        return self


class ScoringConfig(_Config):
    """Inference settings."""

    tau: float = Field(config.DEFAULT_TAU, ge=0.0, lt=1.0)
    aggregation: Aggregation = Aggregation(config.DEFAULT_AGGREGATION)
    top_k: int = Field(config.DEFAULT_TOP_K, ge=1)
    gate_antecedent: bool = True


class PlantedImplication(_Config):
    """
    Planted label dependency ``antecedent -> consequent``.

    With ``exclusion`` set the dependency is ``antecedent -> !consequent``.
    """

    antecedent: str
    consequent: str
    strength: float = Field(1.0, ge=0.0, le=1.0)
    exclusion: bool = False

    @property
    def rule_text(self) -> str:
        bang = "!" if self.exclusion else ""
        return f"{self.antecedent} -> {bang}{self.consequent}"


def _default_implications() -> List[PlantedImplication]:
    pairs = [("c00", "c01"), ("c02", "c03"), ("c04", "c05"), ("c06", "c07"), ("c07", "c08")]
    return [PlantedImplication(antecedent=a, consequent=c) for a, c in pairs]


class SynthSpec(_Config):
    """
    Synthetic concept-feature benchmark specification.

    ``gain_spread`` is the standard deviation of the per-row log-gain shared by
    the concepts of planted implications; 0 gives every concept a fixed gain.
    """

    n_concepts: int = Field(12, gt=0)
    input_dim: int = Field(config.DEFAULT_INPUT_DIM, gt=0)
    concept_prefix: str = "c"
    base_marginal: float = Field(0.3, ge=0.0, le=1.0)
    marginals: Optional[List[float]] = None
    implications: List[PlantedImplication] = Field(default_factory=_default_implications)
    violation_rate: float = Field(0.2, ge=0.0, le=1.0)
    signal: float = Field(3.0, ge=0.0)
    noise: float = Field(0.4, ge=0.0)
    gain_spread: float = Field(0.7, ge=0.0)
    n_train: int = Field(4000, gt=0)
    n_eval: int = Field(2000, gt=0)
    seed: int = config.DEFAULT_SEED

    @model_validator(mode="after")
    def _check_concepts(self) -> "SynthSpec":
        names = set(self.concept_names)
        if self.marginals is not None and len(self.marginals) != self.n_concepts:
            raise ValueError("marginals must list one probability per concept")
        for imp in self.implications:
            if imp.antecedent not in names or imp.consequent not in names:
                raise ValueError(f"Implication {imp.rule_text} names an unknown concept")
            if imp.antecedent == imp.consequent:
                raise ValueError(f"Implication {imp.rule_text} is reflexive")
        return self

    @property
    def concept_names(self) -> List[str]:
        width = max(2, len(str(self.n_concepts - 1)))
        return [f"{self.concept_prefix}{i:0{width}d}" for i in range(self.n_concepts)]

    def marginal_vector(self) -> List[float]:
        return list(self.marginals) if self.marginals is not None else [self.base_marginal] * self.n_concepts


DEFAULT_RULES = [
    "c00 -> c01",
    "c02 -> c03",
    "c04 -> c05",
    "(c06 -> c07) & (c07 -> c08)",
    "c09 <-> !c09",
]


class ExperimentConfig(_Config):
    """End-to-end benchmark run: data, rules, every evaluator, report."""

    synth: SynthSpec = Field(default_factory=SynthSpec)
    rules: List[str] = Field(default_factory=lambda: list(DEFAULT_RULES))
    mine_rules: bool = False
    leaf: LeafBankConfig = Field(default_factory=LeafBankConfig)
    gates: GateTrainingConfig = Field(default_factory=GateTrainingConfig)
    mining: MiningConfig = Field(default_factory=MiningConfig)
    scoring: ScoringConfig = Field(default_factory=ScoringConfig)
    cache_dir: Optional[Path] = None
    seed: int = config.DEFAULT_SEED

    @model_validator(mode="after")
    def _needs_rules(self) -> "ExperimentConfig":
        if not self.rules and not self.mine_rules:
            raise ValueError("Provide rules or enable mine_rules")
        return self

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Copy with one seed applied to data generation and every trainer."""
        return self.model_copy(
            update={
                "seed": seed,
                "synth": self.synth.model_copy(update={"seed": seed}),
                "leaf": self.leaf.model_copy(update={"seed": seed}),
                "gates": self.gates.model_copy(update={"seed": seed}),
            }
        )


class RunConfig(_Config):
    """
    Settings shared by CLI subcommands.

    Values come from an optional JSON config file; command-line flags
    override them and the cache directory follows flag, then the
    ``RULEGATE_CACHE_DIR`` environment variable, then this file.
    """

    data: Optional[Path] = None
    rules: Optional[Path] = None
    bank: Optional[Path] = None
    cache_dir: Optional[Path] = None
    report: Optional[Path] = None
    leaf: LeafBankConfig = Field(default_factory=LeafBankConfig)
    gates: GateTrainingConfig = Field(default_factory=GateTrainingConfig)
    mining: MiningConfig = Field(default_factory=MiningConfig)
    scoring: ScoringConfig = Field(default_factory=ScoringConfig)
    seed: int = config.DEFAULT_SEED
