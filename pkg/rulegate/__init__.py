"""
rulegate: rule-based anomaly scoring with lineage-cached neural subtree gates.

Typical use::

    import rulegate

    vocab = rulegate.ConceptVocab.from_names(["road", "vehicle", "driver"])
    graph = rulegate.compile_formula(rulegate.parse("vehicle -> (road & driver)"), vocab)
"""

from rulegate.engine.compiler import compile_formula
from rulegate.engine.gate_cache import CacheKey, GateCache, subtree_key
from rulegate.engine.gate_training import train_level, train_monolithic, train_rule
from rulegate.engine.independent_events import soft_eval, soft_eval_batch
from rulegate.engine.leaf_training import fit_temperature, train_leaf_bank
from rulegate.engine.rule_mining import mine_compound, mine_pairwise, upward_closure
from rulegate.engine.scoring import aggregate, attribute_topk, violation_score
from rulegate.engine.synthetic import gen_dataset
from rulegate.engine.experiment import run_experiment
from rulegate.errors import (
    ArityError,
    CacheIntegrityError,
    CycleError,
    DimensionError,
    FormulaSyntaxError,
    InfeasibleSpecError,
    MissingGateError,
    RuleGateError,
    UnknownConceptError,
)
from rulegate.models.formula import Formula
from rulegate.models.leaf_bank import ConceptDataset, LeafBank
from rulegate.models.rule_graph import ConceptVocab, RuleGraph
from rulegate.models.run_config import (
    ExperimentConfig,
    GateTrainingConfig,
    LeafBankConfig,
    MiningConfig,
    ScoringConfig,
    SynthSpec,
)
from rulegate.readers.rule_file_reader import RuleFileReader
from rulegate.utils.enums import Aggregation, OpCode, Split, TrainMode
from rulegate.writers.rule_writer import format_formula

parse = RuleFileReader.parse

__version__ = "0.1.0"

__all__ = [
    "Aggregation",
    "ArityError",
    "CacheIntegrityError",
    "CacheKey",
    "ConceptDataset",
    "ConceptVocab",
    "CycleError",
    "DimensionError",
    "ExperimentConfig",
    "Formula",
    "FormulaSyntaxError",
    "GateCache",
    "GateTrainingConfig",
    "InfeasibleSpecError",
    "LeafBank",
    "LeafBankConfig",
    "MiningConfig",
    "MissingGateError",
    "OpCode",
    "RuleGateError",
    "RuleGraph",
    "ScoringConfig",
    "Split",
    "SynthSpec",
    "TrainMode",
    "UnknownConceptError",
    "aggregate",
    "attribute_topk",
    "compile_formula",
    "fit_temperature",
    "format_formula",
    "gen_dataset",
    "mine_compound",
    "mine_pairwise",
    "parse",
    "run_experiment",
    "soft_eval",
    "soft_eval_batch",
    "subtree_key",
    "train_leaf_bank",
    "train_level",
    "train_monolithic",
    "train_rule",
    "upward_closure",
    "violation_score",
]
