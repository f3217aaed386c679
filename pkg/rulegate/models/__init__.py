from rulegate.models.base import Base, RuleGateBase
from rulegate.models.formula import Formula
from rulegate.models.gate_record import GateRecord
from rulegate.models.leaf_bank import ConceptDataset, LeafBank
from rulegate.models.mlp import AdamState, DenseLayer, MlpParams
from rulegate.models.report import (
    AggregateReport,
    ConceptMetrics,
    EvalReport,
    LeafMetrics,
    MethodMetrics,
    RuleReport,
    RuleScore,
)
from rulegate.models.rule import MinedRule, RuleStats
from rulegate.models.rule_graph import ConceptVocab, GraphEdge, GraphNode, RuleGraph
from rulegate.models.run_config import (
    ExperimentConfig,
    GateTrainingConfig,
    LeafBankConfig,
    MiningConfig,
    PlantedImplication,
    RunConfig,
    ScoringConfig,
    SynthSpec,
)
from rulegate.models.subtree_gate import GateSet, MonolithicModel, SubtreeGate
from rulegate.models.types import JsonList

__all__ = [
    "AdamState",
    "AggregateReport",
    "Base",
    "ConceptDataset",
    "ConceptMetrics",
    "ConceptVocab",
    "DenseLayer",
    "EvalReport",
    "ExperimentConfig",
    "Formula",
    "GateRecord",
    "GateSet",
    "GateTrainingConfig",
    "GraphEdge",
    "GraphNode",
    "JsonList",
    "LeafBank",
    "LeafBankConfig",
    "LeafMetrics",
    "MethodMetrics",
    "MinedRule",
    "MiningConfig",
    "MlpParams",
    "MonolithicModel",
    "PlantedImplication",
    "RuleGateBase",
    "RuleGraph",
    "RuleReport",
    "RuleScore",
    "RuleStats",
    "RunConfig",
    "ScoringConfig",
    "SubtreeGate",
    "SynthSpec",
]
