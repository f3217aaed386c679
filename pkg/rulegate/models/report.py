"""
Scoring results and evaluation report models.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


@dataclass(frozen=True)
class RuleScore:
    """
    Per-rule result for one input.

    Attributes:
        rule_id: Position of the rule in the rule list.
        satisfaction: Predicted root truth probability.
        violation: Violation score; ``1 - satisfaction`` unless gated.
        antecedent: Antecedent probability used for gating, if any.
        gated: Whether antecedent gating was applied.
    """

    rule_id: int
    satisfaction: float
    violation: float
    antecedent: Optional[float] = None
    gated: bool = False


class ConceptMetrics(BaseModel):
    """Leaf-level metrics of one concept head."""

    name: str
    prevalence: float
    auroc: Optional[float] = None
    average_precision: Optional[float] = None
    accuracy: Optional[float] = None


class LeafMetrics(BaseModel):
    """Per-concept and macro leaf metrics; macros skip undefined classes."""

    concepts: List[ConceptMetrics] = Field(default_factory=list)
    macro_auroc: Optional[float] = None
    macro_average_precision: Optional[float] = None
    macro_accuracy: Optional[float] = None
    temperature: float = 1.0


class MethodMetrics(BaseModel):
    """Detection metrics of one evaluator on one rule or on the aggregate."""

    auroc: Optional[float] = None
    average_precision: Optional[float] = None
    fpr_at_95tpr: Optional[float] = None


class RuleReport(BaseModel):
    """Per-rule comparison across evaluators."""

    rule_id: int
    text: str
    provenance: str
    violation_rate: float
    methods: Dict[str, MethodMetrics] = Field(default_factory=dict)
    neural_wins: Optional[bool] = None
    node_mean_truth: List[float] = Field(default_factory=list)
    gates_trained: int = 0
    gates_cached: int = 0


class AggregateReport(BaseModel):
    """
    All-rules summary of one evaluator, reported both ways.

    Attributes:
        mean_rule_auroc: Mean of the defined per-rule AUROCs.
        anomaly: Metrics of the aggregated anomaly score against the
            pseudo-anomaly label (undefined if every row violates a rule).
    """

    mean_rule_auroc: Optional[float] = None
    anomaly: MethodMetrics = Field(default_factory=MethodMetrics)


class EvalReport(BaseModel):
    """End-to-end evaluation report."""

    seed: int
    methods: List[str]
    rules: List[RuleReport] = Field(default_factory=list)
    aggregate: Dict[str, AggregateReport] = Field(default_factory=dict)
    wins: int = 0
    comparable_rules: int = 0
    leaf: LeafMetrics = Field(default_factory=LeafMetrics)
    anomaly_rate: float = 0.0
    config: Dict[str, Any] = Field(default_factory=dict)
