"""
End-to-end benchmark: generate data, train the leaf bank, train every
evaluator and compare their per-rule violation detection on the eval split.

Evaluators:
    indep   closed-form independent-events probability (no training)
    sem     subtree gates trained on same-image pairs only
    mono_n  one root MLP on same-image pairs
    mono_c  one root MLP with chimera compositions added
    neural  subtree gates trained with ``cfg.gates.negatives`` (chimeras by default)

Per-rule metrics use the ungated score ``1 - t_root`` against the rule's own
hard violation label. The all-rules summary is reported both as the mean of
per-rule AUROCs and as metrics of the aggregated anomaly score against the
pseudo-anomaly label.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from rulegate.engine import metrics
from rulegate.engine.boolean_semantics import anomaly_labels_batch, rule_truths_batch
from rulegate.engine.compiler import compile_formula
from rulegate.engine.gate_cache import GateCache
from rulegate.engine.gate_training import monolithic_predict_batch, train_monolithic, train_rule
from rulegate.engine.independent_events import soft_eval_batch
from rulegate.engine.leaf_training import (
    concept_probs_batch,
    encode_batch,
    leaf_metrics,
    train_leaf_bank,
)
from rulegate.engine.rule_mining import mine_compound, mine_pairwise
from rulegate.engine.scoring import aggregate_batch, predict_nodes_batch
from rulegate.engine.synthetic import gen_datasets
from rulegate.models.formula import Formula
from rulegate.models.leaf_bank import ConceptDataset, LeafBank
from rulegate.models.report import AggregateReport, EvalReport, MethodMetrics, RuleReport
from rulegate.models.rule_graph import RuleGraph
from rulegate.models.run_config import ExperimentConfig
from rulegate.readers.rule_file_reader import RuleFileReader
from rulegate.utils.enums import Method, Provenance, TrainMode

logger = logging.getLogger(__name__)


@dataclass
class ExperimentRule:
    """A compiled rule with its origin."""

    formula: Formula
    graph: RuleGraph
    provenance: Provenance

    @property
    def text(self) -> str:
        return str(self.formula)


@dataclass
class MethodOutputs:
    """
    Eval-split outputs of every evaluator.

    Attributes:
        satisfaction: Method to [M x R] root satisfaction.
        node_truths: Rule index to mean neural t of each node.
        gate_counts: Rule index to (trained, loaded) neural gate counts.
    """

    satisfaction: Dict[Method, np.ndarray] = field(default_factory=dict)
    node_truths: Dict[int, np.ndarray] = field(default_factory=dict)
    gate_counts: Dict[int, Tuple[int, int]] = field(default_factory=dict)


def collect_rules(cfg: ExperimentConfig, train: ConceptDataset) -> List[ExperimentRule]:
    """Handwritten rules followed by mined rules, without duplicate texts."""
    candidates = [(RuleFileReader.parse(text), Provenance.Handwritten) for text in cfg.rules]
    if cfg.mine_rules:
        mined = mine_pairwise(train.labels, train.vocab, cfg.mining)
        if cfg.mining.compound:
            mined += mine_compound(train.labels, train.vocab, cfg.mining)
        candidates += [(rule.formula, rule.provenance) for rule in mined]

    rules: List[ExperimentRule] = []
    seen = set()
    for formula, provenance in candidates:
        text = str(formula)
        if text in seen:
            continue
        seen.add(text)
        rules.append(ExperimentRule(formula, compile_formula(formula, train.vocab), provenance))
    return rules


def metrics_for(scores: np.ndarray, labels: np.ndarray) -> MethodMetrics:
    return MethodMetrics(
        auroc=metrics.auroc(scores, labels),
        average_precision=metrics.average_precision(scores, labels),
        fpr_at_95tpr=metrics.fpr_at_95tpr(scores, labels),
    )


def _cache_for(cfg: ExperimentConfig, mode: TrainMode) -> Optional[GateCache]:
    if cfg.cache_dir is None:
        return None
    return GateCache(Path(cfg.cache_dir) / mode.value)


def evaluate_methods(
    cfg: ExperimentConfig,
    rules: List[ExperimentRule],
    train: ConceptDataset,
    eval_data: ConceptDataset,
    bank: LeafBank,
) -> MethodOutputs:
    """Train every evaluator on train and predict root satisfaction on eval_data."""
    z = encode_batch(bank, eval_data.features)
    probs = concept_probs_batch(bank, eval_data.features)
    sem_cfg = cfg.gates.model_copy(update={"negatives": TrainMode.SEM})

    columns: Dict[Method, List[np.ndarray]] = {method: [] for method in Method}
    outputs = MethodOutputs()
    for r, rule in enumerate(rules):
        logger.info(f"Rule {r}: {rule.text}")
        graph = rule.graph
        columns[Method.IndepProb].append(soft_eval_batch(graph, probs)[:, graph.root])

        sem_gates = train_rule(graph, train, bank, sem_cfg, _cache_for(cfg, TrainMode.SEM))
        columns[Method.SEM].append(predict_nodes_batch(graph, z, probs, sem_gates)[:, graph.root])

        for method, with_chimeras in ((Method.MonoN, False), (Method.MonoC, True)):
            model = train_monolithic(graph, train, bank, cfg.gates, with_chimeras)
            columns[method].append(monolithic_predict_batch(model, z))

        gates = train_rule(graph, train, bank, cfg.gates, _cache_for(cfg, cfg.gates.negatives))
        truths = predict_nodes_batch(graph, z, probs, gates)
        columns[Method.Neural].append(truths[:, graph.root])
        outputs.node_truths[r] = truths.mean(axis=0)
        outputs.gate_counts[r] = (len(gates.trained), len(gates.loaded))

    outputs.satisfaction = {method: np.stack(cols, axis=1) for method, cols in columns.items()}
    return outputs


def count_wins(reports: List[RuleReport]) -> Tuple[int, int]:
    """
    (wins, comparable) of the neural evaluator over the independent baseline.

    A rule is comparable when both AUROCs are defined and won when the neural
    AUROC is strictly higher.
    """
    outcomes = [r.neural_wins for r in reports if r.neural_wins is not None]
    return sum(outcomes), len(outcomes)


def run_experiment(cfg: ExperimentConfig) -> EvalReport:
    """
    Run the full benchmark for one configuration.

    Returns:
        Report with per-rule metrics of every evaluator, neural-vs-independent
        wins, all-rules aggregates, leaf metrics and the config echo. Identical
        configs give identical reports.
    """
    train, eval_data = gen_datasets(cfg.synth)
    bank = train_leaf_bank(train, cfg.leaf)
    rules = collect_rules(cfg, train)
    if not rules:
        raise ValueError("No rules to evaluate")
    logger.info(f"Evaluating {len(rules)} rule(s) on {len(eval_data)} eval rows")

    outputs = evaluate_methods(cfg, rules, train, eval_data, bank)
    graphs = [rule.graph for rule in rules]
    anomaly = anomaly_labels_batch(graphs, eval_data.labels)

    reports: List[RuleReport] = []
    for r, rule in enumerate(rules):
        violated = 1 - rule_truths_batch(rule.graph, eval_data.labels)
        per_method = {
            method.value: metrics_for(1.0 - outputs.satisfaction[method][:, r], violated)
            for method in Method
        }
        neural = per_method[Method.Neural.value].auroc
        indep = per_method[Method.IndepProb.value].auroc
        trained, loaded = outputs.gate_counts[r]
        reports.append(
            RuleReport(
                rule_id=r,
                text=rule.text,
                provenance=rule.provenance.value,
                violation_rate=float(violated.mean()),
                methods=per_method,
                neural_wins=None if neural is None or indep is None else neural > indep,
                node_mean_truth=[float(v) for v in outputs.node_truths[r]],
                gates_trained=trained,
                gates_cached=loaded,
            )
        )

    summary: Dict[str, AggregateReport] = {}
    for method in Method:
        satisfaction = outputs.satisfaction[method]
        scores = aggregate_batch(1.0 - satisfaction, cfg.scoring.aggregation, satisfaction)
        summary[method.value] = AggregateReport(
            mean_rule_auroc=metrics.mean_defined([r.methods[method.value].auroc for r in reports]),
            anomaly=metrics_for(scores, anomaly),
        )

    wins, comparable = count_wins(reports)
    logger.info(f"Neural evaluator wins on {wins} of {comparable} comparable rule(s)")
    return EvalReport(
        seed=cfg.seed,
        methods=[method.value for method in Method],
        rules=reports,
        aggregate=summary,
        wins=wins,
        comparable_rules=comparable,
        leaf=leaf_metrics(bank, eval_data),
        anomaly_rate=float(anomaly.mean()),
        config=cfg.model_dump(mode="json"),
    )
