"""
Subtree gate forward pass, chimera batches and level-wise gate training.

Gates are trained bottom-up by depth with the leaf bank and all lower gates
frozen. Each gate sees its two operands as ``[h | b]`` blocks, where h is the
child's feature (the leaf embedding z or a lower gate's hidden output) and b
is 1 when the edge is negated. Supervision is the hard truth of the node,
either for same-image operand pairs or for chimera pairs whose operands come
from two different samples. An operator operand of a chimera is itself
redrawn from mixed samples through the frozen gates below it, so its truth
varies even when the rule holds on every training row.

A gate or baseline whose training targets can take only one value is fit as
a constant at the smoothed target rate.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from rulegate.engine.boolean_semantics import hard_op, hard_op_vec, propagate_hard_truths_batch
from rulegate.engine.gate_cache import CacheKey, GateCache, subtree_key
from rulegate.engine.leaf_training import concept_probs_batch, encode_batch, fingerprint
from rulegate.engine.neural import (
    adam_step,
    forward_batch,
    init_mlp,
    iterate_minibatches,
    loss_and_grad,
    sigmoid,
)
from rulegate.errors import DimensionError, MissingGateError
from rulegate.models.leaf_bank import ConceptDataset, LeafBank
from rulegate.models.mlp import AdamState, MlpParams
from rulegate.models.rule_graph import RuleGraph
from rulegate.models.run_config import GateTrainingConfig
from rulegate.models.subtree_gate import GateSet, MonolithicModel, SubtreeGate
from rulegate.utils.converters import as_matrix
from rulegate.utils.enums import TrainMode

logger = logging.getLogger(__name__)

_SUBSAMPLE_STREAM = 0x7F
_MONOLITHIC_STREAM = 0x30


def gate_sizes(feature_dim: int, hidden_layers: int) -> List[int]:
    """Layer widths ``[2(F+1), F, ..., F, 1]``."""
    return [2 * (feature_dim + 1)] + [feature_dim] * hidden_layers + [1]


def init_gate(
    feature_dim: int,
    cfg: GateTrainingConfig,
    rng: np.random.Generator,
    key: str = "",
    op_name: str = "",
) -> SubtreeGate:
    params = init_mlp(gate_sizes(feature_dim, cfg.hidden_layers), rng, cfg.arch_tag(feature_dim))
    return SubtreeGate(params=params, key=key, op_name=op_name)


def gate_rng(seed: int, key: CacheKey) -> np.random.Generator:
    """Private generator of one gate, independent of training order."""
    return np.random.default_rng([seed, int(key.hash[:8], 16)])


def gate_inputs(
    h_left: np.ndarray, neg_left: bool, h_right: np.ndarray, neg_right: bool
) -> np.ndarray:
    """
    Stack ``[h_left | b_left | h_right | b_right]`` row-wise.

    Raises:
        DimensionError: If the operand blocks differ in shape.
    """
    h_left = as_matrix(h_left)
    h_right = as_matrix(h_right)
    if h_left.shape != h_right.shape:
        raise DimensionError(f"Operand shapes differ: {h_left.shape} vs {h_right.shape}")
    bits = np.ones((h_left.shape[0], 1))
    return np.hstack([h_left, bits * float(neg_left), h_right, bits * float(neg_right)])


def gate_forward_batch(
    gate: SubtreeGate,
    h_left: np.ndarray,
    neg_left: bool,
    h_right: np.ndarray,
    neg_right: bool,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Apply a gate to a batch of operand pairs.

    Returns:
        (h_v, t_v): parent features [M x F] and truth probabilities [M].

    Raises:
        DimensionError: If the operand width is not the gate's F.
    """
    inputs = gate_inputs(h_left, neg_left, h_right, neg_right)
    if inputs.shape[1] != gate.params.input_dim:
        raise DimensionError(
            f"Gate expects operands of width {gate.feature_dim}, "
            f"got {(inputs.shape[1] - 2) // 2}"
        )
    h, logits = forward_batch(gate.params, inputs)
    return h, sigmoid(logits[:, 0])


def gate_forward(
    gate: SubtreeGate,
    left: Tuple[Sequence[float], bool],
    right: Tuple[Sequence[float], bool],
) -> Tuple[np.ndarray, float]:
    """Apply a gate to one ``(h, negated)`` operand pair."""
    h_left, neg_left = left
    h_right, neg_right = right
    h, t = gate_forward_batch(
        gate,
        np.asarray(h_left, dtype=np.float64)[None, :],
        neg_left,
        np.asarray(h_right, dtype=np.float64)[None, :],
        neg_right,
    )
    return h[0], float(t[0])


def random_derangement(n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Random non-trivial cyclic shift of ``range(n)``.

    Raises:
        ValueError: If n < 2.
    """
    if n < 2:
        raise ValueError("A derangement needs at least 2 rows")
    return (np.arange(n) + rng.integers(1, n)) % n


def _fold(truths: np.ndarray, negated: bool) -> np.ndarray:
    truths = np.asarray(truths).astype(np.uint8)
    return 1 - truths if negated else truths


def build_chimera_batch(
    h_left: np.ndarray,
    h_right: np.ndarray,
    truth_left: np.ndarray,
    truth_right: np.ndarray,
    op_code: int,
    neg_left: bool,
    neg_right: bool,
    perm: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pair each row's left operand with the right operand of row ``perm[i]``.

    Args:
        h_left, h_right: [B x F] child features of the batch.
        truth_left, truth_right: [B] hard child truths before edge negation.
        op_code: Operator of the node.
        neg_left, neg_right: Edge negation flags.
        perm: Derangement of ``range(B)``.

    Returns:
        (inputs [B x 2(F+1)], targets [B]) where each target is the operator
        applied to the negation-folded truths the operands inherit from their
        source rows.

    Raises:
        ValueError: If perm is not a derangement or the batch has fewer than
            2 rows.
    """
    perm = np.asarray(perm, dtype=np.int64)
    n = perm.shape[0]
    if n < 2:
        raise ValueError("Chimera batches need at least 2 rows")
    if not np.array_equal(np.sort(perm), np.arange(n)) or np.any(perm == np.arange(n)):
        raise ValueError("perm must be a derangement of the batch")
    inputs = gate_inputs(h_left, neg_left, as_matrix(h_right)[perm], neg_right)
    folded = np.stack(
        [_fold(truth_left, neg_left), _fold(np.asarray(truth_right)[perm], neg_right)], axis=1
    )
    return inputs, hard_op_vec(op_code, folded).astype(np.float64)


def propagate_gates_batch(
    graph: RuleGraph,
    z: np.ndarray,
    leaf_probs: np.ndarray,
    gates: GateSet,
    max_depth: Optional[int] = None,
) -> Tuple[Dict[int, np.ndarray], np.ndarray]:
    """
    Features and truth probabilities of every node, bottom-up by level.

    Leaves take ``h = z`` and ``t = p_c``; operator nodes apply their gate to
    their two children in operand order.

    Args:
        graph: Rule graph.
        z: [M x F] leaf embeddings.
        leaf_probs: [M x N] concept probabilities (concept id c is column c-1).
        gates: Gates of the internal nodes.
        max_depth: Stop after this level; deeper nodes keep NaN truths.

    Returns:
        (features by node id, [M x nodes] truth probabilities).

    Raises:
        MissingGateError: If a node within max_depth has no gate.
    """
    z = as_matrix(z)
    leaf_probs = as_matrix(leaf_probs)
    features: Dict[int, np.ndarray] = {}
    truths = np.full((z.shape[0], len(graph)), np.nan)
    for depth, level in enumerate(graph.topo_levels()):
        if max_depth is not None and depth > max_depth:
            break
        for v in level:
            node = graph.nodes[v]
            if node.is_leaf:
                features[v] = z
                truths[:, v] = leaf_probs[:, node.concept_id - 1]
                continue
            left, right = graph.in_edges(v)
            features[v], truths[:, v] = gate_forward_batch(
                gates[v], features[left.src], left.negated, features[right.src], right.negated
            )
    return features, truths


def training_rows(n_rows: int, cfg: GateTrainingConfig) -> np.ndarray:
    """Row indices used for training; a seeded subsample when train_frac < 1."""
    if cfg.train_frac >= 1.0:
        return np.arange(n_rows)
    n_keep = min(n_rows, max(2, int(round(cfg.train_frac * n_rows))))
    rng = np.random.default_rng([cfg.seed, _SUBSAMPLE_STREAM])
    return np.sort(rng.choice(n_rows, size=n_keep, replace=False))


@dataclass
class ChimeraOperand:
    """
    One operand of a gate under training, redrawn from mixed source rows.

    A leaf operand returns the embeddings and labels of its source rows. An
    operator operand draws its left child from the given rows and its right
    child from a derangement of them, applies its frozen gate, and takes its
    truth from its own operator over the truths the children inherited.

    Attributes:
        h: Leaf embeddings [M x F] of every training row.
        truth: Leaf labels [M] of every training row.
        gate: Frozen gate of an operator operand.
        op_code: Operator of an operator operand.
        left, right: Child operands of an operator operand.
        neg_left, neg_right: Edge negation flags of the children.
    """

    h: Optional[np.ndarray] = None
    truth: Optional[np.ndarray] = None
    gate: Optional[SubtreeGate] = None
    op_code: int = 0
    left: Optional["ChimeraOperand"] = None
    right: Optional["ChimeraOperand"] = None
    neg_left: bool = False
    neg_right: bool = False

    @property
    def is_leaf(self) -> bool:
        return self.gate is None

    def mixed(self, rows: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """
        Features [B x F] and hard truths [B] of the operand on mixed sources.

        Raises:
            ValueError: If an operator operand gets fewer than 2 rows.
        """
        rows = np.asarray(rows, dtype=np.int64)
        if self.is_leaf:
            return self.h[rows], np.asarray(self.truth)[rows].astype(np.uint8)
        h_left, truth_left = self.left.mixed(rows, rng)
        h_right, truth_right = self.right.mixed(rows[random_derangement(rows.size, rng)], rng)
        h, _ = gate_forward_batch(self.gate, h_left, self.neg_left, h_right, self.neg_right)
        folded = np.stack(
            [_fold(truth_left, self.neg_left), _fold(truth_right, self.neg_right)], axis=1
        )
        return h, hard_op_vec(self.op_code, folded)

    def truth_values(self) -> Set[int]:
        """Truths the operand can take under mixing."""
        if self.is_leaf:
            return {int(v) for v in np.unique(np.asarray(self.truth).astype(np.uint8))}
        return _op_values(
            self.op_code,
            self.left.truth_values(),
            self.neg_left,
            self.right.truth_values(),
            self.neg_right,
        )


def _op_values(op_code: int, left: Set[int], neg_left: bool, right: Set[int], neg_right: bool) -> Set[int]:
    return {
        hard_op(op_code, [1 - a if neg_left else a, 1 - b if neg_right else b])
        for a in left
        for b in right
    }


def chimera_operand(
    graph: RuleGraph, node: int, z: np.ndarray, labels: np.ndarray, gates: GateSet
) -> ChimeraOperand:
    """
    Operand tree of a node for chimera mixing.

    Args:
        graph: Rule graph.
        node: Child node feeding the gate under training.
        z: [M x F] leaf embeddings of the training rows.
        labels: [M x N] concept labels of the same rows.
        gates: Frozen gates of every operator node in the subtree.

    Raises:
        MissingGateError: If a subtree gate is missing.
    """
    spec = graph.nodes[node]
    if spec.is_leaf:
        return ChimeraOperand(h=z, truth=labels[:, spec.concept_id - 1])
    left, right = graph.in_edges(node)
    return ChimeraOperand(
        gate=gates[node],
        op_code=spec.op_code,
        left=chimera_operand(graph, left.src, z, labels, gates),
        right=chimera_operand(graph, right.src, z, labels, gates),
        neg_left=left.negated,
        neg_right=right.negated,
    )


@dataclass
class _GateJob:
    """Frozen inputs of one gate's training problem."""

    key: CacheKey
    op_code: int
    h_left: np.ndarray
    h_right: np.ndarray
    truth_left: np.ndarray
    truth_right: np.ndarray
    neg_left: bool
    neg_right: bool
    rule_holds: np.ndarray
    left: ChimeraOperand
    right: ChimeraOperand

    def target_classes(self, mode: TrainMode) -> Set[int]:
        """Target values the gate can see in training under mode."""
        classes: Set[int] = set()
        if mode.uses_same_image:
            same = self.rule_holds == 1 if mode is TrainMode.AdStrictMixed else slice(None)
            folded = np.stack(
                [
                    _fold(self.truth_left[same], self.neg_left),
                    _fold(self.truth_right[same], self.neg_right),
                ],
                axis=1,
            )
            classes |= {int(v) for v in np.unique(hard_op_vec(self.op_code, folded))}
        if mode.uses_chimeras:
            classes |= _op_values(
                self.op_code,
                self.left.truth_values(),
                self.neg_left,
                self.right.truth_values(),
                self.neg_right,
            )
        return classes


def _fit_constant(params: MlpParams, value: int, n_rows: int) -> float:
    """
    Zero the head weights and set its bias to the smoothed target rate.

    Returns:
        BCE of the constant on targets equal to value.
    """
    rate = (value * n_rows + 0.5) / (n_rows + 1.0)
    head = params.layers[-1]
    head.weight[...] = 0.0
    head.bias[...] = np.log(rate / (1.0 - rate))
    return float(-np.log(rate if value else 1.0 - rate))


def _train_gate(job: _GateJob, cfg: GateTrainingConfig, feature_dim: int) -> Tuple[SubtreeGate, float]:
    rng = gate_rng(cfg.seed, job.key)
    gate = init_gate(feature_dim, cfg, rng, key=job.key.text, op_name=job.key.op_name)
    mode = cfg.negatives
    n_rows = job.h_left.shape[0]

    classes = job.target_classes(mode)
    if len(classes) == 1:
        (value,) = classes
        logger.warning(
            f"Gate {job.key.op_name} sees only target {value} under {mode.value}; "
            f"fitting a constant"
        )
        return gate, _fit_constant(gate.params, value, n_rows)

    state = AdamState.for_params(gate.params, cfg.lr)
    same_repeats = cfg.chimera_pairs if mode.uses_chimeras else 1
    last_loss = float("nan")
    for _ in range(cfg.epochs_level):
        losses = []
        for rows in iterate_minibatches(n_rows, cfg.batch_size, rng):
            inputs: List[np.ndarray] = []
            targets: List[np.ndarray] = []
            if mode.uses_same_image:
                same = rows
                if mode is TrainMode.AdStrictMixed:
                    same = rows[job.rule_holds[rows] == 1]
                if same.size:
                    folded = np.stack(
                        [
                            _fold(job.truth_left[same], job.neg_left),
                            _fold(job.truth_right[same], job.neg_right),
                        ],
                        axis=1,
                    )
                    x = gate_inputs(job.h_left[same], job.neg_left, job.h_right[same], job.neg_right)
                    y = hard_op_vec(job.op_code, folded).astype(np.float64)
                    inputs.append(np.tile(x, (same_repeats, 1)))
                    targets.append(np.tile(y, same_repeats))
            if mode.uses_chimeras and rows.size >= 2:
                for _ in range(cfg.chimera_pairs):
                    h_left, truth_left = job.left.mixed(rows, rng)
                    h_right, truth_right = job.right.mixed(rows, rng)
                    x, y = build_chimera_batch(
                        h_left,
                        h_right,
                        truth_left,
                        truth_right,
                        job.op_code,
                        job.neg_left,
                        job.neg_right,
                        random_derangement(rows.size, rng),
                    )
                    inputs.append(x)
                    targets.append(y)
            if not inputs:
                continue
            loss, grads = loss_and_grad(
                gate.params, np.vstack(inputs), np.concatenate(targets)[:, None]
            )
            adam_step(state, gate.params, grads)
            losses.append(loss)
        if losses:
            last_loss = float(np.mean(losses))
    return gate, last_loss


def train_level(
    graph: RuleGraph,
    depth: int,
    data: ConceptDataset,
    bank: LeafBank,
    cfg: GateTrainingConfig,
    lower: GateSet,
    nodes: Optional[Sequence[int]] = None,
) -> Dict[int, SubtreeGate]:
    """
    Train the gates of one depth with the bank and lower gates frozen.

    Nodes sharing a lineage key are trained once and share the gate. Gates of
    one level train concurrently on ``cfg.threads`` workers.

    Args:
        graph: Rule graph.
        depth: Level to train (1 is the lowest operator level).
        data: Training rows.
        bank: Frozen leaf bank.
        cfg: Gate training settings; ``cfg.negatives`` selects the pairs.
        lower: Gates of every internal node below depth.
        nodes: Subset of the level to train; the whole level when omitted.

    Returns:
        Node id to newly trained gate.

    Raises:
        ValueError: If data is empty or depth is not an operator level.
        MissingGateError: If a lower gate is missing.
    """
    if len(data) == 0:
        raise ValueError("Cannot train gates on empty data")
    levels = graph.topo_levels()
    if not 1 <= depth < len(levels):
        raise ValueError(f"Depth {depth} is not an operator level of the graph")
    missing = [v for level in levels[1:depth] for v in level if v not in lower]
    if missing:
        raise MissingGateError(f"Lower gates missing for nodes {missing}")
    targets = [v for v in (levels[depth] if nodes is None else nodes) if not graph.nodes[v].is_leaf]
    if not targets:
        return {}

    rows = training_rows(len(data), cfg)
    z = encode_batch(bank, data.features[rows])
    features, _ = propagate_gates_batch(
        graph, z, concept_probs_batch(bank, data.features[rows]), lower, max_depth=depth - 1
    )
    labels = data.labels[rows]
    truths = propagate_hard_truths_batch(graph, labels)
    rule_holds = truths[:, graph.root]

    fp = fingerprint(bank)
    arch = cfg.arch_tag(bank.feature_dim)
    jobs: Dict[str, _GateJob] = {}
    node_keys: Dict[int, str] = {}
    for v in targets:
        key = subtree_key(graph, v, fp, arch, bank.feature_dim)
        node_keys[v] = key.text
        if key.text in jobs:
            continue
        left, right = graph.in_edges(v)
        jobs[key.text] = _GateJob(
            key=key,
            op_code=graph.nodes[v].op_code,
            h_left=features[left.src],
            h_right=features[right.src],
            truth_left=truths[:, left.src],
            truth_right=truths[:, right.src],
            neg_left=left.negated,
            neg_right=right.negated,
            rule_holds=rule_holds,
            left=chimera_operand(graph, left.src, z, labels, lower),
            right=chimera_operand(graph, right.src, z, labels, lower),
        )

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        results = dict(
            zip(
                jobs,
                pool.map(lambda job: _train_gate(job, cfg, bank.feature_dim), jobs.values()),
            )
        )
    losses = [loss for _, loss in results.values() if np.isfinite(loss)]
    logger.info(
        f"Level {depth}: trained {len(results)} gate(s) on {len(rows)} rows "
        f"({cfg.negatives.value}), mean loss {np.mean(losses) if losses else float('nan'):.4f}"
    )
    return {v: results[text][0] for v, text in node_keys.items()}


def train_rule(
    graph: RuleGraph,
    data: ConceptDataset,
    bank: LeafBank,
    cfg: GateTrainingConfig,
    cache: Optional[GateCache] = None,
) -> GateSet:
    """
    Train or load every gate of a rule, level by level.

    With ``cfg.train_missing_only`` a gate whose lineage key is cached is
    loaded instead of trained; otherwise cached entries are ignored and
    overwritten. Newly trained gates are stored to the cache.
    """
    gates = GateSet()
    fp = fingerprint(bank)
    arch = cfg.arch_tag(bank.feature_dim)
    levels = graph.topo_levels()
    for depth in range(1, len(levels)):
        keys = {v: subtree_key(graph, v, fp, arch, bank.feature_dim) for v in levels[depth]}
        pending = []
        for v, key in keys.items():
            cached = cache.load(key) if cache is not None and cfg.train_missing_only else None
            if cached is None:
                pending.append(v)
            else:
                gates[v] = cached
                gates.loaded.append(v)
        if not pending:
            continue
        stored = set()
        for v, gate in train_level(graph, depth, data, bank, cfg, gates, pending).items():
            gates[v] = gate
            gates.trained.append(v)
            if cache is not None and keys[v].text not in stored:
                cache.store(keys[v], gate)
                stored.add(keys[v].text)
    logger.info(f"Rule gates: {len(gates.trained)} trained, {len(gates.loaded)} loaded from cache")
    return gates


def train_monolithic(
    graph: RuleGraph,
    data: ConceptDataset,
    bank: LeafBank,
    cfg: GateTrainingConfig,
    with_chimeras: bool,
) -> MonolithicModel:
    """
    Train a single root-truth MLP on frozen leaf embeddings.

    The normals-only variant sees ``[z_i | z_i]`` with the rule's hard truth.
    The chimera variant adds ``[z_i | z_j]`` rows whose target is the root
    operator over the left operand truth of row i and the right operand truth
    of row j. Training runs ``epochs_level`` epochs per operator level so the
    budget matches the gate evaluator.

    Raises:
        ValueError: If data is empty.
    """
    if len(data) == 0:
        raise ValueError("Cannot train a monolithic model on empty data")
    rng = np.random.default_rng([cfg.seed, _MONOLITHIC_STREAM, int(with_chimeras)])
    rows = training_rows(len(data), cfg)
    z = encode_batch(bank, data.features[rows])
    truths = propagate_hard_truths_batch(graph, data.labels[rows])
    root = graph.nodes[graph.root]

    feature_dim = bank.feature_dim
    sizes = [2 * feature_dim] + [feature_dim] * cfg.hidden_layers + [1]
    params = init_mlp(sizes, rng, f"mono-mlp-relu-{cfg.hidden_layers}x{feature_dim}-v1")
    state = AdamState.for_params(params, cfg.lr)
    chimeras = with_chimeras and not root.is_leaf
    if chimeras:
        left, right = graph.in_edges(graph.root)
    repeats = cfg.chimera_pairs if chimeras else 1
    label = "Mono-C" if with_chimeras else "Mono-N"

    classes = {int(v) for v in np.unique(truths[:, graph.root])}
    if chimeras:
        classes |= _op_values(
            root.op_code,
            {int(v) for v in np.unique(truths[:, left.src])},
            left.negated,
            {int(v) for v in np.unique(truths[:, right.src])},
            right.negated,
        )
    if len(classes) == 1:
        (value,) = classes
        logger.warning(f"{label} baseline sees only target {value}; fitting a constant")
        _fit_constant(params, value, len(rows))
        return MonolithicModel(params=params, with_chimeras=with_chimeras)

    epochs = cfg.epochs_level * max(1, graph.max_depth())
    for epoch in range(epochs):
        losses = []
        for batch in iterate_minibatches(len(rows), cfg.batch_size, rng):
            inputs = [np.tile(np.hstack([z[batch], z[batch]]), (repeats, 1))]
            targets = [np.tile(truths[batch, graph.root].astype(np.float64), repeats)]
            if chimeras and batch.size >= 2:
                for _ in range(cfg.chimera_pairs):
                    perm = random_derangement(batch.size, rng)
                    folded = np.stack(
                        [
                            _fold(truths[batch, left.src], left.negated),
                            _fold(truths[batch[perm], right.src], right.negated),
                        ],
                        axis=1,
                    )
                    inputs.append(np.hstack([z[batch], z[batch[perm]]]))
                    targets.append(hard_op_vec(root.op_code, folded).astype(np.float64))
            loss, grads = loss_and_grad(params, np.vstack(inputs), np.concatenate(targets)[:, None])
            adam_step(state, params, grads)
            losses.append(loss)
        logger.debug(f"Monolithic epoch {epoch + 1}/{epochs}: loss {np.mean(losses):.4f}")
    logger.info(f"Trained {label} baseline for {epochs} epoch(s) on {len(rows)} rows")
    return MonolithicModel(params=params, with_chimeras=with_chimeras)


def monolithic_predict_batch(model: MonolithicModel, z: np.ndarray) -> np.ndarray:
    """Root truth probabilities from ``[z | z]``, shape [M]."""
    z = as_matrix(z)
    _, logits = forward_batch(model.params, np.hstack([z, z]))
    return sigmoid(logits[:, 0])
