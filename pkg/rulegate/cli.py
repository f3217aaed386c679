"""
Command-line interface.

Subcommands::

    gen-synth    generate a synthetic dataset directory
    train-leaf   train the leaf concept bank
    mine-rules   mine rules from training labels
    train-gates  train (or reuse cached) subtree gates for a rules file
    score        score inputs against the rules with cached gates
    eval         run the end-to-end benchmark and write an EvalReport
    report       print an EvalReport as a comparison table

Settings come from an optional ``--config`` JSON file; flags override it.
The cache directory is the ``--cache-dir`` flag, else ``RULEGATE_CACHE_DIR``,
else the config file, else ``./.rulegate_cache``. Gates live in one
sub-directory per training mode.

Exit codes: 0 on success, 1 on runtime errors, 2 on usage errors.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np

from rulegate.config import CACHE_DIR_ENV, DEFAULT_CACHE_DIR
from rulegate.engine.compiler import compile_formula
from rulegate.engine.experiment import run_experiment
from rulegate.engine.gate_cache import GateCache
from rulegate.engine.gate_training import train_rule
from rulegate.engine.leaf_training import fingerprint, leaf_metrics, train_leaf_bank
from rulegate.engine.rule_mining import mine_compound, mine_pairwise
from rulegate.engine.scoring import aggregate_batch, attribute_topk, score_rules_batch
from rulegate.engine.synthetic import gen_datasets
from rulegate.errors import RuleGateError
from rulegate.models.run_config import ExperimentConfig, GateTrainingConfig, RunConfig, SynthSpec
from rulegate.readers.config_reader import ConfigReader
from rulegate.readers.dataset_reader import DatasetReader
from rulegate.readers.leaf_bank_reader import LeafBankReader
from rulegate.readers.report_reader import ReportReader
from rulegate.readers.rule_file_reader import RuleFileReader
from rulegate.utils.enums import Aggregation, Split, TrainMode
from rulegate.writers.dataset_writer import DatasetWriter
from rulegate.writers.leaf_bank_writer import LeafBankWriter
from rulegate.writers.report_writer import ReportWriter
from rulegate.writers.rule_writer import RuleWriter

logger = logging.getLogger(__name__)


def _emit(payload: Any) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def resolve_cache_dir(flag: Optional[Path], configured: Optional[Path]) -> Path:
    """Cache directory by precedence: flag, environment, config file, default."""
    if flag is not None:
        return Path(flag)
    env = os.environ.get(CACHE_DIR_ENV)
    if env:
        return Path(env)
    return Path(configured) if configured is not None else DEFAULT_CACHE_DIR


def _load_run_config(args: argparse.Namespace) -> RunConfig:
    cfg = ConfigReader.read(args.config, RunConfig) if args.config else RunConfig()
    updates: Dict[str, Any] = {}
    for name in ("data", "rules", "bank", "report"):
        if getattr(args, name, None) is not None:
            updates[name] = Path(getattr(args, name))
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    updates["cache_dir"] = resolve_cache_dir(getattr(args, "cache_dir", None), cfg.cache_dir)

    def override(section: str, mapping: Dict[str, str]) -> None:
        values = {
            field: getattr(args, flag)
            for flag, field in mapping.items()
            if getattr(args, flag, None) is not None
        }
        if getattr(args, "seed", None) is not None and section in ("leaf", "gates"):
            values["seed"] = args.seed
        if values:
            current = getattr(cfg, section)
            updates[section] = type(current).model_validate({**current.model_dump(), **values})

    override(
        "leaf",
        {
            "leaf_epochs": "epochs",
            "feature_dim": "feature_dim",
            "lr": "lr",
            "batch_size": "batch_size",
            "temperature_scaling": "temperature_scaling",
        },
    )
    override(
        "gates",
        {
            "negatives": "negatives",
            "epochs_level": "epochs_level",
            "lr": "lr",
            "batch_size": "batch_size",
            "chimera_pairs": "chimera_pairs",
            "train_frac": "train_frac",
            "train_missing_only": "train_missing_only",
            "threads": "threads",
        },
    )
    override(
        "mining",
        {
            "support_thresh": "support_thresh",
            "confidence_pos": "confidence_pos",
            "confidence_neg": "confidence_neg",
            "max_rules": "max_rules",
            "compound": "compound",
        },
    )
    override("scoring", {"tau": "tau", "aggregation": "aggregation", "top_k": "top_k"})
    return cfg.model_copy(update=updates)


def _require(value: Optional[Path], flag: str) -> Path:
    if value is None:
        raise ValueError(f"{flag} is required (flag or config file)")
    return value


def _gate_cache(cfg: RunConfig) -> GateCache:
    return GateCache(Path(_require(cfg.cache_dir, "--cache-dir")) / cfg.gates.negatives.value)


def cmd_gen_synth(args: argparse.Namespace) -> int:
    spec = ConfigReader.read(args.spec, SynthSpec) if args.spec else SynthSpec()
    if args.seed is not None:
        spec = spec.model_copy(update={"seed": args.seed})
    train, eval_data = gen_datasets(spec)
    out = Path(args.out)
    DatasetWriter.write_split(train, out, Split.Train)
    DatasetWriter.write_split(eval_data, out, Split.Eval)
    _emit({"out": str(out), "train_rows": len(train), "eval_rows": len(eval_data)})
    return 0


def cmd_train_leaf(args: argparse.Namespace) -> int:
    cfg = _load_run_config(args)
    data = DatasetReader.read(_require(cfg.data, "--data"))
    bank = train_leaf_bank(data, cfg.leaf)
    LeafBankWriter.write(bank, _require(cfg.bank, "--bank"))
    metrics = leaf_metrics(bank, data)
    _emit({"bank": str(cfg.bank), "fingerprint": fingerprint(bank), "leaf": metrics.model_dump()})
    return 0


def cmd_mine_rules(args: argparse.Namespace) -> int:
    cfg = _load_run_config(args)
    data = DatasetReader.read(_require(cfg.data, "--data"))
    rules = mine_pairwise(data.labels, data.vocab, cfg.mining)
    if cfg.mining.compound:
        rules += mine_compound(data.labels, data.vocab, cfg.mining)
    RuleWriter.write(rules, args.out, header=f"mined from {cfg.data} ({len(data)} rows)")
    _emit({"rules": [rule.text for rule in rules], "out": str(args.out)})
    return 0


def cmd_train_gates(args: argparse.Namespace) -> int:
    cfg = _load_run_config(args)
    data = DatasetReader.read(_require(cfg.data, "--data"))
    bank = LeafBankReader.read(_require(cfg.bank, "--bank"))
    cache = _gate_cache(cfg)
    summary = []
    for formula in RuleFileReader.read(_require(cfg.rules, "--rules")):
        gates = train_rule(compile_formula(formula, bank.vocab), data, bank, cfg.gates, cache)
        summary.append(
            {"rule": str(formula), "trained": len(gates.trained), "loaded": len(gates.loaded)}
        )
    index = cache.records(fingerprint(bank), cfg.gates.arch_tag(bank.feature_dim))
    _emit(
        {
            "cache_dir": str(cache.root),
            "rules": summary,
            "gates": [record.to_dict(exclude=["key_text", "created_at"]) for record in index],
        }
    )
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    cfg = _load_run_config(args)
    data = DatasetReader.read(_require(cfg.data, "--data"))
    bank = LeafBankReader.read(_require(cfg.bank, "--bank"))
    cache = _gate_cache(cfg)
    graphs = [compile_formula(f, bank.vocab) for f in RuleFileReader.read(_require(cfg.rules, "--rules"))]
    fp = fingerprint(bank)
    arch = cfg.gates.arch_tag(bank.feature_dim)
    gate_sets = [cache.load_rule(g, fp, arch, bank.feature_dim) for g in graphs]

    violations, satisfactions = score_rules_batch(graphs, gate_sets, bank, data.features, cfg.scoring)
    anomaly = aggregate_batch(violations, cfg.scoring.aggregation, satisfactions)
    rows = (
        {
            "index": i,
            "anomaly": float(anomaly[i]),
            "rules": {str(r): float(v) for r, v in enumerate(violations[i])},
            "top_k": attribute_topk(violations[i], cfg.scoring.top_k),
        }
        for i in range(len(data))
    )
    count = ReportWriter.write_scores(rows, args.out)
    _emit({"scores": str(args.out), "rows": count, "mean_anomaly": float(np.mean(anomaly)) if count else None})
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = ConfigReader.read(args.config, ExperimentConfig) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    cache_dir = args.cache_dir if args.cache_dir is not None else os.environ.get(CACHE_DIR_ENV)
    gates: Dict[str, Any] = {"threads": args.threads}
    if args.negatives is not None:
        gates["negatives"] = args.negatives
    updates: Dict[str, Any] = {
        "gates": GateTrainingConfig.model_validate({**cfg.gates.model_dump(), **gates})
    }
    if cache_dir:
        updates["cache_dir"] = Path(cache_dir)
    cfg = cfg.model_copy(update=updates)

    report = run_experiment(cfg)
    if args.report:
        ReportWriter.write(report, args.report)
    sys.stdout.write(ReportWriter.format_table(report))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    report = ReportReader.read(args.report)
    if args.json:
        sys.stdout.write(ReportWriter.to_json(report) + "\n")
    else:
        sys.stdout.write(ReportWriter.format_table(report))
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON config file (flags override it)")
    parser.add_argument("--seed", type=int, help="Random seed for data and training (default 123)")


def _add_leaf_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--leaf-epochs", type=int, help="Leaf bank epochs (default 10)")
    parser.add_argument("--feature-dim", type=int, help="Encoder feature dimension F (default 32)")
    parser.add_argument(
        "--no-temperature",
        dest="temperature_scaling",
        action="store_false",
        default=None,
        help="Skip temperature scaling",
    )


def _add_gate_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--negatives",
        choices=[m.value for m in TrainMode],
        help="Operand pairs used for gate training (default chimeras_only)",
    )
    parser.add_argument("--epochs-level", type=int, help="Epochs per gate level (default 8)")
    parser.add_argument("--chimera-pairs", type=int, help="Derangements per batch (default 1)")
    parser.add_argument("--train-frac", type=float, help="Fraction of training rows used (default 1.0)")
    parser.add_argument(
        "--retrain",
        dest="train_missing_only",
        action="store_false",
        default=None,
        help="Retrain and overwrite cached gates instead of reusing them",
    )
    parser.add_argument("--cache-dir", type=Path, help=f"Gate cache directory (env {CACHE_DIR_ENV})")


def _add_optim_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lr", type=float, help="Adam learning rate (default 1e-2)")
    parser.add_argument("--batch-size", type=int, help="Minibatch size (default 64)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rulegate", description="Rule-based anomaly detection with learned subtree gates"
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level for stderr (default INFO)",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="Worker threads for gate training (default: available cores)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="Generate a synthetic dataset directory")
    p.add_argument("--spec", type=Path, help="SynthSpec JSON file (defaults when omitted)")
    p.add_argument("--out", type=Path, required=True, help="Output directory")
    p.add_argument("--seed", type=int, help="Override the spec seed")
    p.set_defaults(handler=cmd_gen_synth)

    p = sub.add_parser("train-leaf", help="Train the leaf concept bank")
    _add_common(p)
    p.add_argument("--data", type=Path, help="Training JSONL file or dataset directory")
    p.add_argument("--bank", type=Path, help="Output leaf bank file")
    _add_leaf_flags(p)
    _add_optim_flags(p)
    p.set_defaults(handler=cmd_train_leaf)

    p = sub.add_parser("mine-rules", help="Mine rules from training labels")
    _add_common(p)
    p.add_argument("--data", type=Path, help="Training JSONL file or dataset directory")
    p.add_argument("--out", type=Path, required=True, help="Output rules file")
    p.add_argument("--support-thresh", type=float, help="Minimum antecedent support (default 0.05)")
    p.add_argument("--confidence-pos", type=float, help="Implication confidence (default 0.995)")
    p.add_argument("--confidence-neg", type=float, help="Exclusion confidence (default 0.005)")
    p.add_argument("--max-rules", type=int, help="Maximum pairwise rules (default 25)")
    p.add_argument("--compound", action="store_true", default=None, help="Also mine compound rules")
    p.set_defaults(handler=cmd_mine_rules)

    p = sub.add_parser("train-gates", help="Train or reuse subtree gates for a rules file")
    _add_common(p)
    p.add_argument("--data", type=Path, help="Training JSONL file or dataset directory")
    p.add_argument("--bank", type=Path, help="Leaf bank file")
    p.add_argument("--rules", type=Path, help="Rules file")
    _add_gate_flags(p)
    _add_optim_flags(p)
    p.set_defaults(handler=cmd_train_gates)

    p = sub.add_parser("score", help="Score inputs against rules with cached gates")
    _add_common(p)
    p.add_argument("--data", type=Path, help="JSONL file or dataset directory to score")
    p.add_argument("--bank", type=Path, help="Leaf bank file")
    p.add_argument("--rules", type=Path, help="Rules file")
    p.add_argument("--out", type=Path, required=True, help="Output scores JSONL file")
    p.add_argument("--negatives", choices=[m.value for m in TrainMode], help="Gate namespace to load")
    p.add_argument("--cache-dir", type=Path, help=f"Gate cache directory (env {CACHE_DIR_ENV})")
    p.add_argument("--aggregation", choices=[m.value for m in Aggregation], help="Rule aggregation (default min)")
    p.add_argument("--tau", type=float, help="Antecedent gate threshold in [0, 1) (default 0.0)")
    p.add_argument("--top-k", type=int, help="Rules attributed per input (default 3)")
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("eval", help="Run the end-to-end benchmark")
    p.add_argument("--config", type=Path, help="ExperimentConfig JSON file")
    p.add_argument("--seed", type=int, help="Seed applied to data and every trainer")
    p.add_argument("--negatives", choices=[m.value for m in TrainMode], help="Neural evaluator training mode")
    p.add_argument("--cache-dir", type=Path, help=f"Gate cache directory (env {CACHE_DIR_ENV})")
    p.add_argument("--report", type=Path, help="Output EvalReport JSON file")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("report", help="Print an EvalReport as a table")
    p.add_argument("--report", type=Path, required=True, help="EvalReport JSON file")
    p.add_argument("--json", action="store_true", help="Print the JSON instead of the table")
    p.set_defaults(handler=cmd_report)
    return parser


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI.

    Returns:
        Process exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s  %(levelname)-8s  %(name)s  %(message)s",
        stream=sys.stderr,
    )
    if args.threads is None:
        args.threads = os.cpu_count() or 1

    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except (RuleGateError, ValueError, KeyError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
