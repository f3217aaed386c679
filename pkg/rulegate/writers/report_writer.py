"""
Writer for evaluation reports and per-row score files.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

from rulegate.config import DEFAULT_ENCODING
from rulegate.models.report import EvalReport
from rulegate.utils.enums import Method

logger = logging.getLogger(__name__)

_RULE_WIDTH = 40


def _cell(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.3f}"


class ReportWriter:
    """
    Writer for EvalReport JSON and its plain-text comparison table.
    """

    @staticmethod
    def to_json(report: EvalReport) -> str:
        return report.model_dump_json(indent=2)

    @staticmethod
    def write(report: EvalReport, report_path: Union[str, Path]) -> None:
        path = Path(report_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding=DEFAULT_ENCODING) as f:
            f.write(ReportWriter.to_json(report) + "\n")
        logger.info(f"Wrote report for {len(report.rules)} rule(s) to {path}")

    @staticmethod
    def format_table(report: EvalReport) -> str:
        """
        Per-rule AUROC of every evaluator plus the neural-vs-independent wins.

        Two summary rows follow: the mean of per-rule AUROCs, and the AUROC of
        the aggregated anomaly score against the pseudo-anomaly label.
        """
        methods = [Method(m) for m in report.methods]
        header = ["Rule"] + [m.column for m in methods] + ["Wins"]
        rows: List[List[str]] = []
        for rule in report.rules:
            text = rule.text if len(rule.text) <= _RULE_WIDTH else rule.text[: _RULE_WIDTH - 3] + "..."
            wins = "-" if rule.neural_wins is None else ("yes" if rule.neural_wins else "no")
            rows.append([text] + [_cell(rule.methods[m.value].auroc) for m in methods] + [wins])
        rows.append(
            ["All rules (mean)"]
            + [_cell(report.aggregate[m.value].mean_rule_auroc) for m in methods]
            + [f"{report.wins}/{report.comparable_rules}"]
        )
        rows.append(
            ["All rules (anomaly)"]
            + [_cell(report.aggregate[m.value].anomaly.auroc) for m in methods]
            + [""]
        )

        widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]

        def line(cells: List[str]) -> str:
            return " | ".join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()

        separator = "-+-".join("-" * width for width in widths)
        return "\n".join([line(header), separator] + [line(row) for row in rows]) + "\n"

    @staticmethod
    def write_table(report: EvalReport, table_path: Union[str, Path]) -> None:
        path = Path(table_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding=DEFAULT_ENCODING) as f:
            f.write(ReportWriter.format_table(report))

    @staticmethod
    def write_scores(rows: Iterable[Dict[str, Any]], scores_path: Union[str, Path]) -> int:
        """
        Write per-input score rows as JSONL.

        Returns:
            Number of rows written.
        """
        path = Path(scores_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        count = 0
        with open(path, "w", encoding=DEFAULT_ENCODING) as f:
            for row in rows:
                f.write(json.dumps(row) + "\n")
                count += 1
        logger.info(f"Wrote {count} score row(s) to {path}")
        return count
