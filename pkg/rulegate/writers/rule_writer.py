"""
Writer for rule DSL text and rules files.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

from rulegate.config import DEFAULT_ENCODING
from rulegate.models.formula import Formula
from rulegate.models.rule import MinedRule
from rulegate.utils.enums import OpCode

logger = logging.getLogger(__name__)

# Binding strength, tighter is larger.
_PRECEDENCE = {OpCode.IFF: 1, OpCode.IMPLIES: 2, OpCode.OR: 3, OpCode.AND: 4}


def format_formula(formula: Formula) -> str:
    """
    Render a formula as canonical DSL text.

    Children are written in stored order. A single-child wrapper prints as its
    child with a leading ``!`` when the edge is negated.
    """
    if formula.is_leaf:
        return formula.name
    if len(formula.children) == 1:
        child, negated = formula.children[0]
        return _operand(child, negated, formula.op, slot=0, force=False)

    symbol = f" {formula.op.symbol} "
    return symbol.join(
        _operand(child, negated, formula.op, slot)
        for slot, (child, negated) in enumerate(formula.children)
    )


def _operand(
    child: Formula, negated: bool, parent: OpCode, slot: int, force: Optional[bool] = None
) -> str:
    if child.is_leaf:
        return f"!{child.name}" if negated else child.name

    text = format_formula(child)
    if negated:
        return f"!({text})"
    if force is None:
        force = _needs_parens(child, parent, slot)
    return f"({text})" if force else text


def _needs_parens(child: Formula, parent: OpCode, slot: int) -> bool:
    if len(child.children) == 1:
        return True
    if child.op is parent:
        # a -> b -> c already groups to the right
        return not (parent is OpCode.IMPLIES and slot == 1)
    return _PRECEDENCE[child.op] < _PRECEDENCE[parent]


class RuleWriter:
    """
    Writer for rules files.
    """

    @staticmethod
    def format(formula: Formula) -> str:
        """Canonical DSL text for a formula."""
        return format_formula(formula)

    @staticmethod
    def format_rule(rule: Union[Formula, MinedRule]) -> str:
        """One rules-file line; mined rules carry a stats comment."""
        if isinstance(rule, MinedRule):
            return f"{format_formula(rule.formula)}  # {rule.comment()}"
        return format_formula(rule)

    @staticmethod
    def write(
        rules: Sequence[Union[Formula, MinedRule]],
        rules_path: Union[str, Path],
        header: Optional[str] = None,
    ) -> None:
        """
        Write rules to a UTF-8 rules file, one per line.

        Args:
            rules: Formulas or mined rules.
            rules_path: Output file path.
            header: Optional comment written above the rules.
        """
        path = Path(rules_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = []
        if header:
            lines.extend(f"# {line}" for line in header.splitlines())
        lines.extend(RuleWriter.format_rule(rule) for rule in rules)
        with open(path, "w", encoding=DEFAULT_ENCODING) as f:
            f.write("\n".join(lines) + "\n")
        logger.info(f"Wrote {len(rules)} rules to {path}")
