"""
Rule file reader and DSL parser.
"""

import logging
import re
from pathlib import Path
from typing import List, NoReturn, Optional, Tuple, Union

from rulegate.config import DEFAULT_ENCODING
from rulegate.errors import FormulaSyntaxError
from rulegate.models.formula import Formula
from rulegate.utils.enums import OpCode

logger = logging.getLogger(__name__)

Operand = Tuple[Formula, bool]
Token = Tuple[str, str, int]


class RuleFileReader:
    """
    Reader for rule files and rule DSL text.

    Grammar, loosest binding first::

        iff   := imp ("<->" imp)*          left-associative, binary
        imp   := or ("->" imp)?            right-associative
        or    := and ("|" and)*            n-ary
        and   := unary ("&" unary)*        n-ary
        unary := "!" unary | "(" iff ")" | atom

    Atoms are runs of letters, digits and ``_ : . -`` (a ``-`` that starts
    ``->`` ends the atom). Rule files hold one rule per line; ``#`` starts a
    comment and blank lines are ignored.
    """

    _token = re.compile(
        r"(?P<op><->|->|[&|!()])|(?P<atom>(?:[A-Za-z0-9_:.]|-(?!>))+)"
    )
    _whitespace = re.compile(r"\s+")

    @staticmethod
    def parse(text: str) -> Formula:
        """
        Parse one rule into a Formula.

        Args:
            text: Rule text in the DSL.

        Returns:
            The expression tree. A rule negated as a whole becomes a
            single-child AND with a negated edge.

        Raises:
            FormulaSyntaxError: On empty input or a grammar violation; the
                error carries the UTF-8 byte offset of the failure.
        """
        return _Parser(text, RuleFileReader._tokenize(text)).parse()

    @staticmethod
    def read(rules_path: Union[str, Path]) -> List[Formula]:
        """
        Read a rules file.

        Args:
            rules_path: Path to a UTF-8 rules file.

        Returns:
            Formulas in file order.
        """
        path = Path(rules_path)
        if not path.exists():
            raise FileNotFoundError(f"Rules file not found: {path}")

        with open(path, "r", encoding=DEFAULT_ENCODING) as f:
            try:
                return RuleFileReader.parse_rules_content(f.readlines())
            except FormulaSyntaxError as e:
                logger.error(f"Error parsing rules file {path}: {e}")
                raise

    @staticmethod
    def parse_rules_content(content_lines: List[str]) -> List[Formula]:
        """
        Parse rules file content lines.

        Args:
            content_lines: Lines of a rules file.

        Returns:
            Formulas for every non-blank, non-comment line.
        """
        rules = []
        for line_number, line in enumerate(content_lines, start=1):
            text = RuleFileReader.strip_comment(line)
            if not text:
                continue
            try:
                rules.append(RuleFileReader.parse(text))
            except FormulaSyntaxError as e:
                logger.error(f"Error parsing line {line_number}: {line.rstrip()}")
                raise FormulaSyntaxError(f"line {line_number}: {e.message}", e.offset) from e
        return rules

    @staticmethod
    def strip_comment(line: str) -> str:
        """Remove a trailing ``#`` comment and surrounding whitespace."""
        return line.split("#", 1)[0].strip()

    @staticmethod
    def _tokenize(text: str) -> List[Token]:
        tokens: List[Token] = []
        pos = 0
        while pos < len(text):
            space = RuleFileReader._whitespace.match(text, pos)
            if space:
                pos = space.end()
                continue
            match = RuleFileReader._token.match(text, pos)
            if not match:
                raise FormulaSyntaxError(
                    f"Unexpected character {text[pos]!r}", _byte_offset(text, pos)
                )
            kind = "op" if match.group("op") else "atom"
            tokens.append((kind, match.group(0), pos))
            pos = match.end()
        return tokens


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    """Recursive-descent parser over a token list."""

    def __init__(self, text: str, tokens: List[Token]) -> None:
        self.text = text
        self.tokens = tokens
        self.index = 0

    def parse(self) -> Formula:
        if not self.tokens:
            raise FormulaSyntaxError("Empty rule", 0)
        formula, negated = self._iff()
        if self.index < len(self.tokens):
            self._fail(f"Unexpected token {self.tokens[self.index][1]!r}")
        if negated:
            return Formula.node(OpCode.AND, (formula, True))
        return formula

    def _peek(self) -> Optional[str]:
        if self.index < len(self.tokens):
            kind, value, _ = self.tokens[self.index]
            return value if kind == "op" else None
        return None

    def _fail(self, message: str) -> NoReturn:
        if self.index < len(self.tokens):
            offset = _byte_offset(self.text, self.tokens[self.index][2])
        else:
            offset = len(self.text.encode("utf-8"))
        raise FormulaSyntaxError(message, offset)

    def _iff(self) -> Operand:
        left = self._imp()
        while self._peek() == "<->":
            self.index += 1
            right = self._imp()
            left = (Formula.node(OpCode.IFF, left, right), False)
        return left

    def _imp(self) -> Operand:
        left = self._or()
        if self._peek() == "->":
            self.index += 1
            right = self._imp()
            return Formula.node(OpCode.IMPLIES, left, right), False
        return left

    def _or(self) -> Operand:
        return self._nary("|", OpCode.OR, self._and)

    def _and(self) -> Operand:
        return self._nary("&", OpCode.AND, self._unary)

    def _nary(self, symbol: str, op: OpCode, operand) -> Operand:
        items = [operand()]
        while self._peek() == symbol:
            self.index += 1
            items.append(operand())
        if len(items) == 1:
            return items[0]
        return Formula.node(op, *items), False

    def _unary(self) -> Operand:
        if self.index >= len(self.tokens):
            self._fail("Unexpected end of rule")
        kind, value, _ = self.tokens[self.index]
        if kind == "atom":
            self.index += 1
            return Formula.leaf(value), False
        if value == "!":
            self.index += 1
            formula, negated = self._unary()
            return formula, not negated
        if value == "(":
            self.index += 1
            operand = self._iff()
            if self._peek() != ")":
                self._fail("Expected ')'")
            self.index += 1
            return operand
        self._fail(f"Expected concept, '!' or '(' but found {value!r}")
