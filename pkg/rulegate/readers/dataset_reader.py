"""
Reader for JSONL concept datasets.
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from rulegate.config import DEFAULT_ENCODING, EVAL_FILE, TRAIN_FILE, VOCAB_FILE
from rulegate.models.leaf_bank import ConceptDataset
from rulegate.models.rule_graph import ConceptVocab
from rulegate.utils.converters import convert_bits
from rulegate.utils.enums import Split

logger = logging.getLogger(__name__)


class DatasetReader:
    """
    Reader for datasets stored as ``{"x": [...], "y": [...]}`` lines with the
    concept names in a ``vocab.json`` file next to them.
    """

    @staticmethod
    def read(data_path: Union[str, Path], vocab: Optional[ConceptVocab] = None) -> ConceptDataset:
        """
        Read one JSONL split.

        Args:
            data_path: A JSONL file, or a dataset directory (reads train.jsonl).
            vocab: Concept vocabulary; read from vocab.json beside the file
                when omitted.

        Returns:
            The dataset.
        """
        path = Path(data_path)
        if path.is_dir():
            path = path / TRAIN_FILE
        if not path.exists():
            raise FileNotFoundError(f"Dataset file not found: {path}")
        if vocab is None:
            vocab = DatasetReader.read_vocab(path.parent / VOCAB_FILE)

        with open(path, "r", encoding=DEFAULT_ENCODING) as f:
            try:
                return DatasetReader.parse_dataset_content(f.readlines(), vocab)
            except (ValueError, KeyError) as e:
                logger.error(f"Error parsing dataset file {path}: {e}")
                raise

    @staticmethod
    def read_split(data_dir: Union[str, Path], split: Union[Split, str]) -> ConceptDataset:
        """Read train.jsonl or eval.jsonl from a dataset directory."""
        name = TRAIN_FILE if Split(split) is Split.Train else EVAL_FILE
        return DatasetReader.read(Path(data_dir) / name)

    @staticmethod
    def read_vocab(vocab_path: Union[str, Path]) -> ConceptVocab:
        path = Path(vocab_path)
        if not path.exists():
            raise FileNotFoundError(f"Vocabulary file not found: {path}")
        with open(path, "r", encoding=DEFAULT_ENCODING) as f:
            names = json.load(f)
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            raise ValueError(f"Vocabulary file {path} must hold a list of concept names")
        return ConceptVocab.from_names(names)

    @staticmethod
    def parse_dataset_content(content_lines: List[str], vocab: ConceptVocab) -> ConceptDataset:
        """
        Parse JSONL dataset lines.

        Raises:
            ValueError: On malformed JSON, ragged rows or non-binary labels.
        """
        features, labels = [], []
        for line_number, line in enumerate(content_lines, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                features.append([float(v) for v in row["x"]])
                labels.append(convert_bits(row["y"]))
            except (ValueError, KeyError, TypeError) as e:
                raise ValueError(f"line {line_number}: {e}") from e
        if not features:
            return ConceptDataset(np.zeros((0, 0)), np.zeros((0, len(vocab))), vocab)
        if len({len(x) for x in features}) != 1 or len({len(y) for y in labels}) != 1:
            raise ValueError("Dataset rows have inconsistent widths")
        return ConceptDataset(np.array(features), np.array(labels, dtype=np.uint8), vocab)
