"""
Writer for JSONL concept datasets.
"""

import json
import logging
from pathlib import Path
from typing import Union

from rulegate.config import DEFAULT_ENCODING, EVAL_FILE, TRAIN_FILE, VOCAB_FILE
from rulegate.models.leaf_bank import ConceptDataset
from rulegate.models.rule_graph import ConceptVocab
from rulegate.utils.enums import Split

logger = logging.getLogger(__name__)


class DatasetWriter:
    """
    Writer for ConceptDataset splits.
    """

    @staticmethod
    def write(data: ConceptDataset, data_path: Union[str, Path]) -> None:
        """
        Write one split as JSONL, one ``{"x": [...], "y": [...]}`` object per row.
        """
        path = Path(data_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding=DEFAULT_ENCODING) as f:
            for x, y in zip(data.features, data.labels):
                f.write(json.dumps({"x": x.tolist(), "y": y.tolist()}) + "\n")
        logger.info(f"Wrote {len(data)} rows to {path}")

    @staticmethod
    def write_vocab(vocab: ConceptVocab, vocab_path: Union[str, Path]) -> None:
        path = Path(vocab_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding=DEFAULT_ENCODING) as f:
            json.dump(list(vocab.names), f, indent=2)

    @staticmethod
    def write_split(data: ConceptDataset, data_dir: Union[str, Path], split: Union[Split, str]) -> Path:
        """
        Write a split and its vocabulary into a dataset directory.

        Returns:
            Path of the JSONL file.
        """
        data_dir = Path(data_dir)
        path = data_dir / (TRAIN_FILE if Split(split) is Split.Train else EVAL_FILE)
        DatasetWriter.write(data, path)
        DatasetWriter.write_vocab(data.vocab, data_dir / VOCAB_FILE)
        return path
