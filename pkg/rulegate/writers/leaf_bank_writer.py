"""
Writer for leaf bank files.

Layout: magic b"RGBANK" | version u16 | header length u32 | JSON header |
embedded parameter blob (see ParamsWriter).
"""

import json
import logging
import struct
from pathlib import Path
from typing import Union

from rulegate.config import BANK_MAGIC, BANK_VERSION
from rulegate.engine.leaf_training import fingerprint
from rulegate.models.leaf_bank import LeafBank
from rulegate.writers.params_writer import ParamsWriter, atomic_write_bytes

logger = logging.getLogger(__name__)


class LeafBankWriter:
    """
    Writer for LeafBank files.
    """

    @staticmethod
    def to_bytes(bank: LeafBank) -> bytes:
        header = json.dumps(
            {
                "version": BANK_VERSION,
                "vocab": list(bank.vocab.names),
                "input_dim": bank.input_dim,
                "feature_dim": bank.feature_dim,
                "temperature": bank.temperature,
                "fingerprint": fingerprint(bank),
                "degenerate": list(bank.degenerate),
            },
            sort_keys=True,
        ).encode("utf-8")
        return (
            BANK_MAGIC
            + struct.pack("<HI", BANK_VERSION, len(header))
            + header
            + ParamsWriter.to_bytes(bank.params)
        )

    @staticmethod
    def write(bank: LeafBank, path: Union[str, Path]) -> None:
        """
        Write a leaf bank file atomically.

        Args:
            bank: Trained bank.
            path: Destination file.
        """
        path = Path(path)
        atomic_write_bytes(path, LeafBankWriter.to_bytes(bank))
        logger.info(f"Wrote leaf bank ({len(bank.vocab)} concepts) to {path}")
