"""
Tests for dataset and config file reading and writing.
"""

import json

import numpy as np
import pytest

from rulegate.models.leaf_bank import ConceptDataset
from rulegate.models.rule_graph import ConceptVocab
from rulegate.models.run_config import RunConfig, SynthSpec
from rulegate.readers.config_reader import ConfigReader
from rulegate.readers.dataset_reader import DatasetReader
from rulegate.utils.enums import Split
from rulegate.writers.dataset_writer import DatasetWriter


@pytest.fixture
def tiny_dataset(xyz_vocab) -> ConceptDataset:
    features = np.array([[0.5, -1.25], [2.0, 0.0], [0.125, 3.5]])
    labels = np.array([[1, 0, 1], [0, 0, 0], [1, 1, 0]], dtype=np.uint8)
    return ConceptDataset(features, labels, xyz_vocab)


class TestDatasetFiles:
    """Tests for JSONL dataset files."""

    def test_split_round_trip(self, tiny_dataset, tmp_path):
        """Test writing and reading both splits."""
        path = DatasetWriter.write_split(tiny_dataset, tmp_path, Split.Train)
        DatasetWriter.write_split(tiny_dataset, tmp_path, "eval")
        assert path.name == "train.jsonl"
        assert (tmp_path / "vocab.json").exists()

        for split in (Split.Train, Split.Eval):
            loaded = DatasetReader.read_split(tmp_path, split)
            assert np.array_equal(loaded.features, tiny_dataset.features)
            assert np.array_equal(loaded.labels, tiny_dataset.labels)
            assert loaded.vocab.names == ("x", "y", "z")

    def test_directory_reads_train_split(self, tiny_dataset, tmp_path):
        """Test that a directory path reads train.jsonl."""
        DatasetWriter.write_split(tiny_dataset, tmp_path, Split.Train)
        assert len(DatasetReader.read(tmp_path)) == 3

    def test_explicit_vocab(self, tiny_dataset, tmp_path):
        """Test reading a file without a vocabulary beside it."""
        path = tmp_path / "rows.jsonl"
        DatasetWriter.write(tiny_dataset, path)
        with pytest.raises(FileNotFoundError, match="Vocabulary"):
            DatasetReader.read(path)
        vocab = ConceptVocab.from_names(["p", "q", "r"])
        assert DatasetReader.read(path, vocab).vocab.names == ("p", "q", "r")

    def test_missing_file(self, tmp_path):
        """Test a missing dataset file."""
        with pytest.raises(FileNotFoundError, match="Dataset file not found"):
            DatasetReader.read(tmp_path / "missing.jsonl")

    def test_bad_line_reports_line_number(self, xyz_vocab):
        """Test malformed rows."""
        lines = ['{"x": [1.0], "y": [1, 0, 1]}\n', "\n", '{"x": [2.0], "y": [1, 2, 0]}\n']
        with pytest.raises(ValueError, match="line 3"):
            DatasetReader.parse_dataset_content(lines, xyz_vocab)
        with pytest.raises(ValueError, match="line 1"):
            DatasetReader.parse_dataset_content(['{"x": [1.0]}'], xyz_vocab)

    def test_inconsistent_widths(self, xyz_vocab):
        """Test ragged feature rows."""
        lines = ['{"x": [1.0], "y": [1, 0, 1]}', '{"x": [1.0, 2.0], "y": [0, 0, 1]}']
        with pytest.raises(ValueError, match="inconsistent widths"):
            DatasetReader.parse_dataset_content(lines, xyz_vocab)

    def test_labels_accept_booleans(self, xyz_vocab):
        """Test boolean label spellings."""
        data = DatasetReader.parse_dataset_content(
            ['{"x": [0.0], "y": [true, false, "1"]}'], xyz_vocab
        )
        assert data.labels.tolist() == [[1, 0, 1]]

    def test_invalid_vocab(self, tmp_path):
        """Test a vocabulary file that is not a list of names."""
        path = tmp_path / "vocab.json"
        path.write_text(json.dumps({"names": ["a"]}), encoding="utf-8")
        with pytest.raises(ValueError, match="list of concept names"):
            DatasetReader.read_vocab(path)


class TestConfigReader:
    """Tests for JSON config files."""

    def test_read(self, tmp_path):
        """Test reading a partial config."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"seed": 5, "leaf": {"epochs": 2}}), encoding="utf-8")
        cfg = ConfigReader.read(path, RunConfig)
        assert cfg.seed == 5
        assert cfg.leaf.epochs == 2
        assert cfg.gates.negatives.value == "chimeras_only"

    def test_round_trip(self, tmp_path):
        """Test a spec written by pydantic reads back equal."""
        spec = SynthSpec(n_concepts=6, implications=[], n_train=10, n_eval=5)
        path = tmp_path / "spec.json"
        path.write_text(spec.model_dump_json(), encoding="utf-8")
        assert ConfigReader.read(path, SynthSpec) == spec

    def test_invalid(self, tmp_path):
        """Test a config failing validation."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"leaf": {"epochs": "many"}}), encoding="utf-8")
        with pytest.raises(ValueError, match="Invalid RunConfig"):
            ConfigReader.read(path, RunConfig)

    def test_missing(self, tmp_path):
        """Test a missing config file."""
        with pytest.raises(FileNotFoundError, match="Config file not found"):
            ConfigReader.read(tmp_path / "none.json", RunConfig)
