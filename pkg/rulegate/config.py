"""
Configuration settings and constants for the rulegate package.
"""
from pathlib import Path
from typing import Any, Dict

# Desk-scale training defaults
DEFAULT_SEED = 123
DEFAULT_LEAF_EPOCHS = 10
DEFAULT_LEVEL_EPOCHS = 8
DEFAULT_BATCH_SIZE = 64
DEFAULT_LEARNING_RATE = 1e-2
DEFAULT_AGGREGATION = "min"
DEFAULT_TAU = 0.0
DEFAULT_TOP_K = 3

# Desk-scale dimensions (input features D, encoder feature dim F)
DEFAULT_INPUT_DIM = 64
DEFAULT_FEATURE_DIM = 32
DEFAULT_GATE_HIDDEN_LAYERS = 2

# Adam
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

# Leaf bank
POS_WEIGHT_MIN = 1.0
POS_WEIGHT_MAX = 100.0
LOG_TEMPERATURE_BOUNDS = (-3.0, 3.0)

# Rule mining (pairwise thresholds and caps)
DEFAULT_SUPPORT_THRESH = 0.05
DEFAULT_CONFIDENCE_POS = 0.995
DEFAULT_CONFIDENCE_NEG = 0.005
DEFAULT_MAX_RULES = 25
DEFAULT_COMPOUND_POOL = 8
DEFAULT_PER_PARENT_PAIR_LIMIT = 3

# Exact independent-events oracle is exponential in the number of concepts
MAX_EXACT_CONCEPTS = 16

# Synthetic benchmark
MAX_REJECTION_ATTEMPTS = 1000
MIN_ACCEPTANCE_RATE = 0.01

# Gate cache layout
CACHE_DIR_ENV = "RULEGATE_CACHE_DIR"
DEFAULT_CACHE_DIR = Path("./.rulegate_cache")
GATE_SUFFIX = ".gate"
MANIFEST_SUFFIX = ".json"
CACHE_INDEX_FILE = "index.sqlite"
MANIFEST_SCHEMA_VERSION = 1
CACHE_HASH_CHARS = 32
FINGERPRINT_CHARS = 16

# Binary blob formats
PARAMS_MAGIC = b"RGMLP"
PARAMS_VERSION = 1
BANK_MAGIC = b"RGBANK"
BANK_VERSION = 1

# Dataset files
TRAIN_FILE = "train.jsonl"
EVAL_FILE = "eval.jsonl"
VOCAB_FILE = "vocab.json"

# Default encoding for rule and dataset files
DEFAULT_ENCODING = "utf-8"

# Type aliases
JsonData = Dict[str, Any]
