"""Test configuration and fixtures for rulegate tests."""

import itertools
from typing import List, Sequence

import numpy as np
import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from rulegate.engine.leaf_training import train_leaf_bank
from rulegate.engine.synthetic import gen_datasets
from rulegate.models.base import Base
from rulegate.models.formula import Formula
from rulegate.models.rule_graph import ConceptVocab
from rulegate.models.run_config import (
    GateTrainingConfig,
    LeafBankConfig,
    PlantedImplication,
    SynthSpec,
)
from rulegate.utils.enums import OpCode

# Create an in-memory SQLite database for testing
engine = create_engine("sqlite:///:memory:")
Session = sessionmaker(bind=engine)


@pytest.fixture(scope="module")
def setup_database():
    """Set up test database and create tables."""
    Base.metadata.create_all(engine)
    yield
    Base.metadata.drop_all(engine)


@pytest.fixture
def db_session(setup_database):
    """Create a new database session for a test."""
    session = Session()
    try:
        yield session
    finally:
        session.rollback()
        session.close()


def random_formula(
    rng: np.random.Generator,
    names: Sequence[str],
    max_depth: int = 4,
    min_arity: int = 1,
) -> Formula:
    """Random formula over names with operator depth at most max_depth."""
    if max_depth == 0 or rng.random() < 0.25:
        return Formula.leaf(str(rng.choice(names)))
    op = OpCode(int(rng.integers(1, 5)))
    if op is OpCode.IMPLIES or op is OpCode.IFF:
        arity = 2
    else:
        arity = int(rng.integers(min_arity, 4))
    children = [
        (random_formula(rng, names, max_depth - 1, min_arity), bool(rng.random() < 0.3))
        for _ in range(arity)
    ]
    return Formula.node(op, *children)


def evaluate_formula(formula: Formula, assignment: dict) -> int:
    """Direct recursive evaluation of a formula tree."""
    if formula.is_leaf:
        return int(assignment[formula.name])
    vals = [
        1 - evaluate_formula(child, assignment) if negated else evaluate_formula(child, assignment)
        for child, negated in formula.children
    ]
    if formula.op is OpCode.AND:
        return int(all(vals))
    if formula.op is OpCode.OR:
        return int(any(vals))
    if formula.op is OpCode.IMPLIES:
        return int((1 - vals[0]) or vals[1])
    return int(all(v == vals[0] for v in vals))


def all_assignments(n: int) -> np.ndarray:
    """Every 0/1 vector of length n, one per row."""
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.uint8)


@pytest.fixture
def abc_vocab() -> ConceptVocab:
    return ConceptVocab.from_names(["A", "B", "C"])


@pytest.fixture
def xyz_vocab() -> ConceptVocab:
    return ConceptVocab.from_names(["x", "y", "z"])


def small_spec(**overrides) -> SynthSpec:
    """Four concepts, one planted implication c00 -> c01."""
    values = dict(
        n_concepts=4,
        input_dim=16,
        implications=[PlantedImplication(antecedent="c00", consequent="c01")],
        base_marginal=0.35,
        violation_rate=0.2,
        signal=3.0,
        noise=0.3,
        gain_spread=0.0,
        n_train=1500,
        n_eval=600,
        seed=7,
    )
    values.update(overrides)
    return SynthSpec(**values)


def small_leaf_config(**overrides) -> LeafBankConfig:
    values = dict(feature_dim=8, epochs=15, lr=1e-2, batch_size=64, seed=7)
    values.update(overrides)
    return LeafBankConfig(**values)


def small_gate_config(**overrides) -> GateTrainingConfig:
    values = dict(epochs_level=8, lr=1e-2, batch_size=64, hidden_layers=1, seed=7)
    values.update(overrides)
    return GateTrainingConfig(**values)


@pytest.fixture(scope="session")
def small_data():
    """Train and eval splits of the small synthetic benchmark."""
    return gen_datasets(small_spec())


@pytest.fixture(scope="session")
def small_bank(small_data):
    """Leaf bank trained on the small benchmark."""
    train, _ = small_data
    return train_leaf_bank(train, small_leaf_config())


def names_of(rules) -> List[str]:
    return [rule.text for rule in rules]
