import numpy as np
import pytest

from protectability.core import AttributeVector, FeatureTable
from protectability.generate import GeneratorSpec, generate
from protectability.information import discretize


def bits_table(**cols):
    return FeatureTable.from_arrays({k: np.asarray(v, dtype=np.int64) for k, v in cols.items()})


@pytest.fixture
def xor4():
    """Exhaustive XOR truth table: y = z1 ^ z2."""
    table = bits_table(z1=[0, 0, 1, 1], z2=[0, 1, 0, 1])
    return table, discretize(table, 16), AttributeVector(np.array([0, 1, 1, 0]), 2)


@pytest.fixture
def copy4():
    """Exhaustive copy table: y = z1, z2 independent of y."""
    table = bits_table(z1=[0, 0, 1, 1], z2=[0, 1, 0, 1])
    return table, discretize(table, 16), AttributeVector(np.array([0, 0, 1, 1]), 2)


@pytest.fixture(scope="session")
def overlap8():
    return generate(GeneratorSpec(family="overlap", seed=7))


@pytest.fixture(scope="session")
def overlap4():
    return generate(GeneratorSpec(family="overlap", seed=7, n_task=2, n_private=1, n_noise=1))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py::test_criterion_" in rep.nodeid:
                name = rep.nodeid.split("::")[-1].removeprefix("test_criterion_")
                lines.append(f"criterion {name}: {'PASS' if outcome == 'passed' else 'FAIL'}")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
