import json
from pathlib import Path

import numpy as np
import pytest

from mellin_sampler.core import LatticeFunction, SpaceParams, lattice_indices
from mellin_sampler.synthesis import norm_parseval

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def vectors():
    return json.loads((FIXTURES / "oracle_vectors.json").read_text())


def random_lattice(params: SpaceParams, K: int, seed: int, unit: bool = False,
                   real: bool = False) -> LatticeFunction:
    rng = np.random.default_rng(seed)
    keys = lattice_indices(params.n, 2 * K)
    vals = rng.standard_normal(keys.shape[0])
    if not real:
        vals = vals + 1j * rng.standard_normal(keys.shape[0])
    f = LatticeFunction(params, keys=keys, values=vals)
    return f.with_values(f.values / norm_parseval(f)) if unit else f


@pytest.fixture
def lattice_factory():
    return random_lattice


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
