import numpy as np
import pytest

from screenkit.chem import load_corpus
from screenkit.diffusion import (
    ControllerConfig,
    NoiseSchedule,
    ScoreConfig,
    encode_molecule,
    train_controller,
    train_score,
)

N_NODES = 9

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(number: int, ok: bool, detail: str):
    _ACCEPTANCE[number] = (bool(ok), detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


@pytest.fixture(scope="session")
def small_graphs(corpus):
    """The 200 generated QM9-scale molecules the diffusion tests train on."""
    return [m for m in corpus if m.name and m.name.startswith("gen")][:200]


@pytest.fixture(scope="session")
def schedule():
    return NoiseSchedule.linear()


def oxygen_count(mols) -> np.ndarray:
    return np.array([sum(a.element == "O" for a in m.atoms) for m in mols], dtype=float)


@pytest.fixture(scope="session")
def trained_generator(small_graphs, schedule):
    """Score model and oxygen-count controller, both trained once per session."""
    data = [encode_molecule(m, N_NODES) for m in small_graphs]
    model, trace = train_score(data, schedule, ScoreConfig(seed=0))
    controller, _ = train_controller(data, oxygen_count(small_graphs), schedule, ControllerConfig(seed=0))
    return model, controller, trace
