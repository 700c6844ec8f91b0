import numpy as np
import pytest
from hypothesis import settings

from dechist.hilbert import ProjectorFamily, Schedule, Unitary, make_state_pure

settings.register_profile("suite", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("suite")

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)


def qubit_family():
    return ProjectorFamily(
        members=(np.diag([1.0 + 0j, 0.0]), np.diag([0.0, 1.0 + 0j])),
        labels=("0", "1"),
    )


def qubit_schedule(evolutions):
    fam = qubit_family()
    return Schedule(
        times=tuple(float(k) for k in range(len(evolutions))),
        evolutions=tuple(Unitary(u) for u in evolutions),
        families=tuple(fam for _ in evolutions),
    )


@pytest.fixture
def plus_state():
    return make_state_pure(np.array([1.0, 1.0]) / np.sqrt(2.0))


@pytest.fixture
def hadamard_schedule():
    """Two slots on a qubit: identity at t1, Hadamard conjugation at t2."""
    return qubit_schedule([np.eye(2), HADAMARD])
