import math

import numpy as np
import pytest

from weakctx.hilbert import Operator, State
from weakctx.pointer import Scenario

Z = np.diag([1.0, -1.0])
X = np.array([[0.0, 1.0], [1.0, 0.0]])
P0 = np.diag([1.0, 0.0])
P1 = np.diag([0.0, 1.0])


def tilted_pair(cos2theta):
    """psi = (cos t, sin t), phi = (cos t, -sin t); then Z_w = 1 / cos 2t."""
    t = 0.5 * math.acos(cos2theta)
    c, s = math.cos(t), math.sin(t)
    return State([c, s]), State([c, -s])


def tilted_scenario(cos2theta, sigma):
    psi, phi = tilted_pair(cos2theta)
    return Scenario(psi, phi, Operator(P1), sigma)


def random_state(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return State(v / np.linalg.norm(v))


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projector(rng, d, rank=None):
    rank = rng.integers(1, d) if rank is None else rank
    u = random_unitary(rng, d)[:, :rank]
    return u @ u.conj().T


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + a.conj().T)


def random_scenario(rng, sigma=None, d=None):
    d = int(rng.integers(2, 6)) if d is None else d
    while True:
        psi, phi = random_state(rng, d), random_state(rng, d)
        if abs(np.vdot(phi.amplitudes, psi.amplitudes)) ** 2 > 1e-3:
            break
    sigma = float(rng.choice([0.5, 1.0, 10.0, 100.0])) if sigma is None else sigma
    return Scenario(psi, phi, Operator(random_projector(rng, d)), sigma)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def zw2():
    """cos 2theta = 1/2, so Z_w = 2 and the witness |1><1| has weak value -1/2."""
    return tilted_scenario(0.5, 10.0)


@pytest.fixture
def aav100():
    return tilted_scenario(0.01, 1000.0)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    def record(number, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
