import numpy as np
import pytest
from scipy.linalg import logm

from hswcap.bloch import bloch_to_density
from hswcap.channels import ChannelKind, ChannelParams, NamedChannelSpec, named_channel

LINEAR_SIMPLE = ChannelParams((0, 0, 0.2), (0, 0, 0.4))
LINEAR_GENERAL = ChannelParams((0.1, 0.2, 0.3), (0, 0, 0.4))
PLANAR = ChannelParams((0.3, 0.1, 0.0), (0.4, 0.5, 0.0))
AMP_DAMP = named_channel(NamedChannelSpec(ChannelKind.AMPLITUDE_DAMPING, 0.36))
IDENTITY_CH = ChannelParams((0, 0, 0), (1, 1, 1))


def matrix_log_relative_entropy(w, v):
    """Tr rho (log2 rho - log2 phi) from explicit density matrices."""
    a, b = bloch_to_density(w), bloch_to_density(v)
    return float(np.real(np.trace(a @ (logm(a) - logm(b))))) / np.log(2.0)


def eig_relative_entropy(w, v):
    """Same quantity via eigendecompositions; vectorisable and exact for
    pure first arguments."""
    a, b = bloch_to_density(w), bloch_to_density(v)
    la, ua = np.linalg.eigh(a)
    lb, ub = np.linalg.eigh(b)
    ent = sum(x * np.log2(x) for x in la if x > 0)
    overlap = np.abs(ua.conj().T @ ub) ** 2  # |<a_i|b_j>|^2
    cross = sum(la[i] * overlap[i, j] * np.log2(lb[j]) for i in range(2) for j in range(2) if la[i] > 0)
    return float(ent - cross)


def random_ball(rng, n, max_norm=1.0):
    u = rng.normal(size=(n, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return u * (max_norm * rng.uniform(size=(n, 1)) ** (1 / 3))


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
