import numpy as np
import pytest

from secalloc import ChannelInstance, SubchannelSet

# Reference 3x3 channel used by the bundled demo config and several tests.
DEMO_H = np.array(
    [
        [0.0799 - 0.1191j, 1.9709 + 0.2753j, -0.8066 + 0.8648j],
        [0.3111 - 0.1545j, -0.8250 + 0.5312j, -0.7731 - 0.9074j],
        [0.0719 + 0.3828j, -1.3112 + 1.2574j, -0.3066 - 1.6468j],
    ]
)

DEMO_EAVESDROPPERS = [(3, 0.25)]


@pytest.fixture(scope="session")
def demo_instance():
    return ChannelInstance(H=DEMO_H, eavesdroppers=DEMO_EAVESDROPPERS, n0=1.0, p0=10.0)


def make_subchannels(a, b, c) -> SubchannelSet:
    """Synthetic subchannel set with consistent reassembly plumbing:
    identity W and a diagonal inverse middle factor whose column norms
    reproduce the requested trace coefficients."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    l = a.shape[0]
    return SubchannelSet(
        l=l,
        a=a,
        b=b,
        c=c,
        W=np.eye(l, dtype=np.complex128),
        phi_t_inv=np.diag(np.sqrt(c)).astype(np.complex128),
        k=l,
        r=l,
        n0=1.0,
    )


def random_complex(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
