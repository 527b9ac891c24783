import os
import sys

import numpy as np
import pytest

# Add the repository root to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from backend.models import ChannelBlocks, NetworkMatrix, ParameterKind, PortPartition
from backend.ris_service.netparams import random_passive_network, random_passive_terminations

Z0 = 50.0


def complex_normal(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def make_unilateral(net: NetworkMatrix) -> NetworkMatrix:
    """Zero the TI, TR and IR blocks of a network."""
    blocks = net.blocks()
    for name in ("TI", "TR", "IR"):
        blocks[name] = np.zeros_like(blocks[name])
    return NetworkMatrix.from_blocks(net.kind, blocks, net.partition, net.z0)


def random_z_blocks(seed, n_t=2, n_i=4, n_r=2, with_rt=True, ii=None) -> ChannelBlocks:
    rng = np.random.default_rng(seed)
    rt = complex_normal(rng, (n_r, n_t), Z0) if with_rt else np.zeros((n_r, n_t))
    return ChannelBlocks(kind=ParameterKind.Z, rt=rt, ri=complex_normal(rng, (n_r, n_i), Z0),
                         it=complex_normal(rng, (n_i, n_t), Z0), ii=ii, z0=Z0)


@pytest.fixture
def partition():
    return PortPartition(n_t=2, n_i=2, n_r=2)


@pytest.fixture
def fixture_pair(partition):
    return random_passive_network(partition, seed=11), random_passive_terminations(partition, seed=12)
