"""Shared fixtures for cia_sim tests."""
import hypothesis
import numpy as np
import pytest

from cia_sim.const import PdpKind
from cia_sim.precoders import kernel_basis
from cia_sim.signal_model import (
    OfdmConfig,
    PdpModel,
    derive_seed,
    generate_channel,
    reduced_channel,
)

np.seterr(all="warn")

hypothesis.settings.register_profile("default", max_examples=100, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=500, deadline=None)
hypothesis.settings.load_profile("default")

PDPS = [
    PdpModel(PdpKind.UNIFORM),
    PdpModel(PdpKind.EXPONENTIAL, 0.75),
    PdpModel(PdpKind.EXPONENTIAL, 2.0),
]


@pytest.fixture
def cfg():
    """Small block used across the suite: N=16, L=l=4."""
    return OfdmConfig(n=16, cp=4, channel_order=4, noise_variance=0.1)


@pytest.fixture
def links(cfg):
    """Uniform-PDP channels (pp, sp, ss, ps) of one seeded draw."""
    pdp = PdpModel(PdpKind.UNIFORM)
    return [generate_channel(cfg, pdp, derive_seed(7, 0, link)) for link in range(4)]


@pytest.fixture
def reduced(cfg, links):
    """Reduced channels matching the links fixture."""
    return [reduced_channel(link, cfg) for link in links]


@pytest.fixture
def basis(reduced):
    """Kernel basis of the secondary-to-primary channel."""
    return kernel_basis(reduced[1])
