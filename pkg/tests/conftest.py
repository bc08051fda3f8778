import numpy as np
import pytest

from helpers import em_scenario

from nextcell.synth import generate_scenario, trace_to_graph


@pytest.fixture(scope="session")
def em_graph():
    """EM-scale synthetic association graph, shared across tests."""
    return trace_to_graph(generate_scenario(em_scenario(seed=1)))


@pytest.fixture(scope="session")
def em_bundle(em_graph):
    from nextcell.split import make_split
    return make_split(em_graph, seed=1)
