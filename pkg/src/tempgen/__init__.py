"""Generative modelling of temporal interaction graphs.

Learns a recurrent model of temporal random walks, with a log-normal
mixture over inter-event times, and assembles sampled walks into a
synthetic temporal graph. Both a transductive (node-ID) and an inductive
(node-embedding) variant are provided.
"""
from .graph import (
    EdgeListError,
    StaticGraph,
    TemporalEdge,
    TemporalGraph,
    load_edge_list,
    save_edge_list,
    snapshot,
    static_projection,
    unique_timestamps,
)
from .kernels import BACKEND_NAME

__version__ = "0.1.0"
