"""Trainer for the GCN conjunct-ranking model.

Reads JSON-lines equation-graph datasets, optimizes the embedding, the
message-passing rounds, and one task head jointly, and exports the portable
weight file the solver's inference runtime consumes.
"""

from .data import Instance, load_instances, pack_batch, split_instances
from .model import RankGCN, export_weights, import_weights
from .train import TrainConfig, evaluate, evaluate_instances, train

__version__ = "0.1.0"
