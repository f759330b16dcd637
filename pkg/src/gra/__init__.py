"""Edge-privacy leakage of graph representations via graph reconstruction attacks."""

from .attack import AttackConfig, GraphReconstructionAttack, PairScores, score_pairs
from .datasets import load_cora_format, load_edge_list, resolve_dataset
from .encoders import GATEncoder, GCNEncoder, Representations, SNNEncoder, train_encoder
from .graph import (DatasetBundle, EdgeSplit, Graph, build_partial_adjacency, erdos_renyi,
                    gcn_normalize, split_edges)
from .linalg import CSRMatrix
from .metrics import auc
from .pipeline import EvalReport, RunConfig, compare_encoders, emit_report, run_pipeline
from .simplicial import boundary_matrix, clique_complex, hodge_laplacian

__version__ = "0.1.0"

__all__ = [
    "AttackConfig", "CSRMatrix", "DatasetBundle", "EdgeSplit", "EvalReport", "GATEncoder",
    "GCNEncoder", "Graph", "GraphReconstructionAttack", "PairScores", "Representations",
    "RunConfig", "SNNEncoder", "auc", "boundary_matrix", "build_partial_adjacency",
    "clique_complex", "compare_encoders", "emit_report", "erdos_renyi", "gcn_normalize",
    "hodge_laplacian", "load_cora_format", "load_edge_list", "resolve_dataset",
    "run_pipeline", "score_pairs", "split_edges", "train_encoder",
]
