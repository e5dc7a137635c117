"""Candidate-pair selection for link prediction guided by a per-class roadmap."""
from .embeddings import EmbeddingMatrix, ProximityModel, aa_embeddings, cn_embeddings, load_embeddings
from .graph import EdgeListError, Graph, WaldoWarning, load_edge_list, two_hop_pairs
from .grouping import NodeGrouping, Partition, cluster_embeddings, combine, degree_log_bins, partition_pairs
from .heuristics import score, score_pairs, top_k_heuristic
from .kernels import BACKEND
from .lsh import build_tree, closest_pairs
from .metrics import precision_at_k, recall_at_k
from .roadmap import Roadmap, build_roadmap, total_error_bound, tv_distance
from .selector import CandidateSet, check_bailout, run_linkwaldo, select_pairs_approx, select_pairs_exact
from .split import SplitResult, random_split, temporal_split

__version__ = "0.1.0"
