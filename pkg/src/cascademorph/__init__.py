"""Cascade morphology: traversal encoding, Markov-state features and size prediction."""
from .cascade import ActionEvent, CascadeGraph, DataError, Edge, FollowerGraph, build_cascade, truncate
from .classifier import MetricsReport, TrainedModel, cross_validate, posterior, train
from .encoding import decode_tree, dfs_encode, encode, rle_decode, rle_encode
from .features import StateFeature, information_gain, klt_transform, presence_vector, typical_states
from .graph_metrics import BaselineFeatures, baseline_features, count_spanning_trees
from .markov import MarkovChain, autocorrelation, fit, select_order, sequence_probability
from .pipeline import ConfigError, ExperimentConfig, export_dot, run_experiment, run_on_cascades
from .synth import GeneratorConfig, RegimeParams, generate

__version__ = "0.1.0"
