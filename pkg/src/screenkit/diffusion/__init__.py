from .controller import Controller, ControllerConfig, train_controller
from .metrics import EmptySet, SuccessResult, graph_statistics, mmd_metric, optimize_success
from .quantize import Rejection, bond_orders, quantize_batch, quantize_graph
from .sampler import MaskShapeMismatch, SampleRun, edge_mask_from_nodes, inpaint_sample, reverse_sample
from .schedule import BadStep, NoiseSchedule
from .score import AnalyticGaussianScore, ScoreConfig, ScoreModel, train_score
from .state import EMPTY, VOCAB, DiffusionState, encode_molecule, forward_noise, reconstruct, symmetric_noise

__all__ = [
    "EMPTY", "VOCAB", "AnalyticGaussianScore", "BadStep", "Controller", "ControllerConfig", "DiffusionState",
    "EmptySet", "MaskShapeMismatch", "NoiseSchedule", "Rejection", "SampleRun", "ScoreConfig", "ScoreModel",
    "SuccessResult", "bond_orders", "edge_mask_from_nodes", "encode_molecule", "forward_noise",
    "graph_statistics", "inpaint_sample", "mmd_metric", "optimize_success", "quantize_batch", "quantize_graph",
    "reconstruct", "reverse_sample", "symmetric_noise", "train_controller", "train_score",
]
