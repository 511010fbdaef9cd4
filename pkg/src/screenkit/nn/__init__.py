from .autograd import Tensor
from .data import COLUMNS, DdiData, DtaData, EmptyDataset, MppData, SchemaError, load_dataset
from .gradcheck import GradCheckReport, grad_check
from .heads import BatchMismatch, contrastive_align_loss, ddi_forward, dta_forward, init_model, mpp_forward
from .mpnn import GraphBatch, encode, make_batch, mp_forward
from .params import Adam, ModelParams, ShapeMismatch, UntrainedModel
from .protein import AMINO_ACIDS, BadSequence, ProteinFeatures, kmer_composition, protein_features
from .train import TrainConfig, predict, screen_library, train_head

__all__ = [
    "AMINO_ACIDS", "Adam", "BadSequence", "BatchMismatch", "COLUMNS", "DdiData", "DtaData", "EmptyDataset",
    "GradCheckReport", "GraphBatch", "ModelParams", "MppData", "ProteinFeatures", "SchemaError", "ShapeMismatch",
    "Tensor", "TrainConfig", "UntrainedModel", "contrastive_align_loss", "ddi_forward", "dta_forward", "encode",
    "grad_check", "init_model", "kmer_composition", "load_dataset", "make_batch", "mp_forward", "mpp_forward",
    "predict", "protein_features", "screen_library", "train_head",
]
