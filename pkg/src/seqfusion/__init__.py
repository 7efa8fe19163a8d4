"""Sequential multimodal fusion with prior-modality sample weights."""
from .cv import CVConfig, SplitTriple, controlled_cv, gate_split, stratified_split
from .data import (ClassCounts, Dataset, FeatureView, class_counts, concat_views,
                   load_dataset, write_dataset)
from .experiment import ExperimentReport, run_experiment
from .fusion import (FusionConfig, FusionModel, Variant, predict_fusion,
                     train_early_fusion, train_image_only, train_prior,
                     train_sequential_fusion)
from .gbt import GBTConfig, GBTModel, fit, predict, predict_proba
from .metrics import aggregate, compute_metrics, confusion, overlap
from .stats import student_t_two_sided_p, welch_t_test
from .synth import SignalProfile, generate
from .weighting import (PriorPartition, Strategy, WeightingConfig,
                        compose_weights, partition_by_prior, set_weights)

__version__ = "0.1.0"

__all__ = [
    "CVConfig",
    "SplitTriple",
    "controlled_cv",
    "gate_split",
    "stratified_split",
    "ClassCounts",
    "Dataset",
    "FeatureView",
    "class_counts",
    "concat_views",
    "load_dataset",
    "write_dataset",
    "ExperimentReport",
    "run_experiment",
    "FusionConfig",
    "FusionModel",
    "Variant",
    "predict_fusion",
    "train_early_fusion",
    "train_image_only",
    "train_prior",
    "train_sequential_fusion",
    "GBTConfig",
    "GBTModel",
    "fit",
    "predict",
    "predict_proba",
    "aggregate",
    "compute_metrics",
    "confusion",
    "overlap",
    "student_t_two_sided_p",
    "welch_t_test",
    "SignalProfile",
    "generate",
    "PriorPartition",
    "Strategy",
    "WeightingConfig",
    "compose_weights",
    "partition_by_prior",
    "set_weights",
]
