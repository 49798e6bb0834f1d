"""Label-driven auto-weighted constrained K-means for multi-view data."""
from ._backend import BACKEND
from .metrics import EvalReport, accuracy, evaluate, matched_accuracy, pairwise_prf
from .mvdata import (
    CentroidSet,
    DegenerateClassError,
    IndicatorMatrix,
    LabelInfo,
    MultiViewDataset,
    ValidationError,
    build_label_constraint,
    concatenate_views,
    load_dataset,
    load_ground_truth,
    save_dataset,
    stratified_label_sample,
)
from .solver import (
    LabeledArgminMode,
    SolveResult,
    SolverConfig,
    assign_unlabeled,
    init_centroids,
    objective,
    solve,
    solve_constrained_kmeans,
    solve_kmeans_single_view,
    update_centroids,
)
from .synth import BlobSpec, add_gaussian_noise_snr, gen_blobs, make_fake_view
from .weighting import Strategy, WeightVector

__version__ = "0.1.0"
