"""Filter feature selection for MAUC-oriented multi-class classification.

The centrepiece is :func:`select_mdfs`: rank features by AUC on every
one-versus-one class pair and draw the best unused feature from a scheduled
pair until K features are collected. Eight filter baselines, MAUC scoring, two
classifiers and a cross-validation harness come with it.
"""
from mdfs._backend import current as kernel_backend
from mdfs.classifiers import knn_score, nb_score, nb_train
from mdfs.data import (
    Dataset,
    discretize_equal_frequency,
    generate_siren_dataset,
    load_csv,
    make_siren_spec,
    save_csv,
    siren_benchmark_spec,
    stratified_folds,
)
from mdfs.decompose import (
    one_vs_all_subproblems,
    one_vs_one_subproblems,
    rank_features_by_auc,
    rank_features_by_metric,
)
from mdfs.evaluation import ExperimentSpec, MethodSpec, compare_methods, run_experiment
from mdfs.metrics import (
    auc,
    chi_square,
    entropy,
    fsdd_score,
    mauc_from_table,
    mauc_of_scores,
    mutual_information,
    symmetrical_uncertainty,
    wilcoxon_signed_rank,
)
from mdfs.selectors import (
    METHODS,
    SelectionResult,
    SelectorConfig,
    select,
    select_maucd,
    select_mdfs,
    select_mrmr,
    select_ranking,
    select_relieff,
    select_spreadfx,
)

__version__ = "0.1.0"
