"""Classifiers for discretized rank functions and rank invariants."""

from .dataset import FunctionalDataset, from_rank_grids, weighted_gram, weighted_sqdist
from .depth import mbd, mbd_classify, mbd_scores, mbd_terms
from .evaluation import EvalReport, Pipeline, auc_roc, cross_validate, stratified_folds
from .fpca import FpcaBasis, fit_fpca, fpca
from .haar import haar2d, haar_project, ihaar2d
from .kernels import KernelSpec
from .knn import knn_classify, knn_scores
from .svm import ConvergenceError, SvmModel, smo, svm_decision, svm_predict, svm_train

__all__ = [
    "ConvergenceError", "EvalReport", "FpcaBasis", "FunctionalDataset", "KernelSpec",
    "Pipeline", "SvmModel", "auc_roc", "cross_validate", "fit_fpca", "fpca", "from_rank_grids",
    "haar2d", "haar_project", "ihaar2d", "knn_classify", "knn_scores", "mbd", "mbd_classify",
    "mbd_scores", "mbd_terms", "smo", "stratified_folds", "svm_decision", "svm_predict",
    "svm_train", "weighted_gram", "weighted_sqdist",
]
