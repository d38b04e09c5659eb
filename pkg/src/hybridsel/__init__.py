"""Regularized selectors, tree ensembles and their hybrids on Friedman data."""
from .datagen import ScenarioConfig, SimDataset, gen_dataset, split_train_test
from .harness import GridConfig, enumerate_algorithms, run_grid, summarize
from .linear import PenaltySpec, cv_select_lambda, fit_enet, fit_ols
from .metrics import jaccard, recovery, rmse
from .selection import (HybridSpec, run_blackbox_pipeline, run_hybrid_pipeline,
                        run_regularized_pipeline)
from .trees import TreeParams, fit_bagging, fit_boosting, fit_tree, preset

__version__ = "0.1.0"
