"""Boosted tree ensembles, LP reweighting that raises every training margin,
and margin-based generalization diagnostics."""

from .boosting import Ensemble, RoundLog, adaboost, arcgv, error_rate, predict_ensemble
from .dataset import (Dataset, GeneratorSpec, NormParams, generate, load_csv, load_libsvm,
                      normalize_unit_interval, split_train_test)
from .experiment import (DatasetSource, ExperimentConfig, RunRecord, load_config, mix_seed,
                         run_experiment, sweep_rounds)
from .kernels import BACKEND
from .margins import (MarginProfile, cmd, compare_profiles, emargin_bound, freund_schapire_bound,
                      kl_bernoulli, kl_inverse, margin_stats, margins, schapire_bound, theta_hat)
from .modelfile import load_model, save_model
from .mmi import MMIResult, build_mmi_lp, mmi_reweight, support
from .simplex import LinearProgram, LPSolution, solve_lp
from .weak_learner import (DecisionTree, ThresholdGrid, build_grid, log_hypothesis_count,
                           train_tree)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Dataset", "DatasetSource", "DecisionTree", "Ensemble", "ExperimentConfig",
    "GeneratorSpec", "LPSolution", "LinearProgram", "MMIResult", "MarginProfile", "NormParams",
    "RoundLog", "RunRecord", "ThresholdGrid", "adaboost", "arcgv", "build_grid", "build_mmi_lp",
    "cmd", "compare_profiles", "emargin_bound", "error_rate", "freund_schapire_bound",
    "generate", "kl_bernoulli", "kl_inverse", "load_config", "load_csv", "load_libsvm",
    "load_model", "log_hypothesis_count", "margin_stats", "margins", "mix_seed",
    "mmi_reweight", "normalize_unit_interval", "predict_ensemble", "run_experiment",
    "save_model", "schapire_bound", "solve_lp", "split_train_test", "support", "sweep_rounds",
    "theta_hat", "train_tree",
]
