"""Pairwise logistic regression and Monte Carlo bracket simulation."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .bracket import (
    Bracket,
    CompletedBracket,
    Matchup,
    SimulationReport,
    build_bracket,
    monte_carlo,
    simulate_game,
    simulate_tournament,
)
from .dataio import (
    ColumnSchema,
    GameRecord,
    PairExample,
    TeamSeason,
    build_dataset,
    impute_means,
    load_game_records,
    load_team_seasons,
    make_pair_example,
    train_test_split,
)
from .errors import DataError, UsageError
from .linmodel import (
    FitModel,
    Scaler,
    accuracy,
    cost,
    cost_gradient,
    feature_importance,
    fit,
    fit_scaler,
    load_model,
    logistic,
    predict_proba,
    save_model,
    select_features,
    transform,
)
from .metrics import (
    MatchupVerdict,
    RankVector,
    classify_matchups,
    final_round_ranks,
    naive_accuracy,
    spearman_rho,
)
from .rng import SplitMix64

__version__ = "0.1.0"

__all__ = [
    "Bracket",
    "ColumnSchema",
    "CompletedBracket",
    "DataError",
    "FitModel",
    "GameRecord",
    "KERNEL_BACKEND",
    "Matchup",
    "MatchupVerdict",
    "PairExample",
    "RankVector",
    "Scaler",
    "SimulationReport",
    "SplitMix64",
    "TeamSeason",
    "UsageError",
    "accuracy",
    "build_bracket",
    "build_dataset",
    "classify_matchups",
    "cost",
    "cost_gradient",
    "feature_importance",
    "final_round_ranks",
    "fit",
    "fit_scaler",
    "impute_means",
    "load_game_records",
    "load_model",
    "load_team_seasons",
    "logistic",
    "make_pair_example",
    "monte_carlo",
    "naive_accuracy",
    "predict_proba",
    "save_model",
    "select_features",
    "simulate_game",
    "simulate_tournament",
    "spearman_rho",
    "train_test_split",
    "transform",
]
