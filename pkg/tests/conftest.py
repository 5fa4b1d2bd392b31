"""Shared fixtures: toy teams, synthetic datasets, and CSV fixtures."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from bracketlab.bracket import build_bracket, results_csv_lines, simulate_tournament
from bracketlab.dataio import DEFAULT_FEATURE_COLUMNS, REGIONS, PairExample, TeamSeason
from bracketlab.linmodel import FitMeta, FitModel, Scaler


def team(name, season=2023, seed=None, region=None, **features):
    return TeamSeason(
        team_name=name, season=season, features=dict(features), seed=seed, region=region
    )


def manual_model(
    feature_names,
    coefficients,
    intercept=0.0,
    means=None,
    stds=None,
    lam=0.0,
    zero_intercept=False,
) -> FitModel:
    """Hand-built model for tests that need exact parameter control."""
    p = len(feature_names)
    return FitModel(
        coefficients=np.asarray(coefficients, dtype=np.float64),
        intercept=float(intercept),
        scaler=Scaler(
            feature_names=tuple(feature_names),
            means=np.zeros(p) if means is None else np.asarray(means, dtype=np.float64),
            stds=np.ones(p) if stds is None else np.asarray(stds, dtype=np.float64),
        ),
        lam=lam,
        zero_intercept=zero_intercept,
        max_iter=1,
        tol=1e-6,
        fit_meta=FitMeta(iterations=0, final_cost=0.0, grad_inf_norm=0.0, converged=True),
    )


class DominanceModel:
    """Win probability 1 for the team with the higher rating feature."""

    def __init__(self, feature="BARTHAG"):
        self.feature = feature

    def win_probability(self, a, b):
        return 1.0 if a.features[self.feature] > b.features[self.feature] else 0.0


def synthetic_examples(n, beta, rng, intercept=0.0):
    """Examples drawn from the logistic model with known parameters."""
    p = len(beta)
    X = rng.normal(0.0, 1.0, size=(n, p))
    eta = intercept + X @ np.asarray(beta)
    y = (rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-eta))).astype(int)
    return [PairExample(x=X[i], y=int(y[i]), pair_id=i) for i in range(n)]


@pytest.fixture
def field64():
    """64-team field: strengths descend with seed, four filler features."""
    rng = np.random.default_rng(20230316)
    entrants = []
    for region in REGIONS:
        for seed in range(1, 17):
            strength = 1.05 - 0.06 * seed + rng.normal(0.0, 0.01)
            entrants.append(
                team(
                    f"{region} {seed:02d}",
                    season=2023,
                    seed=seed,
                    region=region,
                    BARTHAG=float(strength),
                    ADJOE=float(100.0 + 18.0 * strength + rng.normal(0, 1)),
                    ADJDE=float(100.0 - 15.0 * strength + rng.normal(0, 1)),
                    **{"2P_D": float(48.0 - 4.0 * strength + rng.normal(0, 0.5))},
                )
            )
    return entrants


@pytest.fixture
def semis():
    return (("South", "Midwest"), ("East", "West"))


# ---------------------------------------------------------------------------
# synthetic end-to-end corpus (Kaggle-shaped files) for CLI tests

_SIGNAL = {
    "ADJOE": (104.0, 7.0, 1.5),
    "ADJDE": (96.0, -6.0, 1.5),
    "EFG_O": (50.0, 2.5, 1.0),
    "EFG_D": (50.0, -2.5, 1.0),
    "TOR": (18.0, -0.8, 1.0),
    "TORD": (18.0, 0.8, 1.0),
    "ORB": (29.0, 1.0, 1.5),
    "DRB": (29.0, -1.0, 1.5),
    "FTR": (32.0, 0.5, 2.0),
    "FTRD": (32.0, -0.5, 2.0),
    "2P_O": (50.0, 2.0, 1.0),
    "2P_D": (48.0, -2.0, 1.0),
    "3P_O": (35.0, 1.2, 1.0),
    "3P_D": (34.0, -1.2, 1.0),
    "ADJ_T": (68.0, 0.0, 2.0),
}


class StrengthModel:
    """Latent-strength oracle used to generate a plausible 'actual' bracket."""

    def __init__(self, strengths, scale=2.2):
        self.strengths = strengths
        self.scale = scale

    def win_probability(self, a, b):
        d = self.scale * (self.strengths[a.team_name] - self.strengths[b.team_name])
        return 1.0 / (1.0 + math.exp(-d))


def _feature_row(rng, theta):
    row = {}
    for name in DEFAULT_FEATURE_COLUMNS:
        if name == "BARTHAG":
            v = 1.0 / (1.0 + math.exp(-1.7 * theta)) + rng.normal(0.0, 0.02)
            row[name] = float(min(max(v, 0.01), 0.99))
        else:
            base, slope, noise = _SIGNAL[name]
            row[name] = float(base + slope * theta + rng.normal(0.0, noise))
    return row


@pytest.fixture(scope="session")
def demo_data(tmp_path_factory):
    """Synthetic stats/games/bracket/results CSVs plus a run config."""
    root = tmp_path_factory.mktemp("demo_data")
    rng = np.random.default_rng(777)
    seasons = (2021, 2022, 2023)
    names = [f"Team{i:02d}" for i in range(72)]

    strengths = {s: {n: float(rng.normal(0.0, 1.0)) for n in names} for s in seasons}
    stats_lines = ["TEAM,YEAR," + ",".join(DEFAULT_FEATURE_COLUMNS)]
    features = {}
    for s in seasons:
        for n in names:
            features[(s, n)] = _feature_row(rng, strengths[s][n])
    blanks = set()
    flat = [(s, n, f) for s in seasons for n in names for f in ("ADJ_T", "FTR", "3P_O")]
    for idx in rng.choice(len(flat), size=30, replace=False):
        blanks.add(flat[idx])
    for s in seasons:
        for n in names:
            cells = [
                "" if (s, n, f) in blanks else f"{features[(s, n)][f]:.4f}"
                for f in DEFAULT_FEATURE_COLUMNS
            ]
            stats_lines.append(f"{n},{s}," + ",".join(cells))
    stats_csv = root / "stats.csv"
    stats_csv.write_text("\n".join(stats_lines) + "\n", encoding="utf-8")

    game_lines = ["YEAR,TEAM_A,TEAM_B,WINNER"]
    for s in seasons:
        for _ in range(350):
            i, j = rng.choice(len(names), size=2, replace=False)
            a, b = names[i], names[j]
            p = 1.0 / (1.0 + math.exp(-2.2 * (strengths[s][a] - strengths[s][b])))
            game_lines.append(f"{s},{a},{b},{'A' if rng.uniform() < p else 'B'}")
    games_csv = root / "games.csv"
    games_csv.write_text("\n".join(game_lines) + "\n", encoding="utf-8")

    # 64 strongest 2023 teams; strength order snakes into regions/seeds
    ranked = sorted(names, key=lambda n: -strengths[2023][n])[:64]
    region_cycle = ("South", "East", "Midwest", "West")
    bracket_lines = ["YEAR,REGION,SEED,TEAM"]
    entrants = []
    for pos, name in enumerate(ranked):
        region, seed = region_cycle[pos % 4], pos // 4 + 1
        bracket_lines.append(f"2023,{region},{seed},{name}")
        entrants.append(
            TeamSeason(
                team_name=name,
                season=2023,
                features=dict(features[(2023, name)]),
                seed=seed,
                region=region,
            )
        )
    bracket_csv = root / "bracket_2023.csv"
    bracket_csv.write_text("\n".join(bracket_lines) + "\n", encoding="utf-8")

    semis = [["South", "Midwest"], ["East", "West"]]
    tournament = build_bracket(entrants, semis)
    actual = simulate_tournament(tournament, StrengthModel(strengths[2023]), 20230316)
    actual_csv = root / "results_2023.csv"
    actual_csv.write_text("\n".join(results_csv_lines(actual)) + "\n", encoding="utf-8")

    config = {
        "stats_csv": str(stats_csv),
        "games_csv": str(games_csv),
        "bracket_csv": str(bracket_csv),
        "actual_csv": str(actual_csv),
        "out_dir": str(root / "out"),
        "lambda": 0.01,
        "test_fraction": 0.2,
        "split_seed": 7,
        "mc_iterations": 60,
        "mc_base_seed": 11,
        "selection_threshold": 0.45,
        "zero_intercept": True,
        "augment": True,
        "region_semis": semis,
        "season_range": [2013, 2023],
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")

    return {
        "root": root,
        "stats": stats_csv,
        "games": games_csv,
        "bracket": bracket_csv,
        "actual": actual_csv,
        "config": config_path,
        "config_dict": config,
        "strengths": strengths,
    }
