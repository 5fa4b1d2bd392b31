"""Ingest team-season stats and game results, clean them, and build
difference-feature training examples with deterministic splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DataError
from .rng import SplitMix64

REGIONS = ("East", "West", "Midwest", "South")

# Kaggle college-basketball column names: the four mandatory predictors
# (ADJOE, ADJDE, BARTHAG, 2P_D) plus twelve further numeric columns for
# a sixteen-variable default set.
DEFAULT_FEATURE_COLUMNS = (
    "ADJOE", "ADJDE", "BARTHAG", "EFG_O", "EFG_D", "TOR", "TORD",
    "ORB", "DRB", "FTR", "FTRD", "2P_O", "2P_D", "3P_O", "3P_D", "ADJ_T",
)
MANDATORY_FEATURE_COLUMNS = ("ADJOE", "ADJDE", "BARTHAG", "2P_D")

DEFAULT_SEASON_RANGE = (2013, 2023)

# Cells treated as missing in numeric columns (Kaggle files use NA).
_MISSING_MARKERS = frozenset({"", "NA", "N/A", "NAN"})


@dataclass(frozen=True)
class ColumnSchema:
    """Maps CSV columns to TeamSeason fields.

    `seed` and `region` are used only when the header contains them;
    `team`, `year` and every feature column are required.
    """

    team: str = "TEAM"
    year: str = "YEAR"
    features: tuple[str, ...] = DEFAULT_FEATURE_COLUMNS
    seed: str | None = "SEED"
    region: str | None = None


@dataclass(frozen=True)
class TeamSeason:
    """One team's statistical profile for one season."""

    team_name: str
    season: int
    features: dict[str, float | None]
    seed: int | None = None
    region: str | None = None

    def __post_init__(self):
        if self.seed is not None and not 1 <= self.seed <= 16:
            raise DataError(f"{self.team_name} {self.season}: seed {self.seed} outside 1-16")
        if self.region is not None and self.region not in REGIONS:
            raise DataError(f"{self.team_name} {self.season}: unknown region {self.region!r}")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(self.features)

    def is_imputed(self) -> bool:
        return all(v is not None for v in self.features.values())


@dataclass(frozen=True)
class GameRecord:
    """One historical matchup with a known winner (label 1 iff team_a won)."""

    season: int
    team_a: str
    team_b: str
    label: int
    round_no: int | None = None

    def __post_init__(self):
        if self.team_a == self.team_b:
            raise DataError(f"game {self.season} {self.team_a}: team plays itself")
        if self.label not in (0, 1):
            raise DataError(f"game {self.season} {self.team_a} vs {self.team_b}: label must be 0 or 1")


@dataclass(frozen=True, eq=False)
class PairExample:
    """Difference-feature training example: x = features(a) - features(b)."""

    x: np.ndarray
    y: int
    # examples built from the same game (an original and its mirror)
    # share a pair_id so splits never separate them
    pair_id: int | None = None


@dataclass(frozen=True)
class ImputationReport:
    filled: int
    dropped: tuple[tuple[str, int, tuple[str, ...]], ...]  # (team, season, features)

    def lines(self) -> list[str]:
        out = [f"imputation: filled {self.filled} missing cells, dropped {len(self.dropped)} rows"]
        for team, season, feats in self.dropped:
            out.append(f"dropped {team} ({season}): no season mean for {', '.join(feats)}")
        return out


@dataclass(frozen=True)
class BuildReport:
    built: int
    skipped: tuple[tuple[GameRecord, str], ...]

    def lines(self) -> list[str]:
        out = [f"dataset: built {self.built} examples, skipped {len(self.skipped)} games"]
        for game, reason in self.skipped:
            out.append(f"skipped {game.season} {game.team_a} vs {game.team_b}: {reason}")
        return out


def _parse_real(cell: str, row: int, column: str) -> float | None:
    text = cell.strip()
    if text.upper() in _MISSING_MARKERS:
        return None
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"row {row}: column {column}: cannot parse {text!r} as a number") from None
    if math.isnan(value):
        return None
    return value


def _parse_int(cell: str, row: int, column: str) -> int:
    text = cell.strip()
    try:
        return int(text)
    except ValueError:
        raise DataError(f"row {row}: column {column}: cannot parse {text!r} as an integer") from None


def load_team_seasons(
    path,
    schema: ColumnSchema | None = None,
    season_range: tuple[int, int] | None = DEFAULT_SEASON_RANGE,
) -> list[TeamSeason]:
    """Read a team-stats CSV into TeamSeason records.

    Empty (or NA) numeric cells become missing values. Rows are numbered
    from 1 (first data row) in error messages. A season outside
    `season_range` is an error; pass season_range=None to accept any.
    """
    schema = schema or ColumnSchema()
    try:
        fh = open(path, newline="", encoding="utf-8-sig")
    except FileNotFoundError:
        raise DataError(f"stats file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        index = {name.strip(): i for i, name in enumerate(header)}
        required = [schema.team, schema.year, *schema.features]
        missing = [c for c in required if c not in index]
        if missing:
            raise DataError(f"{path}: missing columns: {', '.join(missing)}")
        seed_col = index.get(schema.seed) if schema.seed else None
        region_col = index.get(schema.region) if schema.region else None

        teams: list[TeamSeason] = []
        for rownum, row in enumerate(reader, start=1):
            if not any(cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise DataError(f"row {rownum}: expected {len(header)} cells, got {len(row)}")
            season = _parse_int(row[index[schema.year]], rownum, schema.year)
            if season_range is not None and not season_range[0] <= season <= season_range[1]:
                raise DataError(
                    f"row {rownum}: season {season} outside configured range "
                    f"{season_range[0]}-{season_range[1]}"
                )
            features = {
                name: _parse_real(row[index[name]], rownum, name) for name in schema.features
            }
            seed = None
            if seed_col is not None and row[seed_col].strip().upper() not in _MISSING_MARKERS:
                seed = _parse_int(row[seed_col], rownum, schema.seed)
            region = None
            if region_col is not None and row[region_col].strip():
                region = row[region_col].strip()
            teams.append(
                TeamSeason(
                    team_name=row[index[schema.team]].strip(),
                    season=season,
                    features=features,
                    seed=seed,
                    region=region,
                )
            )
    return teams


def load_game_records(path) -> list[GameRecord]:
    """Read a games CSV (YEAR,TEAM_A,TEAM_B,WINNER with WINNER in {A,B})."""
    try:
        fh = open(path, newline="", encoding="utf-8-sig")
    except FileNotFoundError:
        raise DataError(f"games file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        index = {name.strip(): i for i, name in enumerate(header)}
        missing = [c for c in ("YEAR", "TEAM_A", "TEAM_B", "WINNER") if c not in index]
        if missing:
            raise DataError(f"{path}: missing columns: {', '.join(missing)}")
        games = []
        for rownum, row in enumerate(reader, start=1):
            if not any(cell.strip() for cell in row):
                continue
            winner = row[index["WINNER"]].strip().upper()
            if winner not in ("A", "B"):
                raise DataError(f"row {rownum}: column WINNER: expected A or B, got {winner!r}")
            games.append(
                GameRecord(
                    season=_parse_int(row[index["YEAR"]], rownum, "YEAR"),
                    team_a=row[index["TEAM_A"]].strip(),
                    team_b=row[index["TEAM_B"]].strip(),
                    label=1 if winner == "A" else 0,
                )
            )
    return games


def impute_means(teams: Sequence[TeamSeason]) -> tuple[list[TeamSeason], ImputationReport]:
    """Fill missing feature values with same-season means.

    A record whose missing feature has no present value anywhere in its
    season cannot be imputed and is dropped; the report lists it.
    Present values are never altered.
    """
    if not teams:
        raise ValueError("impute_means requires at least one record")
    sums: dict[tuple[int, str], float] = {}
    counts: dict[tuple[int, str], int] = {}
    for t in teams:
        for name, value in t.features.items():
            if value is not None:
                key = (t.season, name)
                sums[key] = sums.get(key, 0.0) + value
                counts[key] = counts.get(key, 0) + 1

    retained: list[TeamSeason] = []
    dropped: list[tuple[str, int, tuple[str, ...]]] = []
    filled = 0
    for t in teams:
        unfillable = tuple(
            name
            for name, value in t.features.items()
            if value is None and (t.season, name) not in counts
        )
        if unfillable:
            dropped.append((t.team_name, t.season, unfillable))
            continue
        if t.is_imputed():
            retained.append(t)
            continue
        new_features = {}
        for name, value in t.features.items():
            if value is None:
                key = (t.season, name)
                value = sums[key] / counts[key]
                filled += 1
            new_features[name] = value
        retained.append(replace(t, features=new_features))
    return retained, ImputationReport(filled=filled, dropped=tuple(dropped))


def make_pair_example(a: TeamSeason, b: TeamSeason, label: int) -> PairExample:
    """Difference-feature example for a game between a and b."""
    if a.season != b.season:
        raise DataError(f"season mismatch: {a.team_name} {a.season} vs {b.team_name} {b.season}")
    if a.feature_names != b.feature_names:
        raise DataError(f"feature set mismatch between {a.team_name} and {b.team_name}")
    if not a.is_imputed() or not b.is_imputed():
        raise DataError(f"{a.team_name} vs {b.team_name}: missing values, impute first")
    x = np.array(
        [a.features[n] - b.features[n] for n in a.feature_names], dtype=np.float64
    )
    return PairExample(x=x, y=label)


def build_dataset(
    games: Sequence[GameRecord],
    teams: Sequence[TeamSeason],
    augment: bool = True,
) -> tuple[list[PairExample], BuildReport]:
    """One example per resolvable game, plus the mirrored example when
    augment is set (features negated, label flipped)."""
    by_key = {(t.season, t.team_name): t for t in teams}
    examples: list[PairExample] = []
    skipped: list[tuple[GameRecord, str]] = []
    for gi, game in enumerate(games):
        a = by_key.get((game.season, game.team_a))
        b = by_key.get((game.season, game.team_b))
        if a is None or b is None:
            absent = game.team_a if a is None else game.team_b
            skipped.append((game, f"no team-season record for {absent}"))
            continue
        ex = make_pair_example(a, b, game.label)
        ex = replace(ex, pair_id=gi)
        examples.append(ex)
        if augment:
            examples.append(PairExample(x=-ex.x, y=1 - ex.y, pair_id=gi))
    return examples, BuildReport(built=len(examples), skipped=tuple(skipped))


def train_test_split(
    examples: Sequence[PairExample],
    test_fraction: float,
    rng_seed: int,
) -> tuple[list[PairExample], list[PairExample]]:
    """Disjoint deterministic split; mirrored pairs stay on one side.

    The split is drawn at the pair level, so the test share matches
    round(test_fraction * n) exactly for unaugmented data and to the
    nearest whole pair for augmented data. Rounding is half-up.
    """
    if len(examples) < 2:
        raise ValueError("need at least 2 examples to split")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")

    groups: list[object] = []
    seen: set = set()
    for i, ex in enumerate(examples):
        key = ("pair", ex.pair_id) if ex.pair_id is not None else ("idx", i)
        if key not in seen:
            seen.add(key)
            groups.append(key)

    n_test_groups = math.floor(test_fraction * len(groups) + 0.5)
    order = list(groups)
    SplitMix64(rng_seed).shuffle(order)
    test_keys = set(order[:n_test_groups])

    train: list[PairExample] = []
    test: list[PairExample] = []
    for i, ex in enumerate(examples):
        key = ("pair", ex.pair_id) if ex.pair_id is not None else ("idx", i)
        (test if key in test_keys else train).append(ex)
    return train, test
