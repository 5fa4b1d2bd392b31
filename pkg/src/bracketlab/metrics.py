"""Score a simulated bracket against actual results.

Per-slot verdicts use the green/red/blue scheme: a slot is green when
both teams and the winner match, red when the pairing is right but the
winner is wrong, and blue when the pairing is wrong but the predicted
winner still won that slot. Naive accuracy gives full credit to green
and half credit to blue. Spearman rho correlates each team's final
round reached; tied rounds are converted to fractional average ranks
before applying rho = 1 - 6*sum(d^2) / (n*(n^2-1)).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .errors import DataError

if TYPE_CHECKING:
    from .bracket import CompletedBracket


class MatchupVerdict(Enum):
    CORRECT_PAIR = "green"
    INCORRECT_WINNER = "red"
    WRONG_TEAMS_CORRECT_WINNER = "blue"
    WRONG_TEAMS_WRONG_WINNER = "miss"


@dataclass(frozen=True)
class SlotVerdict:
    """One structural slot's classification, with export metadata."""

    round_no: int
    slot: int
    sim_a: str
    sim_b: str
    predicted_winner: str
    actual_winner: str
    verdict: MatchupVerdict


@dataclass(frozen=True)
class RankVector:
    """Per-team final round reached (champion one beyond the last round)."""

    values: dict[str, int]

    def __len__(self) -> int:
        return len(self.values)

    def average_ranks(self) -> dict[str, float]:
        names = sorted(self.values)
        vals = np.array([self.values[n] for n in names], dtype=np.float64)
        ranks = average_ranks(vals)
        return {name: float(r) for name, r in zip(names, ranks)}


def average_ranks(values: np.ndarray) -> np.ndarray:
    """Fractional average ranks (1-based); ties share the mean position."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def rho_from_ranks(ranks_a: np.ndarray, ranks_b: np.ndarray) -> float:
    """Spearman coefficient from two aligned rank arrays."""
    n = len(ranks_a)
    d = np.asarray(ranks_a, dtype=np.float64) - np.asarray(ranks_b, dtype=np.float64)
    return float(1.0 - 6.0 * (d @ d) / (n * (n * n - 1.0)))


def classify_matchups(sim: "CompletedBracket", actual: "CompletedBracket") -> list[SlotVerdict]:
    """Classify every structural slot of a simulated bracket.

    Round-1 slots can only be green or red since the entrants are
    fixed; later slots compare the realized pairings as sets.
    """
    sim_entrants = tuple(t.team_name for t in sim.bracket.entrants)
    act_entrants = tuple(t.team_name for t in actual.bracket.entrants)
    if sim_entrants != act_entrants or sim.bracket.region_semis != actual.bracket.region_semis:
        raise DataError("brackets are structurally different; cannot classify")

    out = []
    for sim_round, act_round in zip(sim.rounds, actual.rounds):
        for j, (sg, ag) in enumerate(zip(sim_round, act_round), start=1):
            sim_teams = {sg.team_a.team_name, sg.team_b.team_name}
            act_teams = {ag.team_a.team_name, ag.team_b.team_name}
            same_winner = sg.winner.team_name == ag.winner.team_name
            if sim_teams == act_teams:
                verdict = (
                    MatchupVerdict.CORRECT_PAIR if same_winner else MatchupVerdict.INCORRECT_WINNER
                )
            elif same_winner:
                verdict = MatchupVerdict.WRONG_TEAMS_CORRECT_WINNER
            else:
                verdict = MatchupVerdict.WRONG_TEAMS_WRONG_WINNER
            out.append(
                SlotVerdict(
                    round_no=sg.round_no,
                    slot=j,
                    sim_a=sg.team_a.team_name,
                    sim_b=sg.team_b.team_name,
                    predicted_winner=sg.winner.team_name,
                    actual_winner=ag.winner.team_name,
                    verdict=verdict,
                )
            )
    return out


def naive_accuracy(verdicts: Sequence[MatchupVerdict]) -> float:
    """Percent correct with half credit for wrong-teams/correct-winner."""
    if not verdicts:
        raise ValueError("empty verdict list")
    full = sum(1 for v in verdicts if v is MatchupVerdict.CORRECT_PAIR)
    half = sum(1 for v in verdicts if v is MatchupVerdict.WRONG_TEAMS_CORRECT_WINNER)
    return 100.0 * (full + 0.5 * half) / len(verdicts)


def final_round_ranks(completed: "CompletedBracket", scope: str = "full"):
    """Final round reached per team.

    scope="full" returns one RankVector over the whole field; the
    champion is credited one beyond the final round. scope="half"
    returns {half label: RankVector} over each half's 32 teams, counting
    rounds through the national semifinal (so the half's finalist sits
    one above the semifinal loser); it requires a bracket built with
    region_semis.
    """
    bracket = completed.bracket
    games = completed.all_games()
    if any(g.winner is None for g in games):
        raise DataError("bracket is not fully played")

    if scope == "full":
        wins: dict[str, int] = {t.team_name: 0 for t in bracket.entrants}
        for g in games:
            wins[g.winner.team_name] += 1
        return RankVector(values={name: 1 + w for name, w in wins.items()})

    if scope != "half":
        raise ValueError(f"scope must be 'full' or 'half', got {scope!r}")
    if bracket.region_semis is None:
        raise DataError("half scope requires a bracket with region_semis")

    n = len(bracket.entrants)
    halves = {}
    for h, pair in enumerate(bracket.region_semis):
        members = {t.team_name for t in bracket.entrants[h * n // 2 : (h + 1) * n // 2]}
        wins = {name: 0 for name in members}
        for g in games[: n - 2]:  # championship excluded from rank scope
            name = g.winner.team_name
            if name in members:
                wins[name] += 1
        halves[f"{pair[0]}-{pair[1]}"] = RankVector(values={m: 1 + w for m, w in wins.items()})
    return halves


def spearman_rho(sim_ranks: RankVector, actual_ranks: RankVector) -> float:
    """Spearman rho between two final-round vectors over the same teams."""
    if set(sim_ranks.values) != set(actual_ranks.values):
        raise DataError("rank vectors cover different team sets")
    n = len(sim_ranks)
    if n < 2:
        raise ValueError("need at least 2 teams")
    names = sorted(sim_ranks.values)
    a = average_ranks(np.array([sim_ranks.values[name] for name in names], dtype=np.float64))
    b = average_ranks(np.array([actual_ranks.values[name] for name in names], dtype=np.float64))
    return rho_from_ranks(a, b)


def verdict_csv_lines(slots: Iterable[SlotVerdict]) -> list[str]:
    lines = ["ROUND,SLOT,TEAM_A,TEAM_B,PREDICTED_WINNER,ACTUAL_WINNER,VERDICT"]
    for s in slots:
        lines.append(
            f"{s.round_no},{s.slot},{s.sim_a},{s.sim_b},"
            f"{s.predicted_winner},{s.actual_winner},{s.verdict.name}"
        )
    return lines


def metric_kv_lines(label: str, n: int, accuracy_pct: float, rho: float) -> list[str]:
    return [
        f"scope={label}",
        f"n={n}",
        f"naive_accuracy_pct={accuracy_pct!r}",
        f"spearman_rho={rho!r}",
    ]
