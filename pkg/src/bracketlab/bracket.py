"""64-team single-elimination brackets, seeded Monte Carlo simulation,
and aggregation of iteration results."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import _kernels, metrics
from .dataio import REGIONS, TeamSeason, _parse_int
from .errors import DataError
from .linmodel import FitModel
from .rng import SplitMix64

# NCAA first-round pairing order within a region; winners advance
# positionally, so 1v16 meets 8v9 in round 2, and so on.
FIRST_ROUND_SEED_PAIRS = ((1, 16), (8, 9), (5, 12), (4, 13), (6, 11), (3, 14), (7, 10), (2, 15))
_REGION_SLOT_SEEDS = tuple(seed for pair in FIRST_ROUND_SEED_PAIRS for seed in pair)

CHAMPIONSHIP_LABEL = "Championship"


@dataclass(frozen=True)
class Matchup:
    round_no: int
    team_a: TeamSeason
    team_b: TeamSeason
    winner: TeamSeason | None = None
    p_a: float | None = None


@dataclass(frozen=True)
class Bracket:
    """Tournament structure: entrants in first-round slot order."""

    season: int
    entrants: tuple[TeamSeason, ...]
    region_semis: tuple[tuple[str, str], tuple[str, str]] | None = None

    @property
    def n_rounds(self) -> int:
        return len(self.entrants).bit_length() - 1


@dataclass(frozen=True)
class CompletedBracket:
    bracket: Bracket
    rounds: tuple[tuple[Matchup, ...], ...]

    @property
    def champion(self) -> TeamSeason:
        return self.rounds[-1][-1].winner

    def all_games(self) -> list[Matchup]:
        return [g for rnd in self.rounds for g in rnd]


@dataclass(frozen=True)
class ScopeMetrics:
    """Across-iteration naive accuracy and Spearman rho for one scope."""

    label: str
    n_slots: int
    n_teams: int
    accuracy_mean: float
    accuracy_std: float
    rho_mean: float
    rho_std: float


@dataclass(frozen=True)
class SimulationReport:
    iterations: int
    advancement: dict[str, tuple[float, ...]]  # team -> reach freq per round
    champion_freq: dict[str, float]
    metric_summary: tuple[ScopeMetrics, ...] | None
    exemplar: CompletedBracket
    exemplar_seed: int


def bracket_from_slots(
    entrants: Sequence[TeamSeason],
    region_semis=None,
) -> Bracket:
    """Bracket from entrants already in first-round slot order.

    Accepts any power-of-two field from 2 to 64; the public 64-team
    builder and results parsing both funnel through here.
    """
    n = len(entrants)
    if n < 2 or n & (n - 1) or n > 64:
        raise DataError(f"bracket needs a power-of-two field of 2-64 teams, got {n}")
    seasons = {t.season for t in entrants}
    if len(seasons) != 1:
        raise DataError(f"entrants span multiple seasons: {sorted(seasons)}")
    names = [t.team_name for t in entrants]
    if len(set(names)) != n:
        raise DataError("duplicate team names among entrants")
    return Bracket(
        season=entrants[0].season,
        entrants=tuple(entrants),
        region_semis=region_semis,
    )


def build_bracket(
    entrants: Sequence[TeamSeason],
    region_semis: Sequence[Sequence[str]],
) -> Bracket:
    """Arrange a 64-team field into standard NCAA bracket order.

    First-round pairings follow 1v16, 8v9, 5v12, 4v13, 6v11, 3v14,
    7v10, 2v15 within each region; region champions meet per
    region_semis, and those winners meet in the championship.
    """
    if len(entrants) != 64:
        raise DataError(f"bracket requires exactly 64 entrants, got {len(entrants)}")
    by_region: dict[str, dict[int, TeamSeason]] = {}
    for t in entrants:
        if t.region is None or t.seed is None:
            raise DataError(f"{t.team_name}: bracket entrants need both region and seed")
        slot = by_region.setdefault(t.region, {})
        if t.seed in slot:
            raise DataError(f"duplicate (region, seed): ({t.region}, {t.seed})")
        slot[t.seed] = t
    if len(by_region) != 4 or any(len(s) != 16 for s in by_region.values()):
        raise DataError("field must cover 4 regions with 16 unique seeds each")

    semis = tuple(tuple(pair) for pair in region_semis)
    if (
        len(semis) != 2
        or any(len(pair) != 2 for pair in semis)
        or sorted(r for pair in semis for r in pair) != sorted(by_region)
    ):
        raise DataError(f"region_semis {semis!r} is not a partition of regions {sorted(by_region)}")

    ordered_regions = [*semis[0], *semis[1]]
    slots = [
        by_region[region][seed]
        for region in ordered_regions
        for seed in _REGION_SLOT_SEEDS
    ]
    return bracket_from_slots(slots, region_semis=semis)


def simulate_game(m: Matchup, model, rng) -> Matchup:
    """Resolve one matchup: winner = team_a iff u < p_a with u ~ U[0,1)."""
    p_a = model.win_probability(m.team_a, m.team_b)
    u = rng.uniform()
    winner = m.team_a if u < p_a else m.team_b
    return replace(m, winner=winner, p_a=p_a)


def simulate_tournament(bracket: Bracket, model, rng_seed: int) -> CompletedBracket:
    """Play every game round by round with a fresh seeded stream.

    One uniform is drawn per game in structural order, from a
    SplitMix64 stream seeded with rng_seed, so the outcome is fully
    determined by (bracket, model, rng_seed).
    """
    rng = SplitMix64(rng_seed)
    cur = list(bracket.entrants)
    rounds: list[tuple[Matchup, ...]] = []
    round_no = 1
    while len(cur) > 1:
        games = []
        nxt = []
        for j in range(len(cur) // 2):
            m = simulate_game(
                Matchup(round_no=round_no, team_a=cur[2 * j], team_b=cur[2 * j + 1]),
                model,
                rng,
            )
            games.append(m)
            nxt.append(m.winner)
        rounds.append(tuple(games))
        cur = nxt
        round_no += 1
    return CompletedBracket(bracket=bracket, rounds=tuple(rounds))


def _round_layout(n: int) -> list[tuple[int, int]]:
    """(global start index, game count) per round for an n-team field."""
    layout = []
    start, size = 0, n // 2
    while size >= 1:
        layout.append((start, size))
        start += size
        size //= 2
    return layout


def _winner_matrix(bracket: Bracket, model, iterations: int, base_seed: int) -> np.ndarray:
    """(iterations, n-1) matrix of winning slot indices per game."""
    if isinstance(model, FitModel):
        names = model.scaler.feature_names
        feats = np.empty((len(bracket.entrants), len(names)))
        for i, t in enumerate(bracket.entrants):
            missing = [n for n in names if t.features.get(n) is None]
            if missing:
                raise DataError(f"{t.team_name}: missing model features {', '.join(missing)}")
            feats[i] = [t.features[n] for n in names]
        return _kernels.run_iterations(
            feats,
            model.scaler.means,
            model.scaler.stds,
            model.coefficients,
            model.intercept,
            base_seed,
            iterations,
        )
    # generic model objects go through the object-level simulation
    slot_of = {t.team_name: i for i, t in enumerate(bracket.entrants)}
    n = len(bracket.entrants)
    W = np.empty((iterations, n - 1), dtype=np.uint8)
    for i in range(iterations):
        completed = simulate_tournament(bracket, model, base_seed + i)
        W[i] = [slot_of[g.winner.team_name] for g in completed.all_games()]
    return W


def _half_slot_ranges(n: int) -> tuple[range, range]:
    return range(0, n // 2), range(n // 2, n)


def scope_columns(bracket: Bracket) -> list[tuple[str, list[int], list[int], range]]:
    """Scopes to score: (label, accuracy cols, rank-win cols, team slots).

    The full bracket scores all games. Each half scores its regional
    games, its national semifinal, and the championship (32 slots for
    a 64-team field); ranks ignore the championship so the half's
    finalist tops out one beyond the semifinal.
    """
    n = len(bracket.entrants)
    layout = _round_layout(n)
    all_games = list(range(n - 1))
    scopes = [(f"{bracket.season} full bracket", all_games, all_games, range(n))]
    if bracket.region_semis is None or n < 4:
        return scopes
    n_rounds = len(layout)
    for h, (slots, pair) in enumerate(zip(_half_slot_ranges(n), bracket.region_semis)):
        cols = []
        for start, count in layout[: n_rounds - 2]:
            cols.extend(range(start + h * count // 2, start + (h + 1) * count // 2))
        semi_start, semi_count = layout[n_rounds - 2]
        cols.append(semi_start + h)
        rank_cols = list(cols)
        cols.append(n - 2)  # championship counts toward both halves
        label = f"{bracket.season} {pair[0]} vs. {pair[1]}"
        scopes.append((label, cols, rank_cols, slots))
    return scopes


def _actual_winner_slots(bracket: Bracket, actual: CompletedBracket) -> np.ndarray:
    sim_names = tuple(t.team_name for t in bracket.entrants)
    act_names = tuple(t.team_name for t in actual.bracket.entrants)
    if sim_names != act_names:
        raise DataError("actual results bracket does not match the simulated structure")
    slot_of = {name: i for i, name in enumerate(sim_names)}
    return np.array([slot_of[g.winner.team_name] for g in actual.all_games()], dtype=np.int64)


def _verdict_masks(W: np.ndarray, actual_w: np.ndarray, n: int):
    """Per-iteration boolean masks: exact slot match and winner-only match."""
    layout = _round_layout(n)
    N, G = W.shape
    green = np.empty((N, G), dtype=bool)
    blue = np.empty((N, G), dtype=bool)
    Wi = W.astype(np.int64)
    for r, (start, count) in enumerate(layout):
        for j in range(count):
            g = start + j
            if r == 0:
                same_teams = np.ones(N, dtype=bool)
            else:
                prev_start = layout[r - 1][0]
                c1, c2 = prev_start + 2 * j, prev_start + 2 * j + 1
                s1, s2 = Wi[:, c1], Wi[:, c2]
                lo, hi = np.minimum(s1, s2), np.maximum(s1, s2)
                a_lo = min(actual_w[c1], actual_w[c2])
                a_hi = max(actual_w[c1], actual_w[c2])
                same_teams = (lo == a_lo) & (hi == a_hi)
            same_winner = Wi[:, g] == actual_w[g]
            green[:, g] = same_teams & same_winner
            blue[:, g] = ~same_teams & same_winner
    return green, blue


def _scope_values(W: np.ndarray, win_cols: list[int], slots: range) -> np.ndarray:
    """Final-round value (1 + wins in scope) per team slot, per iteration."""
    n_iter = W.shape[0]
    sub = W[:, win_cols].astype(np.int64)
    vals = np.empty((n_iter, len(slots)), dtype=np.float64)
    lo = slots.start
    for i in range(n_iter):
        wins = np.bincount(sub[i], minlength=slots.stop)
        vals[i] = 1.0 + wins[lo : slots.stop]
    return vals


def monte_carlo(
    bracket: Bracket,
    model,
    iterations: int,
    base_seed: int,
    actual: CompletedBracket | None = None,
) -> SimulationReport:
    """Aggregate `iterations` seeded tournament simulations.

    Iteration i runs with seed base_seed + i. When actual results are
    supplied, naive accuracy and Spearman rho are scored per iteration
    for the full bracket and each half, and the exemplar is the
    iteration with median full-bracket accuracy (lower middle, ties to
    the smaller seed); otherwise the exemplar is the first iteration.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    n = len(bracket.entrants)
    W = _winner_matrix(bracket, model, iterations, base_seed)
    layout = _round_layout(n)

    counts = np.zeros((n, len(layout)), dtype=np.int64)
    counts[:, 0] = iterations
    for r in range(1, len(layout)):
        prev_start, prev_count = layout[r - 1]
        played = W[:, prev_start : prev_start + prev_count].astype(np.int64)
        counts[:, r] = np.bincount(played.ravel(), minlength=n)
    advancement = {
        t.team_name: tuple((counts[i] / iterations).tolist())
        for i, t in enumerate(bracket.entrants)
    }
    champ_counts = np.bincount(W[:, -1].astype(np.int64), minlength=n)
    champion_freq = {
        t.team_name: float(champ_counts[i]) / iterations
        for i, t in enumerate(bracket.entrants)
    }

    metric_summary = None
    exemplar_seed = base_seed
    if actual is not None:
        actual_w = _actual_winner_slots(bracket, actual)
        green, blue = _verdict_masks(W, actual_w, n)
        summaries = []
        full_acc = None
        for label, acc_cols, rank_cols, slots in scope_columns(bracket):
            credits = green[:, acc_cols].sum(axis=1) + 0.5 * blue[:, acc_cols].sum(axis=1)
            acc = 100.0 * credits / len(acc_cols)
            sim_vals = _scope_values(W, rank_cols, slots)
            act_vals = _scope_values(actual_w[None, :], rank_cols, slots)[0]
            act_ranks = metrics.average_ranks(act_vals)
            rhos = np.array(
                [
                    metrics.rho_from_ranks(metrics.average_ranks(sim_vals[i]), act_ranks)
                    for i in range(iterations)
                ]
            )
            summaries.append(
                ScopeMetrics(
                    label=label,
                    n_slots=len(acc_cols),
                    n_teams=len(slots),
                    accuracy_mean=float(acc.mean()),
                    accuracy_std=float(acc.std()),
                    rho_mean=float(rhos.mean()),
                    rho_std=float(rhos.std()),
                )
            )
            if full_acc is None:
                full_acc = acc
        metric_summary = tuple(summaries)
        seeds = base_seed + np.arange(iterations)
        order = np.lexsort((seeds, full_acc))
        exemplar_seed = int(seeds[order[(iterations - 1) // 2]])

    exemplar = simulate_tournament(bracket, model, exemplar_seed)
    return SimulationReport(
        iterations=iterations,
        advancement=advancement,
        champion_freq=champion_freq,
        metric_summary=metric_summary,
        exemplar=exemplar,
        exemplar_seed=exemplar_seed,
    )


# ---------------------------------------------------------------------------
# file interfaces

def load_bracket_csv(path) -> list[TeamSeason]:
    """Read a 64-row YEAR,REGION,SEED,TEAM file into bare entrants.

    The returned records carry only identity, season, region and seed;
    callers attach features from the stats file before simulating.
    """
    try:
        fh = open(path, newline="", encoding="utf-8-sig")
    except FileNotFoundError:
        raise DataError(f"bracket file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        index = {name.strip(): i for i, name in enumerate(header)}
        missing = [c for c in ("YEAR", "REGION", "SEED", "TEAM") if c not in index]
        if missing:
            raise DataError(f"{path}: missing columns: {', '.join(missing)}")
        out = []
        for rownum, row in enumerate(reader, start=1):
            if not any(cell.strip() for cell in row):
                continue
            region = row[index["REGION"]].strip()
            if region not in REGIONS:
                raise DataError(f"row {rownum}: unknown region {region!r}")
            out.append(
                TeamSeason(
                    team_name=row[index["TEAM"]].strip(),
                    season=_parse_int(row[index["YEAR"]], rownum, "YEAR"),
                    features={},
                    seed=_parse_int(row[index["SEED"]], rownum, "SEED"),
                    region=region,
                )
            )
    return out


def attach_features(
    slots: Sequence[TeamSeason],
    teams: Sequence[TeamSeason],
) -> list[TeamSeason]:
    """Merge bracket identity rows with imputed stats records."""
    by_key = {(t.season, t.team_name): t for t in teams}
    out = []
    for slot in slots:
        stats = by_key.get((slot.season, slot.team_name))
        if stats is None:
            raise DataError(
                f"bracket entrant {slot.team_name} ({slot.season}) has no stats record"
            )
        out.append(replace(stats, seed=slot.seed, region=slot.region))
    return out


def _game_label(bracket: Bracket, round_no: int, matchup: Matchup) -> str:
    n_rounds = bracket.n_rounds
    if round_no == n_rounds and n_rounds >= 2:
        return CHAMPIONSHIP_LABEL
    if round_no == n_rounds - 1 and bracket.region_semis is not None:
        pair = bracket.region_semis[0] if matchup.team_a.region in bracket.region_semis[0] else bracket.region_semis[1]
        return f"{pair[0]}-{pair[1]}"
    return matchup.team_a.region or "-"


def results_csv_lines(completed: CompletedBracket) -> list[str]:
    """ROUND,REGION_OR_HALF,SLOT,WINNER rows in structural order."""
    lines = ["ROUND,REGION_OR_HALF,SLOT,WINNER"]
    for rnd in completed.rounds:
        slot_in_label: dict[str, int] = {}
        for m in rnd:
            label = _game_label(completed.bracket, m.round_no, m)
            slot_in_label[label] = slot_in_label.get(label, 0) + 1
            lines.append(f"{m.round_no},{label},{slot_in_label[label]},{m.winner.team_name}")
    return lines


def parse_results_csv(bracket: Bracket, path) -> CompletedBracket:
    """Reconstruct a completed bracket from a winner list.

    Rows must appear in structural order; each winner must be one of
    the two teams that reach that slot given the earlier rows.
    """
    try:
        fh = open(path, newline="", encoding="utf-8-sig")
    except FileNotFoundError:
        raise DataError(f"results file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:4]] != ["ROUND", "REGION_OR_HALF", "SLOT", "WINNER"]:
            raise DataError(f"{path}: expected header ROUND,REGION_OR_HALF,SLOT,WINNER")
        rows = [(i, row) for i, row in enumerate(reader, start=2) if any(c.strip() for c in row)]

    cur = list(bracket.entrants)
    rounds: list[tuple[Matchup, ...]] = []
    round_no = 1
    pos = 0
    while len(cur) > 1:
        games = []
        nxt = []
        for j in range(len(cur) // 2):
            if pos >= len(rows):
                raise DataError(f"{path}: incomplete results, missing round {round_no} games")
            line_no, row = rows[pos]
            pos += 1
            if len(row) < 4:
                raise DataError(f"{path} line {line_no}: expected 4 columns")
            rno = _parse_int(row[0], line_no, "ROUND")
            if rno != round_no:
                raise DataError(f"{path} line {line_no}: expected round {round_no}, got {rno}")
            a, b = cur[2 * j], cur[2 * j + 1]
            winner_name = row[3].strip()
            if winner_name == a.team_name:
                winner = a
            elif winner_name == b.team_name:
                winner = b
            else:
                raise DataError(
                    f"{path} line {line_no}: winner {winner_name!r} is not in the "
                    f"{a.team_name} vs {b.team_name} slot"
                )
            games.append(Matchup(round_no=round_no, team_a=a, team_b=b, winner=winner))
            nxt.append(winner)
        rounds.append(tuple(games))
        cur = nxt
        round_no += 1
    if pos != len(rows):
        raise DataError(f"{path} line {rows[pos][0]}: unexpected extra rows")
    return CompletedBracket(bracket=bracket, rounds=tuple(rounds))


def advancement_csv_lines(report: SimulationReport, bracket: Bracket) -> list[str]:
    n_rounds = bracket.n_rounds
    header = "TEAM,REGION,SEED," + ",".join(f"ROUND_{r}" for r in range(1, n_rounds + 1))
    lines = [header]
    for t in bracket.entrants:
        freqs = ",".join(f"{v:.6f}" for v in report.advancement[t.team_name])
        lines.append(f"{t.team_name},{t.region or '-'},{t.seed or '-'},{freqs}")
    return lines


def champions_csv_lines(report: SimulationReport) -> list[str]:
    lines = ["TEAM,CHAMPION_FREQ"]
    ranked = sorted(report.champion_freq.items(), key=lambda kv: (-kv[1], kv[0]))
    for name, freq in ranked:
        lines.append(f"{name},{freq:.6f}")
    return lines


def exemplar_text_lines(completed: CompletedBracket) -> list[str]:
    lines = [f"season {completed.bracket.season}: simulated bracket"]
    for rnd in completed.rounds:
        lines.append(f"Round {rnd[0].round_no}:")
        for j, m in enumerate(rnd, start=1):
            prob = f" (p_a={m.p_a:.6f})" if m.p_a is not None else ""
            lines.append(
                f"  G{j}: {m.team_a.team_name} vs {m.team_b.team_name}"
                f" -> {m.winner.team_name}{prob}"
            )
    lines.append(f"Champion: {completed.champion.team_name}")
    return lines


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def exemplar_dot_lines(
    completed: CompletedBracket,
    verdicts: Sequence["metrics.MatchupVerdict"] | None = None,
) -> list[str]:
    """Graphviz digraph of the bracket; edges carry the verdict colors
    (green = correct pair, blue = wrong teams but correct winner, red
    otherwise) when verdicts are supplied."""
    colors = {
        metrics.MatchupVerdict.CORRECT_PAIR: "green",
        metrics.MatchupVerdict.INCORRECT_WINNER: "red",
        metrics.MatchupVerdict.WRONG_TEAMS_CORRECT_WINNER: "blue",
        metrics.MatchupVerdict.WRONG_TEAMS_WRONG_WINNER: "red",
    }
    lines = ["digraph bracket {", "  rankdir=LR;", '  node [shape=box, fontsize=10];']
    flat_idx = 0
    for r, rnd in enumerate(completed.rounds, start=1):
        for j, m in enumerate(rnd):
            gid = f"r{r}g{j}"
            label = (
                f"{_dot_escape(m.team_a.team_name)} vs {_dot_escape(m.team_b.team_name)}"
                f"\\n-> {_dot_escape(m.winner.team_name)}"
            )
            lines.append(f'  {gid} [label="{label}"];')
            color = "black"
            if verdicts is not None:
                color = colors[verdicts[flat_idx]]
            target = f"r{r + 1}g{j // 2}" if r < len(completed.rounds) else "champion"
            lines.append(f"  {gid} -> {target} [color={color}];")
            flat_idx += 1
    lines.append(
        f'  champion [label="Champion: {_dot_escape(completed.champion.team_name)}", shape=ellipse];'
    )
    lines.append("}")
    return lines
