"""Command-line entry point: train, select, simulate, evaluate, importance.

Every run is driven by a declarative config (JSON) plus flag
overrides, writes a manifest of its inputs, and derives all randomness
from config-declared seeds. Exit codes: 0 success, 1 usage/config
error, 2 data error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import bracket as br
from . import dataio, linmodel, metrics
from .errors import DataError, UsageError
from .reporting import kv_lines, sha256_file, write_lines

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NO_CONVERGENCE = 3

# dataclass field name -> config file key
_KEY_OF = {"lam": "lambda"}


@dataclass
class RunConfig:
    stats_csv: str | None = None
    games_csv: str | None = None
    bracket_csv: str | None = None
    actual_csv: str | None = None
    model_file: str | None = None
    out_dir: str = "run_output"
    lam: float = 0.01
    test_fraction: float = 0.2
    split_seed: int = 7
    mc_iterations: int = 100
    mc_base_seed: int = 1
    selection_threshold: float = 0.45
    zero_intercept: bool = False
    augment: bool = True
    max_iter: int = 10000
    tol: float = 1e-6
    region_semis: list | None = None
    feature_columns: list = field(default_factory=lambda: list(dataio.DEFAULT_FEATURE_COLUMNS))
    season_range: list | None = field(default_factory=lambda: list(dataio.DEFAULT_SEASON_RANGE))

    def to_dict(self) -> dict:
        return {_KEY_OF.get(f.name, f.name): getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        name_of = {_KEY_OF.get(f.name, f.name): f.name for f in fields(cls)}
        unknown = [k for k in doc if k not in name_of]
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**{name_of[k]: v for k, v in doc.items()})

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            raise UsageError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise UsageError(f"{path}: config must be a JSON object")
        return cls.from_dict(doc)

    def validate(self) -> None:
        if not 0.0 < self.test_fraction < 1.0:
            raise UsageError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.lam < 0:
            raise UsageError(f"lambda must be nonnegative, got {self.lam}")
        if self.mc_iterations < 1:
            raise UsageError("mc_iterations must be >= 1")
        if self.selection_threshold < 0:
            raise UsageError("selection_threshold must be nonnegative")
        if self.max_iter < 1:
            raise UsageError("max_iter must be >= 1")
        missing = [c for c in dataio.MANDATORY_FEATURE_COLUMNS if c not in self.feature_columns]
        if missing:
            raise UsageError(f"feature_columns must include {', '.join(missing)}")
        if self.season_range is not None and (
            len(self.season_range) != 2 or self.season_range[0] > self.season_range[1]
        ):
            raise UsageError(f"season_range must be [first, last], got {self.season_range}")

    def require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise UsageError(f"{_KEY_OF.get(name, name)} is required for this command")

    def semis(self):
        if self.region_semis is None:
            raise UsageError("region_semis is required for this command")
        semis = tuple(tuple(pair) for pair in self.region_semis)
        flat = [r for pair in semis for r in pair]
        if len(semis) != 2 or any(len(p) != 2 for p in semis) or len(set(flat)) != 4:
            raise UsageError(f"region_semis must be two disjoint region pairs, got {self.region_semis}")
        return semis


def _season_range(cfg: RunConfig):
    return tuple(cfg.season_range) if cfg.season_range is not None else None


def _write_manifest(cfg: RunConfig, command: str, out_dir: Path) -> None:
    pairs = [("command", command)]
    pairs += sorted(cfg.to_dict().items())
    for key in ("stats_csv", "games_csv", "bracket_csv", "actual_csv", "model_file"):
        path = getattr(cfg, key)
        if path and Path(path).is_file():
            pairs.append((f"sha256.{key}", sha256_file(path)))
    write_lines(out_dir / "run_manifest.txt", kv_lines(pairs))


def _diag(lines) -> None:
    for line in lines:
        print(line, file=sys.stderr)


def _load_training_data(cfg: RunConfig, feature_columns):
    schema = dataio.ColumnSchema(features=tuple(feature_columns))
    teams = dataio.load_team_seasons(cfg.stats_csv, schema, _season_range(cfg))
    teams, imp_report = dataio.impute_means(teams)
    _diag(imp_report.lines())
    games = dataio.load_game_records(cfg.games_csv)
    examples, build_report = dataio.build_dataset(games, teams, augment=cfg.augment)
    _diag(build_report.lines())
    train, test = dataio.train_test_split(examples, cfg.test_fraction, cfg.split_seed)
    return teams, games, examples, train, test


def cmd_train(cfg: RunConfig) -> int:
    cfg.validate()
    cfg.require("stats_csv", "games_csv")
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model_path = Path(cfg.model_file) if cfg.model_file else out_dir / "model.json"

    teams, games, examples, train, test = _load_training_data(cfg, cfg.feature_columns)
    model = linmodel.fit(
        train,
        cfg.lam,
        feature_names=cfg.feature_columns,
        zero_intercept=cfg.zero_intercept,
        max_iter=cfg.max_iter,
        tol=cfg.tol,
    )
    train_acc = linmodel.accuracy(model, train)
    test_acc = linmodel.accuracy(model, test)

    linmodel.save_model(model, model_path)
    write_lines(
        out_dir / "accuracy_report.txt",
        kv_lines([("train_accuracy_pct", train_acc), ("test_accuracy_pct", test_acc)]),
    )
    write_lines(
        out_dir / "dataset_manifest.txt",
        kv_lines(
            [
                ("stats_rows", len(teams)),
                ("game_rows", len(games)),
                ("examples", len(examples)),
                ("train_examples", len(train)),
                ("test_examples", len(test)),
                ("augment", cfg.augment),
                ("test_fraction", cfg.test_fraction),
                ("split_seed", cfg.split_seed),
            ]
        ),
    )
    _write_manifest(cfg, "train", out_dir)
    print(f"model written to {model_path}")
    print(f"train_accuracy_pct={train_acc!r}")
    print(f"test_accuracy_pct={test_acc!r}")
    if not model.fit_meta.converged:
        print(
            f"warning: optimizer did not reach tol within {model.max_iter} iterations",
            file=sys.stderr,
        )
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_select(cfg: RunConfig) -> int:
    cfg.validate()
    cfg.require("stats_csv", "games_csv", "model_file")
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    model = linmodel.load_model(cfg.model_file)
    names = list(model.scaler.feature_names)
    _, _, _, train, test = _load_training_data(cfg, names)

    table = linmodel.feature_importance(model)
    width = max(len(name) for name, _ in table)
    write_lines(
        out_dir / "importance.txt",
        [f"{name:<{width}}  {coef!r}" for name, coef in table],
    )

    keep = linmodel.select_features(model, cfg.selection_threshold)
    if not keep:
        raise UsageError(
            f"no features selected at threshold {cfg.selection_threshold}; lower it"
        )
    reduced_train = linmodel.restrict_examples(train, names, keep)
    reduced_test = linmodel.restrict_examples(test, names, keep)
    reduced = linmodel.fit(
        reduced_train,
        model.lam,
        feature_names=keep,
        zero_intercept=model.zero_intercept,
        max_iter=model.max_iter,
        tol=model.tol,
    )
    reduced_path = out_dir / "model_selected.json"
    linmodel.save_model(reduced, reduced_path)

    comparison = [
        ("threshold", cfg.selection_threshold),
        ("selected_features", ",".join(keep)),
        ("original_train_accuracy_pct", linmodel.accuracy(model, train)),
        ("original_test_accuracy_pct", linmodel.accuracy(model, test)),
        ("selected_train_accuracy_pct", linmodel.accuracy(reduced, reduced_train)),
        ("selected_test_accuracy_pct", linmodel.accuracy(reduced, reduced_test)),
    ]
    write_lines(out_dir / "comparison_report.txt", kv_lines(comparison))
    _write_manifest(cfg, "select", out_dir)
    print(f"selected {len(keep)} features: {', '.join(keep)}")
    print(f"reduced model written to {reduced_path}")
    if not reduced.fit_meta.converged:
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    cfg.validate()
    cfg.require("stats_csv", "bracket_csv", "model_file")
    semis = cfg.semis()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    model = linmodel.load_model(cfg.model_file)
    schema = dataio.ColumnSchema(features=model.scaler.feature_names)
    teams = dataio.load_team_seasons(cfg.stats_csv, schema, _season_range(cfg))
    teams, imp_report = dataio.impute_means(teams)
    _diag(imp_report.lines())

    slots = br.load_bracket_csv(cfg.bracket_csv)
    entrants = br.attach_features(slots, teams)
    tournament = br.build_bracket(entrants, semis)

    actual = None
    if cfg.actual_csv:
        actual = br.parse_results_csv(tournament, cfg.actual_csv)

    report = br.monte_carlo(
        tournament, model, cfg.mc_iterations, cfg.mc_base_seed, actual=actual
    )

    write_lines(out_dir / "advancement.csv", br.advancement_csv_lines(report, tournament))
    write_lines(out_dir / "champions.csv", br.champions_csv_lines(report))
    write_lines(out_dir / "exemplar.txt", br.exemplar_text_lines(report.exemplar))
    write_lines(out_dir / "exemplar_results.csv", br.results_csv_lines(report.exemplar))

    verdicts = None
    if actual is not None:
        verdicts = [s.verdict for s in metrics.classify_matchups(report.exemplar, actual)]
    write_lines(out_dir / "exemplar.dot", br.exemplar_dot_lines(report.exemplar, verdicts))

    if report.metric_summary is not None:
        lines = [f"iterations={report.iterations}", f"exemplar_seed={report.exemplar_seed}"]
        for sm in report.metric_summary:
            lines += kv_lines(
                [
                    ("scope", sm.label),
                    ("n_slots", sm.n_slots),
                    ("n_teams", sm.n_teams),
                    ("naive_accuracy_mean_pct", sm.accuracy_mean),
                    ("naive_accuracy_std_pct", sm.accuracy_std),
                    ("spearman_rho_mean", sm.rho_mean),
                    ("spearman_rho_std", sm.rho_std),
                ]
            )
            lines.append("")
        write_lines(out_dir / "metrics_summary.txt", lines[:-1])

    _write_manifest(cfg, "simulate", out_dir)
    top = max(report.champion_freq.items(), key=lambda kv: (kv[1], kv[0]))
    print(f"simulated {report.iterations} iterations; modal champion: {top[0]} ({top[1]:.4f})")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, sim_csv: str) -> int:
    cfg.validate()
    cfg.require("bracket_csv", "actual_csv")
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    slots = br.load_bracket_csv(cfg.bracket_csv)
    if len(slots) == 64:
        tournament = br.build_bracket(slots, cfg.semis())
    else:
        # reduced hand-built fixtures score in file order
        tournament = br.bracket_from_slots(slots)
    sim = br.parse_results_csv(tournament, sim_csv)
    actual = br.parse_results_csv(tournament, cfg.actual_csv)

    slots_verdicts = metrics.classify_matchups(sim, actual)
    write_lines(out_dir / "verdicts.csv", metrics.verdict_csv_lines(slots_verdicts))

    verdicts = [s.verdict for s in slots_verdicts]
    lines: list[str] = []
    sim_full = metrics.final_round_ranks(sim, "full")
    act_full = metrics.final_round_ranks(actual, "full")
    lines += metrics.metric_kv_lines(
        f"{tournament.season} full bracket",
        len(sim_full),
        metrics.naive_accuracy(verdicts),
        metrics.spearman_rho(sim_full, act_full),
    )
    if tournament.region_semis is not None:
        sim_halves = metrics.final_round_ranks(sim, "half")
        act_halves = metrics.final_round_ranks(actual, "half")
        half_scopes = br.scope_columns(tournament)[1:]
        for (label, acc_cols, _, _), pair in zip(half_scopes, tournament.region_semis):
            key = f"{pair[0]}-{pair[1]}"
            lines.append("")
            lines += metrics.metric_kv_lines(
                label,
                len(sim_halves[key]),
                metrics.naive_accuracy([verdicts[i] for i in acc_cols]),
                metrics.spearman_rho(sim_halves[key], act_halves[key]),
            )
    write_lines(out_dir / "metrics.txt", lines)
    _write_manifest(cfg, "evaluate", out_dir)
    for line in lines:
        print(line)
    return EXIT_OK


def cmd_importance(cfg: RunConfig) -> int:
    cfg.require("model_file")
    model = linmodel.load_model(cfg.model_file)
    table = linmodel.feature_importance(model)
    width = max(len(name) for name, _ in table)
    lines = [f"{name:<{width}}  {coef!r}" for name, coef in table]
    if cfg.out_dir:
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_lines(out_dir / "importance.txt", lines)
        _write_manifest(cfg, "importance", out_dir)
    for line in lines:
        print(line)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_region_semis(text: str) -> list:
    halves = text.split(";")
    semis = [[r.strip() for r in half.split(",")] for half in halves]
    if len(semis) != 2 or any(len(p) != 2 for p in semis):
        raise UsageError(f"--region-semis must look like 'South,Midwest;East,West', got {text!r}")
    return semis


def _parse_season_range(text: str):
    if text.lower() in ("none", "all"):
        return None
    try:
        lo, hi = text.split("-")
        return [int(lo), int(hi)]
    except ValueError:
        raise UsageError(f"--season-range must look like 2013-2023 or 'all', got {text!r}") from None


def _add_config_flags(p: _Parser, *, paths=(), numbers=(), booleans=()):
    p.add_argument("--config", help="JSON run configuration file")
    p.add_argument("--out-dir", dest="out_dir")
    flag_of = {
        "stats_csv": "--stats",
        "games_csv": "--games",
        "bracket_csv": "--bracket",
        "actual_csv": "--actual",
        "model_file": "--model",
    }
    for name in paths:
        p.add_argument(flag_of[name], dest=name)
    for name, kind in numbers:
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=kind)
    for name in booleans:
        p.add_argument(
            "--" + name.replace("_", "-"),
            dest=name,
            action=argparse.BooleanOptionalAction,
            default=None,
        )


def build_parser() -> _Parser:
    parser = _Parser(prog="bracketlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit the pairwise logistic model")
    _add_config_flags(
        p,
        paths=("stats_csv", "games_csv", "model_file"),
        numbers=(
            ("test_fraction", float),
            ("split_seed", int),
            ("max_iter", int),
            ("tol", float),
        ),
        booleans=("zero_intercept", "augment"),
    )
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--features", help="comma-separated feature column names")
    p.add_argument("--season-range", dest="season_range_text")

    p = sub.add_parser("select", help="importance table, threshold selection, refit")
    _add_config_flags(
        p,
        paths=("stats_csv", "games_csv", "model_file"),
        numbers=(
            ("selection_threshold", float),
            ("test_fraction", float),
            ("split_seed", int),
        ),
        booleans=("augment",),
    )
    p.add_argument("--season-range", dest="season_range_text")

    p = sub.add_parser("simulate", help="Monte Carlo tournament simulation")
    _add_config_flags(
        p,
        paths=("stats_csv", "bracket_csv", "actual_csv", "model_file"),
        numbers=(("mc_iterations", int), ("mc_base_seed", int)),
    )
    p.add_argument("--region-semis", dest="region_semis_text")
    p.add_argument("--season-range", dest="season_range_text")

    p = sub.add_parser("evaluate", help="score a simulated bracket against actual results")
    _add_config_flags(p, paths=("bracket_csv", "actual_csv"))
    p.add_argument("--sim", required=True, help="simulated results CSV")
    p.add_argument("--region-semis", dest="region_semis_text")

    p = sub.add_parser("importance", help="print a trained model's importance table")
    _add_config_flags(p, paths=("model_file",))

    return parser


def _merge_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {}
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    if getattr(args, "features", None):
        overrides["feature_columns"] = [c.strip() for c in args.features.split(",")]
    if getattr(args, "season_range_text", None):
        overrides["season_range"] = _parse_season_range(args.season_range_text)
    if getattr(args, "region_semis_text", None):
        overrides["region_semis"] = _parse_region_semis(args.region_semis_text)
    return replace(cfg, **overrides)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _merge_config(args)
        if args.command == "importance":
            return cmd_importance(cfg)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "select":
            return cmd_select(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, args.sim)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
