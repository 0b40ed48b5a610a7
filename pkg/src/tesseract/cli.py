"""Command-line entry point: ``tesseract <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 bad input data, 3 internal error.
Options may also come from ``TESSERACT_<OPTION>`` environment variables
(for example ``TESSERACT_SEED=7``); command-line flags take precedence.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from ._util import DataError, Language
from .classifiers import parse_model_kind, train
from .corpus import (
    CategoryTask, category_tasks, load_ground_truth, load_taxonomy, read_sentences, sentences_from_comments,
    write_sentences,
)
from .evaluation import (
    EvalReport, evaluate_cv, rank_features, render_table, report_csv_text, REPORT_HEADER,
)
from .extraction import read_jsonl, scan_corpus, write_jsonl
from .matrix import FEATURE_SETS, FeatureMatrix, build_matrix, parse_feature_set, task_labels
from .sampling import build_plan
from .stats import friedman_nemenyi

logger = logging.getLogger("tesseract")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
ENV_PREFIX = "TESSERACT_"
MODEL_ORDER = ("tree", "naive_bayes", "forest")


class UsageError(Exception):
    pass


class InvariantError(RuntimeError):
    """An internal consistency check failed."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ helpers

def _default_jobs() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))


def _json_safe(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, Language):
        return value.value
    return value


def _out_path(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_run_json(args, out_dir) -> Path:
    """Echo the resolved configuration next to the outputs."""
    config = {k: _json_safe(v) for k, v in sorted(vars(args).items()) if k not in ("func", "log_level", "jobs")}
    out = Path(out_dir) / "run.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"tool": "tesseract", "version": __version__, "config": config},
                              indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out


def _parse_models(value: str) -> list[str]:
    if value.strip().lower() == "all":
        return list(MODEL_ORDER)
    kinds = [parse_model_kind(v) for v in value.split(",")]
    return [k for k in MODEL_ORDER if k in kinds]


def _parse_feature_sets(value: str) -> list[str]:
    if value.strip().lower() == "all":
        return list(FEATURE_SETS)
    sets = {parse_feature_set(v) for v in value.split(",")}
    return [s for s in FEATURE_SETS if s in sets]


def _parse_languages(value: str) -> list[Language]:
    return [Language.parse(v) for v in value.split(",") if v.strip()]


def _load_sentences(args):
    taxonomy = load_taxonomy(args.taxonomy) if getattr(args, "taxonomy", None) else None
    if getattr(args, "truth", None):
        out = []
        for path in args.truth:
            out.extend(load_ground_truth(path, taxonomy))
        return out
    if getattr(args, "sentences", None):
        return read_sentences(args.sentences)
    raise UsageError("give --truth CSV or --sentences JSONL")


def _resolve_task(sentences, task_name: str, min_count: int = 1, taxonomy_path=None):
    lang, sep, cat = task_name.partition(":")
    if not sep:
        raise UsageError(f"--task must look like language:Category, got {task_name!r}")
    lang = Language.parse(lang)
    chosen = [s for s in sentences if s.language == lang]
    taxonomy = load_taxonomy(taxonomy_path)
    try:
        cat = taxonomy.resolve(lang, cat)
    except DataError:
        pass
    for t in category_tasks(chosen, min_count=min_count) if chosen else []:
        if t.category == cat:
            return t, chosen
    raise DataError(f"task {lang.value}:{cat} has no positive sentences")


# ----------------------------------------------------------------- commands

def cmd_extract(args) -> int:
    lang = Language.parse(args.lang)
    comments, stats = scan_corpus(args.root, lang, args.project or Path(args.root).name,
                                  include_nested=args.include_nested, jobs=args.jobs)
    write_jsonl(comments, _out_path(args.out))
    logger.info("%s: %d classes, %d commented", stats.project, stats.n_classes, stats.n_commented)
    Path(args.out).with_suffix(".stats.json").write_text(json.dumps(stats.to_dict(), indent=2) + "\n")
    write_run_json(args, Path(args.out).parent)
    return EXIT_OK


def cmd_sample(args) -> int:
    comments = []
    for path in args.comments:
        comments.extend(read_jsonl(path))
    if not comments:
        raise DataError("no comments to sample")
    plan, sample = build_plan(comments, args.confidence, args.margin, args.seed)
    write_jsonl(sample, _out_path(args.out))
    Path(args.plan or Path(args.out).with_suffix(".plan.json")).write_text(plan.to_json() + "\n")
    write_run_json(args, Path(args.out).parent)
    return EXIT_OK


def cmd_ingest(args) -> int:
    if args.comments:
        sentences = sentences_from_comments(c for p in args.comments for c in read_jsonl(p))
    else:
        sentences = _load_sentences(args)
    write_sentences(sentences, _out_path(args.out))
    tasks = category_tasks(sentences, min_count=1) if any(s.labels for s in sentences) else []
    with open(Path(args.out).with_suffix(".tasks.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["language", "category", "positives", "trainable"])
        for t in tasks:
            w.writerow([t.language.value, t.category, t.positive_count, int(t.positive_count >= args.min_positives)])
    write_run_json(args, Path(args.out).parent)
    return EXIT_OK


def cmd_featurize(args) -> int:
    sentences = _load_sentences(args)
    if args.task:
        task, sentences = _resolve_task(sentences, args.task, taxonomy_path=args.taxonomy)
    else:
        task = None
    matrix = build_matrix(sentences, task, args.features, args.catalog, args.stopwords)
    matrix.write(_out_path(args.out))
    write_run_json(args, Path(args.out).parent)
    return EXIT_OK


def cmd_train(args) -> int:
    if args.matrix:
        matrix = FeatureMatrix.read(args.matrix)
        if args.task:
            lang, _, cat = args.task.partition(":")
            if args.task not in matrix.label_names:
                raise DataError(f"{args.matrix}: no LABEL column {args.task!r}")
            matrix.task = CategoryTask(Language.parse(lang), cat, int(matrix.labels(args.task).sum()))
    else:
        if not args.task:
            raise UsageError("--task is required without --matrix")
        task, sentences = _resolve_task(_load_sentences(args), args.task, taxonomy_path=args.taxonomy)
        matrix = build_matrix(sentences, task, args.features, args.catalog, args.stopwords)
    model = train(matrix, args.model, seed=args.seed)
    model.save(_out_path(args.out))
    write_run_json(args, Path(args.out).parent)
    return EXIT_OK


def _evaluate_config(payload) -> EvalReport:
    texts, labels, kind, fs, k, seed, task, catalog, stopwords, language, jobs = payload
    return evaluate_cv(texts, labels, kind, fs, k, seed, task, catalog_path=catalog,
                       stopwords_path=stopwords, language=language, jobs=jobs)


def _evaluate_all(args, sentences, languages, models, feature_sets) -> list[EvalReport]:
    payloads = []
    for lang in languages:
        chosen = [s for s in sentences if s.language == lang]
        if not chosen:
            logger.warning("no %s sentences in the ground truth", lang.value)
            continue
        tasks = [t for t in category_tasks(chosen, min_count=args.min_positives)]
        if args.task:
            tasks = [t for t in tasks if t.name in args.task or t.category in args.task]
        texts = [s.normalized for s in chosen]
        for task in tasks:
            labels = task_labels(chosen, task)
            for kind in models:
                for fs in feature_sets:
                    payloads.append((texts, labels, kind, fs, args.k, args.seed, task.name,
                                     args.catalog, args.stopwords, lang.value, 1))
    if not payloads:
        raise DataError(f"no trainable tasks (need >= {args.min_positives} positives)")
    jobs = max(1, args.jobs)
    if jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(min(jobs, len(payloads))) as pool:
            reports = list(pool.map(_evaluate_config, payloads))
    else:
        reports = [_evaluate_config(p) for p in payloads]
    for r in reports:
        if sum(r.pooled) != sum(f.n_test for f in r.folds if not f.skipped):
            raise InvariantError(f"{r.task}: pooled confusion does not cover the test rows")
    return reports


def _write_reports(reports, out_dir: Path) -> None:
    (out_dir / "report.csv").write_text(report_csv_text(reports), encoding="utf-8")
    (out_dir / "table.txt").write_text(render_table(reports), encoding="utf-8")


def cmd_evaluate(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sentences = _load_sentences(args)
    languages = _parse_languages(args.lang) if args.lang else sorted({s.language for s in sentences}, key=list(Language).index)
    reports = _evaluate_all(args, sentences, languages, _parse_models(args.model), _parse_feature_sets(args.features))
    _write_reports(reports, out_dir)
    write_run_json(args, out_dir)
    return EXIT_OK


def _rank_rows(sentences, task, args) -> list[list]:
    matrix = build_matrix(sentences, task, args.rank_features, args.catalog, args.stopwords)
    ranked = rank_features(matrix, None, threshold=args.threshold)
    kinds = {c.name: c.kind for c in matrix.feature_columns}
    return [[task.language.value, task.category, i + 1, kinds[name], name, f"{ig:.6f}"]
            for i, (name, ig) in enumerate(ranked.entries)]


def _write_ranking(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["language", "category", "rank", "kind", "feature", "info_gain"])
        w.writerows(rows)


def cmd_rank(args) -> int:
    sentences = _load_sentences(args)
    task, chosen = _resolve_task(sentences, args.task, taxonomy_path=args.taxonomy)
    _write_ranking(_rank_rows(chosen, task, args), _out_path(args.out))
    write_run_json(args, Path(args.out).parent)
    return EXIT_OK


def _read_report(path) -> list[dict]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != REPORT_HEADER:
                raise DataError(f"{path}: not a tesseract report (header mismatch)")
            return [row for row in reader if row["fold"] == "pooled"]
    except OSError as exc:
        raise DataError(f"cannot read report {path}: {exc}") from exc


def friedman_tables(pooled_rows: list[dict], alpha: float, metric: str = "w_f_measure") -> dict:
    """Friedman/Nemenyi across models per feature set and across feature sets per model."""
    scores = {(r["language"], r["category"], r["model"], r["feature_set"]): float(r[metric]) for r in pooled_rows}
    tasks = sorted({k[:2] for k in scores})
    models = [m for m in MODEL_ORDER if any(k[2] == m for k in scores)]
    sets = [s for s in FEATURE_SETS if any(k[3] == s for k in scores)]
    out = {"metric": metric, "alpha": alpha, "models": {}, "feature_sets": {}}

    def run(group, key, treatments, cell):
        blocks = [t for t in tasks if all(cell(t, tr) in scores for tr in treatments)]
        if len(treatments) < 2 or len(blocks) < 2:
            group[key] = {"skipped": f"needs >= 2 treatments and >= 2 tasks "
                                     f"(have {len(treatments)} and {len(blocks)})"}
            return
        table = np.array([[scores[cell(t, tr)] for tr in treatments] for t in blocks])
        res = friedman_nemenyi(table, alpha=alpha, treatments=treatments)
        group[key] = {**res.to_dict(), "blocks": [f"{l}:{c}" for l, c in blocks]}

    for fs in sets:
        run(out["models"], fs, models, lambda t, m, fs=fs: (*t, m, fs))
    for m in models:
        run(out["feature_sets"], m, sets, lambda t, s, m=m: (*t, m, s))
    return out


def cmd_stats(args) -> int:
    if args.test != "friedman":
        raise UsageError(f"unsupported test {args.test!r}")
    result = friedman_tables(_read_report(args.report), args.alpha)
    _out_path(args.out).write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    write_run_json(args, Path(args.out).parent)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sentences = _load_sentences(args)
    languages = _parse_languages(args.lang)
    write_sentences(sentences, out_dir / "sentences.jsonl")
    models, feature_sets = _parse_models(args.model), _parse_feature_sets(args.features)
    reports = _evaluate_all(args, sentences, languages, models, feature_sets)
    _write_reports(reports, out_dir)
    rank_rows = []
    for lang in languages:
        chosen = [s for s in sentences if s.language == lang]
        for task in category_tasks(chosen, min_count=args.min_positives) if chosen else []:
            if any(r.task == task.name for r in reports):
                rank_rows.extend(_rank_rows(chosen, task, args))
    _write_ranking(rank_rows, out_dir / "ranking.csv")
    pooled = [dict(zip(REPORT_HEADER, row)) for r in reports for row in r.rows() if row[4] == "pooled"]
    stats = friedman_tables([{k: str(v) for k, v in row.items()} for row in pooled], args.alpha)
    (out_dir / "stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    write_run_json(args, out_dir)
    return EXIT_OK


# ------------------------------------------------------------------- parser

def _add_common(p, *, seed=False, jobs=False):
    p.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    if seed:
        p.add_argument("--seed", type=int, default=0, help="root seed for every random choice")
    if jobs:
        p.add_argument("--jobs", type=int, default=_default_jobs(), help="worker processes (output does not depend on it)")


def _add_inputs(p, *, truth_required=False):
    p.add_argument("--truth", action="append", type=Path, help="ground-truth CSV (repeatable)",
                   required=truth_required)
    if not truth_required:
        p.add_argument("--sentences", type=Path, help="sentence JSONL from 'ingest'")
    p.add_argument("--taxonomy", type=Path, help="taxonomy TOML (bundled model by default)")


def _add_features(p, default="both"):
    p.add_argument("--features", default=default, help="text, nlp, both (or a comma list / all)")
    p.add_argument("--catalog", type=Path, help="NLP pattern catalog TOML")
    p.add_argument("--stopwords", type=Path, help="stop-word list, one word per line")


def _add_eval(p):
    p.add_argument("--model", default="all", help="nb, j48, rf (comma list or all)")
    p.add_argument("-k", "--folds", dest="k", type=int, default=10)
    p.add_argument("--min-positives", type=int, default=40)
    p.add_argument("--task", action="append", help="restrict to these tasks (language:Category)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tesseract", description="Classify class-comment sentences by information type.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="extract class comments from a source tree")
    p.add_argument("--lang", required=True)
    p.add_argument("--root", "--in", dest="root", required=True, type=Path)
    p.add_argument("--project")
    p.add_argument("--include-nested", action="store_true")
    p.add_argument("--out", required=True, type=Path)
    _add_common(p, jobs=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("sample", help="draw the stratified comment sample")
    p.add_argument("--comments", "--in", dest="comments", action="append", required=True, type=Path)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--margin", type=float, default=0.05)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--plan", type=Path)
    _add_common(p, seed=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("ingest", help="split comments or ground truth into sentences")
    _add_inputs(p)
    p.add_argument("--comments", action="append", type=Path, help="comment JSONL (unlabeled sentences)")
    p.add_argument("--min-positives", type=int, default=40)
    p.add_argument("--out", required=True, type=Path)
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("featurize", help="write the sentence x feature matrix")
    _add_inputs(p)
    _add_features(p)
    p.add_argument("--task", help="language:Category label column")
    p.add_argument("--out", required=True, type=Path)
    _add_common(p)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="train one model on one task")
    _add_inputs(p)
    _add_features(p)
    p.add_argument("--matrix", type=Path, help="matrix file from 'featurize'")
    p.add_argument("--model", default="rf")
    p.add_argument("--task")
    p.add_argument("--out", required=True, type=Path)
    _add_common(p, seed=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="cross-validate models on every trainable task")
    _add_inputs(p)
    _add_features(p, default="all")
    _add_eval(p)
    p.add_argument("--lang")
    p.add_argument("--out-dir", required=True, type=Path)
    _add_common(p, seed=True, jobs=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rank", help="rank features of one task by information gain")
    _add_inputs(p)
    _add_features(p)
    p.add_argument("--task", required=True)
    p.add_argument("--threshold", type=float, default=0.005)
    p.add_argument("--out", required=True, type=Path)
    _add_common(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("stats", help="Friedman/Nemenyi tests over a report")
    p.add_argument("--report", required=True, type=Path)
    p.add_argument("--test", default="friedman")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", required=True, type=Path)
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("pipeline", help="ingest, evaluate, rank and test in one go")
    _add_inputs(p, truth_required=True)
    _add_features(p, default="all")
    _add_eval(p)
    p.add_argument("--lang", required=True)
    p.add_argument("--threshold", type=float, default=0.005)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out-dir", type=Path, default=Path("tesseract-out"))
    _add_common(p, seed=True, jobs=True)
    p.set_defaults(func=cmd_pipeline)

    _apply_env_defaults(sub)
    return parser


def _apply_env_defaults(subparsers_action) -> None:
    for sp in subparsers_action.choices.values():
        for action in sp._actions:
            if not action.option_strings or action.dest in ("help",):
                continue
            raw = os.environ.get(ENV_PREFIX + action.dest.upper())
            if raw is None:
                continue
            if isinstance(action, argparse._StoreTrueAction):
                value = raw.strip().lower() in ("1", "true", "yes", "on")
            elif isinstance(action, argparse._AppendAction):
                value = [action.type(v) if action.type else v for v in raw.split(os.pathsep) if v]
            else:
                value = action.type(raw) if action.type else raw
            action.default = value
            action.required = False


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, args.log_level),
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    if getattr(args, "features", None) is not None:
        try:
            _parse_feature_sets(args.features)
        except ValueError as exc:
            parser.print_usage(sys.stderr)
            print(f"tesseract {args.command}: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    if args.command in ("rank", "pipeline"):
        # pipeline ranks every feature kind; rank follows --features
        args.rank_features = "both" if args.command == "pipeline" else args.features
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tesseract {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError, IsADirectoryError, PermissionError, UnicodeDecodeError) as exc:
        logger.error("%s", exc)
        return EXIT_DATA
    except (InvariantError, AssertionError) as exc:
        logger.error("internal invariant violated: %s", exc)
        return EXIT_INTERNAL
    except ValueError as exc:
        # remaining value errors come from bad flag values
        logger.error("%s", exc)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        logger.exception("unexpected failure: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
