"""Command line interface: ``inclusive-coref <command> ...``.

Exit codes: 0 on success, 1 on bad input data, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import shutil
import sys
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from . import charts
from .ablation import PRESET_LABELS, PRESET_ORDER, condition_suite, item_id
from .coding import TABLE_QUESTIONS, compare_groups, load_codings, table
from .conll import emit_conll, parse_conll
from .corpus_stats import corpus_stats
from .crowd import (
    answer_key_csv,
    emit_results,
    gen_batches,
    ingest_results,
    per_condition_report,
    read_answer_key,
    report_csv,
    tasks_csv,
)
from .errors import DataError
from .lexicon import Lexicon, NamePool, load_lexicon, load_names
from .map_format import emit_map, parse_map
from .scoring import (
    interannotator_agreement,
    pronoun_recall_by_category,
    read_predictions,
    score_binary,
    score_coref,
)

log = logging.getLogger("inclusive_coref")

FORMATS = ("csv", "json", "svg")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- io helpers

def write_atomic(path: Path, data: str | bytes) -> None:
    """Write via a temp file in the same directory and rename over the target."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data.encode("utf-8") if isinstance(data, str) else data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p


def _read_text(path: Path) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def _kind(path: Path, forced: str | None) -> str:
    if forced:
        return forced
    return "map" if path.suffix.lower() in (".tsv", ".map") else "conll"


def _load_items(path: Path, kind: str, lexicon: Lexicon | None = None):
    text = _read_text(path)
    if kind == "map":
        return parse_map(text, lexicon, source=str(path))
    return parse_conll(text, source=str(path))


def _formats(args, allowed=FORMATS) -> list[str]:
    fmts = args.format or ["csv"]
    bad = [f for f in fmts if f not in allowed]
    if bad:
        raise UsageError(f"{args.command} does not support --format {bad[0]}")
    return fmts


def _lexicon(args) -> Lexicon:
    if args.lexicon_dir is not None and not Path(args.lexicon_dir).is_dir():
        raise UsageError(f"lexicon directory not found: {args.lexicon_dir}")
    return load_lexicon(args.lexicon_dir, rng_seed=args.seed)


def _name_pool(path: str | None, seed: int) -> NamePool | None:
    """A names TSV, or a plain file with one ``I. Lastname`` per line (used in order)."""
    if path is None:
        return None
    p = _existing(path)
    first = _read_text(p).splitlines()[:1]
    if first and first[0].split("\t") == ["initial", "last_name"]:
        return load_names(p, seed)
    names = [ln.strip() for ln in _read_text(p).splitlines() if ln.strip()]
    if not names:
        raise DataError(f"{path}: name pool is empty")
    return NamePool.pinned(names)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _f(x) -> str:
    return "" if x is None else f"{x:.6f}"


# ---------------------------------------------------------------- commands

def _suite_job(args):
    item, lexicon, seed, presets, target, agreement, pool = args
    suite = condition_suite(item, lexicon, seed, target_paradigm=target, agreement_mode=agreement,
                            name_pool=pool, presets=presets)
    mapping = next(iter(suite.values())).name_mapping
    return {k: v.item for k, v in suite.items()}, mapping.to_dict() if mapping else {}


def cmd_ablate(args) -> int:
    src = _existing(args.input)
    lexicon = _lexicon(args)
    kind = _kind(src, args.input_format)
    presets = args.preset or list(PRESET_ORDER)
    for p in presets:
        if p not in PRESET_ORDER:
            raise UsageError(f"unknown preset {p!r}; choose from {', '.join(PRESET_ORDER)}")
    pool = _name_pool(args.name_pool, args.seed)
    items = _load_items(src, kind, lexicon if kind == "map" else None)
    jobs = [(it, lexicon, args.seed, presets, args.target_paradigm, args.agreement, pool) for it in items]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_suite_job, jobs, chunksize=16))
    else:
        results = [_suite_job(j) for j in jobs]
    out = Path(args.out_dir)
    stem = src.name[: -len(src.suffix)] if src.suffix else src.name
    suffix = src.suffix or (".tsv" if kind == "map" else ".conll")
    for p in presets:
        target = out / f"{stem}.{p}{suffix}"
        if p == "Orig":
            # nothing is substituted, so keep the input bytes exactly
            tmp = target.with_name(f".{target.name}.tmp")
            out.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(src, tmp)
            os.replace(tmp, target)
            continue
        variants = [r[0][p] for r in results]
        write_atomic(target, emit_map(variants) if kind == "map" else emit_conll(variants))
    sidecar = {item_id(it): r[1] for it, r in zip(items, results)}
    write_atomic(out / f"{stem}.names.json", json.dumps(sidecar, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    return 0


def cmd_score_map(args) -> int:
    fmts = _formats(args)
    lexicon = _lexicon(args)
    gold = parse_map(_read_text(_existing(args.gold)), lexicon, source=args.gold)
    preds = read_predictions(_read_text(_existing(args.predictions)), source=args.predictions)
    scores = score_binary(preds, gold, include_neither=args.include_neither)
    out = Path(args.out_dir)
    if "csv" in fmts:
        rows = [[s.system_id, s.condition, s.correct, s.scored, _f(s.accuracy), _f(s.low), _f(s.high),
                 s.neither_skipped] for s in scores]
        write_atomic(out / "map_scores.csv", _csv_text(
            ["system_id", "condition", "correct", "scored", "accuracy", "ci_low", "ci_high", "neither_skipped"], rows))
    if "json" in fmts:
        data = [{"system_id": s.system_id, "condition": s.condition, "correct": s.correct, "scored": s.scored,
                 "accuracy": s.accuracy, "ci_low": s.low, "ci_high": s.high,
                 "neither_skipped": s.neither_skipped} for s in scores]
        write_atomic(out / "map_scores.json", json.dumps(data, indent=2) + "\n")
    if "svg" in fmts:
        for system in sorted({s.system_id for s in scores}):
            rows = sorted((s for s in scores if s.system_id == system),
                          key=lambda s: PRESET_ORDER.index(s.condition) if s.condition in PRESET_ORDER else 99)
            svg = charts.bar_chart([PRESET_LABELS.get(s.condition, s.condition) for s in rows],
                                   [s.accuracy for s in rows], [s.low for s in rows], [s.high for s in rows],
                                   title=system)
            write_atomic(out / f"map_scores.{system}.svg", svg)
    return 0


def _docs(path: str):
    return parse_conll(_read_text(_existing(path)), source=path)


def cmd_score_coref(args) -> int:
    fmts = _formats(args)
    lexicon = _lexicon(args)
    report = score_coref(_docs(args.gold), _docs(args.system), lexicon, mode=args.mode, jobs=args.jobs)
    out = Path(args.out_dir)
    rows = [(doc, sc) for doc, sc in report.per_document.items()] + [("TOTAL", report.total)]
    if "csv" in fmts:
        write_atomic(out / "lea_scores.csv", _csv_text(
            ["document", "mode", "precision", "recall", "f1"],
            [[d, args.mode, _f(s.precision), _f(s.recall), _f(s.f1)] for d, s in rows]))
    if "json" in fmts:
        data = {d: {"mode": args.mode, "precision": s.precision, "recall": s.recall, "f1": s.f1} for d, s in rows}
        write_atomic(out / "lea_scores.json", json.dumps(data, indent=2) + "\n")
    if "svg" in fmts:
        t = report.total
        write_atomic(out / "lea_scores.svg", charts.bar_chart(["precision", "recall", "F1"],
                                                              [t.precision, t.recall, t.f1],
                                                              title=f"LEA ({args.mode})", ylabel="score"))
    return 0


def cmd_recall(args) -> int:
    fmts = _formats(args)
    lexicon = _lexicon(args)
    rec = pronoun_recall_by_category(_docs(args.gold), _docs(args.system), lexicon)
    data = rec.as_dict()
    out = Path(args.out_dir)
    if "csv" in fmts:
        write_atomic(out / "pronoun_recall.csv", _csv_text(
            ["category", "detected", "gold", "recall"],
            [[c, v["detected"], v["gold"], _f(v["recall"])] for c, v in data.items()]))
    if "json" in fmts:
        write_atomic(out / "pronoun_recall.json", json.dumps(data, indent=2) + "\n")
    if "svg" in fmts:
        cats = [c for c, v in data.items() if v["gold"]]
        write_atomic(out / "pronoun_recall.svg",
                     charts.bar_chart(cats, [data[c]["recall"] for c in cats], ylabel="recall"))
    return 0


def cmd_iaa(args) -> int:
    fmts = _formats(args, ("csv", "json"))
    res = interannotator_agreement(_docs(args.a), _docs(args.b), mode=args.mode)
    out = Path(args.out_dir)
    if "csv" in fmts:
        write_atomic(out / "iaa.csv", _csv_text(
            ["gold", "mode", "precision", "recall", "f1"],
            [["A", args.mode, _f(res.a_as_gold.precision), _f(res.a_as_gold.recall), _f(res.f1)],
             ["B", args.mode, _f(res.b_as_gold.precision), _f(res.b_as_gold.recall), _f(res.f1_swapped)]]))
    if "json" in fmts:
        write_atomic(out / "iaa.json", json.dumps({"mode": args.mode, "f1": res.f1,
                                                   "f1_swapped": res.f1_swapped}, indent=2) + "\n")
    return 0


def cmd_stats(args) -> int:
    fmts = _formats(args, ("csv", "json"))
    lexicon = _lexicon(args)
    src = _existing(args.input)
    items = _load_items(src, _kind(src, args.input_format))
    st = corpus_stats(items, lexicon)
    out = Path(args.out_dir)
    if "csv" in fmts:
        write_atomic(out / "corpus_stats.csv", st.to_csv())
    if "json" in fmts:
        write_atomic(out / "corpus_stats.json", st.to_json())
    return 0


def cmd_gen_tasks(args) -> int:
    lexicon = _lexicon(args)
    presets = args.preset or list(PRESET_ORDER)
    for p in presets:
        if p not in PRESET_ORDER:
            raise UsageError(f"unknown preset {p!r}")
    pool = _name_pool(args.name_pool, args.seed)
    items = parse_map(_read_text(_existing(args.input)), lexicon, source=args.input)
    variants = {}
    for it in items:
        suite = condition_suite(it, lexicon, args.seed, name_pool=pool, presets=presets)
        variants[it.instance_id] = {k: v.item for k, v in suite.items()}
    checks = []
    if args.gold_checks:
        checks = parse_map(_read_text(_existing(args.gold_checks)), lexicon, source=args.gold_checks)
    batches = gen_batches(variants, presets, args.batch_size, args.seed, args.rounds, checks)
    out = Path(args.out_dir)
    write_atomic(out / "tasks.csv", tasks_csv(batches))
    write_atomic(out / "answer_key.csv", answer_key_csv(batches))
    return 0


def cmd_ingest(args) -> int:
    ids = None
    if args.answer_key:
        ids = {row["instance_id"] for row in read_answer_key(_read_text(_existing(args.answer_key)))}
    records = ingest_results(_read_text(_existing(args.results)), instance_ids=ids)
    write_atomic(Path(args.out_dir) / "records.csv", emit_results(records))
    return 0


def cmd_code_papers(args) -> int:
    fmts = _formats(args, ("csv", "json"))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        records = load_codings(_read_text(_existing(args.input)), strict=not args.lenient, source=args.input)
    for w in caught:
        log.warning("%s", w.message)
    tab = table(records)
    out = Path(args.out_dir)
    sig_rows = []
    for q in TABLE_QUESTIONS:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = compare_groups(records, q, "all", "coref")
        sig_rows.append([q, f"{res.statistic:.6f}", f"{res.p_value:.6g}", "yes" if res.significant() else "no"])
    if "csv" in fmts:
        write_atomic(out / "coding_table.csv", tab.to_csv())
        write_atomic(out / "significance.csv", _csv_text(["question", "statistic", "p_value", "significant_0.05"],
                                                         sig_rows))
    if "json" in fmts:
        write_atomic(out / "coding_table.json", tab.to_json())
    return 0


def cmd_report(args) -> int:
    fmts = _formats(args)
    lexicon = _lexicon(args)
    gold = parse_map(_read_text(_existing(args.gold)), lexicon, source=args.gold)
    records = ingest_results(_read_text(_existing(args.results)), instance_ids={g.instance_id for g in gold})
    rows = per_condition_report(records, gold)
    out = Path(args.out_dir)
    if "csv" in fmts:
        write_atomic(out / "condition_report.csv", report_csv(rows))
    if "json" in fmts:
        data = [{"condition": r.condition, "correct": r.correct, "scored": r.scored, "accuracy": r.accuracy,
                 "ci_low": r.low, "ci_high": r.high, "certainty": r.certainty,
                 "certainty_counts": r.certainty_counts} for r in rows]
        write_atomic(out / "condition_report.json", json.dumps(data, indent=2) + "\n")
    if "svg" in fmts and rows:
        svg = charts.accuracy_certainty_chart([PRESET_LABELS[r.condition] for r in rows], [r.accuracy for r in rows],
                                              [r.low for r in rows], [r.high for r in rows],
                                              [r.certainty for r in rows])
        write_atomic(out / "condition_report.svg", svg)
    return 0


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--lexicon-dir", help="directory with paradigms.tsv, nouns.tsv, address.tsv, names.tsv")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    common.add_argument("--format", action="append", choices=FORMATS, help="output format, repeatable (default csv)")
    common.add_argument("-o", "--out-dir", default=".", help="output directory (default .)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="inclusive-coref", description="Gender-inclusive coreference evaluation toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ablate", parents=[common], help="write ablated copies of a MAP TSV or CoNLL file")
    p.add_argument("input")
    p.add_argument("--preset", action="append", help="preset name, repeatable (default: all ten)")
    p.add_argument("--input-format", choices=("map", "conll"))
    p.add_argument("--target-paradigm", default="they")
    p.add_argument("--agreement", choices=("off", "basic"))
    p.add_argument("--name-pool", help="names TSV, or one replacement name per line to use in order")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("score-map", parents=[common], help="MAP accuracy per system and condition")
    p.add_argument("--gold", required=True)
    p.add_argument("--predictions", required=True, help="CSV with instance_id, system_id, choice[, condition]")
    p.add_argument("--include-neither", action="store_true")
    p.set_defaults(func=cmd_score_map)

    for name, func, helptext in (("score-coref", cmd_score_coref, "LEA on pronoun and name mentions"),
                                 ("recall-by-pronoun", cmd_recall, "pronoun detection recall per category")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--gold", required=True)
        p.add_argument("--system", required=True)
        if name == "score-coref":
            p.add_argument("--mode", choices=("include", "exclude"), default="exclude")
        p.set_defaults(func=func)

    p = sub.add_parser("iaa", parents=[common], help="LEA agreement between two annotation layers")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--mode", choices=("include", "exclude"), default="exclude")
    p.set_defaults(func=cmd_iaa)

    p = sub.add_parser("stats", parents=[common], help="gender-cue statistics of a corpus")
    p.add_argument("input")
    p.add_argument("--input-format", choices=("map", "conll"))
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("gen-tasks", parents=[common], help="crowd task batches from a MAP TSV")
    p.add_argument("input")
    p.add_argument("--preset", action="append")
    p.add_argument("--batch-size", type=int, default=10)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--gold-checks", help="MAP TSV of check items appended to every batch")
    p.add_argument("--name-pool")
    p.set_defaults(func=cmd_gen_tasks)

    p = sub.add_parser("ingest-results", parents=[common], help="validate a crowd results CSV")
    p.add_argument("results")
    p.add_argument("--answer-key")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("code-papers", parents=[common], help="tabulate literature codings")
    p.add_argument("input")
    p.add_argument("--lenient", action="store_true", help="allow applicable questions left uncoded")
    p.set_defaults(func=cmd_code_papers)

    p = sub.add_parser("report", parents=[common], help="per-condition accuracy and certainty from crowd results")
    p.add_argument("--gold", required=True)
    p.add_argument("--results", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        return args.func(args)
    except UsageError as exc:
        print(f"inclusive-coref: error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError, UnicodeDecodeError) as exc:
        print(f"inclusive-coref: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
