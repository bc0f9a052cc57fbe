"""Command-line surface: one subcommand per pipeline stage.

Uniform flags: ``--config`` (TOML, falls back to $HUMANCORPUS_CONFIG),
``--seed``, ``--jobs``, ``--input``, ``--output``.  ``-`` streams through
stdin/stdout.  Every run writes a sidecar report ``<output>.report.json``
embedding the effective config and input/output digests (``--report``
overrides the location, which is required when the output is ``-``).

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import (
    CONFIG_ENV_VAR, ConfigError, PipelineConfig, load_config,
)
from .filtering import (
    ALL_STAGES, FilterReport, STAGE_CLEAN, iter_filter, sample_inspection,
)
from .instructions import MixtureSpec, assemble_mixture
from .manifest import (
    ManifestError, iter_manifest, read_jsonl, read_manifest, write_jsonl,
    write_manifest,
)
from .records import Status
from .rewrite import ChatClient, rewrite_records
from .synthesis import (
    PhraseTable, SynthesisError, build_grammar, merge_captions, synthesize_raw,
)
from .textstats import corpus_stats, field_texts, ngram_percentage_table
from .util import parallel_map, sha256_file, stable_record_seed

TASKS = ("caption", "vqa-closed", "vqa-open", "contq", "attr", "ground", "pref")


class CliError(RuntimeError):
    pass


def _add_common(parser: argparse.ArgumentParser, output: bool = True) -> None:
    parser.add_argument("--config", help="TOML config file (or $%s)" % CONFIG_ENV_VAR)
    parser.add_argument("--seed", type=int, help="override the pipeline seed")
    parser.add_argument("--jobs", type=int, help="worker pool size")
    parser.add_argument("--input", required=True, help="input manifest (- for stdin)")
    if output:
        parser.add_argument("--output", required=True,
                            help="output path (- for stdout)")
    parser.add_argument("--report", help="report path (default <output>.report.json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="humancorpus",
        description="Human-scene image-text corpus tools")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="face/attribute selection gates")
    _add_common(p)
    p.add_argument("--stages", default="face,attrs",
                   help="comma list from {face,attrs,clean}")
    p.add_argument("--rejects", help="write rejected records here")
    p.add_argument("--field", help="text field for the clean stage")

    p = sub.add_parser("synth", help="synthesize raw facial descriptions")
    _add_common(p)
    p.add_argument("--grammar", help="grammar rules file override")
    p.add_argument("--phrases", help="phrase table file override")

    p = sub.add_parser("rewrite", help="LLM rewrite of raw facial text")
    _add_common(p)

    p = sub.add_parser("merge", help="merge facial and global captions")
    _add_common(p)

    p = sub.add_parser("clean", help="refusal and short-text removal")
    _add_common(p)
    p.add_argument("--rejects", help="write rejected records here")
    p.add_argument("--field", help="text field to clean (default from config)")

    p = sub.add_parser("stats", help="corpus text statistics")
    _add_common(p)
    p.add_argument("--field", default="caption")
    p.add_argument("--curve-csv", help="write the cumulative curve as CSV")
    p.add_argument("--ngram-csv", help="write the n-gram vs percentage table")

    p = sub.add_parser("quality", help="image quality features and scores")
    _add_common(p)
    p.add_argument("--image-root", default="", help="prefix for image paths")
    p.add_argument("--score-model", help="JSON scoring model file")
    p.add_argument("--embeddings",
                   help="JSONL of {id, image_emb, pos_emb, neg_emb}")

    p = sub.add_parser("mix", help="assemble an instruction mixture")
    _add_common(p)

    p = sub.add_parser("eval", help="scoring protocols")
    _add_common(p)
    p.add_argument("--task", required=True, choices=TASKS)
    p.add_argument("--variant", default="P1", choices=("P1", "P2"))
    p.add_argument("--threshold", type=float, default=0.5,
                   help="IoU threshold for grounding")

    p = sub.add_parser("inspect", help="random sampling inspection")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)

    return parser


def _load_effective_config(args) -> PipelineConfig:
    path = args.config or os.environ.get(CONFIG_ENV_VAR)
    config = load_config(path) if path else PipelineConfig()
    updates = {}
    if args.seed is not None:
        updates["rng_seed"] = args.seed
    if args.jobs is not None:
        updates["jobs"] = args.jobs
    return replace(config, **updates) if updates else config


def _dump_json(payload: dict, path: str) -> None:
    if path == "-":
        json.dump(payload, sys.stdout, ensure_ascii=False, indent=2)
        sys.stdout.write("\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def _write_report(args, config: PipelineConfig, body: dict) -> None:
    output = getattr(args, "output", None)
    path = args.report
    if path is None:
        if output in (None, "-"):
            return  # nowhere sensible to put it; caller passed no --report
        path = f"{output}.report.json"
    report = {
        "command": args.command,
        "config": config.to_dict(),
        "input_digest": sha256_file(args.input),
        "output_digest": sha256_file(output) if output else None,
        **body,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_filter(args, config: PipelineConfig) -> dict:
    stages = tuple(s.strip() for s in args.stages.split(",") if s.strip())
    unknown = [s for s in stages if s not in ALL_STAGES]
    if unknown:
        raise CliError(f"unknown stages {unknown}; expected {list(ALL_STAGES)}")
    report = FilterReport()
    passes, rejects = [], []
    for rec in iter_filter(iter_manifest(args.input), config, stages,
                           args.field, report, jobs=config.jobs):
        (rejects if rec.status is Status.REJECTED else passes).append(rec)
    write_manifest(passes, args.output)
    if args.rejects:
        write_manifest(rejects, args.rejects)
    return {"filter": report.to_dict(), "stages": list(stages)}


def _cmd_clean(args, config: PipelineConfig) -> dict:
    report = FilterReport()
    passes, rejects = [], []
    for rec in iter_filter(iter_manifest(args.input), config, (STAGE_CLEAN,),
                           args.field, report, jobs=config.jobs):
        (rejects if rec.status is Status.REJECTED else passes).append(rec)
    write_manifest(passes, args.output)
    if args.rejects:
        write_manifest(rejects, args.rejects)
    return {"filter": report.to_dict(), "field": args.field
            or config.clean.text_field}


def _cmd_synth(args, config: PipelineConfig) -> dict:
    phrases = PhraseTable.load(args.phrases) if args.phrases else \
        (PhraseTable.load(config.synth.phrase_file)
         if config.synth.phrase_file else None)
    rules = None
    rules_path = args.grammar or config.synth.grammar_file
    if rules_path:
        from .grammar import load_rules
        rules = load_rules(rules_path)
    grammar = build_grammar(phrases, rules)
    fallback = config.synth.fallback_pronoun
    seed = config.rng_seed

    def synth(rec):
        if not rec.attrs:
            raise SynthesisError(f"record {rec.id!r} has no retained attributes")
        text = synthesize_raw(rec.attrs, grammar,
                              stable_record_seed(seed, rec.id), fallback)
        return replace(rec, facial_raw=text).advanced(Status.SYNTHESIZED)

    records = read_manifest(args.input)
    out = parallel_map(synth, records, config.jobs)
    count = write_manifest(out, args.output)
    return {"synthesized": count}


def _cmd_rewrite(args, config: PipelineConfig) -> dict:
    client = ChatClient(config.llm,
                        refusal_patterns=config.clean.refusal_patterns)
    records = read_manifest(args.input)
    out, counts = rewrite_records(records, client,
                                  config.llm.rewrite_prompt, jobs=config.jobs)
    write_manifest(out, args.output)
    return {"rewrite": counts}


def _cmd_merge(args, config: PipelineConfig) -> dict:
    connective = config.merge.connective

    def merge(rec):
        if not rec.facial_caption or not rec.global_caption:
            raise SynthesisError(
                f"record {rec.id!r} lacks facial or global caption")
        caption = merge_captions(rec.facial_caption, rec.global_caption,
                                 connective)
        return replace(rec, caption=caption).advanced(Status.MERGED)

    records = read_manifest(args.input)
    out = parallel_map(merge, records, config.jobs)
    count = write_manifest(out, args.output)
    return {"merged": count}


def _cmd_stats(args, config: PipelineConfig) -> dict:
    records = read_manifest(args.input)
    texts = field_texts(records, args.field)
    stats = corpus_stats(texts, config.stats.ngram_n, config.stats.sample_pct,
                         config.rng_seed, jobs=config.jobs)
    payload = stats.to_dict()
    payload["field"] = args.field
    _dump_json(payload, args.output)
    if args.curve_csv:
        with open(args.curve_csv, "w", encoding="utf-8") as fh:
            fh.write("word_count,cumulative_proportion\n")
            for k, p in stats.cumulative:
                fh.write(f"{k},{p!r}\n")
    if args.ngram_csv:
        table = ngram_percentage_table(texts, config.stats.ngram_n,
                                       config.rng_seed)
        with open(args.ngram_csv, "w", encoding="utf-8") as fh:
            fh.write("sample_pct,unique_ngrams\n")
            for pct, count in table:
                fh.write(f"{pct},{count}\n")
    return {"stats": {"doc_count": stats.doc_count,
                      "mean_words": stats.mean_words,
                      "unique_ngrams": stats.unique_ngrams}}


def _cmd_quality(args, config: PipelineConfig) -> dict:
    import numpy as np

    from .quality import (
        BACKEND, brisque_features, brisque_score, clipiqa_score, equal_bins,
        load_score_model, score_histogram, to_gray,
    )

    qc = config.quality
    model = None
    model_path = args.score_model or qc.model_file
    if model_path:
        model = load_score_model(model_path)
    emb_by_id = {}
    if args.embeddings:
        for row in read_jsonl(args.embeddings):
            emb_by_id[row["id"]] = row
    records = read_manifest(args.input)
    root = Path(args.image_root) if args.image_root else None

    def score_one(rec):
        from PIL import Image

        path = Path(rec.image)
        if root is not None and not path.is_absolute():
            path = root / path
        with Image.open(path) as img:
            arr = np.asarray(img.convert("RGB"), dtype=np.float64)
        feats = brisque_features(to_gray(arr), qc.kernel_size,
                                 qc.kernel_sigma, qc.c,
                                 (qc.alpha_lo, qc.alpha_hi))
        row = {"id": rec.id, "brisque_features": [float(v) for v in feats]}
        if model is not None:
            row["brisque_score"] = brisque_score(feats, model)
        emb = emb_by_id.get(rec.id)
        if emb is not None:
            row["clipiqa_score"] = clipiqa_score(
                np.asarray(emb["image_emb"], dtype=np.float64),
                np.asarray(emb["pos_emb"], dtype=np.float64),
                np.asarray(emb["neg_emb"], dtype=np.float64),
                qc.logit_scale)
        return row

    rows = parallel_map(score_one, records, config.jobs)
    write_jsonl(rows, args.output)
    body: dict = {"images": len(rows), "kernel_backend": BACKEND}
    for key in ("brisque_score", "clipiqa_score"):
        values = [r[key] for r in rows if key in r]
        if values:
            lo, hi = min(values), max(values)
            if lo == hi:
                hi = lo + 1.0
            hist = score_histogram(values, equal_bins(lo, hi, qc.bins))
            body[f"{key}_histogram"] = hist.to_dict()
    return body


def _cmd_mix(args, config: PipelineConfig) -> dict:
    with open(args.input, "r", encoding="utf-8") as fh:
        spec_data = json.load(fh)
    if args.seed is not None:
        spec_data["seed"] = args.seed
    spec = MixtureSpec.from_dict(spec_data)
    rows, counts = assemble_mixture(spec,
                                    base_dir=Path(args.input).parent)
    write_jsonl(rows, args.output)
    return {"mixture": {"total": len(rows), "per_source": counts,
                        "seed": spec.seed}}


def _cmd_eval(args, config: PipelineConfig) -> dict:
    from . import evaluation as ev

    rows = read_jsonl(args.input)
    task = args.task
    body: dict
    if task == "caption":
        client = ChatClient(config.llm,
                            refusal_patterns=config.clean.refusal_patterns)
        pairs = [(str(r.get("id", i)), r["prediction"], r["label"])
                 for i, r in enumerate(rows)]
        report = ev.judge_captions(pairs, client, args.variant,
                                   jobs=config.jobs)
        body = {"task": task, "variant": args.variant, **report.to_dict()}
    elif task in ("vqa-closed", "vqa-open", "contq"):
        items = [ev.VqaItem(question=r["question"],
                            options=tuple(r.get("options", ())),
                            gold=r.get("gold", ""),
                            prediction=r.get("prediction", ""),
                            context=r.get("context", "")) for r in rows]
        if task == "vqa-closed":
            accuracy, details = ev.closed_vqa_accuracy(items)
            body = {"task": task, "accuracy": accuracy, **details}
        elif task == "vqa-open":
            client = ChatClient(config.llm,
                                refusal_patterns=config.clean.refusal_patterns)
            report = ev.judge_captions(ev.open_vqa_pairs(items), client,
                                       args.variant, jobs=config.jobs)
            body = {"task": task, "variant": args.variant,
                    "protocol": "judge_with_question", **report.to_dict()}
        else:
            prompts = [{"id": r.get("id", i), "prompt": ev.contq_prompt(item)}
                       for i, (r, item) in enumerate(zip(rows, items))]
            body = {"task": task, "prompts": len(prompts)}
            body["prompt_rows"] = prompts
    elif task == "attr":
        predicted = [r["predicted"] for r in rows]
        gold = [r["gold"] for r in rows]
        queried = rows[0].get("queried") if rows else None
        body = {"task": task,
                **ev.attribute_accuracy(predicted, gold, queried)}
    elif task == "ground":
        items = [(tuple(r["gold"]),
                  tuple(r["pred"]) if r.get("pred") is not None else None)
                 for r in rows]
        body = {"task": task, "threshold": args.threshold,
                "accuracy": ev.grounding_accuracy(items, args.threshold)}
    else:  # pref
        votes = [(str(r["item"]), str(r["rater"]), r["verdict"]) for r in rows]
        body = {"task": task, **ev.preference_tally(votes)}
    prompt_rows = body.pop("prompt_rows", None)
    if prompt_rows is not None:
        write_jsonl(prompt_rows, args.output)
        return {"task": task, "prompts": len(prompt_rows)}
    _dump_json(body, args.output)
    return body


def _cmd_inspect(args, config: PipelineConfig) -> dict:
    records = read_manifest(args.input)
    sampled = sample_inspection(records, args.n, config.rng_seed)
    write_manifest(sampled, args.output)
    return {"sampled": len(sampled), "population": len(records)}


_HANDLERS = {
    "filter": _cmd_filter,
    "synth": _cmd_synth,
    "rewrite": _cmd_rewrite,
    "merge": _cmd_merge,
    "clean": _cmd_clean,
    "stats": _cmd_stats,
    "quality": _cmd_quality,
    "mix": _cmd_mix,
    "eval": _cmd_eval,
    "inspect": _cmd_inspect,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        config = _load_effective_config(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        body = _HANDLERS[args.command](args, config)
        _write_report(args, config, body)
    except (CliError, ManifestError, SynthesisError, ValueError,
            RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
