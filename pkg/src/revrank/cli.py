"""Command-line entry point.

Subcommands: ``rerank``, ``metrics``, ``diversity``, ``significance``,
``enrich`` and ``score``.  Options can also come from a ``key = value``
config file (``--config``); explicit flags win.  Every output embeds a
provenance block (tool version, subcommand, resolved options) that is
sufficient to reproduce the output byte-for-byte; the output path and
worker count are excluded because they do not affect record content.

Exit codes: 0 success, 2 usage, 3 I/O failure, 4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from multiprocessing import Pool
from typing import Iterable, Optional

from . import __version__, diversity, jsonio, metrics, stats
from .enrichment import RawDetection, align_contexts, filter_by_threshold
from .errors import ConfigError, MisalignedInputsError, ParseError, RevrankError
from .providers import (
    build_unigram_lm,
    load_corpus,
    load_embeddings,
    load_precomputed_similarities,
)
from .rerank import NBestRecord, RerankConfig, rerank_record, rerank_to_record
from .revision import (
    FusionInputs,
    compute_alpha,
    fuse_two_contexts,
    probability,
    revise_negative,
    revise_positive,
    revise_sim_only,
    similarity,
)
from .textnorm import load_stopwords, tokenize

_PROVENANCE_SKIP = ("out", "jobs", "config", "func")


def _provenance(args: argparse.Namespace) -> dict:
    options = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in _PROVENANCE_SKIP and not key.startswith("_") and value is not None
    }
    subcommand = options.pop("subcommand")
    return {
        "tool": "revrank",
        "version": __version__,
        "subcommand": subcommand,
        "options": options,
    }


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="\n")


def _emit_report(args: argparse.Namespace, body: dict) -> None:
    body = {"provenance": _provenance(args), **body}
    out = _open_out(args.out)
    try:
        out.write(jsonio.canonical_report(body))
    finally:
        if out is not sys.stdout:
            out.close()


def _emit_jsonl(args: argparse.Namespace, records: Iterable[dict]) -> None:
    out = _open_out(args.out)
    try:
        out.write(jsonio.canonical_line({"provenance": _provenance(args)}) + "\n")
        for record in records:
            out.write(jsonio.canonical_line(record) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()


def _data_lines(path) -> Iterable[tuple[int, dict]]:
    """JSONL records, skipping a leading provenance line if present."""
    for line_no, obj in jsonio.read_jsonl(path):
        if "provenance" in obj and line_no == 1:
            continue
        yield line_no, obj


# --------------------------------------------------------------------------
# rerank
# --------------------------------------------------------------------------

_WORKER = {}


def _rerank_resources(args: argparse.Namespace):
    sims = load_precomputed_similarities(args.sims) if args.sims else None
    if sims is not None:
        for warning in sims.warnings:
            print(f"warning: {warning}", file=sys.stderr)
    embeddings = load_embeddings(args.embeddings) if args.embeddings else None
    lm = None
    if args.corpus:
        lm = build_unigram_lm(load_corpus(args.corpus), smoothing_k=args.smoothing)
    config = RerankConfig(
        variant=args.variant,
        prior_source=args.prior_source,
        lm_prior_mode=args.lm_prior,
        informativeness_mode=args.informativeness,
        context_selection=args.contexts,
        sim_pool=args.sim_pool,
        confidence_threshold=args.threshold,
    )
    if sims is None and embeddings is None:
        raise ConfigError("rerank needs --sims and/or --embeddings")
    primary = sims if sims is not None else embeddings
    return primary, config, lm, embeddings


def _rerank_one(primary, config, lm, embeddings, obj: dict) -> dict:
    record = NBestRecord.from_json(obj)
    ranked = rerank_record(record, primary, config, lm=lm, word_sims=embeddings)
    return rerank_to_record(record, ranked)


def _worker_init(args: argparse.Namespace) -> None:
    _WORKER["resources"] = _rerank_resources(args)


def _worker_run(obj: dict) -> dict:
    primary, config, lm, embeddings = _WORKER["resources"]
    return _rerank_one(primary, config, lm, embeddings, obj)


def _cmd_rerank(args: argparse.Namespace) -> int:
    inputs = [obj for _, obj in _data_lines(args.candidates)]
    if args.jobs > 1:
        with Pool(args.jobs, initializer=_worker_init, initargs=(args,)) as pool:
            outputs = list(pool.imap(_worker_run, inputs, chunksize=8))
    else:
        primary, config, lm, embeddings = _rerank_resources(args)
        outputs = [_rerank_one(primary, config, lm, embeddings, obj) for obj in inputs]
    _emit_jsonl(args, outputs)
    return 0


# --------------------------------------------------------------------------
# metrics / diversity
# --------------------------------------------------------------------------

def _load_references(path) -> dict[str, list[str]]:
    refs = {}
    for line_no, obj in _data_lines(path):
        try:
            refs[str(obj["image_id"])] = [str(r) for r in obj["references"]]
        except (KeyError, TypeError) as exc:
            raise ParseError(path, line_no, f"bad reference record: {exc!r}") from exc
    return refs


def _load_hypotheses(path) -> dict[str, str]:
    """Accepts reranked output (takes the top entry) or {image_id, caption}."""
    hyps = {}
    for line_no, obj in _data_lines(path):
        image_id = str(obj.get("image_id", ""))
        if not image_id:
            raise ParseError(path, line_no, "missing image_id")
        if "reranked" in obj:
            best_rank = obj["reranked"][0]["rank"]
            text = next(c["text"] for c in obj["candidates"] if c["rank"] == best_rank)
        elif "caption" in obj:
            text = str(obj["caption"])
        elif "candidates" in obj:
            text = str(obj["candidates"][0]["text"])
        else:
            raise ParseError(path, line_no, "no caption or reranked field")
        hyps[image_id] = text
    return hyps


_METRIC_ALIASES = {"rouge": "rouge_l", "rougel": "rouge_l", "rouge-l": "rouge_l"}


def _metric_name(name: str) -> str:
    name = name.strip().lower()
    return _METRIC_ALIASES.get(name, name)


def _cmd_metrics(args: argparse.Namespace) -> int:
    hyps = _load_hypotheses(args.hyp)
    refs = _load_references(args.refs)
    corpus = metrics.TokenizedCorpus.from_text(hyps, refs)
    wanted = [_metric_name(m) for m in args.metrics.split(",") if m.strip()]
    runners = {
        "bleu": lambda: metrics.bleu(corpus, args.max_n),
        "nist": lambda: metrics.nist(corpus, args.max_n),
        "rouge_l": lambda: metrics.rouge_l(corpus),
        "cider": lambda: metrics.cider(corpus),
    }
    body = {}
    for name in wanted:
        if name not in runners:
            raise ConfigError(f"unknown metric {name!r}")
        body[name] = runners[name]().to_json()
    _emit_report(args, {"metrics": body})
    return 0


def _load_caption_sets(path) -> tuple[dict[str, list[str]], bool]:
    """Caption input: JSONL with captions/caption fields, or flat text lines.

    Returns (sets keyed by image id, grouped?) where grouped means real
    per-image candidate sets were supplied.
    """
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if first.lstrip().startswith("{"):
        sets: dict[str, list[str]] = {}
        for line_no, obj in _data_lines(path):
            image_id = str(obj.get("image_id", f"line{line_no}"))
            if "captions" in obj:
                sets[image_id] = [str(c) for c in obj["captions"]]
            elif "caption" in obj:
                sets.setdefault(image_id, []).append(str(obj["caption"]))
            elif "reranked" in obj:
                ranks = [e["rank"] for e in obj["reranked"]]
                by_rank = {c["rank"]: c["text"] for c in obj["candidates"]}
                sets[image_id] = [by_rank[r] for r in ranks]
            else:
                raise ParseError(path, line_no, "no caption(s) field")
        return sets, True
    with open(path, encoding="utf-8") as fh:
        captions = [line.strip() for line in fh if line.strip()]
    return {"all": captions}, False


def _cmd_diversity(args: argparse.Namespace) -> int:
    sets, grouped = _load_caption_sets(args.captions)
    stopwords = load_stopwords(args.stopwords) if args.stopwords else None
    all_captions = [c for captions in sets.values() for c in captions]
    if not all_captions:
        raise ConfigError("no captions supplied")
    tokens = [t for c in all_captions for t in tokenize(c)]
    vocab = diversity.vocab_stats(all_captions, stopwords)
    body = {
        "ttr": diversity.ttr(tokens),
        "mtld": diversity.mtld(tokens, args.mtld_threshold),
        "vocab": vocab.to_json(),
        "div1": diversity.div_n(all_captions, 1),
        "div2": diversity.div_n(all_captions, 2),
        "captions": len(all_captions),
    }
    if grouped:
        body["div1_mean_per_image"] = sum(
            diversity.div_n(c, 1) for c in sets.values()) / len(sets)
        body["div2_mean_per_image"] = sum(
            diversity.div_n(c, 2) for c in sets.values()) / len(sets)
    if args.refs:
        refs = _load_references(args.refs)
        if not grouped:
            raise ConfigError("mbleu needs per-image caption sets, not a flat list")
        body["mbleu"] = metrics.mbleu(sets, refs, args.mbleu_mode).to_json()
    _emit_report(args, body)
    return 0


# --------------------------------------------------------------------------
# significance
# --------------------------------------------------------------------------

def _cmd_significance(args: argparse.Namespace) -> int:
    if args.scores:
        items = []
        for line_no, obj in _data_lines(args.scores):
            try:
                items.append((str(obj["image_id"]), float(obj["a"]), float(obj["b"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(args.scores, line_no, f"bad score record: {exc!r}")
        paired = stats.PairedScores.from_score_pairs(items)
    else:
        if not (args.a and args.b and args.refs):
            raise ConfigError("significance needs --a, --b and --refs (or --scores)")
        refs = _load_references(args.refs)
        corpus_a = metrics.TokenizedCorpus.from_text(_load_hypotheses(args.a), refs)
        corpus_b = metrics.TokenizedCorpus.from_text(_load_hypotheses(args.b), refs)
        paired = stats.PairedScores.from_corpora(
            _metric_name(args.metric), corpus_a, corpus_b, args.max_n)

    results = []
    if args.test in ("ar", "both"):
        results.append(stats.approximate_randomization(paired, args.trials, args.seed))
    if args.test in ("bootstrap", "both"):
        results.append(stats.paired_bootstrap(paired, args.trials, args.seed))
    _emit_report(args, {"results": [r.to_json() for r in results]})
    return 0


# --------------------------------------------------------------------------
# enrich
# --------------------------------------------------------------------------

def _cmd_enrich(args: argparse.Namespace) -> int:
    embeddings = load_embeddings(args.embeddings)
    detections: dict[str, list[RawDetection]] = {}
    for _, obj in _data_lines(args.detections):
        det = RawDetection.from_json(obj)
        detections.setdefault(det.image_id, []).append(det)
    outputs = []
    for line_no, obj in _data_lines(args.captions):
        try:
            image_id, caption = str(obj["image_id"]), str(obj["caption"])
        except KeyError as exc:
            raise ParseError(args.captions, line_no, f"bad caption record: {exc!r}")
        kept = filter_by_threshold(detections.get(image_id, []), args.tau)
        record = align_contexts(kept, caption, embeddings, top_k=args.topk)
        obj_out = record.to_json()
        obj_out["image_id"] = image_id  # images with zero detections keep their id
        outputs.append(obj_out)
    _emit_jsonl(args, outputs)
    return 0


# --------------------------------------------------------------------------
# score (formula debugging on literal numbers)
# --------------------------------------------------------------------------

def _cmd_score(args: argparse.Namespace) -> int:
    prior = probability(args.prior, exact=True)
    sim = similarity(args.sim)
    pc = probability(args.pc, exact=True)
    if args.variant == "positive":
        value = revise_positive(prior, compute_alpha(sim, pc))
    elif args.variant == "negative":
        value = revise_negative(prior, compute_alpha(sim, pc))
    elif args.variant == "sim-only":
        value = revise_sim_only(sim, pc)
    elif args.variant == "joint":
        if args.sim2 is None:
            raise ConfigError("joint scoring needs --sim2")
        pc2 = probability(args.pc2 if args.pc2 is not None else args.pc, exact=True)
        value = revise_positive(prior, compute_alpha(sim, pc)) * revise_positive(
            prior, compute_alpha(similarity(args.sim2), pc2))
    elif args.variant == "two-context-fusion":
        if args.sim2 is None or args.pc2 is None:
            raise ConfigError("fusion scoring needs --sim2 and --pc2")
        sim2 = similarity(args.sim2)
        pc2 = probability(args.pc2, exact=True)
        cond1 = revise_positive(prior, compute_alpha(sim, pc))
        cond2 = revise_positive(prior, compute_alpha(sim2, pc2))
        value = fuse_two_contexts(FusionInputs(
            sim_w_c1=sim, sim_w_c2=sim2,
            sim_c1_c2=similarity(args.sim_cc), p_c1=pc, p_c2=pc2,
            cond1=cond1, cond2=cond2))
    else:
        raise ConfigError(f"unknown variant {args.variant!r}")
    print(repr(value))
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="revrank")
    parser.add_argument("--version", action="version", version=f"revrank {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)
    by_name = {}

    def sub(name, **kwargs):
        p = subs.add_parser(name, **kwargs)
        p.add_argument("--config", help="key=value defaults file; flags override")
        p.add_argument("--out", help="output path (default: stdout)")
        by_name[name] = p
        return p

    p = sub("rerank", help="re-rank n-best candidate lists")
    p.add_argument("--candidates", required=True)
    p.add_argument("--sims", help="precomputed similarity JSONL")
    p.add_argument("--embeddings", help="word vectors (token v1 .. vD per line)")
    p.add_argument("--corpus", help="corpus for the unigram LM (one sentence per line)")
    p.add_argument("--variant", default="positive",
                   choices=["positive", "negative", "sim-only", "joint",
                            "two-context-fusion"])
    p.add_argument("--prior-source", default="external-lm",
                   choices=["beam", "external-lm", "product-of-both"])
    p.add_argument("--lm-prior", default="mean", choices=["mean", "product"])
    p.add_argument("--informativeness", default="single-lm",
                   choices=["single-lm", "multi-mean"])
    p.add_argument("--contexts", default="top1", choices=["top1", "top3"])
    p.add_argument("--sim-pool", default="max", choices=["max", "mean"])
    p.add_argument("--threshold", type=float, default=0.2,
                   help="context confidence threshold")
    p.add_argument("--smoothing", type=float, default=1.0,
                   help="unigram LM additive smoothing")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_rerank)

    p = sub("metrics", help="overlap metrics against references")
    p.add_argument("--hyp", required=True)
    p.add_argument("--refs", required=True)
    p.add_argument("--metrics", default="bleu,nist,rouge,cider")
    p.add_argument("--max-n", type=int, default=4)
    p.set_defaults(func=_cmd_metrics)

    p = sub("diversity", help="lexical diversity of a caption set")
    p.add_argument("--captions", required=True)
    p.add_argument("--stopwords")
    p.add_argument("--refs", help="enables mBLEU against human references")
    p.add_argument("--mbleu-mode", default="best5", choices=["best5", "bestbeam"])
    p.add_argument("--mtld-threshold", type=float,
                   default=diversity.MTLD_DEFAULT_THRESHOLD)
    p.set_defaults(func=_cmd_diversity)

    p = sub("significance", help="paired significance tests between two systems")
    p.add_argument("--a", help="baseline system output")
    p.add_argument("--b", help="new system output")
    p.add_argument("--refs")
    p.add_argument("--metric", default="bleu")
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--scores", help="precomputed per-item scores {image_id,a,b}")
    p.add_argument("--test", default="both", choices=["ar", "bootstrap", "both"])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_significance)

    p = sub("enrich", help="threshold-filter and align detections to captions")
    p.add_argument("--detections", required=True)
    p.add_argument("--captions", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--tau", type=float, default=0.2)
    p.add_argument("--topk", type=int, default=3)
    p.set_defaults(func=_cmd_enrich)

    p = sub("score", help="evaluate the revision formulas on literal numbers")
    p.add_argument("--prior", type=float, required=True)
    p.add_argument("--sim", type=float, required=True)
    p.add_argument("--pc", type=float, required=True)
    p.add_argument("--variant", default="positive",
                   choices=["positive", "negative", "sim-only", "joint",
                            "two-context-fusion"])
    p.add_argument("--sim2", type=float)
    p.add_argument("--pc2", type=float)
    p.add_argument("--sim-cc", type=float, default=0.0)
    p.set_defaults(func=_cmd_score)

    return parser, by_name


def _parse_config_file(path) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(path, line_no, "expected key = value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(subparser: argparse.ArgumentParser, values: dict[str, str]) -> None:
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None:
            raise ConfigError(f"unknown config key {key!r}")
        defaults[key] = action.type(raw) if action.type else raw
    subparser.set_defaults(**defaults)


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, by_name = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            _apply_config(by_name[args.subcommand], _parse_config_file(args.config))
            args = parser.parse_args(argv)
        return args.func(args)
    except RevrankError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 4
    except OSError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
