#!/usr/bin/env python3
"""
slpt command line
Subcommands wiring the pipeline: encode, decode, train-tagger, tag, analyze,
evaluate-parse, evaluate-sentiment, merge-dicts, build-dict and bench.

Exit codes: 0 ok, 1 data error, 2 usage error.
Data goes to --out or standard output; logs go to standard error.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from pipeline_config import PipelineConfig
from sentiment.lexicons import (
    Lexicon, build_title_dictionary, load_lexicon, load_modifiers, load_negations, merge,
)
from sentiment.polarity_engine import (
    AGGREGATIONS, PolarityEngine, ReviewResult, label_of_stars, majority_label,
)
from syntax.linearizer import (
    Encoding, LabelDecoder, LabelSequence, encode, format_label_file, read_labels,
)
from syntax.tagger import FrequencyModel
from syntax.treebank_io import (
    DependencyTree, ConlluReader, group_reviews, simple_tokenize, write_conllu,
)
from testing.evaluation_metrics import (
    EvaluationError, eval_labels, eval_parse, plot_confusion_matrix,
)
from testing.throughput_bench import CorpusCounts, bench, decode_score_pipeline


ENCODINGS = [e.value for e in Encoding]
EXIT_OK, EXIT_DATA_ERROR = 0, 1

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReviewRecord:
    """One line of a review JSONL file."""
    id: str
    title: str = ''
    text: str = ''
    stars: Optional[int] = None
    label: Optional[str] = None
    polarities: Tuple[str, ...] = ()

    def gold_label(self) -> Optional[str]:
        """Ternary gold label: explicit label, else majority of polarities, else merged stars."""
        if self.label:
            return self.label
        if self.polarities:
            return majority_label(self.polarities).value
        if self.stars is not None:
            return label_of_stars(self.stars).value
        return None


def read_reviews(path) -> List[ReviewRecord]:
    """
    Read review JSONL ({id, title, text, stars, label, polarities}).

    Records with stars outside 1..5 keep their text but lose the rating (warned).
    """
    records, seen, rejected = [], set(), 0
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{line_number}: invalid JSON ({e.msg})")
            if not isinstance(data, dict) or 'id' not in data:
                raise ValueError(f"{path}:{line_number}: expected an object with an 'id'")
            review_id = str(data['id'])
            if review_id in seen:
                raise ValueError(f"{path}:{line_number}: duplicate review id {review_id!r}")
            seen.add(review_id)

            stars = data.get('stars')
            if stars is not None and (isinstance(stars, bool) or not isinstance(stars, int)
                                      or not 1 <= stars <= 5):
                logger.debug(f"{path}:{line_number}: stars {stars!r} rejected")
                rejected += 1
                stars = None
            polarities = data.get('polarities') or ()
            records.append(ReviewRecord(review_id, data.get('title') or '', data.get('text') or '',
                                        stars, data.get('label'), tuple(polarities)))
    if rejected:
        logger.warning(f"⚠ {rejected} record(s) with stars outside 1..5 lost their rating")
    return records


# ---------------------------------------------------------------------------
# Input helpers

def _read_treebank(path, strict: bool) -> List[DependencyTree]:
    reader = ConlluReader(strict=strict)
    trees = reader.parse(Path(path).read_text(encoding='utf-8'))
    logger.info(f"✓ Read {reader.stats['sentences']} sentences ({reader.stats['tokens']} tokens) from {path}")
    return trees


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text, encoding='utf-8')
        logger.info(f"✓ Wrote {out}")
    else:
        sys.stdout.write(text)


def _jsonl(records: Iterable[Dict[str, Any]]) -> str:
    return ''.join(json.dumps(r, ensure_ascii=False) + '\n' for r in records)


def _decode_all(sequences: Sequence[LabelSequence]) -> List[DependencyTree]:
    decoder = LabelDecoder()
    trees = [decoder.decode(seq) for seq in sequences]
    summary = decoder.summary()
    repairs = {k: v for k, v in summary.items() if k not in decoder.stats}
    if repairs:
        logger.warning(f"⚠ Repaired {summary['repaired_sentences']} of {summary['sentences']} "
                       f"sentence(s): {repairs}")
    return trees


def _tag_reviews(records: Sequence[ReviewRecord], model: FrequencyModel) -> List[Tuple[str, List[LabelSequence]]]:
    """Raw review text -> tokenize -> tag, one label sequence per sentence."""
    reviews = []
    for record in records:
        sentences = simple_tokenize(record.text)
        sequences = [
            model.predict(forms, f"{record.id}-{k}",
                          (f"# review_id = {record.id}", f"# sent_id = {record.id}-{k}"))
            for k, forms in enumerate(sentences, 1)
        ]
        reviews.append((record.id, sequences))
    return reviews


def _load_engine(args, config: PipelineConfig) -> PolarityEngine:
    if not args.dict:
        raise ValueError("at least one --dict is required")
    lexicons: List[Lexicon] = [load_lexicon(path) for path in args.dict]
    lexicon = merge(lexicons[0], lexicons[1:])
    modifiers = load_modifiers(config.modifiers_file(), intensifier_factor=config.intensifier_factor,
                               weakener_factor=config.weakener_factor)
    negations = load_negations(config.negations_file())
    logger.info(f"✓ Engine: {len(lexicon)} lexicon entries ({lexicon.name}), "
                f"{len(modifiers)} modifiers, {len(negations)} negations, aggregation={config.aggregation}")
    return PolarityEngine(lexicon, modifiers, negations, config.aggregation)


def _is_jsonl(path) -> bool:
    return Path(path).suffix.lower() in ('.jsonl', '.json')


def _is_conllu(path) -> bool:
    return Path(path).suffix.lower() in ('.conllu', '.conll')


# ---------------------------------------------------------------------------
# Subcommands

def cmd_encode(args, config: PipelineConfig) -> int:
    trees = _read_treebank(args.input, args.strict)
    sequences = [encode(tree, args.encoding) for tree in trees]
    _emit(format_label_file(sequences), args.out)
    return EXIT_OK


def cmd_decode(args, config: PipelineConfig) -> int:
    sequences = read_labels(args.input, args.encoding)
    _emit(write_conllu(_decode_all(sequences)), args.out)
    return EXIT_OK


def cmd_train_tagger(args, config: PipelineConfig) -> int:
    trees = _read_treebank(args.input, args.strict)
    model = FrequencyModel.train(trees, args.encoding)
    model.save(args.out)
    logger.info(f"✓ Model saved to {args.out}")
    return EXIT_OK


def cmd_tag(args, config: PipelineConfig) -> int:
    model = FrequencyModel.load(args.model)
    if _is_conllu(args.input):
        sequences = [model.predict(tree.forms, tree.sentence_id, tree.comments)
                     for tree in _read_treebank(args.input, args.strict)]
    elif _is_jsonl(args.input):
        sequences = [seq for _, group in _tag_reviews(read_reviews(args.input), model) for seq in group]
    else:
        text = Path(args.input).read_text(encoding='utf-8')
        sequences = [model.predict(forms, f"s{k}", (f"# sent_id = s{k}",))
                     for k, forms in enumerate(simple_tokenize(text), 1)]
    _emit(format_label_file(sequences), args.out)
    return EXIT_OK


def cmd_analyze(args, config: PipelineConfig) -> int:
    engine = _load_engine(args, config)

    if _is_jsonl(args.input):
        if not args.model:
            raise ValueError("JSONL input needs --model to tag raw text")
        model = FrequencyModel.load(args.model)
        tagged = _tag_reviews(read_reviews(args.input), model)
        reviews = [(rid, _decode_all(seqs)) for rid, seqs in tagged if seqs]
        skipped = len(tagged) - len(reviews)
        if skipped:
            logger.warning(f"⚠ Skipped {skipped} review(s) without text")
    else:
        reviews = group_reviews(_read_treebank(args.input, args.strict))

    results = engine.score_reviews(reviews, threads=config.threads, progress=args.progress)
    _emit(_jsonl(r.to_record(trace=args.trace) for r in results), args.out)
    _log_label_counts(results)
    return EXIT_OK


def _log_label_counts(results: Sequence[ReviewResult]):
    counts: Dict[str, int] = {}
    for r in results:
        counts[r.label.value] = counts.get(r.label.value, 0) + 1
    logger.info(f"✓ Scored {len(results)} review(s): {dict(sorted(counts.items()))}")


def cmd_evaluate_parse(args, config: PipelineConfig) -> int:
    gold = _read_treebank(args.gold, args.strict)
    if _is_conllu(args.pred):
        pred = _read_treebank(args.pred, args.strict)
    else:
        if not args.encoding:
            raise ValueError("--encoding is required when --pred is a label file")
        pred = _decode_all(read_labels(args.pred, args.encoding))
    metrics = eval_parse(gold, pred)
    if args.json:
        print(json.dumps(metrics.to_dict()))
    else:
        metrics.print_table()
    return EXIT_OK


def cmd_evaluate_sentiment(args, config: PipelineConfig) -> int:
    gold = {r.id: r for r in read_reviews(args.gold)}
    predictions = []
    with open(args.pred, 'r', encoding='utf-8') as f:
        for line in f:
            if line.strip():
                predictions.append(json.loads(line))

    y_true, y_pred = [], []
    for record in predictions:
        review_id = str(record.get('id'))
        if review_id not in gold:
            raise EvaluationError(f"prediction {review_id!r} has no gold review")
        if args.scale == 'stars':
            if gold[review_id].stars is None:
                raise EvaluationError(f"gold review {review_id!r} has no star rating")
            if 'stars' not in record:
                raise EvaluationError(f"prediction {review_id!r} has no 'stars' field")
            y_true.append(gold[review_id].stars)
            y_pred.append(record['stars'])
        else:
            label = gold[review_id].gold_label()
            if label is None:
                raise EvaluationError(f"gold review {review_id!r} has no label, polarities or stars")
            if 'label' not in record:
                raise EvaluationError(f"prediction {review_id!r} has no 'label' field")
            y_true.append(label)
            y_pred.append(record['label'])

    metrics = eval_labels(y_true, y_pred, args.scale)
    if args.json:
        print(json.dumps(metrics.to_dict()))
    else:
        metrics.print_table()
    if args.plot:
        plot_confusion_matrix(metrics, args.plot)
        logger.info(f"✓ Confusion matrix saved to: {args.plot}")
    return EXIT_OK


def cmd_merge_dicts(args, config: PipelineConfig) -> int:
    lexicons = [load_lexicon(path) for path in args.dicts]
    merged = merge(lexicons[0], lexicons[1:])
    logger.info(f"✓ Merged {merged.name}: {len(merged)} entries")
    _emit(merged.to_tsv(), args.out)
    return EXIT_OK


def cmd_build_dict(args, config: PipelineConfig) -> int:
    records = read_reviews(args.input)
    pairs = [(r.title, r.stars) for r in records if r.title and r.stars is not None]
    threshold = args.sdv_threshold if args.sdv_threshold is not None else config.sdv_threshold
    min_count = args.min_count if args.min_count is not None else config.min_count
    lexicon = build_title_dictionary(pairs, args.titles, threshold, min_count)
    _emit(lexicon.to_tsv(), args.out)
    return EXIT_OK


def cmd_bench(args, config: PipelineConfig) -> int:
    engine = _load_engine(args, config) if args.dict else None
    encoding = args.encoding or Encoding.RELATIVE.value

    if _is_jsonl(args.input):
        if not args.model:
            raise ValueError("JSONL input needs --model to tag raw text")
        model = FrequencyModel.load(args.model)
        records = [r for r in read_reviews(args.input) if r.text.strip()]
        counts = CorpusCounts.of_reviews(_tag_reviews(records, model))
        pipeline = decode_score_pipeline(lambda: _tag_reviews(records, model), engine)
    else:
        if _is_conllu(args.input):
            grouped = group_reviews(_read_treebank(args.input, args.strict))
            reviews = [(rid, [encode(tree, encoding) for tree in trees]) for rid, trees in grouped]
        else:
            sequences = read_labels(args.input, encoding)
            reviews = [(seq.sentence_id, [seq]) for seq in sequences]
        counts = CorpusCounts.of_reviews(reviews)
        pipeline = decode_score_pipeline(reviews, engine)

    throughput = bench(pipeline, counts, config.repetitions, hardware_note=config.hardware_note)
    if args.json:
        print(json.dumps(throughput.to_dict()))
    else:
        throughput.print_table()
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--verbose', '-v', action='store_true', help='Enable debug logging')
    common.add_argument('--quiet', action='store_true', help='Only log warnings and errors')
    common.add_argument('--config', type=str, default=None, help='YAML configuration file')
    common.add_argument('--threads', type=int, default=None, help='Worker threads (default: from hardware)')
    common.add_argument('--strict', action='store_true', help='Fail on the first invalid sentence')
    common.add_argument('--progress', action='store_true', help='Show progress bars on standard error')

    parser = argparse.ArgumentParser(
        prog='slpt',
        description='Sequence-labeling dependency parsing and explainable polarity toolkit',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s encode --input train.conllu --encoding rel --out train.labels.tsv
  %(prog)s decode --input pred.labels.tsv --encoding rel --out pred.conllu
  %(prog)s analyze --input reviews.conllu --dict socal.tsv --dict vader.tsv --trace
  %(prog)s bench --input reviews.conllu --dict socal.tsv --repetitions 5
        """
    )
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('encode', parents=[common], help='CoNLL-U -> label TSV')
    p.add_argument('--input', required=True, help='CoNLL-U treebank')
    p.add_argument('--encoding', required=True, choices=ENCODINGS)
    p.add_argument('--out', help='Output label file (default: stdout)')
    p.set_defaults(handler=cmd_encode)

    p = sub.add_parser('decode', parents=[common], help='label TSV -> CoNLL-U (always valid)')
    p.add_argument('--input', required=True, help='Label TSV file')
    p.add_argument('--encoding', required=True, choices=ENCODINGS)
    p.add_argument('--out', help='Output CoNLL-U file (default: stdout)')
    p.set_defaults(handler=cmd_decode)

    p = sub.add_parser('train-tagger', parents=[common], help='Train the frequency tagger')
    p.add_argument('--input', required=True, help='Gold CoNLL-U treebank')
    p.add_argument('--encoding', required=True, choices=ENCODINGS)
    p.add_argument('--out', required=True, help='Model file')
    p.set_defaults(handler=cmd_train_tagger)

    p = sub.add_parser('tag', parents=[common], help='Predict labels for CoNLL-U, JSONL reviews or raw text')
    p.add_argument('--input', required=True)
    p.add_argument('--model', required=True, help='Frequency model file')
    p.add_argument('--out', help='Output label file (default: stdout)')
    p.set_defaults(handler=cmd_tag)

    p = sub.add_parser('analyze', parents=[common], help='Score review polarity')
    p.add_argument('--input', required=True, help='CoNLL-U treebank or review JSONL')
    p.add_argument('--dict', action='append', default=[], help='Sentiment dictionary (repeatable; first wins)')
    p.add_argument('--modifiers', help='Modifier list (default: per --language config)')
    p.add_argument('--negations', help='Negation list (default: per --language config)')
    p.add_argument('--agg', choices=AGGREGATIONS, default=None, help='Review aggregation')
    p.add_argument('--model', help='Frequency model (required for JSONL input)')
    p.add_argument('--trace', action='store_true', help='Include per-node traces')
    p.add_argument('--out', help='Output JSONL (default: stdout)')
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser('evaluate-parse', parents=[common], help='UAS/LAS against a gold treebank')
    p.add_argument('--gold', required=True)
    p.add_argument('--pred', required=True, help='CoNLL-U or label TSV (with --encoding)')
    p.add_argument('--encoding', choices=ENCODINGS)
    p.add_argument('--json', action='store_true')
    p.set_defaults(handler=cmd_evaluate_parse)

    p = sub.add_parser('evaluate-sentiment', parents=[common], help='Accuracy / F1 of polarity predictions')
    p.add_argument('--pred', required=True, help='analyze output JSONL')
    p.add_argument('--gold', required=True, help='Review JSONL with stars, label or polarities')
    p.add_argument('--scale', choices=['ternary', 'stars'], default='ternary')
    p.add_argument('--plot', help='Save a confusion-matrix PNG')
    p.add_argument('--json', action='store_true')
    p.set_defaults(handler=cmd_evaluate_sentiment)

    p = sub.add_parser('merge-dicts', parents=[common], help='Merge dictionaries (first wins)')
    p.add_argument('dicts', nargs='+')
    p.add_argument('--out', help='Output TSV (default: stdout)')
    p.set_defaults(handler=cmd_merge_dicts)

    p = sub.add_parser('build-dict', parents=[common], help='Derive a dictionary from review titles')
    p.add_argument('input', help='Review JSONL with title and stars')
    p.add_argument('--titles', choices=['short', 'all'], default='short')
    p.add_argument('--sdv-threshold', type=float, default=None)
    p.add_argument('--min-count', type=int, default=None)
    p.add_argument('--out', help='Output TSV (default: stdout)')
    p.set_defaults(handler=cmd_build_dict)

    p = sub.add_parser('bench', parents=[common], help='Throughput of decode(+score)')
    p.add_argument('--input', required=True, help='CoNLL-U, label TSV or review JSONL')
    p.add_argument('--encoding', choices=ENCODINGS, help='Label encoding (default: rel)')
    p.add_argument('--model', help='Frequency model (required for JSONL input)')
    p.add_argument('--dict', action='append', default=[], help='Score with these dictionaries')
    p.add_argument('--modifiers')
    p.add_argument('--negations')
    p.add_argument('--agg', choices=AGGREGATIONS, default=None)
    p.add_argument('--repetitions', type=int, default=None)
    p.add_argument('--json', action='store_true')
    p.set_defaults(handler=cmd_bench)

    return parser


def setup_logging(verbose: bool = False, quiet: bool = False):
    """Configure root logging on standard error."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        force=True,
    )


def _config_for(args) -> PipelineConfig:
    overrides = {
        'threads': args.threads,
        'modifiers_path': getattr(args, 'modifiers', None),
        'negations_path': getattr(args, 'negations', None),
        'aggregation': getattr(args, 'agg', None),
        'repetitions': getattr(args, 'repetitions', None),
    }
    return PipelineConfig.load(config_path=args.config, overrides=overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose, args.quiet)

    try:
        config = _config_for(args)
        logger.debug(f"Configuration: {config.to_dict()}")
        return args.handler(args, config)
    except (ValueError, OSError) as e:
        logger.error(str(e))
        return EXIT_DATA_ERROR
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        return EXIT_DATA_ERROR


if __name__ == '__main__':
    sys.exit(main())
