#!/usr/bin/env python3
"""
Polarity Engine
Compositional, explainable polarity over dependency trees.

Per node, bottom-up:
    subtree(n) = (-1)^k * (product of modifier factors) * (base(n) + sum of content subtrees)

- base(n): lexicon score of the lowercase lemma, else of the lowercase form, else 0
- MODIFIER child: form in the modifier list AND deprel advmod
- NEGATOR child: form in the negation list (any deprel); wins over MODIFIER
- every other child is CONTENT

Conversions between the -5..+5 lexicon scale, the 1-5 star scale and
Negative/Neutral/Positive labels live here too.
"""

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from numbers import Integral
from typing import Dict, Iterable, List, Sequence, Tuple

from tqdm import tqdm

from sentiment.lexicons import Lexicon, ModifierLexicon, NegationSet
from syntax.treebank_io import DependencyTree, Token


AGGREGATIONS = ('sum', 'majority')


class PolarityLabel(Enum):
    NEGATIVE = 'Negative'
    NEUTRAL = 'Neutral'
    POSITIVE = 'Positive'

    @classmethod
    def parse(cls, value) -> 'PolarityLabel':
        if isinstance(value, PolarityLabel):
            return value
        text = str(value).strip().lower()
        for label in cls:
            if label.value.lower() == text:
                return label
        raise ValueError(f"unknown polarity label {value!r}")

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ScaleSpec:
    """Affine map [min_in, max_in] -> [min_out, max_out]."""
    min_in: float
    max_in: float
    min_out: float
    max_out: float

    def __post_init__(self):
        if not self.max_in > self.min_in:
            raise ValueError(f"degenerate input range [{self.min_in}, {self.max_in}]")
        if not self.max_out > self.min_out:
            raise ValueError(f"degenerate output range [{self.min_out}, {self.max_out}]")


SOCAL_TO_FIVE = ScaleSpec(-5.0, 5.0, 1.0, 5.0)


def clamp(value: float, low: float = -5.0, high: float = 5.0) -> float:
    return min(high, max(low, value))


def normalize(value: float, spec: ScaleSpec = SOCAL_TO_FIVE) -> float:
    """Clamp to the input range, then map affinely onto the output range."""
    clamped = clamp(value, spec.min_in, spec.max_in)
    return ((clamped - spec.min_in) / (spec.max_in - spec.min_in)) * (spec.max_out - spec.min_out) + spec.min_out


def socal_to_five(value: float) -> int:
    """
    Bucket a -5..+5 score into 1..5 stars.

    Intervals are lower-inclusive, the last one closed:
    [-5,-3)->1, [-3,-1)->2, [-1,1)->3, [1,3)->4, [3,5]->5
    """
    if not -5.0 <= value <= 5.0:
        raise ValueError(f"score {value} outside [-5, 5]")
    for stars, upper in enumerate((-3.0, -1.0, 1.0, 3.0), 1):
        if value < upper:
            return stars
    return 5


def label_of_five_scale(p: float) -> PolarityLabel:
    """[0,2) Negative, [2,3] Neutral, (3,5] Positive."""
    if not 0.0 <= p <= 5.0:
        raise ValueError(f"five-scale value {p} outside [0, 5]")
    if p < 2.0:
        return PolarityLabel.NEGATIVE
    if p <= 3.0:
        return PolarityLabel.NEUTRAL
    return PolarityLabel.POSITIVE


def _check_stars(stars) -> int:
    if isinstance(stars, bool) or not isinstance(stars, Integral) or not 1 <= stars <= 5:
        raise ValueError(f"stars must be an integer in 1..5, got {stars!r}")
    return int(stars)


def label_of_stars(stars: int) -> PolarityLabel:
    """1-2 Negative, 3 Neutral, 4-5 Positive."""
    stars = _check_stars(stars)
    if stars <= 2:
        return PolarityLabel.NEGATIVE
    if stars == 3:
        return PolarityLabel.NEUTRAL
    return PolarityLabel.POSITIVE


def label_of_vader_compound(c: float) -> PolarityLabel:
    """Compound score thresholds at +/-0.05, both inclusive."""
    if not -1.0 <= c <= 1.0:
        raise ValueError(f"compound score {c} outside [-1, 1]")
    if c <= -0.05:
        return PolarityLabel.NEGATIVE
    if c >= 0.05:
        return PolarityLabel.POSITIVE
    return PolarityLabel.NEUTRAL


def majority_label(labels: Sequence) -> PolarityLabel:
    """Label with a strict majority of counts; any tie gives Neutral."""
    if not labels:
        raise ValueError("majority_label needs at least one label")
    counts = Counter(PolarityLabel.parse(label) for label in labels)
    ranked = counts.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        return PolarityLabel.NEUTRAL
    return ranked[0][0]


@dataclass(frozen=True)
class NodeTrace:
    """How one node's subtree score was obtained."""
    token_id: int
    form: str
    base_score: float
    base_source: str
    modifier_factors: Tuple[Tuple[str, float], ...]
    negated_by: Tuple[str, ...]
    content_children: Tuple[int, ...]
    subtree_score: float

    def to_dict(self) -> Dict:
        return {
            'id': self.token_id,
            'form': self.form,
            'base': self.base_score,
            'source': self.base_source,
            'modifiers': [[form, factor] for form, factor in self.modifier_factors],
            'negated_by': list(self.negated_by),
            'children': list(self.content_children),
            'subtree': self.subtree_score,
        }


def _combine(base: float, child_scores: Iterable[float],
             factors: Iterable[float], negations: int) -> float:
    # product over sorted factors is independent of sibling order
    total = base
    for score in child_scores:
        total += score
    score = math.prod(sorted(factors)) * total
    return -score if negations % 2 else score


@dataclass(frozen=True)
class PolarityResult:
    sentence_id: str
    sentence_score: float
    root: int
    traces: Tuple[NodeTrace, ...]

    def trace_of(self, token_id: int) -> NodeTrace:
        return self.traces[token_id - 1]

    def verify(self) -> bool:
        """Recompute every subtree score from its children's traces; exact comparison."""
        for trace in self.traces:
            expected = _combine(
                trace.base_score,
                (self.trace_of(child).subtree_score for child in trace.content_children),
                (factor for _, factor in trace.modifier_factors),
                len(trace.negated_by),
            )
            if expected != trace.subtree_score:
                return False
        return self.sentence_score == self.trace_of(self.root).subtree_score

    def to_dict(self) -> Dict:
        return {
            'sentence_id': self.sentence_id,
            'score': self.sentence_score,
            'nodes': [trace.to_dict() for trace in self.traces],
        }


@dataclass(frozen=True)
class ReviewResult:
    review_id: str
    sentence_scores: Tuple[float, ...]
    raw_score: float
    five_scale: float
    label: PolarityLabel
    stars: int
    sentence_labels: Tuple[PolarityLabel, ...]
    aggregation: str = 'sum'
    sentences: Tuple[PolarityResult, ...] = field(default=(), repr=False)

    def to_record(self, trace: bool = False) -> Dict:
        """JSON-lines record with stable key order."""
        record = {
            'id': self.review_id,
            'sentence_scores': list(self.sentence_scores),
            'raw': self.raw_score,
            'five_scale': self.five_scale,
            'label': self.label.value,
            'stars': self.stars,
            'aggregation': self.aggregation,
            'sentence_labels': [label.value for label in self.sentence_labels],
        }
        if trace:
            record['trace'] = [result.to_dict() for result in self.sentences]
        return record


def _base_score(token: Token, lexicon: Lexicon) -> Tuple[float, str]:
    for key in (token.lemma.lower(), token.form.lower()):
        entry = lexicon.get(key) if key else None
        if entry is not None:
            return entry.score, entry.source
    return 0.0, ''


def _post_order(children: Dict[int, List[int]], root: int) -> List[int]:
    order, stack = [], [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        stack.append((node, True))
        stack.extend((child, False) for child in reversed(children[node]))
    return order


def score_sentence(tree: DependencyTree, lexicon: Lexicon, modifiers: ModifierLexicon,
                   negations: NegationSet) -> PolarityResult:
    """
    Score one sentence bottom-up and record a trace per node.

    Args:
        tree: Valid dependency tree
        lexicon: Sentiment scores
        modifiers: Intensifier/weakener factors
        negations: Negator forms

    Returns:
        PolarityResult whose sentence_score is the root's subtree score
    """
    children = tree.children()
    traces: Dict[int, NodeTrace] = {}

    for node in _post_order(children, tree.root):
        token = tree.token(node)
        base, source = _base_score(token, lexicon)
        factors, negated_by, content = [], [], []
        for child_id in children[node]:
            child = tree.token(child_id)
            key = child.form.lower()
            if key in negations:
                negated_by.append(child.form)
            elif key in modifiers and child.deprel.split(':')[0] == 'advmod':
                factors.append((child.form, modifiers.factor(key)))
            else:
                content.append(child_id)

        factors.sort(key=lambda item: (item[1], item[0]))
        score = _combine(base, (traces[c].subtree_score for c in content),
                         (f for _, f in factors), len(negated_by))
        traces[node] = NodeTrace(node, token.form, base, source, tuple(factors),
                                 tuple(negated_by), tuple(content), score)

    ordered = tuple(traces[t.id] for t in tree.tokens)
    root = tree.root
    return PolarityResult(tree.sentence_id, traces[root].subtree_score, root, ordered)


def sentence_label(score: float) -> PolarityLabel:
    return label_of_five_scale(normalize(score))


def score_review(trees: Sequence[DependencyTree], lexicon: Lexicon, modifiers: ModifierLexicon,
                 negations: NegationSet, aggregation: str = 'sum',
                 review_id: str = '') -> ReviewResult:
    """
    Aggregate sentence scores into one review result.

    sum: raw = sum of sentence scores; five_scale = normalize(clamp(raw));
         label = label_of_five_scale(five_scale)
    majority: same raw/five_scale, label = majority_label of sentence labels
    """
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"unknown aggregation {aggregation!r} (expected sum or majority)")
    if not trees:
        raise ValueError(f"review {review_id!r} has no sentences")

    results = tuple(score_sentence(tree, lexicon, modifiers, negations) for tree in trees)
    scores = tuple(r.sentence_score for r in results)
    raw = sum(scores)
    five_scale = normalize(clamp(raw))
    labels = tuple(sentence_label(s) for s in scores)
    if aggregation == 'sum':
        label = label_of_five_scale(five_scale)
    else:
        label = majority_label(labels)
    return ReviewResult(review_id, scores, raw, five_scale, label,
                        socal_to_five(clamp(raw)), labels, aggregation, results)


class PolarityEngine:
    """Bundles the dictionaries; sentences and reviews are scored independently."""

    def __init__(self, lexicon: Lexicon, modifiers: ModifierLexicon, negations: NegationSet,
                 aggregation: str = 'sum'):
        if aggregation not in AGGREGATIONS:
            raise ValueError(f"unknown aggregation {aggregation!r} (expected sum or majority)")
        self.lexicon = lexicon
        self.modifiers = modifiers
        self.negations = negations
        self.aggregation = aggregation
        self.logger = logging.getLogger(__name__)

        overlap = sorted(k for k in modifiers.entries if k in negations)
        if overlap:
            self.logger.debug(f"Words in both modifier and negation lists (treated as negators): {overlap}")

    def score_sentence(self, tree: DependencyTree) -> PolarityResult:
        return score_sentence(tree, self.lexicon, self.modifiers, self.negations)

    def score_review(self, trees: Sequence[DependencyTree], review_id: str = '') -> ReviewResult:
        return score_review(trees, self.lexicon, self.modifiers, self.negations,
                            self.aggregation, review_id)

    def score_reviews(self, reviews: Sequence[Tuple[str, Sequence[DependencyTree]]],
                      threads: int = 1, progress: bool = False) -> List[ReviewResult]:
        """
        Score (review_id, trees) pairs; results keep input order.

        Args:
            reviews: Grouped sentences
            threads: Worker threads (1 = inline)
            progress: Show a tqdm bar on standard error
        """
        def run(item):
            review_id, trees = item
            return self.score_review(trees, review_id)

        bar = tqdm(total=len(reviews), desc='Scoring', unit='review', disable=not progress)
        results: List[ReviewResult] = []
        try:
            if threads <= 1:
                for item in reviews:
                    results.append(run(item))
                    bar.update(1)
            else:
                with ThreadPoolExecutor(max_workers=threads) as executor:
                    for result in executor.map(run, reviews):
                        results.append(result)
                        bar.update(1)
        finally:
            bar.close()
        return results

