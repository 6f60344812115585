#!/usr/bin/env python3
"""
Sentiment Lexicons
Loads, validates, merges and derives the dictionaries used by the polarity engine.

File formats (UTF-8, '#' comments, blank lines ignored):
- lexicon:   word<TAB>score    score in [-5, +5]
- modifiers: word<TAB>factor   factor > 0 (>1 intensifies, <1 weakens),
             or the keyword intensifier|weakener
- negations: one word per line
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from syntax.treebank_io import is_punctuation_token, simple_tokenize


SCORE_MIN = -5.0
SCORE_MAX = 5.0

logger = logging.getLogger(__name__)


class LexiconError(ValueError):
    """Invalid dictionary file content."""

    def __init__(self, message: str, path=None, line_number: Optional[int] = None):
        location = str(path) if path else '<lexicon>'
        if line_number is not None:
            location += f":{line_number}"
        super().__init__(f"{location}: {message}")
        self.path = path
        self.line_number = line_number


@dataclass(frozen=True)
class SentimentEntry:
    key: str
    score: float
    source: str = ''

    def __post_init__(self):
        if not self.key or any(ch.isspace() for ch in self.key):
            raise ValueError(f"invalid lexicon key {self.key!r}")
        if not SCORE_MIN <= self.score <= SCORE_MAX:
            raise ValueError(f"score {self.score} for {self.key!r} outside [-5, 5]")


@dataclass(frozen=True)
class Lexicon:
    """Sentiment dictionary: lowercase key -> SentimentEntry."""
    name: str
    entries: Dict[str, SentimentEntry] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def get(self, key: str) -> Optional[SentimentEntry]:
        return self.entries.get(key)

    def keys(self):
        return self.entries.keys()

    @classmethod
    def from_scores(cls, name: str, scores: Dict[str, float]) -> 'Lexicon':
        return cls(name, {k.lower(): SentimentEntry(k.lower(), float(v), name) for k, v in scores.items()})

    def to_tsv(self) -> str:
        return ''.join(f"{key}\t{self.entries[key].score:g}\n" for key in sorted(self.entries))


@dataclass(frozen=True)
class ModifierEntry:
    key: str
    factor: float

    def __post_init__(self):
        if self.factor <= 0:
            raise ValueError(f"modifier factor for {self.key!r} must be > 0, got {self.factor}")


@dataclass(frozen=True)
class ModifierLexicon:
    name: str
    entries: Dict[str, ModifierEntry] = field(default_factory=dict)

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def factor(self, key: str) -> float:
        return self.entries[key].factor

    @classmethod
    def from_factors(cls, name: str, factors: Dict[str, float]) -> 'ModifierLexicon':
        return cls(name, {k.lower(): ModifierEntry(k.lower(), float(v)) for k, v in factors.items()})


@dataclass(frozen=True)
class NegationSet:
    words: frozenset

    def __contains__(self, key: str) -> bool:
        return key in self.words

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class TitleStats:
    """Star judgments of the reviews whose title contains `word`."""
    word: str
    count: int
    mean: float
    sdv: float


def _data_lines(path) -> Iterable[Tuple[int, List[str]]]:
    """Yield (line_number, tab columns) for non-comment, non-blank lines."""
    text = Path(path).read_text(encoding='utf-8')
    for line_number, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        yield line_number, [c.strip() for c in line.rstrip('\n').split('\t')]


def _number(value: str, path, line_number: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise LexiconError(f"not a number: {value!r}", path, line_number)


def _keyed_entries(path, kind: str, keywords: Optional[Dict[str, float]] = None):
    """Shared loop for word<TAB>number files: lowercase keys, last duplicate wins."""
    keywords = keywords or {}
    values: Dict[str, Tuple[float, int]] = {}
    for line_number, columns in _data_lines(path):
        if len(columns) < 2:
            raise LexiconError(f"expected word<TAB>{kind}", path, line_number)
        key = columns[0].lower()
        if not key or any(ch.isspace() for ch in key):
            logger.warning(f"⚠ {path}:{line_number}: multiword key {key!r} skipped")
            continue
        value = keywords.get(columns[1].lower())
        if value is None:
            value = _number(columns[1], path, line_number)
        if key in values:
            logger.warning(f"⚠ {path}:{line_number}: duplicate key {key!r}, last value wins")
        values[key] = (value, line_number)
    return values


def load_lexicon(path, name: Optional[str] = None) -> Lexicon:
    """
    Load a word<TAB>score dictionary.

    Args:
        path: TSV file
        name: Lexicon name (default: file stem)

    Raises:
        LexiconError: score outside [-5, 5] or unparsable line
    """
    name = name or Path(path).stem
    entries = {}
    for key, (score, line_number) in _keyed_entries(path, 'score').items():
        if not SCORE_MIN <= score <= SCORE_MAX:
            raise LexiconError(f"score {score:g} for {key!r} outside [-5, 5]", path, line_number)
        entries[key] = SentimentEntry(key, score, name)
    logger.info(f"✓ Loaded lexicon {name} ({len(entries)} entries)")
    return Lexicon(name, entries)


def load_modifiers(path, name: Optional[str] = None, intensifier_factor: float = 1.25,
                   weakener_factor: float = 0.75) -> ModifierLexicon:
    """
    Load a word<TAB>factor file; factors must be positive.

    The factor column may also read `intensifier` or `weakener`, which take
    the configured default factors.
    """
    name = name or Path(path).stem
    keywords = {'intensifier': intensifier_factor, 'weakener': weakener_factor}
    entries = {}
    for key, (factor, line_number) in _keyed_entries(path, 'factor', keywords).items():
        if factor <= 0:
            raise LexiconError(f"factor {factor:g} for {key!r} must be > 0", path, line_number)
        entries[key] = ModifierEntry(key, factor)
    return ModifierLexicon(name, entries)


def load_negations(path) -> NegationSet:
    """Load one negation word per line (first column)."""
    words = {columns[0].lower() for _, columns in _data_lines(path) if columns[0]}
    if not words:
        raise LexiconError("negation list is empty", path)
    return NegationSet(frozenset(words))


def merge(base: Lexicon, extras: Sequence[Lexicon] = ()) -> Lexicon:
    """
    Merge dictionaries with precedence to the earliest one.

    A key already present keeps its score; later dictionaries only add keys
    they alone cover.
    """
    if not extras:
        return base
    entries = dict(base.entries)
    for extra in extras:
        for key, entry in extra.entries.items():
            if key not in entries:
                entries[key] = entry
    name = '+'.join([base.name] + [extra.name for extra in extras])
    return Lexicon(name, entries)


def _title_words(title: str) -> List[str]:
    words = []
    for sentence in simple_tokenize(title):
        words.extend(w.lower() for w in sentence if not is_punctuation_token(w))
    return words


def title_statistics(reviews: Iterable[Tuple[str, int]], mode: str = 'short') -> Dict[str, TitleStats]:
    """
    Per-word star statistics over review titles.

    Args:
        reviews: (title, stars) pairs, stars in 1..5
        mode: 'short' (single-word titles only) or 'all'

    Returns:
        word -> TitleStats (population standard deviation)
    """
    if mode not in ('short', 'all'):
        raise ValueError(f"unknown title mode {mode!r} (expected short or all)")

    judgments: Dict[str, List[int]] = defaultdict(list)
    rejected = 0
    for title, stars in reviews:
        if isinstance(stars, bool) or not isinstance(stars, int) or not 1 <= stars <= 5:
            rejected += 1
            logger.debug(f"Rejected title record {title!r}: stars={stars!r}")
            continue
        words = _title_words(title or '')
        if mode == 'short' and len(words) != 1:
            continue
        for word in dict.fromkeys(words):
            judgments[word].append(stars)

    if rejected:
        logger.warning(f"⚠ Rejected {rejected} title record(s) with stars outside 1..5")

    return {
        word: TitleStats(word, len(values), float(np.mean(values)), float(np.std(values)))
        for word, values in judgments.items()
    }


def build_title_dictionary(reviews: Iterable[Tuple[str, int]], mode: str = 'short',
                           sdv_threshold: float = 0.6, min_count: int = 5,
                           name: Optional[str] = None) -> Lexicon:
    """
    Derive a lexicon from review titles: keep words with low judgment spread.

    Kept words have count >= min_count and sdv < sdv_threshold; their score
    maps the mean star value from [1, 5] onto [-5, +5].
    """
    name = name or f"titles-{mode}"
    entries = {}
    for word, stats in sorted(title_statistics(reviews, mode).items()):
        if stats.count < min_count or stats.sdv >= sdv_threshold:
            continue
        if any(ch.isspace() for ch in word):
            continue
        # inverse of the 1-5 normalization: 1 -> -5, 3 -> 0, 5 -> +5
        score = (stats.mean - 3.0) * 2.5
        entries[word] = SentimentEntry(word, min(SCORE_MAX, max(SCORE_MIN, score)), name)
    logger.info(f"✓ Title dictionary {name}: {len(entries)} words kept")
    return Lexicon(name, entries)
