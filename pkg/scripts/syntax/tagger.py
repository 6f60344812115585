#!/usr/bin/env python3
"""
Frequency Tagger
Most-frequent-label baseline that predicts label sequences without a neural stack.

Lookup chain per token:
1. lowercase form -> most frequent label
2. else form -> most frequent UPOS (or global fallback UPOS) -> most frequent label for that UPOS
3. else global fallback label

Label sources share one shape (a list of LabelSequence): gold (encode a
treebank), file (read a Label TSV produced by any external tagger) or this model.
"""

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

from syntax.linearizer import (
    Encoding, LabelItem, LabelSequence, encode, format_label, parse_label, try_parse_label,
)
from syntax.treebank_io import DependencyTree


MODEL_HEADER = '# slpt-frequency-model v1'
SECTIONS = ('meta', 'fallback', 'word_to_label', 'upos_to_label', 'word_to_upos')


class ModelFormatError(ValueError):
    """Malformed frequency-model file."""

    def __init__(self, message: str, line_number: int = 0):
        prefix = f"line {line_number}: " if line_number else ''
        super().__init__(prefix + message)
        self.line_number = line_number


def _argmax(counts: Counter) -> str:
    """Most frequent key; ties go to the lexicographically smallest key."""
    return min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]


@dataclass(frozen=True)
class FrequencyModel:
    """Count-based label predictor for one encoding."""
    encoding: Encoding
    fallback_label: str
    fallback_upos: str
    word_to_label: Dict[str, str] = field(default_factory=dict)
    upos_to_label: Dict[str, str] = field(default_factory=dict)
    word_to_upos: Dict[str, str] = field(default_factory=dict)

    @classmethod
    def train(cls, treebank: Sequence[DependencyTree],
              encoding: Union[str, Encoding]) -> 'FrequencyModel':
        """
        Count labels and tags over a treebank.

        Args:
            treebank: Gold trees (non-empty)
            encoding: Label encoding to learn

        Returns:
            Trained FrequencyModel
        """
        encoding = Encoding.parse(encoding)
        if not treebank:
            raise ValueError("cannot train on an empty treebank")

        word_labels: Dict[str, Counter] = defaultdict(Counter)
        upos_labels: Dict[str, Counter] = defaultdict(Counter)
        word_upos: Dict[str, Counter] = defaultdict(Counter)
        all_labels: Counter = Counter()
        all_upos: Counter = Counter()

        for tree in treebank:
            for item in encode(tree, encoding).items:
                key = item.form.lower()
                label = format_label(item.label)
                upos = item.upos or '_'
                word_labels[key][label] += 1
                upos_labels[upos][label] += 1
                word_upos[key][upos] += 1
                all_labels[label] += 1
                all_upos[upos] += 1

        model = cls(
            encoding=encoding,
            fallback_label=_argmax(all_labels),
            fallback_upos=_argmax(all_upos),
            word_to_label={w: _argmax(c) for w, c in word_labels.items()},
            upos_to_label={u: _argmax(c) for u, c in upos_labels.items()},
            word_to_upos={w: _argmax(c) for w, c in word_upos.items()},
        )
        logging.getLogger(__name__).info(
            f"✓ Trained {encoding.value} model on {len(treebank)} sentences "
            f"({len(model.word_to_label)} word types)")
        return model

    def fallback_only(self) -> 'FrequencyModel':
        """Same model with every lookup table emptied."""
        return FrequencyModel(self.encoding, self.fallback_label, self.fallback_upos)

    def predict_token(self, form: str) -> Tuple[str, str]:
        """Return (upos, label string) for one form."""
        key = form.lower()
        upos = self.word_to_upos.get(key, self.fallback_upos)
        label = self.word_to_label.get(key)
        if label is None:
            label = self.upos_to_label.get(upos, self.fallback_label)
        return upos, label

    def predict(self, forms: Sequence[str], sentence_id: str = '',
                comments: Iterable[str] = ()) -> LabelSequence:
        """
        Predict one label per form.

        Args:
            forms: Tokenized sentence
            sentence_id: Optional id carried to the output

        Returns:
            LabelSequence of len(forms) items
        """
        items = []
        for form in forms:
            upos, label = self.predict_token(form)
            items.append(LabelItem(form, '' if upos == '_' else upos, parse_label(label, self.encoding)))
        return LabelSequence(tuple(items), self.encoding, sentence_id, tuple(comments))

    def save(self, path):
        """Write the model as a sectioned key<TAB>value text file."""
        lines = [MODEL_HEADER, '[meta]', f"encoding\t{self.encoding.value}",
                 '[fallback]', f"label\t{self.fallback_label}", f"upos\t{self.fallback_upos}"]
        for name in ('word_to_label', 'upos_to_label', 'word_to_upos'):
            lines.append(f"[{name}]")
            table = getattr(self, name)
            lines.extend(f"{key}\t{table[key]}" for key in sorted(table))
        Path(path).write_text('\n'.join(lines) + '\n', encoding='utf-8')

    @classmethod
    def load(cls, path) -> 'FrequencyModel':
        """
        Read a model written by save().

        Raises:
            ModelFormatError: with the offending line number
        """
        lines = Path(path).read_text(encoding='utf-8').splitlines()
        if not lines:
            raise ModelFormatError("empty model file")
        if lines[0].strip() != MODEL_HEADER:
            raise ModelFormatError(f"expected header {MODEL_HEADER!r}", 1)

        tables: Dict[str, Dict[str, str]] = {}
        section = None
        for line_number, line in enumerate(lines[1:], 2):
            if not line.strip():
                continue
            if line.startswith('[') and line.endswith(']'):
                section = line[1:-1]
                if section not in SECTIONS:
                    raise ModelFormatError(f"unknown section [{section}]", line_number)
                tables.setdefault(section, {})
                continue
            if section is None:
                raise ModelFormatError("entry before any section", line_number)
            key, sep, value = line.partition('\t')
            if not sep or not key or not value:
                raise ModelFormatError("expected key<TAB>value", line_number)
            tables[section][key] = value

        for required in ('meta', 'fallback'):
            if required not in tables:
                raise ModelFormatError(f"missing [{required}] section")
        try:
            encoding = Encoding.parse(tables['meta'].get('encoding', ''))
        except ValueError as e:
            raise ModelFormatError(str(e))
        fallback = tables['fallback']
        if 'label' not in fallback or 'upos' not in fallback:
            raise ModelFormatError("[fallback] needs both 'label' and 'upos'")

        model = cls(
            encoding=encoding,
            fallback_label=fallback['label'],
            fallback_upos=fallback['upos'],
            word_to_label=tables.get('word_to_label', {}),
            upos_to_label=tables.get('upos_to_label', {}),
            word_to_upos=tables.get('word_to_upos', {}),
        )
        model._check_labels()
        return model

    def _check_labels(self):
        labels = [self.fallback_label, *self.word_to_label.values(), *self.upos_to_label.values()]
        for label in labels:
            if try_parse_label(label, self.encoding) is None:
                raise ModelFormatError(f"label {label!r} does not parse as {self.encoding.value}")


def gold_labels(treebank: Sequence[DependencyTree], encoding: Union[str, Encoding]) -> List[LabelSequence]:
    """Gold label source: encode a treebank."""
    return [encode(tree, encoding) for tree in treebank]
