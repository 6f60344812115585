#!/usr/bin/env python3
"""
Linearizer - Trees as Label Sequences

Encodes dependency trees as one label per token and decodes arbitrary label
sequences back into valid trees.

Encodings:
- abs: head index ("3@nsubj", root "0@root")
- rel: signed head offset ("+1@nsubj", root "R@root")
- pos: head located as the k-th word with a given UPOS to the
       left (-k) or right (+k) ("VERB:-1@obj", root "R@root")

The decoder is total: invalid labels are ignored and the tree is repaired
in a fixed order (resolve, break cycles, pick root, attach leftovers).
"""

import logging
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from syntax.treebank_io import DependencyTree, Token


ROOT_MARK = 'R'
FALLBACK_DEPREL = 'dep'


class Encoding(Enum):
    """Tree linearization scheme."""
    ABSOLUTE = "abs"
    RELATIVE = "rel"
    POS = "pos"

    @classmethod
    def parse(cls, value: Union[str, 'Encoding']) -> 'Encoding':
        if isinstance(value, Encoding):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown encoding {value!r} (expected abs, rel or pos)")


class LabelEncodingError(ValueError):
    """A tree cannot be encoded (e.g. missing UPOS for the pos encoding)."""


@dataclass(frozen=True)
class AbsoluteLocator:
    head: int

    def __post_init__(self):
        if self.head < 0:
            raise ValueError(f"absolute head must be >= 0, got {self.head}")


@dataclass(frozen=True)
class RelativeLocator:
    offset: Optional[int]  # None = root sentinel

    def __post_init__(self):
        if self.offset == 0:
            raise ValueError("relative offset must be non-zero")


@dataclass(frozen=True)
class PosLocator:
    tag: Optional[str]      # None (with offset None) = root sentinel
    offset: Optional[int]

    def __post_init__(self):
        if (self.tag is None) != (self.offset is None):
            raise ValueError("pos locator needs both tag and offset, or neither (root)")
        if self.offset == 0:
            raise ValueError("pos offset must be non-zero")


@dataclass(frozen=True)
class UnresolvableLocator:
    """Malformed label text, kept verbatim so files round-trip."""
    raw: str


Locator = Union[AbsoluteLocator, RelativeLocator, PosLocator, UnresolvableLocator]


@dataclass(frozen=True)
class Label:
    """l_j = (x_j, r_j): head locator plus dependency relation."""
    locator: Locator
    deprel: str

    def __post_init__(self):
        if not self.deprel:
            raise ValueError("label deprel must be non-empty")

    @property
    def is_root(self) -> bool:
        loc = self.locator
        if isinstance(loc, AbsoluteLocator):
            return loc.head == 0
        if isinstance(loc, RelativeLocator):
            return loc.offset is None
        if isinstance(loc, PosLocator):
            return loc.offset is None
        return False

    def kind(self) -> Optional[Encoding]:
        return {
            AbsoluteLocator: Encoding.ABSOLUTE,
            RelativeLocator: Encoding.RELATIVE,
            PosLocator: Encoding.POS,
        }.get(type(self.locator))


@dataclass(frozen=True)
class LabelItem:
    form: str
    upos: str
    label: Label


@dataclass(frozen=True)
class LabelSequence:
    """One (form, upos, label) item per word; all labels share one encoding."""
    items: Tuple[LabelItem, ...]
    encoding: Encoding
    sentence_id: str = ''
    comments: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'items', tuple(self.items))
        object.__setattr__(self, 'comments', tuple(self.comments))
        for position, item in enumerate(self.items, 1):
            kind = item.label.kind()
            if kind is not None and kind != self.encoding:
                raise ValueError(f"token {position}: {kind.value} label in a "
                                 f"{self.encoding.value} sequence")

    def __len__(self) -> int:
        return len(self.items)

    @property
    def labels(self) -> List[Label]:
        return [item.label for item in self.items]

    @property
    def forms(self) -> List[str]:
        return [item.form for item in self.items]

    @property
    def upos(self) -> List[str]:
        return [item.upos for item in self.items]


# ---------------------------------------------------------------------------
# Label strings

_ABS = re.compile(r'^\d+$')
_SIGNED = re.compile(r'^[+-]?\d+$')


def format_label(label: Label) -> str:
    loc = label.locator
    if isinstance(loc, UnresolvableLocator):
        return loc.raw
    if isinstance(loc, AbsoluteLocator):
        return f"{loc.head}@{label.deprel}"
    if loc.offset is None:
        return f"{ROOT_MARK}@{label.deprel}"
    if isinstance(loc, RelativeLocator):
        return f"{loc.offset:+d}@{label.deprel}"
    return f"{loc.tag}:{loc.offset:+d}@{label.deprel}"


def parse_label(text: str, encoding: Encoding) -> Label:
    """
    Parse a label string under the grammar of `encoding`.

    Anything outside the grammar becomes an UnresolvableLocator with deprel
    'dep' so the decoder can repair it.
    """
    label = try_parse_label(text, encoding)
    if label is None:
        return Label(UnresolvableLocator(text), FALLBACK_DEPREL)
    return label


def try_parse_label(text: str, encoding: Encoding) -> Optional[Label]:
    """Strict variant of parse_label: None when `text` is outside the grammar."""
    locator_text, sep, deprel = text.partition('@')
    if not sep or not deprel or not locator_text:
        return None

    if encoding is Encoding.ABSOLUTE:
        if not _ABS.match(locator_text):
            return None
        return Label(AbsoluteLocator(int(locator_text)), deprel)

    if locator_text == ROOT_MARK:
        locator = RelativeLocator(None) if encoding is Encoding.RELATIVE else PosLocator(None, None)
        return Label(locator, deprel)

    if encoding is Encoding.RELATIVE:
        if not _SIGNED.match(locator_text) or int(locator_text) == 0:
            return None
        return Label(RelativeLocator(int(locator_text)), deprel)

    tag, colon, offset = locator_text.rpartition(':')
    if not colon or not tag or not _SIGNED.match(offset) or int(offset) == 0:
        return None
    return Label(PosLocator(tag, int(offset)), deprel)


# ---------------------------------------------------------------------------
# Encoding

def _pos_offset(upos: Sequence[str], dependent: int, head: int) -> int:
    """Signed count of words tagged like `head` between dependent and head (head included)."""
    tag = upos[head - 1]
    if head > dependent:
        return sum(1 for i in range(dependent + 1, head + 1) if upos[i - 1] == tag)
    return -sum(1 for i in range(head, dependent) if upos[i - 1] == tag)


def encode(tree: DependencyTree, encoding: Union[str, Encoding]) -> LabelSequence:
    """
    Encode a tree as a label sequence.

    Args:
        tree: Valid dependency tree
        encoding: abs, rel or pos

    Returns:
        LabelSequence with |tokens| items

    Raises:
        LabelEncodingError: pos encoding with a token lacking UPOS
    """
    encoding = Encoding.parse(encoding)
    upos = [t.upos for t in tree.tokens]

    if encoding is Encoding.POS:
        for t in tree.tokens:
            if not t.upos:
                raise LabelEncodingError(f"sentence {tree.sentence_id}: token {t.id} "
                                         f"({t.form!r}) has no UPOS; pos encoding needs it")

    items = []
    for t in tree.tokens:
        if encoding is Encoding.ABSOLUTE:
            locator = AbsoluteLocator(t.head)
        elif t.head == 0:
            locator = RelativeLocator(None) if encoding is Encoding.RELATIVE else PosLocator(None, None)
        elif encoding is Encoding.RELATIVE:
            locator = RelativeLocator(t.head - t.id)
        else:
            locator = PosLocator(upos[t.head - 1], _pos_offset(upos, t.id, t.head))
        items.append(LabelItem(t.form, t.upos, Label(locator, t.deprel)))

    return LabelSequence(tuple(items), encoding, tree.sentence_id, tree.comments)


# ---------------------------------------------------------------------------
# Decoding

@dataclass(frozen=True)
class Repair:
    """One decoder intervention."""
    kind: str       # out-of-range | self-loop | unresolvable | cycle | extra-root | promoted-root
    token_id: int
    detail: str = ''


def _resolve(label: Label, position: int, upos: Sequence[str]) -> Tuple[Optional[int], Optional[str]]:
    """
    Resolve a locator to a candidate head.

    Returns:
        (head, None) with head 0 for root claims, or (None, repair_kind)
    """
    n = len(upos)
    loc = label.locator

    if isinstance(loc, UnresolvableLocator):
        return None, 'unresolvable'
    if label.is_root:
        return 0, None

    if isinstance(loc, AbsoluteLocator):
        head = loc.head
    elif isinstance(loc, RelativeLocator):
        head = position + loc.offset
    else:
        step = 1 if loc.offset > 0 else -1
        remaining = abs(loc.offset)
        head = None
        i = position + step
        while 1 <= i <= n:
            if upos[i - 1] == loc.tag:
                remaining -= 1
                if remaining == 0:
                    head = i
                    break
            i += step
        if head is None:
            return None, 'unresolvable'

    if head == position:
        return None, 'self-loop'
    if not 1 <= head <= n:
        return None, 'out-of-range'
    return head, None


def _on_cycle(heads: List[Optional[int]], token_id: int) -> bool:
    current = heads[token_id]
    steps = 0
    while current is not None and current != 0 and steps <= len(heads):
        if current == token_id:
            return True
        current = heads[current]
        steps += 1
    return False


def decode_with_report(labels: LabelSequence) -> Tuple[DependencyTree, List[Repair]]:
    """
    Decode any label sequence into a valid tree, reporting repairs.

    Repair order:
        1. resolve locators; out-of-range, self-pointing or unresolvable -> headless
        2. place all arcs, then scan left to right: a token whose head chain
           returns to itself loses its arc (becomes headless)
        3. root = first root claimant (later claimants reattach to it); with no
           claimant the first headless token is promoted (deprel 'root'),
           else token 1
        4. every remaining headless token attaches to the root, deprel kept
    """
    n = len(labels)
    if n == 0:
        raise ValueError("cannot decode an empty label sequence")

    upos = labels.upos
    repairs: List[Repair] = []
    heads: List[Optional[int]] = [0] + [None] * n
    deprels = [''] + [item.label.deprel for item in labels.items]
    claimants: List[int] = []

    # 1. resolve
    for position, item in enumerate(labels.items, 1):
        head, problem = _resolve(item.label, position, upos)
        if problem:
            repairs.append(Repair(problem, position, format_label(item.label)))
        elif head == 0:
            claimants.append(position)
        else:
            heads[position] = head

    # 2. cycles
    for position in range(1, n + 1):
        if heads[position] is not None and _on_cycle(heads, position):
            repairs.append(Repair('cycle', position, f"arc {heads[position]}->{position} dropped"))
            heads[position] = None

    # 3. root
    if claimants:
        root = claimants[0]
        for extra in claimants[1:]:
            repairs.append(Repair('extra-root', extra, f"reattached to {root}"))
    else:
        headless = [p for p in range(1, n + 1) if heads[p] is None]
        root = headless[0] if headless else 1
        deprels[root] = 'root'
        repairs.append(Repair('promoted-root', root))
    heads[root] = 0

    # 4. leftovers
    for position in range(1, n + 1):
        if heads[position] is None:
            heads[position] = root

    tokens = tuple(
        Token(id=p, form=item.form, upos=item.upos, head=heads[p], deprel=deprels[p])
        for p, item in enumerate(labels.items, 1)
    )
    return DependencyTree(labels.sentence_id or 's1', tokens, labels.comments), repairs


def decode(labels: LabelSequence, encoding: Union[str, Encoding, None] = None) -> DependencyTree:
    """
    Decode a label sequence into a valid tree (total; never fails on labels).

    Args:
        labels: Label sequence
        encoding: Optional check that labels use this encoding

    Returns:
        DependencyTree satisfying all tree invariants
    """
    if encoding is not None and Encoding.parse(encoding) != labels.encoding:
        raise ValueError(f"labels use {labels.encoding.value}, not {Encoding.parse(encoding).value}")
    return decode_with_report(labels)[0]


class LabelDecoder:
    """Decoder that keeps repair counts across sentences (for CLI summaries)."""

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self.stats = {
            'sentences': 0,
            'tokens': 0,
            'repaired_sentences': 0,
        }
        self.repair_counts: Counter = Counter()

    def decode(self, labels: LabelSequence) -> DependencyTree:
        tree, repairs = decode_with_report(labels)
        self.stats['sentences'] += 1
        self.stats['tokens'] += len(labels)
        if repairs:
            self.stats['repaired_sentences'] += 1
            for repair in repairs:
                self.repair_counts[repair.kind] += 1
                self.logger.debug(f"{tree.sentence_id}: {repair.kind} at token "
                                  f"{repair.token_id} {repair.detail}")
        return tree

    def summary(self) -> Dict[str, int]:
        return {**self.stats, **dict(sorted(self.repair_counts.items()))}


def convert(labels: LabelSequence, source: Union[str, Encoding],
            target: Union[str, Encoding]) -> LabelSequence:
    """Re-encode labels: encode(decode(labels), target)."""
    source = Encoding.parse(source)
    target = Encoding.parse(target)
    if source == target and labels.encoding == target:
        return labels
    return encode(decode(labels, source), target)


# ---------------------------------------------------------------------------
# Label TSV: ID FORM UPOS LABEL, blank line between sentences, '#' comments

_SENT_ID = re.compile(r'^#\s*sent_id\s*=\s*(.+?)\s*$')


def format_label_file(sequences: Sequence[LabelSequence]) -> str:
    blocks = []
    for seq in sequences:
        lines = list(seq.comments)
        for position, item in enumerate(seq.items, 1):
            lines.append('\t'.join([str(position), item.form or '_', item.upos or '_',
                                    format_label(item.label)]))
        blocks.append('\n'.join(lines) + '\n')
    return '\n'.join(blocks)


def parse_label_file(text: str, encoding: Union[str, Encoding],
                     warnings: Optional[List[str]] = None) -> List[LabelSequence]:
    """
    Parse Label TSV text. Malformed labels become unresolvable (warned), so
    every block yields a sequence.
    """
    encoding = Encoding.parse(encoding)
    logger = logging.getLogger(__name__)
    warnings = warnings if warnings is not None else []
    sequences = []
    comments: List[str] = []
    items: List[LabelItem] = []

    def flush():
        nonlocal comments, items
        if items:
            sentence_id = f"s{len(sequences) + 1}"
            for c in comments:
                match = _SENT_ID.match(c)
                if match:
                    sentence_id = match.group(1)
            sequences.append(LabelSequence(tuple(items), encoding, sentence_id, tuple(comments)))
        comments, items = [], []

    for line_number, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            flush()
            continue
        if line.startswith('#'):
            comments.append(line)
            continue

        columns = line.split('\t')
        if len(columns) < 4:
            message = f"line {line_number}: expected 4 columns, found {len(columns)}"
            warnings.append(message)
            logger.warning(f"⚠ {message}")
            columns = columns + ['_'] * (4 - len(columns))
        form = columns[1]
        upos = '' if columns[2] == '_' else columns[2]
        label = try_parse_label(columns[3], encoding)
        if label is None:
            message = f"line {line_number}: malformed {encoding.value} label {columns[3]!r}"
            warnings.append(message)
            logger.warning(f"⚠ {message}")
            label = Label(UnresolvableLocator(columns[3]), FALLBACK_DEPREL)
        items.append(LabelItem(form, upos, label))

    flush()
    return sequences


def read_labels(path, encoding: Union[str, Encoding]) -> List[LabelSequence]:
    return parse_label_file(Path(path).read_text(encoding='utf-8'), encoding)


def write_labels(sequences: Sequence[LabelSequence], path):
    Path(path).write_text(format_label_file(sequences), encoding='utf-8')
