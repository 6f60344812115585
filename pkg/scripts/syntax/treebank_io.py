#!/usr/bin/env python3
"""
Treebank I/O
Reads, validates and writes CoNLL-U sentences.

Provides the tree data model used everywhere else (Token, DependencyTree),
a lenient/strict CoNLL-U reader and a writer built on the `conllu` package,
and a deliberately naive tokenizer for raw review text.
"""

import itertools
import logging
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import conllu
from conllu.exceptions import ParseException
from conllu.models import Token as ConlluToken
from conllu.models import TokenList


EMPTY = '_'
SENTENCE_END_CHARS = frozenset('.!?')

FIELDS = ('id', 'form', 'lemma', 'upos', 'xpos', 'feats', 'head', 'deprel', 'deps', 'misc')
N_COLUMNS = len(FIELDS)
# Every column stays the raw string: "3-4", "5.1" and '_' are classified here, not by conllu
FIELD_PARSERS = {field: (lambda line, i: line[i]) for field in FIELDS}

WORD_ID = re.compile(r'[1-9]\d*')
RANGE_ID = re.compile(r'\d+-\d+')
EMPTY_NODE_ID = re.compile(r'\d+\.\d+')
HEAD = re.compile(r'\d+')


class TreeInvariantError(ValueError):
    """A token list does not form a single-rooted acyclic tree."""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class ConlluError(ValueError):
    """Sentence-level CoNLL-U error (malformed line or invalid tree)."""

    def __init__(self, message: str, sentence_index: int,
                 line_number: Optional[int] = None, invariant: Optional[str] = None):
        location = f"sentence {sentence_index}"
        if line_number is not None:
            location += f", line {line_number}"
        super().__init__(f"{location}: {message}")
        self.sentence_index = sentence_index
        self.line_number = line_number
        self.invariant = invariant


@dataclass(frozen=True)
class Token:
    """
    One basic word of a sentence.

    Holds the arc (head, deprel, id). lemma and upos use '' for the CoNLL-U
    empty marker; xpos/feats/deps/misc are kept verbatim.
    """
    id: int
    form: str
    lemma: str = ''
    upos: str = ''
    head: int = 0
    deprel: str = 'root'
    xpos: str = EMPTY
    feats: str = EMPTY
    deps: str = EMPTY
    misc: str = EMPTY

    def __post_init__(self):
        if self.id < 1:
            raise ValueError(f"token id must be >= 1, got {self.id}")
        if self.head < 0:
            raise ValueError(f"token {self.id}: head must be >= 0, got {self.head}")
        if self.head == self.id:
            raise ValueError(f"token {self.id}: head points to itself")
        if not self.deprel:
            raise ValueError(f"token {self.id}: empty deprel")


def find_tree_violation(tokens: Sequence[Token]) -> Optional[Tuple[str, str]]:
    """
    Check the tree invariants.

    Returns:
        (invariant_name, message) for the first violation, or None
    """
    n = len(tokens)
    if n == 0:
        return ('empty', 'sentence has no tokens')

    for position, token in enumerate(tokens, 1):
        if token.id != position:
            return ('ids', f"expected token id {position}, found {token.id}")

    for token in tokens:
        if token.head > n:
            return ('head-range', f"token {token.id} has head {token.head} outside [0, {n}]")

    roots = [t.id for t in tokens if t.head == 0]
    if not roots:
        return ('no-root', 'no token has head 0')
    if len(roots) > 1:
        return ('multiple-roots', f"tokens {roots} all have head 0")

    heads = [0] + [t.head for t in tokens]
    for token in tokens:
        current = token.head
        steps = 0
        while current != 0:
            if current == token.id or steps > n:
                return ('cycle', f"token {token.id} is on a head cycle")
            current = heads[current]
            steps += 1

    return None


@dataclass(frozen=True)
class DependencyTree:
    """A parsed sentence: ordered tokens, each carrying its (head, deprel) arc."""
    sentence_id: str
    tokens: Tuple[Token, ...]
    comments: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'tokens', tuple(self.tokens))
        object.__setattr__(self, 'comments', tuple(self.comments))
        violation = find_tree_violation(self.tokens)
        if violation:
            raise TreeInvariantError(*violation)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def root(self) -> int:
        return next(t.id for t in self.tokens if t.head == 0)

    @property
    def heads(self) -> List[int]:
        return [t.head for t in self.tokens]

    @property
    def deprels(self) -> List[str]:
        return [t.deprel for t in self.tokens]

    @property
    def forms(self) -> List[str]:
        return [t.form for t in self.tokens]

    @property
    def arcs(self) -> List[Tuple[int, str, int]]:
        """Arcs as (head, deprel, dependent) triples."""
        return [(t.head, t.deprel, t.id) for t in self.tokens]

    def token(self, token_id: int) -> Token:
        return self.tokens[token_id - 1]

    def children(self) -> Dict[int, List[int]]:
        """Map head id (0 included) -> dependent ids in surface order."""
        result: Dict[int, List[int]] = {i: [] for i in range(len(self.tokens) + 1)}
        for t in self.tokens:
            result[t.head].append(t.id)
        return result


def _from_column(value: str) -> str:
    return '' if value == EMPTY else value


def _to_column(value: str) -> str:
    return value if value else EMPTY


class ConlluReader:
    """
    CoNLL-U reader with sentence-level validation.

    In lenient mode (default) invalid sentences are skipped, logged and kept
    in `errors`; in strict mode the first invalid sentence raises ConlluError.
    Multiword ranges ("3-4") and empty nodes ("5.1") are dropped.
    """

    def __init__(self, strict: bool = False):
        """
        Initialize the reader.

        Args:
            strict: Raise on the first invalid sentence instead of skipping it
        """
        self.logger = logging.getLogger(__name__)
        self.strict = strict
        self.errors: List[ConlluError] = []
        self.warnings: List[str] = []
        self.stats = {
            'sentences': 0,
            'tokens': 0,
            'skipped_sentences': 0,
            'skipped_ranges': 0,
            'skipped_empty_nodes': 0,
        }

    def parse(self, text: str) -> List[DependencyTree]:
        """Parse CoNLL-U text into trees."""
        trees = []
        block: List[Tuple[int, str]] = []
        sentence_index = 0

        for line_number, line in enumerate(text.splitlines(), 1):
            if line.strip():
                block.append((line_number, line))
                continue
            if block:
                sentence_index += 1
                tree = self._parse_block(block, sentence_index)
                if tree is not None:
                    trees.append(tree)
                block = []

        if block:
            sentence_index += 1
            tree = self._parse_block(block, sentence_index)
            if tree is not None:
                trees.append(tree)

        if self.stats['skipped_sentences']:
            self.logger.warning(f"⚠ Skipped {self.stats['skipped_sentences']} invalid sentence(s)")
        return trees

    def _parse_block(self, block: List[Tuple[int, str]], sentence_index: int) -> Optional[DependencyTree]:
        try:
            tree = self._build_tree(block, sentence_index)
        except ConlluError as e:
            if self.strict:
                raise
            self.errors.append(e)
            self.stats['skipped_sentences'] += 1
            self.logger.debug(f"Skipping {e}")
            return None

        self.stats['sentences'] += 1
        self.stats['tokens'] += len(tree)
        return tree

    def _split_block(self, block: List[Tuple[int, str]], sentence_index: int) -> TokenList:
        """Column-count check per line, then conllu does the splitting and metadata."""
        for line_number, line in block:
            if line.startswith('#'):
                continue
            columns = line.split('\t')
            if len(columns) != N_COLUMNS:
                raise ConlluError(f"expected {N_COLUMNS} tab-separated columns, found {len(columns)}",
                                  sentence_index, line_number, invariant='columns')
        try:
            return conllu.parse_token_and_metadata('\n'.join(line for _, line in block),
                                                   fields=FIELDS, field_parsers=FIELD_PARSERS)
        except ParseException as e:
            raise ConlluError(str(e), sentence_index, block[0][0], invariant='columns')

    def _build_tree(self, block: List[Tuple[int, str]], sentence_index: int) -> DependencyTree:
        sentence = self._split_block(block, sentence_index)
        comments = [line for _, line in block if line.startswith('#')]
        token_lines = [(n, line) for n, line in block if not line.startswith('#')]
        sentence_id = sentence.metadata.get('sent_id') or f"s{sentence_index}"
        tokens = []

        for (line_number, line), row in zip(token_lines, sentence):
            if list(row.values()) != line.split('\t'):
                # conllu also splits on runs of spaces
                raise ConlluError("columns must be separated by single tabs", sentence_index,
                                  line_number, invariant='columns')

            token_id = row['id']
            if RANGE_ID.fullmatch(token_id):
                self.stats['skipped_ranges'] += 1
                self._warn(f"sentence {sentence_index}, line {line_number}: multiword range {token_id} dropped")
                continue
            if EMPTY_NODE_ID.fullmatch(token_id):
                self.stats['skipped_empty_nodes'] += 1
                self._warn(f"sentence {sentence_index}, line {line_number}: empty node {token_id} dropped")
                continue
            if not WORD_ID.fullmatch(token_id):
                raise ConlluError(f"invalid token id {token_id!r}", sentence_index,
                                  line_number, invariant='ids')
            id_value = int(token_id)

            if not HEAD.fullmatch(row['head']):
                raise ConlluError(f"invalid head {row['head']!r}", sentence_index,
                                  line_number, invariant='head-range')
            head = int(row['head'])

            deprel = _from_column(row['deprel'])
            if not deprel:
                raise ConlluError(f"token {id_value} has no deprel", sentence_index,
                                  line_number, invariant='deprel')
            if head == id_value:
                raise ConlluError(f"token {id_value} is its own head", sentence_index,
                                  line_number, invariant='cycle')

            tokens.append(Token(
                id=id_value,
                form=row['form'],
                lemma=_from_column(row['lemma']),
                upos=_from_column(row['upos']),
                xpos=row['xpos'],
                feats=row['feats'],
                head=head,
                deprel=deprel,
                deps=row['deps'],
                misc=row['misc'],
            ))

        first_line = block[0][0]
        try:
            return DependencyTree(sentence_id, tuple(tokens), tuple(comments))
        except TreeInvariantError as e:
            raise ConlluError(str(e), sentence_index, first_line, invariant=e.invariant)

    def _warn(self, message: str):
        self.warnings.append(message)
        self.logger.debug(message)


def parse_conllu(text: str, strict: bool = False) -> List[DependencyTree]:
    """
    Parse CoNLL-U text.

    Args:
        text: CoNLL-U content
        strict: Raise ConlluError on the first invalid sentence

    Returns:
        One DependencyTree per valid sentence block
    """
    return ConlluReader(strict=strict).parse(text)


def read_conllu(path, strict: bool = False) -> List[DependencyTree]:
    """Read a CoNLL-U file (UTF-8)."""
    return parse_conllu(Path(path).read_text(encoding='utf-8'), strict=strict)


def format_tree(tree: DependencyTree) -> str:
    """One CoNLL-U block, newline-terminated, no trailing blank line."""
    rows = TokenList([
        ConlluToken(zip(FIELDS, (
            str(t.id), _to_column(t.form), _to_column(t.lemma), _to_column(t.upos),
            _to_column(t.xpos), _to_column(t.feats), str(t.head), t.deprel,
            _to_column(t.deps), _to_column(t.misc),
        )))
        for t in tree.tokens
    ])
    # comments are kept verbatim; conllu metadata would normalize them
    return ''.join(c + '\n' for c in tree.comments) + rows.serialize().rstrip('\n') + '\n'


def write_conllu(trees: Sequence[DependencyTree]) -> str:
    """Serialize trees; exactly one blank line between blocks."""
    return '\n'.join(format_tree(tree) for tree in trees)


def write_conllu_file(trees: Sequence[DependencyTree], path):
    Path(path).write_text(write_conllu(trees), encoding='utf-8')


def _comment_value(comment: str, key: str) -> Optional[str]:
    match = re.match(rf'^#\s*{key}\b\s*(?:=\s*(.*?))?\s*$', comment)
    if not match:
        return None
    return match.group(1) or ''


def group_reviews(trees: Sequence[DependencyTree]) -> List[Tuple[str, List[DependencyTree]]]:
    """
    Group sentences into reviews.

    `# review_id = X` comments group by id (first-seen order); otherwise
    `# newdoc` markers open a new review; otherwise each sentence stands alone.
    """
    has_review_ids = any(_comment_value(c, 'review_id') for t in trees for c in t.comments)
    has_newdoc = any(_comment_value(c, 'newdoc id') is not None or _comment_value(c, 'newdoc') is not None
                     for t in trees for c in t.comments)

    if has_review_ids:
        groups: Dict[str, List[DependencyTree]] = {}
        current = None
        for tree in trees:
            for c in tree.comments:
                value = _comment_value(c, 'review_id')
                if value:
                    current = value
            key = current if current is not None else tree.sentence_id
            groups.setdefault(key, []).append(tree)
        return list(groups.items())

    if has_newdoc:
        result: List[Tuple[str, List[DependencyTree]]] = []
        for tree in trees:
            marker = None
            for c in tree.comments:
                value = _comment_value(c, 'newdoc id')
                if value is None:
                    value = _comment_value(c, 'newdoc')
                if value is not None:
                    marker = value or tree.sentence_id
            if marker is not None or not result:
                result.append((marker or tree.sentence_id, []))
            result[-1][1].append(tree)
        return result

    return [(tree.sentence_id, [tree]) for tree in trees]


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith('P') or unicodedata.category(ch) in ('Sm', 'Sc', 'So')


def _punct_tokens(chars: str) -> List[str]:
    # "..." and "!!" stay whole
    return [''.join(group) for _, group in itertools.groupby(chars)]


def simple_tokenize(text: str) -> List[List[str]]:
    """
    Naive sentence split + tokenization for raw reviews.

    Sentences end after a whitespace-delimited chunk whose last character
    is '.', '!' or '?'. Leading/trailing punctuation of a
    chunk is detached; inner punctuation ("3.5", "don't") stays.

    Args:
        text: Raw text

    Returns:
        List of sentences, each a list of forms
    """
    sentences: List[List[str]] = []
    current: List[str] = []

    for chunk in text.split():
        start = 0
        while start < len(chunk) and _is_punct(chunk[start]):
            start += 1
        end = len(chunk)
        while end > start and _is_punct(chunk[end - 1]):
            end -= 1

        leading, core, trailing = chunk[:start], chunk[start:end], chunk[end:]
        if not core:
            # chunk is all punctuation
            leading, trailing = '', leading

        current.extend(_punct_tokens(leading))
        if core:
            current.append(core)
        current.extend(_punct_tokens(trailing))

        if trailing[-1:] in SENTENCE_END_CHARS:
            sentences.append(current)
            current = []

    if current:
        sentences.append(current)
    return sentences


def is_punctuation_token(form: str) -> bool:
    return bool(form) and all(_is_punct(ch) for ch in form)

