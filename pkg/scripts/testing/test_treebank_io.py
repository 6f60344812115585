#!/usr/bin/env python3
"""
Tests for CoNLL-U reading/writing, review grouping and the raw-text tokenizer.

Run with: pytest scripts/testing/test_treebank_io.py
Or:       python3 scripts/testing/test_treebank_io.py
"""

import random
import sys
from pathlib import Path

import pytest

# Add scripts to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from syntax.treebank_io import (
    ConlluError,
    ConlluReader,
    DependencyTree,
    Token,
    TreeInvariantError,
    find_tree_violation,
    group_reviews,
    is_punctuation_token,
    parse_conllu,
    read_conllu,
    simple_tokenize,
    write_conllu,
    write_conllu_file,
)

FIXTURE = Path(__file__).parent.parent.parent / 'test_data' / 'fixture_treebank.conllu'


def _row(token_id, form, head, deprel, upos='_', lemma='_'):
    return f"{token_id}\t{form}\t{lemma}\t{upos}\t_\t_\t{head}\t{deprel}\t_\t_"


def _block(rows):
    return '\n'.join(rows) + '\n'


# ---------------------------------------------------------------------------
# Parsing

def test_head_of_two_is_three():
    text = _block([
        _row(1, 'Honestly', 3, 'advmod'),
        _row(2, 'I', 3, 'nsubj'),
        _row(3, 'found', 0, 'root'),
    ])
    trees = parse_conllu(text)
    assert len(trees) == 1
    tree = trees[0]
    assert tree.root == 3
    assert tree.token(2).head == 3
    assert tree.token(2).deprel == 'nsubj'


def test_empty_string_gives_no_trees():
    assert parse_conllu('') == []
    assert parse_conllu('\n\n') == []


def test_cycle_is_rejected_in_strict_mode():
    text = _block([
        _row(1, 'a', 2, 'dep'),
        _row(2, 'b', 1, 'dep'),
        _row(3, 'c', 0, 'root'),
    ])
    with pytest.raises(ConlluError) as excinfo:
        parse_conllu(text, strict=True)
    assert excinfo.value.invariant == 'cycle'
    assert 'cycle' in str(excinfo.value)


def test_lenient_mode_skips_invalid_sentences():
    good = _block([_row(1, 'Fine', 0, 'root')])
    no_root = _block([_row(1, 'a', 2, 'dep'), _row(2, 'b', 1, 'dep')])
    two_roots = _block([_row(1, 'a', 0, 'root'), _row(2, 'b', 0, 'root')])
    reader = ConlluReader()
    trees = reader.parse('\n'.join([good, no_root, two_roots, good]))

    assert len(trees) == 2
    assert reader.stats['skipped_sentences'] == 2
    assert [e.invariant for e in reader.errors] == ['no-root', 'multiple-roots']
    assert [e.sentence_index for e in reader.errors] == [2, 3]


@pytest.mark.parametrize('line, invariant', [
    ('1\tword\t_\t_\t_\t_\t0\troot', 'columns'),
    ('x\tword\t_\t_\t_\t_\t0\troot\t_\t_', 'ids'),
    ('-1\tword\t_\t_\t_\t_\t0\troot\t_\t_', 'ids'),
    ('1.x\tword\t_\t_\t_\t_\t0\troot\t_\t_', 'ids'),
    ('1-\tword\t_\t_\t_\t_\t0\troot\t_\t_', 'ids'),
    ('1\tword\t_\t_\t_\t_\t-1\troot\t_\t_', 'head-range'),
    ('1\tword\t_\t_\t_\t_\tq\troot\t_\t_', 'head-range'),
    ('1\tword\t_\t_\t_\t_\t5\troot\t_\t_', 'head-range'),
    ('1\tword\t_\t_\t_\t_\t0\t_\t_\t_', 'deprel'),
])
def test_malformed_lines_name_line_and_invariant(line, invariant):
    text = '# sent_id = bad\n' + line + '\n'
    with pytest.raises(ConlluError) as excinfo:
        parse_conllu(text, strict=True)
    assert excinfo.value.invariant == invariant
    assert excinfo.value.line_number in (1, 2)


def test_negative_id_is_not_taken_for_a_range():
    bad = _block(['# sent_id = neg', _row(-1, 'a', 0, 'root')])
    good = _block([_row(1, 'Fine', 0, 'root'), _row(2, '.', 1, 'punct')])
    reader = ConlluReader()
    trees = reader.parse(bad + '\n' + good)

    assert [len(t) for t in trees] == [2]
    assert reader.stats['skipped_ranges'] == 0
    assert [e.invariant for e in reader.errors] == ['ids']


def test_double_space_separated_columns_are_rejected():
    line = _row(1, 'a', 0, 'root').replace('\t', '  ')
    with pytest.raises(ConlluError) as excinfo:
        parse_conllu(line + '\n', strict=True)
    assert excinfo.value.invariant == 'columns'


def test_fixture_loads_without_errors():
    reader = ConlluReader(strict=True)
    trees = reader.parse(FIXTURE.read_text(encoding='utf-8'))

    assert len(trees) >= 50
    assert reader.stats['sentences'] == len(trees)
    assert reader.stats['skipped_ranges'] == 1
    assert len(reader.warnings) == 1
    ids = [t.sentence_id for t in trees]
    assert len(set(ids)) == len(ids)


def test_ranges_are_dropped_and_tokens_counted():
    trees = {t.sentence_id: t for t in read_conllu(FIXTURE)}
    contraction = trees['contraction']
    assert len(contraction) == 7
    assert contraction.forms == ['I', 'do', "n't", 'like', 'the', 'noise', '.']
    assert contraction.token(3).lemma == 'not'


def test_sentence_id_defaults_to_block_index():
    text = _block([_row(1, 'One', 0, 'root')]) + '\n' + _block([_row(1, 'Two', 0, 'root')])
    assert [t.sentence_id for t in parse_conllu(text)] == ['s1', 's2']


def test_parser_never_returns_invalid_trees():
    rng = random.Random(7)
    blocks = []
    for _ in range(500):
        n = rng.randint(1, 8)
        rows = [_row(i, f"w{i}", rng.randint(0, n + 1), rng.choice(['dep', 'root', 'nsubj']))
                for i in range(1, n + 1)]
        blocks.append(_block(rows))

    reader = ConlluReader()
    trees = reader.parse('\n'.join(blocks))
    assert len(trees) + reader.stats['skipped_sentences'] == 500
    for tree in trees:
        assert find_tree_violation(tree.tokens) is None


def test_tree_constructor_enforces_invariants():
    with pytest.raises(TreeInvariantError) as excinfo:
        DependencyTree('x', (Token(1, 'a', head=2, deprel='dep'), Token(2, 'b', head=1, deprel='dep')))
    assert excinfo.value.invariant == 'no-root'
    with pytest.raises(ValueError):
        Token(1, 'a', head=1)


# ---------------------------------------------------------------------------
# Writing

def test_write_then_parse_is_identity_on_fixture():
    trees = read_conllu(FIXTURE)
    assert parse_conllu(write_conllu(trees)) == trees


def test_empty_lemma_is_written_as_underscore():
    tree = DependencyTree('s1', (Token(1, 'Hi', lemma='', upos='INTJ'),))
    line = write_conllu([tree]).splitlines()[0]
    columns = line.split('\t')
    assert len(columns) == 10
    assert columns[2] == '_'
    assert columns[3] == 'INTJ'


def test_two_trees_have_one_blank_line_between():
    tree = DependencyTree('s1', (Token(1, 'Hi'),))
    text = write_conllu([tree, tree])
    assert text.endswith('\n')
    assert not text.endswith('\n\n')
    assert text.count('\n\n') == 1


def test_write_file_round_trip(tmp_path):
    trees = read_conllu(FIXTURE)[:5]
    path = tmp_path / 'out.conllu'
    write_conllu_file(trees, path)
    assert read_conllu(path) == trees


# ---------------------------------------------------------------------------
# Review grouping

def test_group_reviews_by_review_id():
    groups = group_reviews(read_conllu(FIXTURE))
    ids = [review_id for review_id, _ in groups]
    assert ids[:3] == ['r01', 'r02', 'r03']
    assert len(ids) == len(set(ids)) == 22
    r03 = dict(groups)['r03']
    assert [t.sentence_id for t in r03] == ['contraction', 'r03-2']


def test_group_reviews_by_newdoc_and_singletons():
    one = _block(['# newdoc id = d1', _row(1, 'A', 0, 'root')])
    two = _block([_row(1, 'B', 0, 'root')])
    three = _block(['# newdoc', '# sent_id = s9', _row(1, 'C', 0, 'root')])
    groups = group_reviews(parse_conllu('\n'.join([one, two, three])))
    assert [(rid, len(trees)) for rid, trees in groups] == [('d1', 2), ('s9', 1)]

    plain = parse_conllu('\n'.join([two, two]))
    assert [rid for rid, _ in group_reviews(plain)] == ['s1', 's2']


# ---------------------------------------------------------------------------
# Tokenizer

@pytest.mark.parametrize('text, expected', [
    ('This hotel is awesome.', [['This', 'hotel', 'is', 'awesome', '.']]),
    ('', []),
    ('Good! Bad?', [['Good', '!'], ['Bad', '?']]),
    ("I don't know...", [['I', "don't", 'know', '...']]),
    ('¡Muy bueno!', [['¡', 'Muy', 'bueno', '!']]),
    ('It cost 3.5 euros', [['It', 'cost', '3.5', 'euros']]),
    ('"Great" stay', [['"', 'Great', '"', 'stay']]),
    ('It was great.) Fine', [['It', 'was', 'great', '.', ')', 'Fine']]),
    ('It was great. (Fine)', [['It', 'was', 'great', '.'], ['(', 'Fine', ')']]),
])
def test_simple_tokenize(text, expected):
    assert simple_tokenize(text) == expected


def test_punctuation_tokens():
    assert is_punctuation_token('!!')
    assert is_punctuation_token('¿')
    assert not is_punctuation_token("don't")
    assert not is_punctuation_token('')


if __name__ == '__main__':
    sys.exit(pytest.main([__file__, '-v']))
