#!/usr/bin/env python3
"""
Tests for the most-frequent-label tagger.

Run with: pytest scripts/testing/test_tagger.py
"""

import random
import sys
from pathlib import Path

import pytest

# Add scripts to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from syntax.linearizer import Encoding, decode, format_label, try_parse_label
from syntax.tagger import MODEL_HEADER, FrequencyModel, ModelFormatError, gold_labels
from syntax.treebank_io import DependencyTree, Token, find_tree_violation, read_conllu
from testing.evaluation_metrics import eval_parse

FIXTURE = Path(__file__).parent.parent.parent / 'test_data' / 'fixture_treebank.conllu'


@pytest.fixture(scope='module')
def treebank():
    return read_conllu(FIXTURE, strict=True)


@pytest.fixture(scope='module')
def model(treebank):
    return FrequencyModel.train(treebank, 'rel')


def _the_room():
    # "+1@det"
    return DependencyTree('a', (Token(1, 'the', upos='DET', head=2, deprel='det'),
                                Token(2, 'room', upos='NOUN', head=0, deprel='root')))


def _the_big_room():
    # "+2@det"
    return DependencyTree('b', (Token(1, 'The', upos='DET', head=3, deprel='det'),
                                Token(2, 'big', upos='ADJ', head=3, deprel='amod'),
                                Token(3, 'room', upos='NOUN', head=0, deprel='root')))


def _room_the():
    # "-1@det"
    return DependencyTree('c', (Token(1, 'room', upos='NOUN', head=0, deprel='root'),
                                Token(2, 'the', upos='DET', head=1, deprel='det')))


def test_single_tree_maps_every_word_to_its_gold_label(treebank):
    tree = next(t for t in treebank if t.sentence_id == 'staff')
    model = FrequencyModel.train([tree], 'abs')
    predicted = model.predict(tree.forms)
    assert predicted.labels == gold_labels([tree], 'abs')[0].labels
    assert predicted.upos == [t.upos for t in tree.tokens]


def test_most_frequent_label_wins():
    model = FrequencyModel.train([_the_room()] * 3 + [_the_big_room()], 'rel')
    assert model.word_to_label['the'] == '+1@det'
    assert model.word_to_upos['the'] == 'DET'


def test_ties_go_to_lexicographically_smallest_label():
    forward = FrequencyModel.train([_the_room(), _the_room(), _room_the(), _room_the()], 'rel')
    backward = FrequencyModel.train([_room_the(), _room_the(), _the_room(), _the_room()], 'rel')
    assert forward.word_to_label['the'] == '+1@det'
    assert backward.word_to_label['the'] == '+1@det'


def test_empty_treebank_is_rejected():
    with pytest.raises(ValueError):
        FrequencyModel.train([], 'rel')


def test_out_of_vocabulary_sentence_uses_fallback_chain(model):
    forms = ['Zzyzx', 'qwerty', 'blorp']
    predicted = model.predict(forms, sentence_id='oov')
    assert len(predicted) == 3
    expected = model.upos_to_label.get(model.fallback_upos, model.fallback_label)
    assert [format_label(label) for label in predicted.labels] == [expected] * 3
    tree = decode(predicted)
    assert tree.sentence_id == 'oov'
    assert find_tree_violation(tree.tokens) is None


@pytest.mark.parametrize('encoding', list(Encoding))
def test_predictions_always_decode(treebank, encoding):
    model = FrequencyModel.train(treebank, encoding)
    for tree in treebank:
        predicted = model.predict(tree.forms, tree.sentence_id)
        assert len(predicted) == len(tree)
        for label in predicted.labels:
            assert try_parse_label(format_label(label), encoding) is not None
        assert find_tree_violation(decode(predicted).tokens) is None


def test_trained_model_beats_fallback_only(treebank, model):
    baseline = model.fallback_only()
    trained = [decode(model.predict(t.forms, t.sentence_id)) for t in treebank]
    fallback = [decode(baseline.predict(t.forms, t.sentence_id)) for t in treebank]
    assert eval_parse(treebank, trained).las > eval_parse(treebank, fallback).las


def test_save_then_load_is_identical(tmp_path, treebank, model):
    path = tmp_path / 'rel.model'
    model.save(path)
    loaded = FrequencyModel.load(path)
    assert loaded == model
    assert path.read_text(encoding='utf-8').splitlines()[0] == MODEL_HEADER

    rng = random.Random(3)
    vocabulary = [form for tree in treebank for form in tree.forms] + ['unseen', 'Xylophone']
    for _ in range(100):
        forms = [rng.choice(vocabulary) for _ in range(rng.randint(1, 12))]
        assert loaded.predict(forms) == model.predict(forms)


@pytest.mark.parametrize('content, line_number', [
    ('', 0),
    ('# some other model\n[meta]\nencoding\trel\n', 1),
    (MODEL_HEADER + '\n[meta]\nencoding\trel\n[word_to_label]\nthe\t+1@det\n', 0),
    (MODEL_HEADER + '\n[meta]\nencoding\trel\n[fallback]\nlabel\t+1@det\nupos\tNOUN\n[bogus]\n', 7),
    (MODEL_HEADER + '\n[meta]\nencoding\trel\n[fallback]\nlabel-without-tab\n', 5),
    (MODEL_HEADER + '\nencoding\trel\n', 2),
])
def test_malformed_model_files(tmp_path, content, line_number):
    path = tmp_path / 'bad.model'
    path.write_text(content, encoding='utf-8')
    with pytest.raises(ModelFormatError) as excinfo:
        FrequencyModel.load(path)
    assert excinfo.value.line_number == line_number


def test_model_labels_must_parse(tmp_path):
    path = tmp_path / 'bad.model'
    path.write_text(MODEL_HEADER + '\n[meta]\nencoding\tabs\n[fallback]\nlabel\tR@root\nupos\tNOUN\n',
                    encoding='utf-8')
    with pytest.raises(ModelFormatError):
        FrequencyModel.load(path)


if __name__ == '__main__':
    sys.exit(pytest.main([__file__, '-v']))
