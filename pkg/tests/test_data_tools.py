# -*- coding: utf-8 -*-
"""Tests for data_tools module."""

import json

import numpy as np
import pytest

from pyclstmcnn import data_tools as dt


def turn_document(speakers, labels=None, doc_id='d0'):
    """Dialogue whose turn texts identify their position."""
    labels = labels or [None] * len(speakers)
    return dt.Document(doc_id, [dt.Sentence('turn {}'.format(pos), label,
                                            speaker)
                                for pos, (speaker, label) in
                                enumerate(zip(speakers, labels))])


def turn_positions(sentences):
    return [int(tokens[1]) for tokens in sentences]


def write_lines(path, records):
    path.write_text('\n'.join(records) + '\n', encoding='utf-8')
    return path


# Corpus I/O.

def test_load_corpus(tmp_path):
    path = write_lines(tmp_path / 'corpus.jsonl', [
        json.dumps({'doc_id': 'a', 'sentences': [
            {'text': 'Hello there.', 'label': 'neu', 'speaker': 'A'},
            {'text': 'Great!', 'label': 'hap', 'speaker': 'B'}]}),
        '',
        json.dumps({'doc_id': 'b', 'sentences': [{'text': 'Oh no'},
                                                 {'text': 'x', 'label': 'sad'},
                                                 {'text': 'y', 'label': 'neu'}]
                    })])
    documents, label_index = dt.load_corpus(path)
    assert [d.doc_id for d in documents] == ['a', 'b']
    assert label_index == {'neu': 0, 'hap': 1, 'sad': 2}
    assert documents[0].sentences[0].tokens == ['hello', 'there', '.']
    assert documents[1].sentences[0].label is None


@pytest.mark.parametrize('line, message', [
    ('{"doc_id": "a", "sentences": []}', 'no sentences'),
    ('{"doc_id": "a"', 'malformed JSON'),
    ('{"sentences": [{"text": "x"}]}', 'doc_id'),
    ('{"doc_id": "a", "sentences": [{"label": "x"}]}', 'text'),
    ('{"doc_id": "a", "sentences": [{"text": 5}]}', 'should be a string'),
    ('{"doc_id": "a", "sentences": [{"text": null}]}', 'should be a string'),
    ('{"doc_id": "a", "sentences": [{"text": "x", "label": 3}]}',
     "'label' should be a string"),
    ('{"doc_id": "a", "sentences": [{"text": "x", "speaker": ["A"]}]}',
     "'speaker' should be a string"),
])
def test_load_corpus_errors_name_the_line(tmp_path, line, message):
    ok = json.dumps({'doc_id': 'ok', 'sentences': [{'text': 'fine'}]})
    path = write_lines(tmp_path / 'bad.jsonl', [ok, line])
    with pytest.raises(ValueError, match=message) as error:
        dt.load_corpus(path)
    assert ':2:' in str(error.value) or 'line 2' in str(error.value)


def test_load_corpus_rejects_duplicate_ids(tmp_path):
    line = json.dumps({'doc_id': 'a', 'sentences': [{'text': 'x'}]})
    path = write_lines(tmp_path / 'dup.jsonl', [line, line])
    with pytest.raises(ValueError, match='duplicate doc_id'):
        dt.load_corpus(path)


def test_corpus_round_trip(tmp_path):
    documents = dt.generate_synthetic(dt.SynthConfig(num_documents=5,
                                                     seed=3))
    path = dt.save_corpus(documents, tmp_path / 'corpus.jsonl')
    loaded, label_index = dt.load_corpus(path)
    assert set(label_index) <= {'class0', 'class1'}
    for original, copy in zip(documents, loaded):
        assert copy.doc_id == original.doc_id
        assert copy.meta == original.meta
        assert [(s.text, s.label, s.speaker) for s in copy.sentences] == \
            [(s.text, s.label, s.speaker) for s in original.sentences]


def test_restrict_labels():
    assert dt.restrict_labels({'neu': 0, 'hap': 1, 'sad': 2},
                              ['sad', 'hap']) == {'sad': 0, 'hap': 1}
    with pytest.raises(AssertionError):
        dt.restrict_labels({'neu': 0}, ['ang'])


# Adjacent regime.

def test_adjacent_instances_example():
    document = dt.Document('d', [dt.Sentence('a b'),
                                 dt.Sentence('c', 'x'),
                                 dt.Sentence('d e')])
    [instance] = dt.build_adjacent_instances(document, {'x': 0})
    assert instance.focus == ['c']
    assert instance.left == [['a', 'b']]
    assert instance.right == [['d', 'e']]
    assert (instance.doc_id, instance.index, instance.label) == ('d', 1, 0)


def test_adjacent_instances_at_document_edges():
    document = dt.Document('d', [dt.Sentence('first', 'x'),
                                 dt.Sentence('last', 'y')])
    first, last = dt.build_adjacent_instances(document, {'x': 0, 'y': 1})
    assert first.left == [] and first.right == [['last']]
    assert last.left == [['first']] and last.right == []


def test_adjacent_instances_counts():
    document = turn_document(['A'] * 10, ['x'] * 10)
    instances = dt.build_adjacent_instances(document, {'x': 0})
    assert len(instances) == 10
    assert sum(len(i.left) + len(i.right) for i in instances) == 90
    for instance in instances:
        left, right = turn_positions(instance.left), \
            turn_positions(instance.right)
        assert left == list(range(instance.index))
        assert right == list(range(instance.index + 1, 10))


def test_unlisted_labels_are_context_only():
    document = turn_document(['A', 'B', 'A'], ['x', 'other', 'x'])
    instances = dt.build_adjacent_instances(document, {'x': 0})
    assert [i.index for i in instances] == [0, 2]
    assert turn_positions(instances[0].right) == [1, 2]


# Speaker regime.

def test_speaker_instances_example():
    document = turn_document(['A', 'B', 'A', 'B'],
                             [None, None, None, 'x'])
    [instance] = dt.build_speaker_instances(document, {'x': 0})
    assert instance.focus == ['turn', '3']
    assert turn_positions(instance.left) == [1]
    assert turn_positions(instance.right) == [2, 0]


def test_speaker_instances_partition_dialogue():
    rng = np.random.default_rng(0)
    speakers = list(rng.choice(['A', 'B'], size=20))
    speakers[:2] = ['A', 'B']
    document = turn_document(speakers, ['x'] * 20)
    instances = dt.build_speaker_instances(document, {'x': 0})
    assert len(instances) == 20
    for instance in instances:
        pos = instance.index
        left, right = turn_positions(instance.left), \
            turn_positions(instance.right)
        assert pos not in left + right
        assert sorted(left + right) == [p for p in range(20) if p != pos]
        assert all(speakers[p] == speakers[pos] for p in left)
        assert all(speakers[p] != speakers[pos] for p in right)

        # Nearest turn adjacent to the focus on both sides.
        distances = [abs(p - pos) for p in reversed(left)]
        assert distances == sorted(distances)
        distances = [abs(p - pos) for p in right]
        assert distances == sorted(distances)


def test_speaker_ties_prefer_earlier_turn():
    document = turn_document(['A', 'B', 'A', 'B', 'A'],
                             [None, None, 'x', None, None])
    [instance] = dt.build_speaker_instances(document, {'x': 0})
    assert turn_positions(instance.left) == [4, 0]
    assert turn_positions(instance.right) == [1, 3]


def test_speaker_regime_needs_two_speakers():
    with pytest.raises(AssertionError, match='3 speakers'):
        dt.build_speaker_instances(turn_document(['A', 'B', 'C'], ['x'] * 3),
                                   {'x': 0})
    with pytest.raises(AssertionError):
        dt.build_speaker_instances(turn_document(['A', None], ['x'] * 2),
                                   {'x': 0})


def test_build_instances_count_matches_labels():
    documents = [turn_document(['A', 'B', 'A'], ['x', None, 'y'], 'd0'),
                 turn_document(['B', 'A'], ['y', 'y'], 'd1')]
    for regime in dt.REGIMES:
        instances = dt.build_instances(documents, {'x': 0, 'y': 1}, regime)
        assert len(instances) == 4
    with pytest.raises(AssertionError):
        dt.build_instances(documents, {'x': 0}, 'neighbours')


def test_corpus_statistics():
    documents = [turn_document(['A', 'B', 'A'], ['x', None, 'y'], 'd0'),
                 turn_document(['B', 'A'], ['y', 'y'], 'd1')]
    stats = dt.corpus_statistics(documents)
    assert stats['documents'] == 2
    assert stats['sentences'] == 5
    assert stats['labelled_sentences'] == 4
    assert stats['class_counts'] == {'x': 1, 'y': 3}
    assert stats['avg_sentence_tokens'] == 2.0
    assert stats['avg_document_sentences'] == 2.5
    restricted = dt.corpus_statistics(documents, {'x': 0})
    assert restricted['labelled_sentences'] == 1


# Synthetic corpus.

def test_synthetic_is_deterministic():
    cfg = dt.SynthConfig(num_documents=20, seed=8)
    first, second = dt.generate_synthetic(cfg), dt.generate_synthetic(cfg)
    assert [[s.text for s in d.sentences] for d in first] == \
        [[s.text for s in d.sentences] for d in second]
    other = dt.generate_synthetic(dt.SynthConfig(num_documents=20, seed=9))
    assert [d.sentences[3].text for d in first] != \
        [d.sentences[3].text for d in other]


def test_synthetic_indicator_determines_label():
    cfg = dt.SynthConfig(num_documents=200, num_classes=3, noise_rate=0.0,
                         seed=2)
    indicators = set(dt.indicator_tokens(3))
    for document in dt.generate_synthetic(cfg):
        focus = document.meta['focus_index']
        signal = document.meta['signal_index']
        assert (focus, signal) == (3, 2)
        labelled = [s for s in document.sentences if s.label is not None]
        assert labelled == [document.sentences[focus]]
        found = [t for t in document.sentences[signal].tokens
                 if t in indicators]
        assert len(found) == 1
        assert labelled[0].label == 'class' + found[0][len('cls'):]
        assert not indicators & set(document.sentences[focus].tokens)
        assert len(document.sentences) == 7
        assert all(len(s.tokens) == 8 for s in document.sentences)
        assert [s.speaker for s in document.sentences] == list('ABABABA')


def test_synthetic_label_noise():
    cfg = dt.SynthConfig(num_documents=5000, sentences_per_document=3,
                         sentence_length=3, noise_rate=0.2, seed=5)
    documents = dt.generate_synthetic(cfg)
    resampled = np.mean([d.meta['resampled'] for d in documents])
    assert abs(resampled - 0.2) < 0.02

    # Resampling uniformly over 2 classes flips half of the redrawn labels.
    flipped = np.mean([
        d.sentences[1].label[-1] != next(t for t in d.sentences[0].tokens
                                         if t.startswith('cls'))[-1]
        for d in documents])
    assert abs(flipped - 0.1) < 0.02


def test_synthetic_signal_in_focus():
    cfg = dt.SynthConfig(num_documents=10, signal_position=0,
                         noise_rate=0.0, seed=1)
    for document in dt.generate_synthetic(cfg):
        focus = document.sentences[3]
        assert any(t.startswith('cls') for t in focus.tokens)
        assert sum(t.startswith('cls') for s in document.sentences
                   for t in s.tokens) == 1


def test_synthetic_distractors():
    cfg = dt.SynthConfig(num_documents=10, sentences_per_document=7,
                         focus_index=6, signal_position=-1, distractors=3,
                         seed=4)
    assert cfg.distractor_indices() == [0, 1, 2]
    for document in dt.generate_synthetic(cfg):
        for pos in (0, 1, 2, 5):
            assert sum(t.startswith('cls')
                       for t in document.sentences[pos].tokens) == 1
        for pos in (3, 4, 6):
            assert not any(t.startswith('cls')
                           for t in document.sentences[pos].tokens)
    right = dt.SynthConfig(sentences_per_document=7, focus_index=1,
                           signal_position=2, distractors=2)
    assert right.distractor_indices() == [6, 5]


@pytest.mark.parametrize('changes', [
    {'signal_position': 7},
    {'focus_index': 6, 'signal_position': 1},
    {'num_classes': 1},
    {'signal_position': 0, 'distractors': 1},
    {'focus_index': 4, 'signal_position': -1, 'distractors': 4},
])
def test_synth_config_validation(changes):
    with pytest.raises(AssertionError):
        dt.SynthConfig(**changes)


def test_synthetic_vocabulary():
    cfg = dt.SynthConfig(vocab_size=3, num_classes=2)
    assert dt.synthetic_vocabulary(cfg) == ['w0', 'w1', 'w2', 'cls0', 'cls1']
