"""Documents, classification instances and the synthetic corpus.

Corpora are JSONL files, one document per line:
{"doc_id": str, "sentences": [{"text": str, "label": str?, "speaker": str?}],
 "meta": {...}?}

Intended to be used within a Python 3 environment.

"""

import json
import logging

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import strings_tools as st


logger = logging.getLogger(__name__)

REGIMES = ('adjacent', 'speaker')


@dataclass
class Sentence:
    """One sentence of a document; tokens derive from the text."""

    text: str
    label: str = None
    speaker: str = None
    tokens: list = field(init=False)

    def __post_init__(self):
        self.tokens = st.tokenize(self.text)


@dataclass
class Document:
    """Ordered sentences sharing a context."""

    doc_id: str
    sentences: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        assert self.sentences, \
            'Document {!r} has no sentences'.format(self.doc_id)


@dataclass
class Instance:
    """A focus sentence with its context and label index.

    `left` is ordered with the adjacent sentence last, `right` with the
    adjacent sentence first.
    """

    focus: list
    left: list
    right: list
    label: int
    doc_id: str = None
    index: int = None

    def __post_init__(self):
        assert self.focus, 'Instance {}:{} has an empty focus'.format(
            self.doc_id, self.index)


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the synthetic context dependent corpus.

    `signal_position` is the offset of the indicator sentence from the
    focus: negative is left, positive is right, 0 puts the indicator in
    the focus sentence itself. `distractors` farthest sentences on the
    signal side carry random class indicators.
    """

    num_documents: int = 2000
    sentences_per_document: int = 7
    sentence_length: int = 8
    vocab_size: int = 200
    num_classes: int = 2
    signal_position: int = -1
    noise_rate: float = 0.1
    distractors: int = 0
    focus_index: int = None
    seed: int = 0

    def __post_init__(self):
        assert self.num_classes >= 2, 'Need at least 2 classes'
        assert self.num_documents >= 1 and self.sentence_length >= 1 \
            and self.vocab_size >= 1, 'Sizes should be positive'
        assert abs(self.signal_position) < self.sentences_per_document, \
            'Signal offset {} outside a {} sentence document'.format(
                self.signal_position, self.sentences_per_document)
        assert 0.0 <= self.noise_rate <= 1.0, 'Noise rate should be in [0, 1]'
        focus = self.resolved_focus_index()
        signal = focus + self.signal_position
        assert 0 <= focus < self.sentences_per_document \
            and 0 <= signal < self.sentences_per_document, \
            'Focus {} with offset {} does not fit {} sentences'.format(
                focus, self.signal_position, self.sentences_per_document)
        assert self.distractors == 0 or self.signal_position != 0, \
            'Distractors need a context signal'
        assert len(self.distractor_indices()) == self.distractors, \
            'No room for {} distractors beyond the signal sentence'.format(
                self.distractors)

    def resolved_focus_index(self):
        """Focus position, the middle sentence unless set."""
        if self.focus_index is None:
            return self.sentences_per_document // 2
        return self.focus_index

    def distractor_indices(self):
        """Farthest sentences on the signal side, signal excluded."""
        if self.distractors == 0:
            return []
        focus = self.resolved_focus_index()
        signal = focus + self.signal_position
        if self.signal_position < 0:
            candidates = list(range(0, signal))
        else:
            candidates = list(range(self.sentences_per_document - 1,
                                    signal, -1))
        return candidates[:self.distractors]


# Corpus I/O.

def _parse_document(record, line_no):
    if not isinstance(record, dict):
        raise ValueError('line {}: expected a JSON object'.format(line_no))
    for key in ('doc_id', 'sentences'):
        if key not in record:
            raise ValueError('line {}: missing field {!r}'.format(line_no, key))
    if not isinstance(record['sentences'], list) or not record['sentences']:
        raise ValueError('line {}: document {!r} has no sentences'.format(
            line_no, record['doc_id']))
    sentences = []
    for pos, item in enumerate(record['sentences']):
        if not isinstance(item, dict) or 'text' not in item:
            raise ValueError('line {}: sentence {} lacks "text"'.format(
                line_no, pos))
        if not isinstance(item['text'], str):
            raise ValueError('line {}: sentence {} "text" should be a '
                             'string'.format(line_no, pos))
        for key in ('label', 'speaker'):
            if not isinstance(item.get(key, ''), (str, type(None))):
                raise ValueError('line {}: sentence {} {!r} should be a '
                                 'string or null'.format(line_no, pos, key))
        sentences.append(Sentence(item['text'], item.get('label'),
                                  item.get('speaker')))
    return Document(str(record['doc_id']), sentences, record.get('meta', {}))


def load_corpus(file_path):
    """Read a JSONL corpus.

    Parameters
    ----------
    file_path : Path
        UTF-8 JSONL file, one document per line.

    Returns
    -------
    list of Document
        Documents in file order.
    dict
        Label name: index pairs, by first appearance.

    Raises
    ------
    ValueError
        Malformed JSON, missing fields, empty or duplicated documents,
        reported with the line number.
    """
    file_path = Path(file_path)
    documents, label_index, seen_ids = [], {}, set()
    with open(file_path, 'r', encoding='utf-8') as file_in:
        for line_no, line in enumerate(file_in, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as error:
                raise ValueError('{}:{}: malformed JSON ({})'.format(
                    file_path, line_no, error.msg))
            document = _parse_document(record, line_no)
            if document.doc_id in seen_ids:
                raise ValueError('{}:{}: duplicate doc_id {!r}'.format(
                    file_path, line_no, document.doc_id))
            seen_ids.add(document.doc_id)
            for sentence in document.sentences:
                if sentence.label is not None:
                    label_index.setdefault(sentence.label, len(label_index))
            documents.append(document)
    logger.info('Loaded %d documents, %d labels from %s', len(documents),
                len(label_index), file_path)
    return documents, label_index


def save_corpus(documents, file_path):
    """Write documents as a JSONL corpus.

    Optional sentence fields and empty `meta` are omitted.

    Returns
    -------
    Path
        Path of written file.
    """
    file_path = Path(file_path)
    with open(file_path, 'w', encoding='utf-8') as file_out:
        for document in documents:
            sentences = []
            for sentence in document.sentences:
                item = {'text': sentence.text}
                if sentence.label is not None:
                    item['label'] = sentence.label
                if sentence.speaker is not None:
                    item['speaker'] = sentence.speaker
                sentences.append(item)
            record = {'doc_id': document.doc_id, 'sentences': sentences}
            if document.meta:
                record['meta'] = document.meta
            file_out.write(json.dumps(record, sort_keys=True) + '\n')
    return file_path


def restrict_labels(label_index, keep):
    """Keep only some classes as targets, re-indexed in `keep` order.

    Sentences with other labels remain available as context.

    Raises
    ------
    AssertionError
        A kept label does not occur in `label_index`.
    """
    missing = [label for label in keep if label not in label_index]
    assert not missing, 'Labels {} not found in corpus'.format(missing)
    return {label: pos for pos, label in enumerate(keep)}


# Instance construction.

def build_adjacent_instances(document, label_index):
    """One instance per labelled sentence, document neighbours as context.

    Parameters
    ----------
    document : Document
        Source document.
    label_index : dict
        Label name: index pairs. Sentences whose label is missing from
        it are context only.

    Returns
    -------
    list of Instance
        Left context holds all earlier sentences, right context all
        later ones.
    """
    token_lists = [sentence.tokens for sentence in document.sentences]
    instances = []
    for pos, sentence in enumerate(document.sentences):
        if sentence.label not in label_index:
            continue
        instances.append(Instance(focus=token_lists[pos],
                                  left=token_lists[:pos],
                                  right=token_lists[pos + 1:],
                                  label=label_index[sentence.label],
                                  doc_id=document.doc_id, index=pos))
    return instances


def build_speaker_instances(document, label_index):
    """Instances whose two contexts split the dialogue by speaker.

    The focus speaker's other turns form the left context and the other
    speaker's turns the right context. Each side is ordered by distance
    in turns from the focus, the nearest turn adjacent (last on the
    left side, first on the right side); at equal distance the earlier
    turn counts as nearer. The focus never appears in its own context.

    Raises
    ------
    AssertionError
        A sentence lacks a speaker, or the dialogue does not have
        exactly two speakers.
    """
    speakers = [sentence.speaker for sentence in document.sentences]
    assert None not in speakers, \
        'Document {!r} has sentences without speaker'.format(document.doc_id)
    assert len(set(speakers)) == 2, \
        'Document {!r} has {} speakers, expected 2'.format(
            document.doc_id, len(set(speakers)))

    instances = []
    for pos, sentence in enumerate(document.sentences):
        if sentence.label not in label_index:
            continue
        same, other = [], []
        for ctx_pos, ctx in enumerate(document.sentences):
            if ctx_pos == pos:
                continue
            (same if ctx.speaker == sentence.speaker else other).append(
                (abs(ctx_pos - pos), ctx_pos, ctx.tokens))

        # Nearest turn is adjacent: last on the left, first on the right.
        same.sort(key=lambda item: (item[0], item[1]))
        other.sort(key=lambda item: (item[0], item[1]))
        instances.append(Instance(focus=sentence.tokens,
                                  left=[item[2] for item in reversed(same)],
                                  right=[item[2] for item in other],
                                  label=label_index[sentence.label],
                                  doc_id=document.doc_id, index=pos))
    return instances


def build_instances(documents, label_index, regime='adjacent'):
    """Instances of a whole corpus under one context regime."""
    assert regime in REGIMES, 'Regime should be one of {}'.format(REGIMES)
    builder = (build_adjacent_instances if regime == 'adjacent'
               else build_speaker_instances)
    instances = []
    for document in documents:
        instances.extend(builder(document, label_index))
    return instances


def corpus_statistics(documents, label_index=None):
    """Summary counts of a corpus.

    Parameters
    ----------
    documents : list of Document
        Corpus.
    label_index : dict, optional
        Labels counted as targets. Default counts every label.

    Returns
    -------
    dict
        Document and labelled sentence counts, per class counts and
        average sentence and document lengths.
    """
    sentences = [s for d in documents for s in d.sentences]
    labelled = [s for s in sentences if s.label is not None and
                (label_index is None or s.label in label_index)]
    per_class = {}
    for sentence in labelled:
        per_class[sentence.label] = per_class.get(sentence.label, 0) + 1
    tokens_per_doc = [sum(len(s.tokens) for s in d.sentences)
                      for d in documents]
    return {'documents': len(documents),
            'sentences': len(sentences),
            'labelled_sentences': len(labelled),
            'class_counts': per_class,
            'avg_sentence_tokens': (float(np.mean([len(s.tokens) for s in
                                                   sentences]))
                                    if sentences else 0.0),
            'avg_document_tokens': (float(np.mean(tokens_per_doc))
                                    if documents else 0.0),
            'avg_document_sentences': (len(sentences) / len(documents)
                                       if documents else 0.0),
            }


# Synthetic corpus.

def synthetic_vocabulary(synth_config):
    """Neutral word tokens followed by class indicator tokens."""
    return (['w{}'.format(i) for i in range(synth_config.vocab_size)] +
            indicator_tokens(synth_config.num_classes))


def indicator_tokens(num_classes):
    """Class indicator tokens 'cls0', 'cls1', ..."""
    return ['cls{}'.format(i) for i in range(num_classes)]


def generate_synthetic(synth_config):
    """Generate documents whose label lives in a context sentence.

    Every document holds one labelled focus sentence of neutral words.
    The sentence at `signal_position` from the focus carries one class
    indicator token at a random position; with probability `noise_rate`
    the label is redrawn uniformly over all classes.

    Parameters
    ----------
    synth_config : SynthConfig
        Generation parameters.

    Returns
    -------
    list of Document
        Each with meta {'focus_index', 'signal_index', 'resampled'}.
    """
    cfg = synth_config
    rng = np.random.default_rng(cfg.seed)
    indicators = indicator_tokens(cfg.num_classes)
    label_names = ['class{}'.format(i) for i in range(cfg.num_classes)]
    focus = cfg.resolved_focus_index()
    signal = focus + cfg.signal_position
    distractor_positions = cfg.distractor_indices()
    width = len(str(cfg.num_documents - 1))

    documents = []
    for doc_no in range(cfg.num_documents):
        words = rng.integers(0, cfg.vocab_size,
                             size=(cfg.sentences_per_document,
                                   cfg.sentence_length))
        texts = [['w{}'.format(i) for i in row] for row in words]

        # Plant the label indicator, then the distractor indicators.
        true_class = int(rng.integers(0, cfg.num_classes))
        texts[signal][int(rng.integers(0, cfg.sentence_length))] = \
            indicators[true_class]
        for pos in distractor_positions:
            texts[pos][int(rng.integers(0, cfg.sentence_length))] = \
                indicators[int(rng.integers(0, cfg.num_classes))]

        label = true_class
        resampled = bool(rng.random() < cfg.noise_rate)
        if resampled:
            label = int(rng.integers(0, cfg.num_classes))

        sentences = []
        for pos, tokens in enumerate(texts):
            sentences.append(Sentence(
                ' '.join(tokens),
                label=label_names[label] if pos == focus else None,
                speaker='AB'[pos % 2]))
        documents.append(Document(
            'synth-{:0{}d}'.format(doc_no, width), sentences,
            {'focus_index': focus, 'signal_index': signal,
             'resampled': resampled}))
    return documents
