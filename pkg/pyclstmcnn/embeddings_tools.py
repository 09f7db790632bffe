"""Word vector tables: word2vec text files, OOV policy and skip-gram.

Tables are frozen. Classifier training reads rows but never writes
them, and the numpy buffer is flagged read-only to enforce it.

Intended to be used within a Python 3 environment.

"""

import hashlib
import logging

from pathlib import Path

import numpy as np
import tqdm

from scipy.special import expit


logger = logging.getLogger(__name__)


def oov_vector(token, dim, oov_seed):
    """Deterministic pseudo-random vector for an unknown token.

    Parameters
    ----------
    token : str
        Out of vocabulary token.
    dim : int
        Vector dimension.
    oov_seed : int
        Seed mixed with the token hash.

    Returns
    -------
    numpy array
        Components uniform in [-0.5/dim, 0.5/dim].
    """
    digest = hashlib.blake2b('{}\x00{}'.format(oov_seed, token).encode('utf-8'),
                             digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, 'little'))
    return rng.uniform(-0.5 / dim, 0.5 / dim, size=dim)


class EmbeddingTable:
    """Vocabulary to fixed dimension vectors mapping.

    Attributes
    ----------
    vocab : dict
        Token: row index pairs.
    vectors : numpy array
        Read-only float64 matrix, one row per vocabulary entry.
    oov_seed : int
        Seed of the hashed OOV vectors.
    """

    def __init__(self, vocab, vectors, oov_seed=0):
        vectors = np.array(vectors, dtype=np.float64)
        assert vectors.ndim == 2 and vectors.shape[1] > 0, \
            'Vectors should be a (vocab, dim) matrix, got {}'.format(
                vectors.shape)
        assert all(0 <= i < vectors.shape[0] for i in vocab.values()), \
            'Vocabulary index out of range of {} rows'.format(
                vectors.shape[0])
        vectors.setflags(write=False)
        self.vocab = dict(vocab)
        self.vectors = vectors
        self.oov_seed = oov_seed

    def __len__(self):
        return len(self.vocab)

    def __contains__(self, token):
        return token in self.vocab

    @property
    def dim(self):
        """Vector dimension."""
        return self.vectors.shape[1]

    def lookup(self, token):
        """Vector of a token, hashed random vector when unknown."""
        if token in self.vocab:
            return self.vectors[self.vocab[token]]
        return oov_vector(token, self.dim, self.oov_seed)

    def lookup_sequence(self, tokens):
        """Stack token vectors into a (len(tokens), dim) matrix."""
        if not tokens:
            return np.zeros((0, self.dim))
        return np.stack([self.lookup(token) for token in tokens])

    def checksum(self):
        """SHA-256 hex digest of the vector buffer and vocabulary."""
        digest = hashlib.sha256(np.ascontiguousarray(self.vectors).tobytes())
        for token, index in sorted(self.vocab.items()):
            digest.update('{}\x00{}\x00'.format(token, index).encode('utf-8'))
        return digest.hexdigest()

    def tokens(self):
        """Vocabulary tokens ordered by row index."""
        return [t for t, _ in sorted(self.vocab.items(), key=lambda i: i[1])]

    def save_word2vec_text(self, file_path):
        """Write the table in word2vec text format.

        Parameters
        ----------
        file_path : Path
            Output text file.

        Returns
        -------
        Path
            Path of written file.
        """
        file_path = Path(file_path)
        with open(file_path, 'w', encoding='utf-8') as file_out:
            file_out.write('{} {}\n'.format(len(self.vocab), self.dim))
            for token in self.tokens():
                values = ' '.join(repr(float(v)) for v in self.lookup(token))
                file_out.write('{} {}\n'.format(token, values))
        return file_path


def load_word2vec_text(file_path, oov_seed=0):
    """Read a word2vec text format embeddings file.

    First line holds "vocab_size dim", each following line holds a
    token and `dim` real values. Duplicate tokens keep the last vector.

    Parameters
    ----------
    file_path : Path
        Embeddings text file.
    oov_seed : int, optional
        Seed for out of vocabulary vectors. Default is 0.

    Returns
    -------
    EmbeddingTable
        Loaded table.

    Raises
    ------
    ValueError
        Malformed header or line, or fewer entries than declared.
    """
    file_path = Path(file_path)
    with open(file_path, 'r', encoding='utf-8') as file_in:
        header = file_in.readline().split()
        try:
            vocab_size, dim = int(header[0]), int(header[1])
        except (IndexError, ValueError):
            raise ValueError('{}:1: header should be "vocab_size dim"'.format(
                file_path))
        if len(header) != 2 or vocab_size < 0 or dim <= 0:
            raise ValueError('{}:1: invalid header {}'.format(file_path,
                                                              header))

        # Parse rows, keeping the last vector of repeated tokens.
        vocab, rows = {}, []
        entries = 0
        line_no = 1
        for line_no, line in enumerate(file_in, start=2):
            fields = line.rstrip().split(' ')
            if fields == ['']:
                continue
            if len(fields) != dim + 1:
                raise ValueError('{}:{}: expected {} fields, got {}'.format(
                    file_path, line_no, dim + 1, len(fields)))
            try:
                values = [float(v) for v in fields[1:]]
            except ValueError:
                raise ValueError('{}:{}: unparsable real value'.format(
                    file_path, line_no))
            token = fields[0]
            entries += 1
            if token in vocab:
                logger.warning('%s:%d: duplicate token %r, last one wins',
                               file_path, line_no, token)
                rows[vocab[token]] = values
            else:
                vocab[token] = len(rows)
                rows.append(values)

    if entries != vocab_size:
        raise ValueError('{}: header declares {} entries, found {}'.format(
            file_path, vocab_size, entries))
    vectors = np.asarray(rows, dtype=np.float64).reshape(len(rows), dim)
    logger.info('Loaded %d vectors of dimension %d from %s',
                len(rows), dim, file_path)
    return EmbeddingTable(vocab, vectors, oov_seed)


def random_table(tokens, dim, seed=0, scale=1.0):
    """Build a frozen table of random normal vectors.

    Parameters
    ----------
    tokens : iterable of str
        Vocabulary, duplicates ignored. Order fixes row assignment.
    dim : int
        Vector dimension.
    seed : int, optional
        Random seed, also used as OOV seed. Default is 0.
    scale : float, optional
        Standard deviation of components. Default is 1.0.

    Returns
    -------
    EmbeddingTable
        Random table.
    """
    vocab = {}
    for token in tokens:
        vocab.setdefault(token, len(vocab))
    rng = np.random.default_rng(seed)
    vectors = rng.normal(0.0, scale, size=(len(vocab), dim))
    return EmbeddingTable(vocab, vectors, oov_seed=seed)


def make_cum_table(counts, power=0.75):
    """Cumulative unigram^power distribution for negative sampling."""
    weights = np.asarray(counts, dtype=np.float64) ** power
    cumulative = np.cumsum(weights)
    return cumulative / cumulative[-1]


def train_skipgram(corpus, dim=50, window=5, negatives=5, epochs=5,
                   learning_rate=0.025, seed=0, progress=False):
    """Train word vectors with skip-gram and negative sampling.

    Negative words are drawn from the unigram distribution raised to
    0.75. The learning rate decays linearly to 1e-4 of its start value
    over all epochs.

    Parameters
    ----------
    corpus : list of list of str
        Tokenized sentences.
    dim : int, optional
        Vector dimension. Default is 50.
    window : int, optional
        Maximum distance between center and context words. Default is 5.
    negatives : int, optional
        Negative samples per positive pair. Default is 5.
    epochs : int, optional
        Passes over the corpus. Default is 5.
    learning_rate : float, optional
        Initial learning rate. Default is 0.025.
    seed : int, optional
        Random seed. Default is 0.
    progress : bool, optional
        If True, show a progress bar over epochs. Default is False.

    Returns
    -------
    EmbeddingTable
        Trained input vectors.

    Raises
    ------
    AssertionError
        Empty corpus, non positive sizes, or a vocabulary smaller than
        `negatives` + 1.
    """
    assert corpus and any(corpus), 'Corpus should not be empty'
    for name, value in (('dim', dim), ('window', window),
                        ('negatives', negatives), ('epochs', epochs)):
        assert value >= 1, '{} should be at least 1, got {}'.format(name,
                                                                    value)

    # Count vocabulary in first appearance order.
    vocab, counts = {}, []
    for sentence in corpus:
        for token in sentence:
            if token not in vocab:
                vocab[token] = len(counts)
                counts.append(0)
            counts[vocab[token]] += 1
    assert len(vocab) >= negatives + 1, \
        'Vocabulary of {} tokens is smaller than negatives + 1 = {}'.format(
            len(vocab), negatives + 1)
    logger.info('Skip-gram over %d sentences, %d distinct tokens',
                len(corpus), len(vocab))

    rng = np.random.default_rng(seed)
    syn0 = rng.uniform(-0.5 / dim, 0.5 / dim, size=(len(vocab), dim))
    syn1neg = np.zeros((len(vocab), dim))
    cum_table = make_cum_table(counts)
    labels = np.zeros(negatives + 1)
    labels[0] = 1.0

    encoded = [np.array([vocab[t] for t in s], dtype=np.int64)
               for s in corpus if s]
    total_steps = epochs * sum(len(s) for s in encoded)
    step = 0
    for _ in tqdm.tqdm(range(epochs), desc='skip-gram', disable=not progress):
        for sentence in encoded:
            for pos, center in enumerate(sentence):
                alpha = max(learning_rate * 1e-4,
                            learning_rate * (1 - step / total_steps))
                step += 1
                reduced = int(rng.integers(0, window))
                start = max(0, pos - window + reduced)
                stop = min(len(sentence), pos + window + 1 - reduced)
                for ctx_pos in range(start, stop):
                    if ctx_pos == pos:
                        continue
                    target = sentence[ctx_pos]

                    # Positive target first, then negatives different
                    # from it.
                    indices = [target]
                    while len(indices) < negatives + 1:
                        drawn = int(np.searchsorted(cum_table, rng.random(),
                                                    side='right'))
                        drawn = min(drawn, len(vocab) - 1)
                        if drawn != target:
                            indices.append(drawn)
                    l1 = syn0[center]
                    l2 = syn1neg[indices]
                    gradient = (labels - expit(l2 @ l1)) * alpha
                    neu1e = gradient @ l2
                    np.add.at(syn1neg, indices, np.outer(gradient, l1))
                    syn0[center] += neu1e
    return EmbeddingTable(vocab, syn0, oov_seed=seed)
