"""Fixed-size ordinally forgetting encoding of sentences and contexts.

A sentence of word vectors x_1..x_U is encoded as z_1 = x_1,
z_u = alpha * z_{u-1} + x_u. Contexts are encoded in two levels: every
sentence with `alpha_sent`, then the sequence of sentence codes with
`alpha_cont`, so that the sentence adjacent to the focus always gets
weight 1.

Left contexts are ordered with the adjacent sentence LAST, right
contexts with the adjacent sentence FIRST.

Intended to be used within a Python 3 environment.

"""

from dataclasses import dataclass

import numpy as np


SIDES = ('left', 'right')


@dataclass(frozen=True)
class FofeConfig:
    """Forgetting factors of the hierarchical context encoding."""

    alpha_sent: float = 1.0
    alpha_cont: float = 0.9

    def __post_init__(self):
        for name in ('alpha_sent', 'alpha_cont'):
            value = getattr(self, name)
            assert 0.0 <= value <= 1.0, \
                '{} should be in [0, 1], got {}'.format(name, value)


def _forget_recursion(codes, alpha):
    # z_1 = c_1, z_m = alpha * z_{m-1} + c_m
    encoded = np.array(codes[0], dtype=np.float64)
    for code in codes[1:]:
        encoded = alpha * encoded + code
    return encoded


def fofe_sentence(words, alpha):
    """Encode a sequence of word vectors into one vector.

    Parameters
    ----------
    words : sequence of numpy arrays, or a (U, dim) matrix
        Word vectors in sentence order.
    alpha : float
        Forgetting factor.

    Returns
    -------
    numpy array
        Code z_U, equal to sum of alpha**(U-u) * x_u.

    Raises
    ------
    AssertionError
        Empty sentence or words of different dimensions.
    """
    assert len(words) >= 1, 'Cannot encode an empty sentence'
    if not isinstance(words, np.ndarray):
        dims = {np.shape(word) for word in words}
        assert len(dims) == 1, \
            'Word vectors have mismatched shapes {}'.format(sorted(dims))
    words = np.asarray(words, dtype=np.float64)
    assert words.ndim == 2, \
        'Words should stack into a (U, dim) matrix, got {}'.format(
            words.shape)
    return _forget_recursion(words, alpha)


def _stack_codes(codes, dim):
    if len(codes) == 0:
        assert dim is not None, 'Empty context needs an explicit dim'
        return None
    dims = {np.shape(code) for code in codes}
    assert len(dims) == 1, \
        'Sentence codes have mismatched shapes {}'.format(sorted(dims))
    stacked = np.asarray(codes, dtype=np.float64)
    assert dim is None or stacked.shape[1] == dim, \
        'Sentence codes have dimension {}, expected {}'.format(
            stacked.shape[1], dim)
    return stacked


def fofe_left_context(codes, alpha_cont, dim=None):
    """Encode left context sentence codes, adjacent sentence last.

    Parameters
    ----------
    codes : sequence of numpy arrays
        Sentence codes z_1..z_M, z_M adjacent to the focus.
    alpha_cont : float
        Context level forgetting factor.
    dim : int, optional
        Code dimension, required when `codes` is empty.

    Returns
    -------
    numpy array
        Context code; sentence m carries weight alpha_cont**(M-m). Zero
        vector when there is no context.
    """
    stacked = _stack_codes(codes, dim)
    if stacked is None:
        return np.zeros(dim)
    return _forget_recursion(stacked, alpha_cont)


def fofe_right_context(codes, alpha_cont, dim=None):
    """Encode right context sentence codes, adjacent sentence first.

    The recursion starts at the farthest sentence and runs toward the
    focus, so it mirrors `fofe_left_context`.

    Parameters
    ----------
    codes : sequence of numpy arrays
        Sentence codes z_1..z_M, z_1 adjacent to the focus.
    alpha_cont : float
        Context level forgetting factor.
    dim : int, optional
        Code dimension, required when `codes` is empty.

    Returns
    -------
    numpy array
        Context code; sentence m carries weight alpha_cont**(m-1).
    """
    stacked = _stack_codes(codes, dim)
    if stacked is None:
        return np.zeros(dim)
    return _forget_recursion(stacked[::-1], alpha_cont)


def encode_context(sentences, fofe_config, side, dim):
    """Two level FOFE code of one side of a focus sentence.

    Parameters
    ----------
    sentences : list of numpy arrays
        One (U_i, dim) word vector matrix per context sentence, ordered
        according to `side`. Zero length sentences are skipped.
    fofe_config : FofeConfig
        Forgetting factors.
    side : str from `SIDES`
        'left' or 'right'.
    dim : int
        Embedding dimension.

    Returns
    -------
    numpy array
        Context code of length `dim`.
    """
    assert side in SIDES, 'Side should be one of {}, got {!r}'.format(SIDES,
                                                                     side)
    codes = [fofe_sentence(words, fofe_config.alpha_sent)
             for words in sentences if len(words) > 0]
    if side == 'left':
        return fofe_left_context(codes, fofe_config.alpha_cont, dim)
    return fofe_right_context(codes, fofe_config.alpha_cont, dim)
