"""Functions that operate in Python string objects.

Intended to be used within a Python 3 environment.

"""

import re


TOKEN_PATTERN = re.compile(r'\w+|[^\w\s]')


def tokenize(text):
    """Split text into lowercase word and punctuation tokens.

    Every punctuation character becomes a token of its own, words are
    runs of alphanumeric characters.

    Parameters
    ----------
    text : str
        Raw sentence text.

    Returns
    -------
    list of str
        Tokens in reading order.

    Examples
    --------
    >>> tokenize('I got it.')
    ['i', 'got', 'it', '.']
    """
    return TOKEN_PATTERN.findall(text.lower())


def format_label_columns(label_names, prefix='f1_'):
    """Build CSV column names for per-class values.

    Parameters
    ----------
    label_names : list of str
        Class names in index order.
    prefix : str, optional
        Prepended to each name. Default is 'f1_'.

    Returns
    -------
    list of str
        Column names, whitespace replaced by underscores.
    """
    return [prefix + re.sub(r'\s+', '_', str(name)) for name in label_names]
