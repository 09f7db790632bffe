"""Context-LSTM-CNN sentence classification with FOFE context encoding.

Numerics are written by hand on numpy: BiLSTM, multi kernel CNN,
hierarchical FOFE, Adamax and class weighted cross entropy, plus a
cross validation harness and a synthetic context dependent corpus.

Intended to be used within a Python 3 environment.

"""

__version__ = '0.1.0'
