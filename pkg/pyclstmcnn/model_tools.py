"""The five sentence classifier architectures.

All variants share one parameter layout convention (flat dict of
arrays, dotted names) and one forward/backward interface:

- cnn:         conv bank on focus embeddings -> pool -> dropout -> out
- lstm:        BiLSTM -> final states -> out
- lstm-cnn:    BiLSTM -> conv bank -> pool -> dropout -> out
- l-lstm-cnn:  lstm-cnn + context BiLSTM final states of the adjacent
               left and right sentences
- c-lstm-cnn:  lstm-cnn + linear dense layers over the left and right
               hierarchical FOFE codes

Intended to be used within a Python 3 environment.

"""

import logging

from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from scipy.special import logsumexp

from . import data_tools as dt
from . import embeddings_tools as et
from . import fofe_tools as fo
from . import layers_tools as lt
from . import tensor_tools as tt
from .databases_tools import H5


logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 'pyclstmcnn-checkpoint-1'


class ModelVariant(Enum):
    """Experiment architectures."""

    CNN_ONLY = 'cnn'
    LSTM_ONLY = 'lstm'
    LSTM_CNN = 'lstm-cnn'
    L_LSTM_CNN = 'l-lstm-cnn'
    C_LSTM_CNN = 'c-lstm-cnn'

    @property
    def uses_lstm(self):
        return self is not ModelVariant.CNN_ONLY

    @property
    def uses_cnn(self):
        return self is not ModelVariant.LSTM_ONLY

    @property
    def uses_context_lstm(self):
        return self is ModelVariant.L_LSTM_CNN

    @property
    def uses_fofe(self):
        return self is ModelVariant.C_LSTM_CNN


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters."""

    embed_dim: int = 50
    lstm_hidden: int = 64
    kernel_sizes: tuple = (2, 3, 4, 5, 6)
    conv_features: int = 64
    fofe: fo.FofeConfig = field(default_factory=fo.FofeConfig)
    fofe_dense_out: int = 64
    dropout_rate: float = 0.5
    num_classes: int = 2
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'kernel_sizes',
                           tuple(int(k) for k in self.kernel_sizes))
        for name in ('embed_dim', 'lstm_hidden', 'conv_features',
                     'fofe_dense_out', 'num_classes'):
            assert getattr(self, name) >= 1, \
                '{} should be at least 1, got {}'.format(
                    name, getattr(self, name))
        assert self.kernel_sizes, 'Need at least one kernel size'
        assert list(self.kernel_sizes) == sorted(set(self.kernel_sizes)) \
            and self.kernel_sizes[0] >= 1, \
            'Kernel sizes should be positive and ascending, got {}'.format(
                self.kernel_sizes)
        assert 0.0 <= self.dropout_rate < 1.0, \
            'Dropout rate should be in [0, 1), got {}'.format(
                self.dropout_rate)

    def to_dict(self):
        """Plain dict, FOFE factors flattened to alpha_sent/alpha_cont."""
        values = asdict(self)
        fofe = values.pop('fofe')
        values.update(fofe)
        values['kernel_sizes'] = list(self.kernel_sizes)
        return values

    @classmethod
    def from_dict(cls, values):
        """Inverse of `to_dict`; unknown keys are ignored."""
        values = dict(values)
        fofe = fo.FofeConfig(**{k: values.pop(k) for k in
                                ('alpha_sent', 'alpha_cont') if k in values})
        known = {k: v for k, v in values.items()
                 if k in cls.__dataclass_fields__ and k != 'fofe'}
        return cls(fofe=fofe, **known)


@dataclass
class EncodedInstance:
    """Instance with embeddings looked up and FOFE codes precomputed.

    Context inputs are filled only for the variants reading them.
    """

    focus: np.ndarray
    label: int
    left_code: np.ndarray = None
    right_code: np.ndarray = None
    left_adjacent: np.ndarray = None
    right_adjacent: np.ndarray = None
    doc_id: str = None
    index: int = None


@dataclass
class Model:
    """Variant, configuration, parameters and frozen embeddings."""

    variant: ModelVariant
    config: ModelConfig
    params: dict
    table: et.EmbeddingTable
    label_names: list = None
    regime: str = 'adjacent'


def feature_width(variant, config):
    """Length of the concatenated vector fed to the output layer."""
    width = (config.conv_features * len(config.kernel_sizes)
             if variant.uses_cnn else 2 * config.lstm_hidden)
    if variant.uses_context_lstm:
        width += 4 * config.lstm_hidden
    if variant.uses_fofe:
        width += 2 * config.fofe_dense_out
    return width


def param_shapes(variant, config):
    """Ordered shape table of a variant's parameters."""
    dim, hidden = config.embed_dim, config.lstm_hidden
    table = {}
    if variant.uses_lstm:
        table.update(lt.lstm_shapes('lstm', dim, hidden))
    if variant.uses_cnn:
        conv_in = 2 * hidden if variant.uses_lstm else dim
        for width in config.kernel_sizes:
            table.update(lt.conv_shapes('conv{}'.format(width), width,
                                        conv_in, config.conv_features))
    if variant.uses_context_lstm:
        table.update(lt.lstm_shapes('ctx_lstm', dim, hidden))
    if variant.uses_fofe:
        for side in fo.SIDES:
            table.update(lt.dense_shapes('fofe_' + side, dim,
                                         config.fofe_dense_out))
    table.update(lt.dense_shapes('out', feature_width(variant, config),
                                 config.num_classes))
    return table


def build_model(variant, config, table, label_names=None, regime='adjacent'):
    """Create a model with freshly initialized parameters.

    Parameters
    ----------
    variant : ModelVariant or str
        Architecture.
    config : ModelConfig
        Hyperparameters; `config.seed` drives initialization.
    table : EmbeddingTable
        Frozen embeddings of dimension `config.embed_dim`.
    label_names : list of str, optional
        Class names in index order.
    regime : str, optional
        Context construction the model is trained on. Default is
        'adjacent'.

    Returns
    -------
    Model
        Initialized model.
    """
    variant = ModelVariant(variant)
    assert table.dim == config.embed_dim, \
        'Embedding dimension {} differs from config {}'.format(
            table.dim, config.embed_dim)
    assert label_names is None or len(label_names) == config.num_classes, \
        '{} label names for {} classes'.format(len(label_names),
                                               config.num_classes)
    assert regime in dt.REGIMES, 'Unknown regime {}'.format(regime)
    params = lt.init_params(param_shapes(variant, config), config.seed)
    return Model(variant, config, params, table,
                 list(label_names) if label_names else None, regime)


def parameter_count(model):
    """Total number of trainable scalars."""
    return int(sum(value.size for value in model.params.values()))


def encode_instance(model, instance):
    """Look up embeddings and precompute the parameter free context codes.

    Embeddings are frozen and FOFE has no parameters, so context codes
    are computed once per instance. Zero length sentences are dropped
    from the FOFE codes. An empty adjacent sentence gives the context
    BiLSTM its zero state, farther sentences never replace it.
    """
    table, variant = model.table, model.variant
    focus = table.lookup_sequence(instance.focus)
    encoded = EncodedInstance(focus, instance.label, doc_id=instance.doc_id,
                              index=instance.index)
    if variant.uses_fofe:
        dim = table.dim
        encoded.left_code = fo.encode_context(
            [table.lookup_sequence(s) for s in instance.left if s],
            model.config.fofe, 'left', dim)
        encoded.right_code = fo.encode_context(
            [table.lookup_sequence(s) for s in instance.right if s],
            model.config.fofe, 'right', dim)
    if variant.uses_context_lstm:
        if instance.left and instance.left[-1]:
            encoded.left_adjacent = table.lookup_sequence(instance.left[-1])
        if instance.right and instance.right[0]:
            encoded.right_adjacent = table.lookup_sequence(instance.right[0])
    return encoded


def _ensure_encoded(model, instance):
    if isinstance(instance, EncodedInstance):
        return instance
    return encode_instance(model, instance)


def forward(model, instance, rng=None, training=False):
    """Class probabilities of one instance.

    Parameters
    ----------
    model : Model
        Classifier.
    instance : Instance or EncodedInstance
        Input; raw instances are encoded on the fly.
    rng : numpy Generator, optional
        Dropout randomness, needed when `training` is True.
    training : bool, optional
        If True, apply dropout. Default is False.

    Returns
    -------
    numpy array
        Probabilities over `num_classes`.
    dict
        Layer tapes for `backward`.
    """
    encoded = _ensure_encoded(model, instance)
    params, config, variant = model.params, model.config, model.variant
    assert encoded.focus.shape[0] >= 1, 'Empty focus sentence'
    tape = {'steps': encoded.focus.shape[0]}
    pieces = []

    if variant.uses_lstm:
        states, tape['lstm'] = lt.bilstm_forward(encoded.focus,
                                                 lt.scope(params, 'lstm'))
    if variant.uses_cnn:
        conv_in = states if variant.uses_lstm else encoded.focus
        conv_in = lt.pad_rows(conv_in, config.kernel_sizes[-1])
        tape['conv_rows'] = conv_in.shape[0]
        pooled = []
        for width in config.kernel_sizes:
            name = 'conv{}'.format(width)
            activations, tape[name] = lt.conv1d_forward(
                conv_in, lt.scope(params, name))
            vector, _, tape['pool{}'.format(width)] = lt.max_over_time(
                activations)
            pooled.append(vector)
        dropped, _, tape['dropout'] = lt.dropout(
            np.concatenate(pooled), config.dropout_rate, rng, training)
        pieces.append(dropped)
    else:
        pieces.append(lt.final_states(states))

    if variant.uses_context_lstm:
        ctx_params = lt.scope(params, 'ctx_lstm')
        for side, sentence in (('left', encoded.left_adjacent),
                               ('right', encoded.right_adjacent)):
            key = 'ctx_' + side
            if sentence is None:
                tape[key] = None
                pieces.append(np.zeros(2 * config.lstm_hidden))
                continue
            ctx_states, ctx_tape = lt.bilstm_forward(sentence, ctx_params)
            tape[key] = (ctx_tape, sentence.shape[0])
            pieces.append(lt.final_states(ctx_states))

    if variant.uses_fofe:
        for side, code in (('left', encoded.left_code),
                           ('right', encoded.right_code)):
            name = 'fofe_' + side
            dense, tape[name] = lt.dense_forward(code,
                                                 lt.scope(params, name))
            pieces.append(dense)

    tape['widths'] = [piece.shape[0] for piece in pieces]
    logits, tape['out'] = lt.dense_forward(np.concatenate(pieces),
                                           lt.scope(params, 'out'))
    tape['logits'] = tt.check_finite(logits, 'logits')
    return tt.softmax(logits), tape


def backward(model, tape, d_logits):
    """Parameter gradients of one forward pass.

    Parameters
    ----------
    model : Model
        Classifier used in the forward pass.
    tape : dict
        Tapes returned by `forward`.
    d_logits : numpy array
        Gradient of the loss with respect to the logits.

    Returns
    -------
    dict
        Name: gradient pairs, for the parameters the pass touched.
    """
    config, variant = model.config, model.variant
    grads = {}
    d_features, out_grads = lt.dense_backward(tape['out'], d_logits)
    lt.add_scoped(grads, 'out', out_grads)
    bounds = np.cumsum([0] + tape['widths'])
    d_pieces = [d_features[bounds[i]:bounds[i + 1]]
                for i in range(len(tape['widths']))]

    # Context branches come after the focus branch, in forward order.
    piece = 1
    if variant.uses_context_lstm:
        for side in fo.SIDES:
            entry = tape['ctx_' + side]
            if entry is not None:
                ctx_tape, steps = entry
                d_states = lt.final_states_backward(d_pieces[piece], steps)
                _, ctx_grads = lt.bilstm_backward(ctx_tape, d_states)
                lt.add_scoped(grads, 'ctx_lstm', ctx_grads)
            piece += 1
    if variant.uses_fofe:
        for side in fo.SIDES:
            name = 'fofe_' + side
            _, dense_grads = lt.dense_backward(tape[name], d_pieces[piece])
            lt.add_scoped(grads, name, dense_grads)
            piece += 1

    # Focus branch.
    if variant.uses_cnn:
        d_pooled = lt.dropout_backward(tape['dropout'], d_pieces[0])
        features = config.conv_features
        d_conv_in = None
        for pos, width in enumerate(config.kernel_sizes):
            name = 'conv{}'.format(width)
            d_activations = lt.max_over_time_backward(
                tape['pool{}'.format(width)],
                d_pooled[pos * features:(pos + 1) * features])
            d_in, conv_grads = lt.conv1d_backward(tape[name], d_activations)
            lt.add_scoped(grads, name, conv_grads)
            d_conv_in = d_in if d_conv_in is None else d_conv_in + d_in
        d_states = d_conv_in[:tape['steps']] if variant.uses_lstm else None
    else:
        d_states = lt.final_states_backward(d_pieces[0], tape['steps'])
    if variant.uses_lstm:
        _, lstm_grads = lt.bilstm_backward(tape['lstm'], d_states)
        lt.add_scoped(grads, 'lstm', lstm_grads)
    return grads


def loss_and_grads(model, batch, class_weights, rng=None, training=True):
    """Class weighted cross entropy of a minibatch and its gradients.

    Parameters
    ----------
    model : Model
        Classifier.
    batch : list of Instance or EncodedInstance
        Non empty minibatch; labels are read from the instances.
    class_weights : numpy array
        Loss weight of each class.
    rng : numpy Generator, optional
        Dropout randomness.
    training : bool, optional
        If True, apply dropout. Default is True.

    Returns
    -------
    float
        Mean of w_label * -log p_label over the batch.
    dict
        Gradients of every parameter, zero where untouched.

    Raises
    ------
    AssertionError
        Empty batch or label out of range.
    """
    assert batch, 'Minibatch should not be empty'
    class_weights = np.asarray(class_weights, dtype=np.float64)
    num_classes = model.config.num_classes
    assert class_weights.shape == (num_classes,), \
        'Need {} class weights, got {}'.format(num_classes,
                                               class_weights.shape)
    grads = {name: np.zeros_like(value)
             for name, value in model.params.items()}
    total = 0.0
    for instance in batch:
        assert 0 <= instance.label < num_classes, \
            'Label {} outside {} classes'.format(instance.label, num_classes)
        probs, tape = forward(model, instance, rng, training)
        weight = class_weights[instance.label]
        logits = tape['logits']
        total += weight * (logsumexp(logits) - logits[instance.label])
        d_logits = probs.copy()
        d_logits[instance.label] -= 1.0
        d_logits *= weight / len(batch)
        for name, value in backward(model, tape, d_logits).items():
            grads[name] += value
    return total / len(batch), grads


def predict_proba(model, instances):
    """Inference mode probabilities, one row per instance."""
    if not instances:
        return np.zeros((0, model.config.num_classes))
    return np.stack([forward(model, instance)[0] for instance in instances])


def predict(model, instances):
    """Argmax class of each instance, ties to the lowest index."""
    return np.argmax(predict_proba(model, instances), axis=1)


def with_config(model, **changes):
    """Copy of a model with a modified config and copied parameters."""
    config = replace(model.config, **changes)
    params = {name: value.copy() for name, value in model.params.items()}
    return Model(model.variant, config, params, model.table,
                 model.label_names, model.regime)


# Checkpoints.

def save_checkpoint(model, file_path):
    """Write variant, regime, config, labels, parameters and embeddings.

    Returns
    -------
    Path
        Path of written checkpoint.
    """
    file_path = Path(file_path)
    with H5(file_path, 'w') as out:
        out.attrs['format'] = CHECKPOINT_FORMAT
        out.attrs['variant'] = model.variant.value
        out.attrs['regime'] = model.regime
        out.set_json_attr('config', model.config.to_dict())
        out.set_json_attr('label_names', model.label_names)
        out.save_arrays('params', model.params)
        out.save_arrays('embeddings',
                        {'vectors': model.table.vectors,
                         'tokens': model.table.tokens()},
                        {'oov_seed': model.table.oov_seed})
    logger.info('Saved %s checkpoint with %d parameters to %s',
                model.variant.value, parameter_count(model), file_path)
    return file_path


def load_checkpoint(file_path):
    """Read a checkpoint written by `save_checkpoint`.

    Raises
    ------
    ValueError
        Not a checkpoint, or parameters inconsistent with the stored
        variant and config.
    OSError
        Unreadable or corrupted file.
    """
    file_path = Path(file_path)
    with H5(file_path, 'r') as src:
        if src.attrs.get('format') != CHECKPOINT_FORMAT:
            raise ValueError('{} is not a model checkpoint'.format(file_path))
        variant = ModelVariant(str(src.attrs['variant']))
        regime = str(src.attrs.get('regime', 'adjacent'))
        config = ModelConfig.from_dict(src.get_json_attr('config'))
        label_names = src.get_json_attr('label_names')
        params = src.load_arrays('params')
        embeddings = src.load_arrays('embeddings')
        oov_seed = int(src['embeddings'].attrs['oov_seed'])

    # Parameters must match the shape table of the stored variant.
    expected = {name: shape for name, (_, shape, _)
                in param_shapes(variant, config).items()}
    found = {name: value.shape for name, value in params.items()}
    if expected != found:
        raise ValueError('{}: parameters do not match {} config'.format(
            file_path, variant.value))
    params = {name: params[name] for name in expected}
    tokens = [str(token) for token in embeddings['tokens']]
    table = et.EmbeddingTable({t: i for i, t in enumerate(tokens)},
                              embeddings['vectors'], oov_seed)
    return Model(variant, config, params, table, label_names, regime)
