"""Trainable layers with hand derived forward and backward passes.

Parameters of a layer are plain dicts of float64 arrays:

- LSTM direction: 'W' (4*hidden, input), 'U' (4*hidden, hidden),
  'b' (4*hidden), gate blocks ordered input, forget, output, candidate.
- Convolution: 'K' (features, width, input), 'b' (features).
- Dense: 'W' (out, in), 'b' (out).

Every forward call returns a tape holding the activations its backward
pass needs; a tape can be consumed only once.

Intended to be used within a Python 3 environment.

"""

from dataclasses import dataclass, field

import numpy as np

from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from . import tensor_tools as tt


@dataclass
class LayerTape:
    """Cached forward activations of one layer call."""

    kind: str
    cache: dict = field(default_factory=dict)
    consumed: bool = False

    def consume(self, kind):
        """Hand the cache to a backward pass, exactly once."""
        assert self.kind == kind, \
            'Tape of a {} layer passed to {} backward'.format(self.kind, kind)
        assert not self.consumed, 'Tape of {} already consumed'.format(kind)
        self.consumed = True
        return self.cache


# Initialization.

def init_params(shape_table, seed):
    """Initialize parameters from a shape table.

    Weights are uniform in [-k, k] with k = sqrt(1/fan_in), biases are
    zero except LSTM forget gate biases, which start at 1.

    Parameters
    ----------
    shape_table : dict
        Name: (kind, shape, fan_in) triples, kind one of 'weight',
        'bias' or 'lstm_bias'. Drawing follows the dict order.
    seed : int
        Random seed.

    Returns
    -------
    dict
        Name: numpy array pairs.
    """
    rng = np.random.default_rng(seed)
    params = {}
    for name, (kind, shape, fan_in) in shape_table.items():
        if kind == 'weight':
            params[name] = tt.uniform_samples(rng, shape,
                                              np.sqrt(1.0 / fan_in))
        elif kind == 'lstm_bias':
            hidden = shape[0] // 4
            bias = np.zeros(shape)
            bias[hidden:2 * hidden] = 1.0
            params[name] = bias
        else:
            assert kind == 'bias', 'Unknown parameter kind {!r}'.format(kind)
            params[name] = np.zeros(shape)
    return params


def lstm_shapes(prefix, input_dim, hidden):
    """Shape table of a bidirectional LSTM."""
    table = {}
    for direction in ('fw', 'bw'):
        name = '{}.{}.'.format(prefix, direction)
        table[name + 'W'] = ('weight', (4 * hidden, input_dim), input_dim)
        table[name + 'U'] = ('weight', (4 * hidden, hidden), hidden)
        table[name + 'b'] = ('lstm_bias', (4 * hidden,), None)
    return table


def conv_shapes(prefix, width, input_dim, features):
    """Shape table of one convolution kernel bank."""
    return {prefix + '.K': ('weight', (features, width, input_dim),
                            width * input_dim),
            prefix + '.b': ('bias', (features,), None)}


def dense_shapes(prefix, in_dim, out_dim):
    """Shape table of an affine layer."""
    return {prefix + '.W': ('weight', (out_dim, in_dim), in_dim),
            prefix + '.b': ('bias', (out_dim,), None)}


def scope(params, prefix):
    """View of the parameters under `prefix`, with the prefix stripped."""
    start = prefix + '.'
    return {k[len(start):]: v for k, v in params.items()
            if k.startswith(start)}


def add_scoped(grads, prefix, local_grads):
    """Accumulate a layer's gradients into a flat gradient dict."""
    for name, value in local_grads.items():
        key = '{}.{}'.format(prefix, name)
        if key in grads:
            grads[key] += value
        else:
            grads[key] = value.copy()
    return grads


# LSTM.

def lstm_forward(seq, params):
    """Run one LSTM direction over a sequence, from zero states.

    Parameters
    ----------
    seq : numpy array
        Inputs, shape (T, input).
    params : dict
        'W', 'U' and 'b' of the direction.

    Returns
    -------
    numpy array
        Hidden states, shape (T, hidden).
    LayerTape
        Cache for `lstm_backward`.
    """
    w_in, w_rec, bias = params['W'], params['U'], params['b']
    steps, hidden = seq.shape[0], w_rec.shape[1]
    assert steps >= 1, 'LSTM needs at least one time step'
    assert seq.shape[1] == w_in.shape[1], \
        'Input width {} does not match weights {}'.format(seq.shape[1],
                                                          w_in.shape)

    # Input contributions of all steps at once, recurrence step by step.
    projected = seq @ w_in.T + bias
    gates = np.empty((steps, 4 * hidden))
    cells = np.zeros((steps + 1, hidden))
    states = np.zeros((steps + 1, hidden))
    for step in range(steps):
        pre = projected[step] + w_rec @ states[step]
        gates[step, :3 * hidden] = expit(pre[:3 * hidden])
        gates[step, 3 * hidden:] = np.tanh(pre[3 * hidden:])
        i_gate = gates[step, :hidden]
        f_gate = gates[step, hidden:2 * hidden]
        o_gate = gates[step, 2 * hidden:3 * hidden]
        candidate = gates[step, 3 * hidden:]
        cells[step + 1] = f_gate * cells[step] + i_gate * candidate
        states[step + 1] = o_gate * np.tanh(cells[step + 1])
    tape = LayerTape('lstm', {'seq': seq, 'gates': gates, 'cells': cells,
                              'states': states, 'params': params})
    return states[1:].copy(), tape


def lstm_backward(tape, d_states):
    """Backpropagation through time for one LSTM direction.

    Parameters
    ----------
    tape : LayerTape
        From `lstm_forward`.
    d_states : numpy array
        Upstream gradient of the hidden states, shape (T, hidden).

    Returns
    -------
    numpy array
        Gradient of the inputs, shape (T, input).
    dict
        Gradients of 'W', 'U' and 'b'.
    """
    cache = tape.consume('lstm')
    seq, gates, cells = cache['seq'], cache['gates'], cache['cells']
    states, params = cache['states'], cache['params']
    w_in, w_rec = params['W'], params['U']
    steps, hidden = gates.shape[0], w_rec.shape[1]
    assert d_states.shape == (steps, hidden), \
        'Upstream gradient shape {} does not match {}'.format(
            d_states.shape, (steps, hidden))

    d_pre = np.empty((steps, 4 * hidden))
    d_h_next = np.zeros(hidden)
    d_c_next = np.zeros(hidden)
    for step in reversed(range(steps)):
        i_gate = gates[step, :hidden]
        f_gate = gates[step, hidden:2 * hidden]
        o_gate = gates[step, 2 * hidden:3 * hidden]
        candidate = gates[step, 3 * hidden:]
        tanh_c = np.tanh(cells[step + 1])

        d_h = d_states[step] + d_h_next
        d_c = d_c_next + d_h * o_gate * (1.0 - tanh_c ** 2)
        d_pre[step, :hidden] = d_c * candidate * i_gate * (1.0 - i_gate)
        d_pre[step, hidden:2 * hidden] = \
            d_c * cells[step] * f_gate * (1.0 - f_gate)
        d_pre[step, 2 * hidden:3 * hidden] = \
            d_h * tanh_c * o_gate * (1.0 - o_gate)
        d_pre[step, 3 * hidden:] = d_c * i_gate * (1.0 - candidate ** 2)
        d_c_next = d_c * f_gate
        d_h_next = w_rec.T @ d_pre[step]

    grads = {'W': d_pre.T @ seq,
             'U': d_pre.T @ states[:-1],
             'b': d_pre.sum(axis=0)}
    return d_pre @ w_in, grads


def bilstm_forward(seq, params):
    """Bidirectional single layer LSTM.

    Parameters
    ----------
    seq : numpy array
        Inputs, shape (T, input), T >= 1.
    params : dict
        Scoped parameters with 'fw.*' and 'bw.*' entries.

    Returns
    -------
    numpy array
        Shape (T, 2*hidden); row t is the forward state at t followed by
        the backward state at t.
    LayerTape
        Cache for `bilstm_backward`.

    Raises
    ------
    AssertionError
        Empty sequence.
    """
    seq = np.asarray(seq, dtype=np.float64)
    assert seq.ndim == 2 and seq.shape[0] >= 1, \
        'BiLSTM needs a (T>=1, input) sequence, got {}'.format(seq.shape)
    forward, fw_tape = lstm_forward(seq, scope(params, 'fw'))
    backward, bw_tape = lstm_forward(seq[::-1], scope(params, 'bw'))
    outputs = np.concatenate([forward, backward[::-1]], axis=1)
    return outputs, LayerTape('bilstm', {'fw': fw_tape, 'bw': bw_tape,
                                         'hidden': forward.shape[1]})


def bilstm_backward(tape, d_outputs):
    """Backward pass of `bilstm_forward`.

    Returns
    -------
    numpy array
        Gradient of the input sequence.
    dict
        Gradients keyed 'fw.W', 'bw.U', ...
    """
    cache = tape.consume('bilstm')
    hidden = cache['hidden']
    d_fw_in, fw_grads = lstm_backward(cache['fw'], d_outputs[:, :hidden])
    d_bw_in, bw_grads = lstm_backward(cache['bw'],
                                      d_outputs[::-1, hidden:])
    grads = {}
    add_scoped(grads, 'fw', fw_grads)
    add_scoped(grads, 'bw', bw_grads)
    return d_fw_in + d_bw_in[::-1], grads


def final_states(outputs):
    """Last forward state and last backward state, concatenated."""
    hidden = outputs.shape[1] // 2
    return np.concatenate([outputs[-1, :hidden], outputs[0, hidden:]])


def final_states_backward(d_final, steps):
    """Scatter the gradient of `final_states` back over the outputs."""
    hidden = d_final.shape[0] // 2
    d_outputs = np.zeros((steps, 2 * hidden))
    d_outputs[-1, :hidden] = d_final[:hidden]
    d_outputs[0, hidden:] += d_final[hidden:]
    return d_outputs


# Convolution and pooling.

def pad_rows(matrix, min_rows):
    """Append zero rows until the matrix has at least `min_rows` rows."""
    missing = min_rows - matrix.shape[0]
    if missing <= 0:
        return matrix
    return np.vstack([matrix, np.zeros((missing, matrix.shape[1]))])


def conv1d_forward(inputs, params):
    """Valid 1-D convolution over time followed by ReLU.

    Parameters
    ----------
    inputs : numpy array
        Shape (T, input), T at least the kernel width.
    params : dict
        'K' of shape (features, width, input) and 'b' of shape
        (features,).

    Returns
    -------
    numpy array
        Activations, shape (T - width + 1, features).
    LayerTape
        Cache for `conv1d_backward`.

    Raises
    ------
    AssertionError
        Sequence shorter than the kernel or channel mismatch.
    """
    kernel, bias = params['K'], params['b']
    features, width, channels = kernel.shape
    assert inputs.shape[1] == channels, \
        'Input has {} channels, kernel expects {}'.format(inputs.shape[1],
                                                          channels)
    assert inputs.shape[0] >= width, \
        'Sequence of length {} is shorter than kernel {}'.format(
            inputs.shape[0], width)

    # Windows as rows of length width*channels, offsets major.
    windows = sliding_window_view(inputs, width, axis=0)
    windows = windows.transpose(0, 2, 1).reshape(-1, width * channels)
    pre = windows @ kernel.reshape(features, -1).T + bias
    tape = LayerTape('conv', {'windows': windows, 'pre': pre,
                              'params': params, 'steps': inputs.shape[0]})
    return tt.relu(pre), tape


def conv1d_backward(tape, d_outputs):
    """Backward pass of `conv1d_forward`.

    Returns
    -------
    numpy array
        Gradient of the inputs, shape (T, input).
    dict
        Gradients of 'K' and 'b'.
    """
    cache = tape.consume('conv')
    kernel = cache['params']['K']
    features, width, channels = kernel.shape
    d_pre = d_outputs * (cache['pre'] > 0)
    grads = {'K': (d_pre.T @ cache['windows']).reshape(kernel.shape),
             'b': d_pre.sum(axis=0)}
    d_windows = (d_pre @ kernel.reshape(features, -1)).reshape(
        -1, width, channels)
    positions = d_windows.shape[0]
    d_inputs = np.zeros((cache['steps'], channels))
    for offset in range(width):
        d_inputs[offset:offset + positions] += d_windows[:, offset, :]
    return d_inputs, grads


def max_over_time(activations):
    """Per feature maximum over time positions.

    Ties go to the earliest position.

    Parameters
    ----------
    activations : numpy array
        Shape (positions, features), at least one position.

    Returns
    -------
    numpy array
        Pooled features.
    numpy array
        Argmax position of each feature.
    LayerTape
        Cache for `max_over_time_backward`.
    """
    assert activations.ndim == 2 and activations.shape[0] >= 1, \
        'Pooling needs at least one time position, got {}'.format(
            activations.shape)
    indices = np.argmax(activations, axis=0)
    pooled = activations[indices, np.arange(activations.shape[1])]
    tape = LayerTape('pool', {'indices': indices,
                              'shape': activations.shape})
    return pooled, indices, tape


def max_over_time_backward(tape, d_pooled):
    """Route the pooled gradient to the argmax positions only."""
    cache = tape.consume('pool')
    d_activations = np.zeros(cache['shape'])
    d_activations[cache['indices'], np.arange(cache['shape'][1])] = d_pooled
    return d_activations


# Dropout and dense.

def dropout(vector, rate, rng=None, training=True):
    """Inverted dropout.

    Parameters
    ----------
    vector : numpy array
        Input values.
    rate : float
        Probability of zeroing a component, in [0, 1).
    rng : numpy Generator, optional
        Needed in training mode when rate > 0.
    training : bool, optional
        If False, return the input unchanged. Default is True.

    Returns
    -------
    numpy array
        Output values; survivors scaled by 1/(1 - rate).
    numpy array
        Mask applied, already scaled.
    LayerTape
        Cache for `dropout_backward`.
    """
    assert 0.0 <= rate < 1.0, 'Dropout rate should be in [0, 1), got {}'.format(
        rate)
    if not training or rate == 0.0:
        mask = np.ones_like(vector)
    else:
        assert rng is not None, 'Training mode dropout needs a generator'
        mask = (rng.random(vector.shape) >= rate) / (1.0 - rate)
    return vector * mask, mask, LayerTape('dropout', {'mask': mask})


def dropout_backward(tape, d_outputs):
    """Backward pass of `dropout`."""
    return d_outputs * tape.consume('dropout')['mask']


def dense_forward(vector, params):
    """Affine map W @ v + b.

    Raises
    ------
    AssertionError
        Input length does not match the weight matrix.
    """
    weight, bias = params['W'], params['b']
    assert vector.shape == (weight.shape[1],), \
        'Dense input shape {} does not match weight {}'.format(vector.shape,
                                                              weight.shape)
    tape = LayerTape('dense', {'input': vector, 'params': params})
    return weight @ vector + bias, tape


def dense_backward(tape, d_outputs):
    """Backward pass of `dense_forward`.

    Returns
    -------
    numpy array
        Gradient of the input vector.
    dict
        Gradients of 'W' and 'b'.
    """
    cache = tape.consume('dense')
    weight = cache['params']['W']
    assert d_outputs.shape == (weight.shape[0],), \
        'Upstream gradient shape {} does not match weight {}'.format(
            d_outputs.shape, weight.shape)
    grads = {'W': np.outer(d_outputs, cache['input']),
             'b': d_outputs.copy()}
    return weight.T @ d_outputs, grads
