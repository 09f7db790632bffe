"""Adamax training, class weights and stratified cross validation.

Intended to be used within a Python 3 environment.

"""

import itertools
import logging
import time

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import tqdm

from . import model_tools as mo
from . import statistics_tools as stt


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Optimization protocol with the published defaults."""

    epochs: int = 50
    batch_size: int = 64
    learning_rate: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    folds: int = 5
    shuffle_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        for name in ('epochs', 'batch_size', 'folds', 'workers'):
            assert getattr(self, name) >= 1, \
                '{} should be at least 1, got {}'.format(
                    name, getattr(self, name))
        assert 0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0, \
            'Betas should be in [0, 1)'


@dataclass
class AdamaxState:
    """First moments, infinity norms and step counter."""

    moments: dict
    norms: dict
    step: int = 0


@dataclass
class FoldReport:
    """Test metrics and timing of one cross validation fold."""

    fold: int
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    confusion: np.ndarray
    train_seconds: float
    epoch_seconds: list = field(default_factory=list)
    loss_history: list = field(default_factory=list)


@dataclass
class TrainResult:
    """Outcome of `train_fold`."""

    model: mo.Model
    loss_history: list
    train_seconds: float
    epoch_seconds: list


# Optimizer.

def adamax_init(params):
    """Zero optimizer state shaped like the parameters."""
    return AdamaxState({k: np.zeros_like(v) for k, v in params.items()},
                       {k: np.zeros_like(v) for k, v in params.items()})


def adamax_step(params, grads, state, train_config):
    """Apply one Adamax update in place.

    m <- b1*m + (1-b1)*g ; u <- max(b2*u, |g|) ;
    theta <- theta - lr/(1-b1^t) * m/(u+eps)

    Parameters
    ----------
    params : dict
        Name: array pairs, updated in place.
    grads : dict
        Gradients with the same names and shapes.
    state : AdamaxState
        Optimizer state, updated in place.
    train_config : TrainConfig
        Learning rate, betas and eps.

    Returns
    -------
    dict
        Updated parameters.
    AdamaxState
        Updated state.

    Raises
    ------
    AssertionError
        Gradient names or shapes differ from the parameters.
    """
    cfg = train_config
    assert grads.keys() == params.keys(), 'Gradients and parameters differ'
    state.step += 1
    step_size = cfg.learning_rate / (1.0 - cfg.beta1 ** state.step)
    for name, value in params.items():
        grad = grads[name]
        assert grad.shape == value.shape, \
            'Gradient of {} has shape {}, expected {}'.format(
                name, grad.shape, value.shape)
        moment, norm = state.moments[name], state.norms[name]
        moment *= cfg.beta1
        moment += (1.0 - cfg.beta1) * grad
        np.maximum(cfg.beta2 * norm, np.abs(grad), out=norm)
        value -= step_size * moment / (norm + cfg.eps)
    return params, state


# Class weights.

def label_frequencies(labels, num_classes):
    """Instances per class."""
    return np.bincount(np.asarray(labels, dtype=np.int64),
                       minlength=num_classes)


def class_weights(frequencies):
    """Weights max(f) / f_i countering label imbalance.

    Raises
    ------
    AssertionError
        A class with zero frequency.
    """
    frequencies = np.asarray(frequencies, dtype=np.float64)
    assert np.all(frequencies >= 1), \
        'Every class needs at least one instance, got {}'.format(
            frequencies.tolist())
    return frequencies.max() / frequencies


# Train and evaluate.

def train_fold(model, train_set, train_config, weights, progress=False):
    """Train a model with minibatch Adamax for a fixed number of epochs.

    Parameters
    ----------
    model : Model
        Model to train; its parameters are updated in place.
    train_set : list of Instance
        Training instances.
    train_config : TrainConfig
        Epochs, batch size, optimizer and shuffle seed.
    weights : numpy array
        Class weights.
    progress : bool, optional
        If True, show a progress bar over epochs. Default is False.

    Returns
    -------
    TrainResult
        Trained model, mean loss per epoch and wall-clock timings.
    """
    cfg = train_config
    assert train_set, 'Training set should not be empty'
    checksum = model.table.checksum()
    start = time.perf_counter()
    encoded = [mo.encode_instance(model, instance) for instance in train_set]
    shuffle_rng = np.random.default_rng([cfg.shuffle_seed, 0])
    dropout_rng = np.random.default_rng([cfg.shuffle_seed, 1])
    state = adamax_init(model.params)

    loss_history, epoch_seconds = [], []
    for epoch in tqdm.tqdm(range(cfg.epochs), desc=model.variant.value,
                           disable=not progress):
        epoch_start = time.perf_counter()
        order = shuffle_rng.permutation(len(encoded))
        losses, sizes = [], []
        for begin in range(0, len(order), cfg.batch_size):
            batch = [encoded[i] for i in order[begin:begin + cfg.batch_size]]
            loss, grads = mo.loss_and_grads(model, batch, weights,
                                            dropout_rng, training=True)
            adamax_step(model.params, grads, state, cfg)
            losses.append(loss)
            sizes.append(len(batch))
        loss_history.append(float(np.average(losses, weights=sizes)))
        epoch_seconds.append(time.perf_counter() - epoch_start)
        logger.debug('%s epoch %d loss %.6f', model.variant.value, epoch + 1,
                     loss_history[-1])
    seconds = time.perf_counter() - start
    assert model.table.checksum() == checksum, \
        'Embedding table changed during training'
    return TrainResult(model, loss_history, seconds, epoch_seconds)


def evaluate(model, test_set):
    """Accuracy, per class precision/recall/F1 and confusion matrix.

    Returns
    -------
    dict
        Keys 'accuracy', 'precision', 'recall', 'f1', 'confusion'.
    """
    assert test_set, 'Test set should not be empty'
    true_labels = [i.label for i in test_set]
    predicted = mo.predict(model, test_set)
    num_classes = model.config.num_classes
    precision, recall, f1_score = stt.precision_recall_f1(
        true_labels, predicted, num_classes)
    return {'accuracy': stt.accuracy(true_labels, predicted),
            'precision': precision, 'recall': recall, 'f1': f1_score,
            'confusion': stt.confusion_matrix(true_labels, predicted,
                                              num_classes)}


# Cross validation.

def stratified_folds(labels, folds, seed):
    """Partition instance indices into stratified folds.

    Each class is shuffled, then dealt round-robin with one counter
    running across classes, so fold sizes differ by at most one.

    Parameters
    ----------
    labels : array_like of int
        Class of every instance.
    folds : int
        Number of folds.
    seed : int
        Shuffle seed.

    Returns
    -------
    list of numpy arrays
        Sorted test indices of each fold.

    Raises
    ------
    AssertionError
        A present class has fewer instances than folds.
    """
    labels = np.asarray(labels, dtype=np.int64)
    rng = np.random.default_rng([seed, 2])
    assignment = np.empty(labels.size, dtype=np.int64)
    counter = 0
    for label in np.unique(labels):
        members = np.flatnonzero(labels == label)
        assert members.size >= folds, \
            'Class {} has {} instances, fewer than {} folds'.format(
                label, members.size, folds)
        members = rng.permutation(members)
        assignment[members] = (counter + np.arange(members.size)) % folds
        counter += members.size
    return [np.flatnonzero(assignment == fold) for fold in range(folds)]


def _run_fold(fold, test_idx, instances, variant, model_config, train_config,
              table, label_names, progress):
    test_set = [instances[i] for i in test_idx]
    test_mask = np.zeros(len(instances), dtype=bool)
    test_mask[test_idx] = True
    train_set = [inst for inst, held in zip(instances, test_mask) if not held]

    # Class weights from the training portion only.
    weights = class_weights(label_frequencies(
        [i.label for i in train_set], model_config.num_classes))
    model = mo.build_model(variant, model_config, table, label_names)
    result = train_fold(model, train_set, train_config, weights, progress)
    metrics = evaluate(result.model, test_set)
    logger.info('%s fold %d accuracy %.4f (%.1f s)',
                mo.ModelVariant(variant).value, fold, metrics['accuracy'],
                result.train_seconds)
    return FoldReport(fold, metrics['accuracy'], metrics['precision'],
                      metrics['recall'], metrics['f1'], metrics['confusion'],
                      result.train_seconds, result.epoch_seconds,
                      result.loss_history)


def summarize_reports(reports):
    """Mean and sample standard deviation across folds.

    Returns
    -------
    dict
        'accuracy', 'f1' (per class lists) and 'train_seconds', each a
        {'mean', 'std'} mapping.
    """
    acc_mean, acc_std = stt.mean_and_std([r.accuracy for r in reports])
    sec_mean, sec_std = stt.mean_and_std([r.train_seconds for r in reports])
    f1_rows = np.array([r.f1 for r in reports])
    f1_stats = [stt.mean_and_std(f1_rows[:, col])
                for col in range(f1_rows.shape[1])]
    return {'accuracy': {'mean': acc_mean, 'std': acc_std},
            'f1': {'mean': [m for m, _ in f1_stats],
                   'std': [s for _, s in f1_stats]},
            'train_seconds': {'mean': sec_mean, 'std': sec_std}}


def cross_validate(instances, variant, model_config, train_config, table,
                   label_names=None, progress=False):
    """Stratified k-fold cross validation of one variant.

    Every fold trains a freshly built model from `model_config.seed`.
    Folds depend only on labels and `train_config.shuffle_seed`, so
    all variants see identical partitions.

    Parameters
    ----------
    instances : list of Instance
        Whole dataset.
    variant : ModelVariant or str
        Architecture.
    model_config : ModelConfig
        Hyperparameters.
    train_config : TrainConfig
        Protocol; `workers` > 1 trains folds in threads.
    table : EmbeddingTable
        Frozen embeddings.
    label_names : list of str, optional
        Class names.
    progress : bool, optional
        If True, show epoch progress bars. Default is False.

    Returns
    -------
    list of FoldReport
        Reports in fold order.
    dict
        Summary from `summarize_reports`.
    """
    assert train_config.folds >= 2, 'Cross validation needs at least 2 folds'
    labels = [instance.label for instance in instances]
    counts = label_frequencies(labels, model_config.num_classes)
    assert np.all(counts >= train_config.folds), \
        'Every class needs at least {} instances, got {}'.format(
            train_config.folds, counts.tolist())
    partition = stratified_folds(labels, train_config.folds,
                                 train_config.shuffle_seed)
    args = [(fold, test_idx, instances, variant, model_config, train_config,
             table, label_names, progress)
            for fold, test_idx in enumerate(partition)]
    if train_config.workers > 1:
        with ThreadPoolExecutor(max_workers=train_config.workers) as pool:
            reports = list(pool.map(lambda a: _run_fold(*a), args))
    else:
        reports = [_run_fold(*a) for a in args]
    return reports, summarize_reports(reports)


def pairwise_t_tests(fold_accuracies):
    """Welch t-test of every pair of variants.

    Parameters
    ----------
    fold_accuracies : dict
        Variant name: list of fold accuracies, in comparison order.

    Returns
    -------
    dict
        "a vs b": {'t': t statistic, 'p': p-value} pairs.
    """
    tests = {}
    for name_a, name_b in itertools.combinations(fold_accuracies, 2):
        t_stat, p_value = stt.welch_t_test(fold_accuracies[name_a],
                                           fold_accuracies[name_b])
        tests['{} vs {}'.format(name_a, name_b)] = {'t': t_stat,
                                                    'p': p_value}
    return tests
