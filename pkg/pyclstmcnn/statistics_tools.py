"""Statistics related mathematical functions.

Classification metrics, fold summaries and the Welch t-test.

Intended to be used within a Python 3 environment.

"""

import math

import numpy as np

from scipy.special import betainc
from sklearn import metrics


def confusion_matrix(true_labels, predicted_labels, num_classes):
    """Count (true, predicted) label pairs.

    Parameters
    ----------
    true_labels : array_like of int
        Gold classes.
    predicted_labels : array_like of int
        Predicted classes, same length.
    num_classes : int
        Matrix size; classes absent from both arrays keep zero rows.

    Returns
    -------
    numpy array
        Integer matrix, rows are true classes, columns predictions.
    """
    assert len(true_labels) == len(predicted_labels), \
        'Label arrays should have the same length'
    return metrics.confusion_matrix(true_labels, predicted_labels,
                                    labels=list(range(num_classes)))


def precision_recall_f1(true_labels, predicted_labels, num_classes):
    """Per class precision, recall and F1.

    Undefined ratios (zero denominators) are reported as 0.

    Returns
    -------
    tuple of numpy arrays
        Precision, recall and F1, one value per class.
    """
    precision, recall, f1_score, _ = metrics.precision_recall_fscore_support(
        true_labels, predicted_labels, labels=list(range(num_classes)),
        average=None, zero_division=0)
    return precision, recall, f1_score


def accuracy(true_labels, predicted_labels):
    """Fraction of matching labels."""
    assert len(true_labels) > 0, 'Accuracy of an empty label set'
    return float(metrics.accuracy_score(true_labels, predicted_labels))


def mean_and_std(values):
    """Mean and sample (n - 1) standard deviation.

    Parameters
    ----------
    values : array_like
        At least one number; the deviation of a single value is 0.

    Returns
    -------
    float
        Mean.
    float
        Sample standard deviation.
    """
    values = np.asarray(values, dtype=np.float64)
    assert values.size >= 1, 'Need at least one value'
    if values.size == 1:
        return float(values[0]), 0.0
    return float(np.mean(values)), float(np.std(values, ddof=1))


def student_t_two_sided_p(t_stat, dof):
    """Two sided tail probability of a t statistic.

    Uses P(|T| > t) = I_{dof/(dof+t^2)}(dof/2, 1/2), the regularized
    incomplete beta function.
    """
    if math.isinf(t_stat):
        return 0.0
    return float(betainc(dof / 2.0, 0.5, dof / (dof + t_stat ** 2)))


def welch_t_test(sample_a, sample_b):
    """Welch's unequal variance two sample t-test.

    Parameters
    ----------
    sample_a, sample_b : array_like
        Fold scores, at least two values each.

    Returns
    -------
    float
        t statistic (positive when `sample_a` has the larger mean).
    float
        Two sided p-value, Welch-Satterthwaite degrees of freedom.

    Raises
    ------
    AssertionError
        A sample with fewer than two values.
    """
    sample_a = np.asarray(sample_a, dtype=np.float64)
    sample_b = np.asarray(sample_b, dtype=np.float64)
    assert sample_a.size >= 2 and sample_b.size >= 2, \
        'Both samples need at least two values'
    size_a, size_b = sample_a.size, sample_b.size
    var_a = np.var(sample_a, ddof=1) / size_a
    var_b = np.var(sample_b, ddof=1) / size_b
    diff = float(np.mean(sample_a) - np.mean(sample_b))

    # Degenerate zero variance samples.
    if var_a + var_b == 0.0:
        if diff == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, diff), 0.0

    t_stat = diff / math.sqrt(var_a + var_b)
    dof = (var_a + var_b) ** 2 / (var_a ** 2 / (size_a - 1) +
                                  var_b ** 2 / (size_b - 1))
    return float(t_stat), student_t_two_sided_p(t_stat, dof)
