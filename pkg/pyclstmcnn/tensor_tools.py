"""Dense linear algebra and elementwise math over numpy float64 arrays.

Matrices are 2-D row-major arrays, vectors are 1-D arrays, always in
double precision. Shapes are validated at call boundaries.

Intended to be used within a Python 3 environment.

"""

import numpy as np

from scipy.special import expit


def as_matrix(array_like, name='matrix'):
    """Normalize input to a finite float64 2-D array.

    Parameters
    ----------
    array_like : numpy array or similar convertible to it
        Values to normalize.
    name : str, optional
        Name used in error messages.

    Returns
    -------
    numpy array
        Float64 matrix.

    Raises
    ------
    AssertionError
        Input is not two dimensional.
    FloatingPointError
        Input contains NaN or Inf values.
    """
    matrix = np.asarray(array_like, dtype=np.float64)
    assert matrix.ndim == 2, \
        '{} should be 2-D, got shape {}'.format(name, matrix.shape)
    return check_finite(matrix, name)


def as_vector(array_like, name='vector'):
    """Normalize input to a finite float64 1-D array.

    Parameters
    ----------
    array_like : numpy array or similar convertible to it
        Values to normalize.
    name : str, optional
        Name used in error messages.

    Returns
    -------
    numpy array
        Float64 vector.

    Raises
    ------
    AssertionError
        Input is not one dimensional.
    FloatingPointError
        Input contains NaN or Inf values.
    """
    vector = np.asarray(array_like, dtype=np.float64)
    assert vector.ndim == 1, \
        '{} should be 1-D, got shape {}'.format(name, vector.shape)
    return check_finite(vector, name)


def check_finite(array, name='array'):
    """Raise if an array holds NaN or Inf values, else return it."""
    if not np.all(np.isfinite(array)):
        raise FloatingPointError('{} contains non finite values'.format(name))
    return array


def matmul(a_matrix, b_matrix):
    """Multiply two matrices.

    Parameters
    ----------
    a_matrix : numpy array
        Left factor, shape (n, k).
    b_matrix : numpy array
        Right factor, shape (k, m).

    Returns
    -------
    numpy array
        Product, shape (n, m).

    Raises
    ------
    AssertionError
        Inner dimensions do not agree.
    FloatingPointError
        Product is not finite.
    """
    a_matrix = as_matrix(a_matrix, 'left factor')
    b_matrix = as_matrix(b_matrix, 'right factor')
    assert a_matrix.shape[1] == b_matrix.shape[0], \
        'Cannot multiply shapes {} and {}'.format(a_matrix.shape,
                                                  b_matrix.shape)
    return check_finite(a_matrix @ b_matrix, 'product')


def softmax(vector):
    """Normalized exponential of a vector.

    The maximum is subtracted before exponentiation, so large inputs do
    not overflow.

    Parameters
    ----------
    vector : numpy array
        Scores, at least one element.

    Returns
    -------
    numpy array
        Probabilities summing to one.

    Raises
    ------
    AssertionError
        Empty input.
    """
    vector = as_vector(vector, 'scores')
    assert vector.size >= 1, 'Softmax of an empty vector is undefined'
    exps = np.exp(vector - np.max(vector))
    return exps / np.sum(exps)


def relu(matrix):
    """Rectified linear unit."""
    return np.maximum(matrix, 0.0)


ACTIVATIONS = {'tanh': np.tanh,
               'sigmoid': expit,
               'relu': relu,
               }


def elementwise(operation, matrix):
    """Apply a named nonlinearity to every element.

    Parameters
    ----------
    operation : str from `ACTIVATIONS` dictionary
        One of 'tanh', 'sigmoid' or 'relu'.
    matrix : numpy array
        Input values, any shape.

    Returns
    -------
    numpy array
        Transformed values, same shape as input.

    Raises
    ------
    AssertionError
        Operation not defined in `ACTIVATIONS`.
    """
    assert operation in ACTIVATIONS, \
        'Unknown elementwise operation {!r}'.format(operation)
    return ACTIVATIONS[operation](np.asarray(matrix, dtype=np.float64))


def finite_diff_grad(func, x_values, eps=1e-5):
    """Central finite difference gradient of a scalar function.

    Parameters
    ----------
    func : callable
        Maps an array shaped like `x_values` to a float.
    x_values : numpy array
        Point where the gradient is estimated. Any shape.
    eps : float, optional
        Step size. Default is 1e-5.

    Returns
    -------
    numpy array
        Gradient estimate, same shape as `x_values`.

    Raises
    ------
    AssertionError
        Non positive step size.
    FloatingPointError
        `func` returns a non finite value.
    """
    assert eps > 0, 'Step size should be positive, got {}'.format(eps)
    x_values = np.array(x_values, dtype=np.float64)
    grad = np.zeros_like(x_values)

    # Perturb one coordinate at a time, restoring it afterwards.
    flat_x = x_values.reshape(-1)
    flat_grad = grad.reshape(-1)
    for pos in range(flat_x.size):
        original = flat_x[pos]
        flat_x[pos] = original + eps
        f_plus = float(func(x_values))
        flat_x[pos] = original - eps
        f_minus = float(func(x_values))
        flat_x[pos] = original
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise FloatingPointError(
                'Non finite function value at coordinate {}'.format(pos))
        flat_grad[pos] = (f_plus - f_minus) / (2 * eps)
    return grad


def max_relative_error(analytic, numeric):
    """Largest |a - n| / max(1e-8, |a| + |n|) over all elements."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    assert analytic.shape == numeric.shape, \
        'Shapes {} and {} differ'.format(analytic.shape, numeric.shape)
    if analytic.size == 0:
        return 0.0
    denominator = np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))
    return float(np.max(np.abs(analytic - numeric) / denominator))


def uniform_samples(rng, shape, bound):
    """Draw values uniformly from [-bound, bound].

    Parameters
    ----------
    rng : numpy Generator
        Source of randomness.
    shape : tuple of int
        Output shape.
    bound : float
        Half width of the interval.

    Returns
    -------
    numpy array
        Samples of the requested shape.
    """
    return rng.uniform(low=-bound, high=bound, size=shape)
