import numpy as np


def weighted_variance(x, weights=None, returned=False):
    """
    Compute the weighted variance of real or complex samples.

    Parameters
    ----------
    x: ndarray
        Samples (flattened before use)
    weights: ndarray, optional
        Weights associated with the values in `x`. If `weights` is `None`,
        each value is assumed to have a weight of 1.
    returned: bool, optional
        Default is `False`. If True, the tuple
        `(variance, mean, sum_of_weights)` is returned, otherwise only the
        variance is returned

    Notes
    -----
    We explicitly use
        `var = np.sum(weights * np.abs(x - mean)**2) / np.sum(weights)`,
    where `mean = np.average(x, weights=weights)`. In other words, this is
    the variance of the discrete measure described by the weights; no form of
    Bessel's correction is applied.
    """
    x = np.asarray(x).ravel()
    if weights is None:
        weights = np.ones(x.shape, dtype=np.float64)
    else:
        weights = np.asarray(weights, dtype=np.float64).ravel()
    if x.shape != weights.shape:
        raise ValueError("x and weights must have the same number of elements")

    mean, weight_sum = np.average(x, weights=weights, returned=True)
    # np.average gives the weight sum the dtype of x
    weight_sum = np.real(weight_sum)
    variance = np.sum(weights * np.abs(x - mean) ** 2) / weight_sum
    if returned:
        return variance, mean, weight_sum
    return variance


def pairwise_variance(x, weights=None, chunk_size=1024):
    """
    The variance from pairwise differences,
    `0.5 * sum_ij w_i w_j |x_i - x_j|**2 / (sum_i w_i)**2`.

    For any discrete measure this equals :func:`weighted_variance`; the two
    are evaluated independently so they can be compared. The double sum is
    accumulated in row chunks of `chunk_size` to bound memory use.
    """
    x = np.asarray(x).ravel()
    if weights is None:
        weights = np.ones(x.shape, dtype=np.float64)
    else:
        weights = np.asarray(weights, dtype=np.float64).ravel()
    total = 0.0
    for start in range(0, x.size, chunk_size):
        stop = min(start + chunk_size, x.size)
        diff = np.abs(x[start:stop, None] - x[None, :]) ** 2
        total += np.sum(weights[start:stop, None] * diff * weights[None, :])
    return 0.5 * total / np.sum(weights) ** 2
