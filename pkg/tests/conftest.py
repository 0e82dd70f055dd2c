import numpy as np
import pytest


def max_rel_err(analytic, finite, floor=1e-6):
    """Worst-case relative disagreement between gradient arrays.

    The floor keeps mathematically-zero gradients (where central
    differences only see float roundoff) from dividing by ~0.
    """
    analytic = np.asarray(analytic, dtype=np.float64).ravel()
    finite = np.asarray(finite, dtype=np.float64).ravel()
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(finite)), floor)
    return float(np.max(np.abs(analytic - finite) / scale)) if analytic.size else 0.0


def fd_grad(loss_fn, array, step=1e-4):
    """Central finite differences of a scalar loss wrt an array, in place."""
    grad = np.zeros_like(array, dtype=np.float64)
    flat = array.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        up = loss_fn()
        flat[i] = orig - step
        down = loss_fn()
        flat[i] = orig
        gflat[i] = (up - down) / (2 * step)
    return grad


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
