import numpy as np
import pytest

from voicemarkers import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jitted kernels once so timed tests measure steady state."""
    rng = np.random.default_rng(0)
    X = rng.standard_normal((32, 4))
    y = (X[:, 0] > 0).astype(np.float64)
    boot = rng.integers(0, 32, 32)
    imp = np.zeros(4)
    kernels.gini_tree_importances(X, y, boot, 2, 8, 1, 1, imp)
    g = rng.standard_normal(32)
    h = np.full(32, 0.25)
    rows = np.arange(32, dtype=np.int64)
    cols = np.arange(4, dtype=np.int64)
    feat, thr, left, right, value, _ = kernels.gbt_build_tree(
        X, g, h, rows, cols, 1.0, 0.0, 0.0, 1.0, 1, 4, 0)
    out = np.zeros(32)
    kernels.ensemble_margin(feat, thr, left, right, value,
                            np.zeros(1, np.int64), X, out)
