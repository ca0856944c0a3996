import numpy as np
import pytest

try:
    # strict single-threaded mode: keeps BLAS-backed ops bit-reproducible
    from threadpoolctl import threadpool_limits
    _BLAS_LIMITER = threadpool_limits(limits=1)
except ImportError:  # pragma: no cover - determinism tests will still try
    _BLAS_LIMITER = None

DATA_DIR = "data"


def finite_diff(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of scalar f at x."""
    g = np.zeros_like(x, dtype=np.float64)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def rel_err(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.abs(numeric).max(), np.abs(analytic).max(), 1e-8)
    return float(np.abs(analytic - numeric).max() / scale)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def corpus_low():
    from relight.corpus import load_corpus_dir
    return load_corpus_dir(f"{DATA_DIR}/low")


@pytest.fixture(scope="session")
def corpus_ref():
    from relight.corpus import load_corpus_dir
    return load_corpus_dir(f"{DATA_DIR}/ref")


@pytest.fixture(scope="session")
def corpus_test_low():
    from relight.corpus import load_corpus_dir
    return load_corpus_dir(f"{DATA_DIR}/test_low")


@pytest.fixture(scope="session")
def corpus_test_ref():
    from relight.corpus import load_corpus_dir
    return load_corpus_dir(f"{DATA_DIR}/test_ref")
