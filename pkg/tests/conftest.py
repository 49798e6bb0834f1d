import numpy as np
import pytest

from lackmv import BlobSpec, gen_blobs, stratified_label_sample


@pytest.fixture
def blobs3():
    ds, truth = gen_blobs(BlobSpec(c=3, n_per_class=40, dims=[4, 6], separation=10.0, spread=1.0, seed=7))
    return ds, truth


@pytest.fixture
def labels3(blobs3):
    return stratified_label_sample(blobs3[1], 0.1, seed=3)


def random_instance(rng, n, P, c, m_max=6):
    """Random views plus a labeling that reveals one sample of each class."""
    from lackmv import LabelInfo, MultiViewDataset

    truth = np.concatenate([np.arange(c), rng.integers(0, c, n - c)])
    rng.shuffle(truth)
    views = [rng.normal(size=(int(rng.integers(1, m_max + 1)), n)) for _ in range(P)]
    firsts = np.sort([np.flatnonzero(truth == k)[0] for k in range(c)])
    extra = rng.choice(np.setdiff1d(np.arange(n), firsts), size=int(rng.integers(0, max(1, n // 4))), replace=False)
    labeled = np.unique(np.concatenate([firsts, extra]))
    return MultiViewDataset(views), LabelInfo(truth, c, labeled)


ACCEPTANCE_LINES: list[str] = []


def acceptance(number, title, ok, detail=""):
    """Record one acceptance criterion outcome and fail the test if it did not hold."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
