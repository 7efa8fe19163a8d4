import numpy as np
import pytest

from seqfusion.data import Dataset, FeatureView
from seqfusion.gbt import GBTConfig

_CRITERIA = []


@pytest.fixture
def record_criterion():
    """Record one acceptance-criterion outcome for the terminal summary."""
    def record(number, passed, detail=""):
        _CRITERIA.append((number, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}")


@pytest.fixture
def fast_gbt():
    return GBTConfig(n_estimators=30, max_depth=3)


def make_dataset(labels, clinical, image, clin_prefix="clin_", img_prefix="img_"):
    labels = np.asarray(labels)
    clinical = np.asarray(clinical, dtype=float).reshape(len(labels), -1)
    image = np.asarray(image, dtype=float).reshape(len(labels), -1)
    return Dataset(
        tuple(f"s{i}" for i in range(len(labels))), labels,
        {"clinical": FeatureView("clinical", tuple(f"{clin_prefix}f{j}" for j in range(clinical.shape[1])), clinical),
         "image": FeatureView("image", tuple(f"{img_prefix}f{j}" for j in range(image.shape[1])), image)})
