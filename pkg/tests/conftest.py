import os
from pathlib import Path

import numpy as np
import pytest

from condorcet_morph.ordering import lex_mappings

ROOT = Path(__file__).resolve().parents[1]

# 5-voter / 3-candidate profile: three voters x1<=x2<=x3, two voters x3<=x1<=x2
FIVE_VOTER_PROFILE = [[0, 1, 2]] * 3 + [[2, 0, 1]] * 2


def cifar_batch_path():
    """First CIFAR-10 training batch, if present locally."""
    candidates = [
        os.environ.get("CIFAR10_BATCH"),
        ROOT / "data" / "cifar-10-batches-bin" / "data_batch_1.bin",
        ROOT / "data" / "data_batch_1.bin",
    ]
    for c in candidates:
        if c and Path(c).is_file():
            return Path(c)
    return None


def random_palette_image(rng, height, width, n_colors):
    palette = rng.integers(0, 256, size=(n_colors, 3)) / 255.0
    idx = rng.integers(0, n_colors, size=(height, width))
    return palette[idx]


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def H():
    return lex_mappings()


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance[report.nodeid] = report
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _acceptance[report.nodeid] = report


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, rep in sorted(_acceptance.items(), key=lambda kv: kv[0]):
        name = nodeid.split("::")[-1]
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        details = "; ".join(f"{k}={v}" for k, v in rep.user_properties)
        terminalreporter.write_line(f"{status}  {name}" + (f"  [{details}]" if details else ""))
