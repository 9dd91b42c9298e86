import os
import sys

import pytest

# Add project root to path so tests can import shared_utils
sys.path.append(os.path.abspath(os.path.dirname(__file__)))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="Also run tests marked slow")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: exhaustive scans that take minutes; run with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
