"""Pytest configuration shared by the whole repository."""

import os
import sys

# Quiet, file-free runs unless the environment says otherwise
os.environ.setdefault("QSMILES_PROGRESS", "false")
os.environ.setdefault("LOG_FILE", "")

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: training runs that take minutes (deselect with -m 'not slow')")
