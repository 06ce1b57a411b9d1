import os
import sys

import pytest

# Add the project root directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))


@pytest.fixture(autouse=True)
def output_dir(tmp_path, monkeypatch):
    """Keep reports written during tests inside the temporary directory"""
    monkeypatch.setenv("SOLVEGEO_OUTPUT_DIR", str(tmp_path))
    return tmp_path
