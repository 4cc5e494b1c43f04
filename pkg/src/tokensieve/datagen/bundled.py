"""Access to the data files shipped inside the package.

The bundle contains a small synthetic filler corpus (for demos, smoke tests,
and CLI runs that do not supply their own documents) and a 50-example starter
training set in the JSONL record format.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

BUNDLED_EXAMPLES = "niah_train_50.jsonl"


def bundled_corpus_dir() -> Path:
    """Directory of the filler documents shipped with the package."""
    path = Path(str(resources.files("tokensieve").joinpath("data/corpus")))
    if not path.is_dir():
        raise FileNotFoundError(f"bundled corpus missing: {path}")
    return path


def bundled_examples_path() -> Path:
    """Path of the bundled starter training set (JSONL records)."""
    path = Path(str(resources.files("tokensieve").joinpath(f"data/{BUNDLED_EXAMPLES}")))
    if not path.is_file():
        raise FileNotFoundError(f"bundled training set missing: {path}")
    return path
