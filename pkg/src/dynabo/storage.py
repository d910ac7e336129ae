"""Where corpora and results live on disk."""

from __future__ import annotations

import os
from pathlib import Path

ENV_VAR = "DYNABO_DATA_DIR"


def data_dir() -> Path:
    """Resolve the persistence root (``DYNABO_DATA_DIR`` or ``~/.dynabo``)."""
    root = Path(os.environ.get(ENV_VAR, Path.home() / ".dynabo"))
    root.mkdir(parents=True, exist_ok=True)
    return root
