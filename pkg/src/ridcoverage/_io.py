"""All-or-nothing output sets with a run manifest."""

from __future__ import annotations

import json
import os
import tempfile
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class OutputSet:
    """Stage files in memory and publish them together on :meth:`commit`.

    Nothing reaches the destination unless every output was produced; the
    manifest is written last, after the data files.
    """

    def __init__(self, subcommand: str, config: dict, seed: Optional[int], manifest_path=None):
        self.subcommand = subcommand
        self.config = config
        self.seed = seed
        self.manifest_path = Path(manifest_path) if manifest_path else None
        self._files: dict[Path, str] = {}
        self._t0 = time.perf_counter()
        self._started = datetime.now(timezone.utc).isoformat()

    def add(self, path, text: str) -> None:
        self._files[Path(path)] = text

    def commit(self) -> None:
        from . import __version__

        for path, text in self._files.items():
            atomic_write(path, text)
        if self.manifest_path is not None:
            manifest = {
                "subcommand": self.subcommand,
                "config": self.config,
                "seed": self.seed,
                "version": __version__,
                "outputs": [str(p) for p in self._files],
                "started_at": self._started,
                "duration_s": time.perf_counter() - self._t0,
            }
            atomic_write(self.manifest_path, json.dumps(manifest, indent=2, default=str) + "\n")
