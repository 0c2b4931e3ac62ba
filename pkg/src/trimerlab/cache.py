"""Content-addressed result cache for CLI runs.

Outputs are stored under ``<cache_root>/<manifest_hash>/``; a rerun with an
identical manifest is served by copying the cached bytes, so cold and warm
runs produce byte-identical files.  Writes are atomic (temp dir + rename).
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
from pathlib import Path

ENV_VAR = "TRIMERLAB_CACHE"
DEFAULT_DIR = ".trimerlab-cache"


def manifest_hash(manifest: dict) -> str:
    payload = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def resolve_cache_dir(flag_value: str | None = None) -> Path:
    if flag_value:
        return Path(flag_value)
    return Path(os.environ.get(ENV_VAR, DEFAULT_DIR))


class ResultCache:
    def __init__(self, root: Path | str):
        self.root = Path(root)

    def _entry(self, key: str) -> Path:
        return self.root / key

    def has(self, key: str) -> bool:
        entry = self._entry(key)
        return entry.is_dir() and (entry / "MANIFEST.json").exists()

    def fetch(self, key: str, dest_dir: Path | str) -> list:
        """Copy every cached artifact of `key` into dest_dir; returns the names."""
        entry = self._entry(key)
        dest = Path(dest_dir)
        dest.mkdir(parents=True, exist_ok=True)
        names = []
        for p in sorted(entry.iterdir()):
            if p.name == "MANIFEST.json":
                continue
            shutil.copyfile(p, dest / p.name)
            names.append(p.name)
        return names

    def store(self, key: str, manifest: dict, files: dict):
        """Atomically store `files` (name -> source path) under the key."""
        self.root.mkdir(parents=True, exist_ok=True)
        entry = self._entry(key)
        if entry.exists():
            return
        tmp = Path(tempfile.mkdtemp(dir=self.root, prefix=".tmp-"))
        try:
            for name, src in files.items():
                shutil.copyfile(src, tmp / name)
            with open(tmp / "MANIFEST.json", "w") as f:
                json.dump(manifest, f, indent=2, sort_keys=True)
                f.write("\n")
            os.replace(tmp, entry)
        except BaseException:
            shutil.rmtree(tmp, ignore_errors=True)
            raise
