"""Run directories, manifests, and deterministic artifact files.

Every CLI run gets a fresh timestamped directory holding a manifest plus
its result files.  Result files are written with stable key order and no
timestamps, so re-running the same command with the same config and seed
reproduces them byte for byte; the manifest records the config snapshot,
the seed, and a SHA-256 per result file to make that checkable.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

MANIFEST_NAME = "manifest.json"


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_json(path: str, obj: object) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(list(row))


@dataclass
class RunManifest:
    command: str
    config: dict = field(default_factory=dict)
    seed: int = 0
    started: str = ""
    finished: str = ""
    version: str = ""
    inputs: dict = field(default_factory=dict)  # name -> sha256 of input artifacts
    results: dict = field(default_factory=dict)  # file name -> sha256
    passed: bool | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _timestamp() -> str:
    return time.strftime("%Y%m%d-%H%M%S", time.gmtime())


def create_run_dir(out_root: str, command: str) -> str:
    """A fresh run directory <out_root>/<command>-<utc timestamp>[-n]."""
    os.makedirs(out_root, exist_ok=True)
    base = f"{command.replace(' ', '-')}-{_timestamp()}"
    path = os.path.join(out_root, base)
    n = 0
    while True:
        try:
            os.makedirs(path)
            return path
        except FileExistsError:
            n += 1
            path = os.path.join(out_root, f"{base}-{n}")


class RunWriter:
    """Collects result files for one run and finalizes its manifest."""

    def __init__(self, run_dir: str, command: str, config: Mapping, seed: int, version: str):
        self.run_dir = run_dir
        self.manifest = RunManifest(
            command=command,
            config=dict(config),
            seed=seed,
            started=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            version=version,
        )

    def path(self, name: str) -> str:
        return os.path.join(self.run_dir, name)

    def add_input(self, name: str, digest: str) -> None:
        self.manifest.inputs[name] = digest

    def write_json(self, name: str, obj: object) -> str:
        p = self.path(name)
        write_json(p, obj)
        self.manifest.results[name] = sha256_file(p)
        return p

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
        p = self.path(name)
        write_csv(p, header, rows)
        self.manifest.results[name] = sha256_file(p)
        return p

    def write_text(self, name: str, text: str) -> str:
        p = self.path(name)
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.manifest.results[name] = sha256_file(p)
        return p

    def finish(self, passed: bool | None = None) -> str:
        self.manifest.finished = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        self.manifest.passed = passed
        out = self.path(MANIFEST_NAME)
        write_json(out, self.manifest.to_dict())
        return out
