"""Versioned JSON checkpoints.

A checkpoint carries everything a seed's training state needs to resume
exactly: network parameters, Adam moments, monitoring state (masks, soft
masks, lam, the schedule counter and the adaptation references) and the
positions of every random stream. JSON round-trips Python floats exactly,
so save/load/resume reproduces the run bit for bit.
"""

from __future__ import annotations

import json

SCHEMA_VERSION = 1


def save_checkpoint(path: str, payload: dict) -> None:
    record = {"schema_version": SCHEMA_VERSION}
    record.update(payload)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(record, fh)
        fh.write("\n")


def load_checkpoint(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        record = json.load(fh)
    version = record.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported checkpoint schema {version!r}")
    return record
