"""Shared argument handling for the experiment scripts."""

import argparse
from pathlib import Path


def parser(description, default_out):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", type=Path, default=Path("results") / default_out)
    p.add_argument("--workers", type=int, default=1)
    return p


def save(table, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(table.to_csv().encode("utf-8"))
    print(f"wrote {path} ({len(table.rows)} rows)")
