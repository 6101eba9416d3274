#!/usr/bin/env python3
"""Fetch MovieLens-100K ratings into data/ml-100k/u.data.

Tries the GroupLens archive first. If that host is unreachable, falls back to
the copy bundled in the `recbole` wheel on PyPI (same rows, same order).
"""

import argparse
import hashlib
import io
import subprocess
import sys
import tempfile
import urllib.request
import zipfile
from pathlib import Path

GROUPLENS_URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
WHEEL_SPEC = "recbole==1.2.1"
WHEEL_MEMBER = "recbole/dataset_example/ml-100k/ml-100k.inter"
EXPECTED_ROWS = 100000


def from_grouplens(timeout):
    with urllib.request.urlopen(GROUPLENS_URL, timeout=timeout) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    return archive.read("ml-100k/u.data").decode()


def from_wheel():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "--only-binary=:all:", "-d", tmp, WHEEL_SPEC],
            check=True,
            stdout=subprocess.DEVNULL,
        )
        wheel = next(Path(tmp).glob("recbole-*.whl"))
        text = zipfile.ZipFile(wheel).read(WHEEL_MEMBER).decode()
    # Atomic-file layout: a typed header line, then tab-separated user item rating timestamp.
    lines = text.splitlines()
    if lines and ":" in lines[0]:
        lines = lines[1:]
    return "\n".join(lines) + "\n"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/ml-100k/u.data")
    parser.add_argument("--timeout", type=float, default=20.0)
    args = parser.parse_args()

    out = Path(args.out)
    if out.exists():
        print(f"{out} already exists")
        return 0

    try:
        text = from_grouplens(args.timeout)
        source = "grouplens"
    except Exception as err:  # noqa: BLE001
        print(f"grouplens unavailable ({err}); trying PyPI", file=sys.stderr)
        text = from_wheel()
        source = WHEEL_SPEC

    rows = [line for line in text.splitlines() if line.strip()]
    if len(rows) != EXPECTED_ROWS or any(len(r.split("\t")) != 4 for r in rows):
        print(f"unexpected content: {len(rows)} rows", file=sys.stderr)
        return 1

    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(rows) + "\n")
    digest = hashlib.sha256(out.read_bytes()).hexdigest()[:16]
    print(f"wrote {out} from {source}: {len(rows)} ratings, sha256 {digest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
