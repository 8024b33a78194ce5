#!/usr/bin/env python3
"""Download the real-network fixtures into the data directory.

dolphins.gml and polblogs.gml come from Mark Newman's network data page.
The first download records the SHA-256 of each archive in
data/fixtures.sha256; later downloads must match it.

Dolphin group membership is not part of the archive. Provide it as
data/dolphins_groups.tsv (`name<TAB>group`, one line per dolphin).
"""

import argparse
import hashlib
import io
import os
import re
import sys
import urllib.request
import zipfile
from pathlib import Path

BASE_URL = "http://www-personal.umich.edu/~mejn/netdata/"

FIXTURES = {
    "dolphins.gml": {"archive": "dolphins.zip", "nodes": 62, "edges": 159},
    "polblogs.gml": {"archive": "polblogs.zip", "nodes": 1490, "edges": None},
}


def default_data_dir() -> Path:
    env = os.environ.get("BLOCKFACTOR_DATA_DIR")
    if env:
        return Path(env)
    return Path(__file__).resolve().parent.parent / "data"


def load_pins(path: Path) -> dict:
    pins = {}
    if path.exists():
        for line in path.read_text().splitlines():
            parts = line.split()
            if len(parts) == 2:
                pins[parts[1]] = parts[0]
    return pins


def save_pins(path: Path, pins: dict) -> None:
    path.write_text("".join(f"{digest}  {name}\n" for name, digest in sorted(pins.items())))


def count_gml(text: str) -> tuple:
    nodes = len(re.findall(r"\bnode\s*\[", text))
    edges = len(re.findall(r"\bedge\s*\[", text))
    return nodes, edges


def fetch(name: str, info: dict, data_dir: Path, pins: dict, base_url: str) -> None:
    target = data_dir / name
    if target.exists():
        print(f"{name}: already present")
        return
    url = base_url + info["archive"]
    print(f"{name}: downloading {url}")
    try:
        with urllib.request.urlopen(url, timeout=60) as resp:
            blob = resp.read()
    except OSError as e:
        raise SystemExit(f"{name}: download failed ({e}); copy the file into {data_dir} by hand")
    digest = hashlib.sha256(blob).hexdigest()
    pinned = pins.get(info["archive"])
    if pinned is None:
        print(f"{name}: pinning sha256 {digest}")
        pins[info["archive"]] = digest
    elif pinned != digest:
        raise SystemExit(f"{info['archive']}: sha256 {digest} does not match pinned {pinned}")

    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        member = next((m for m in zf.namelist() if m.endswith(name)), None)
        if member is None:
            raise SystemExit(f"{info['archive']}: no {name} inside")
        text = zf.read(member).decode("utf-8", errors="replace")

    nodes, edges = count_gml(text)
    if nodes != info["nodes"] or (info["edges"] is not None and edges != info["edges"]):
        raise SystemExit(f"{name}: unexpected shape ({nodes} nodes, {edges} edges)")
    target.write_text(text)
    print(f"{name}: {nodes} nodes, {edges} edges")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--data-dir", type=Path, default=default_data_dir())
    parser.add_argument("--base-url", default=BASE_URL)
    args = parser.parse_args()

    args.data_dir.mkdir(parents=True, exist_ok=True)
    pin_file = args.data_dir / "fixtures.sha256"
    pins = load_pins(pin_file)
    try:
        for name, info in FIXTURES.items():
            fetch(name, info, args.data_dir, pins, args.base_url)
    finally:
        if pins:
            save_pins(pin_file, pins)

    if not (args.data_dir / "dolphins_groups.tsv").exists():
        print("note: dolphins_groups.tsv is missing; the dolphins benchmark needs it", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
