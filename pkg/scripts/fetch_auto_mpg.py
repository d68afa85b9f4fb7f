#!/usr/bin/env python3
"""Materialize data/auto-mpg.data in the classic UCI whitespace format.

The rows are rebuilt from the vega-datasets "cars" table, which carries the
original 406-row StatLib export of the same data. Rows without an mpg value
are removed, leaving the standard 398-row file in which six horsepower
entries appear as "?". Field order matches the published file:

    mpg cylinders displacement horsepower weight acceleration model_year origin "name"

Source resolution order:
  1. --cars-json PATH pointing at an existing cars.json
  2. node_modules/vega-datasets next to the repo root
  3. `npm install vega-datasets` into a temporary directory
"""

import argparse
import json
import subprocess
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
ORIGIN_CODES = {"USA": 1, "Europe": 2, "Japan": 3}


def locate_cars_json(explicit: str | None, scratch: Path) -> Path:
    if explicit:
        path = Path(explicit)
        if not path.is_file():
            sys.exit(f"no such file: {path}")
        return path
    local = REPO_ROOT / "node_modules" / "vega-datasets" / "data" / "cars.json"
    if local.is_file():
        return local
    print("installing vega-datasets via npm ...", file=sys.stderr)
    subprocess.run(
        ["npm", "install", "--prefix", str(scratch), "--no-save", "vega-datasets"],
        check=True,
        stdout=subprocess.DEVNULL,
    )
    return scratch / "node_modules" / "vega-datasets" / "data" / "cars.json"


def format_row(row: dict) -> str:
    year = int(row["Year"][:4]) - 1900
    horsepower = "?" if row["Horsepower"] is None else str(float(row["Horsepower"]))
    fields = [
        str(float(row["Miles_per_Gallon"])),
        str(int(row["Cylinders"])),
        str(float(row["Displacement"])),
        horsepower,
        str(float(row["Weight_in_lbs"])),
        str(float(row["Acceleration"])),
        str(year),
        str(ORIGIN_CODES[row["Origin"]]),
        '"%s"' % row["Name"],
    ]
    return " ".join(fields)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cars-json", help="existing cars.json to convert")
    parser.add_argument(
        "--out",
        default=str(REPO_ROOT / "data" / "auto-mpg.data"),
        help="output path (default: data/auto-mpg.data)",
    )
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as scratch:
        source = locate_cars_json(args.cars_json, Path(scratch))
        rows = json.loads(source.read_text())

    kept = [r for r in rows if r["Miles_per_Gallon"] is not None]
    missing_hp = sum(1 for r in kept if r["Horsepower"] is None)
    print(f"{len(rows)} source rows -> {len(kept)} with mpg ({missing_hp} missing horsepower)")
    if len(kept) != 398 or missing_hp != 6:
        print("warning: row counts differ from the published UCI file", file=sys.stderr)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("".join(format_row(r) + "\n" for r in kept))
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
