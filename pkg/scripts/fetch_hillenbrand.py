#!/usr/bin/env python3
"""Fetch the published vowel formant tables and write data/hillenbrand.csv.

Downloads the vowdata.dat file from the original study's homepage,
extracts steady-state F1 and F2 for every token, and writes a CSV with
header `vowel,f1,f2`. Tokens with an unmeasurable formant (recorded as
zero in the source file) are dropped.

The twelve vowel codes are kept as-is except for the four used by the
classification experiments, which are shortened: ah -> a, iy -> i,
oa -> o, uw -> u.

Usage:
    python3 scripts/fetch_hillenbrand.py [--out data/hillenbrand.csv]

Requires network access. Without it, the package falls back to
synthetic clusters (see phasegrad.data.synthesize_formants).
"""

import argparse
import os
import re
import sys
import urllib.request

SOURCE_URL = "https://homepages.wmich.edu/~hillenbr/voweldata/vowdata.dat"

VOWEL_CODES = {
    "ae": "ae", "ah": "a", "aw": "aw", "eh": "eh", "ei": "ei", "er": "er",
    "ih": "ih", "iy": "i", "oa": "o", "oo": "oo", "uh": "uh", "uw": "u",
}

# Data rows start with a speaker tag: m/w/b/g + 2-digit id + vowel code.
ROW_RE = re.compile(r"^([mwbg])(\d\d)(" + "|".join(VOWEL_CODES) + r")$")


def parse_vowdata(text: str) -> list[tuple[str, float, float]]:
    rows = []
    for line in text.splitlines():
        fields = line.split()
        if not fields:
            continue
        match = ROW_RE.match(fields[0])
        if not match or len(fields) < 6:
            continue
        # Columns: token, duration, steady-state f0, F1, F2, F3, ...
        vowel = VOWEL_CODES[match.group(3)]
        f1 = float(fields[3])
        f2 = float(fields[4])
        if f1 <= 0 or f2 <= 0:
            continue
        rows.append((vowel, f1, f2))
    return rows


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=os.path.join("data", "hillenbrand.csv"))
    parser.add_argument("--url", default=SOURCE_URL)
    args = parser.parse_args()

    print(f"fetching {args.url}")
    try:
        with urllib.request.urlopen(args.url, timeout=60) as resp:
            text = resp.read().decode("ascii", errors="replace")
    except OSError as exc:
        print(f"download failed: {exc}", file=sys.stderr)
        print("the package will use synthetic fallback data instead", file=sys.stderr)
        return 1

    rows = parse_vowdata(text)
    if not rows:
        print("no data rows recognized; source format may have changed", file=sys.stderr)
        return 1

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "w") as fh:
        fh.write("vowel,f1,f2\n")
        for vowel, f1, f2 in rows:
            fh.write(f"{vowel},{f1:g},{f2:g}\n")

    counts = {}
    for vowel, _, _ in rows:
        counts[vowel] = counts.get(vowel, 0) + 1
    print(f"wrote {len(rows)} tokens to {args.out}")
    print("per class:", " ".join(f"{v}={c}" for v, c in sorted(counts.items())))
    return 0


if __name__ == "__main__":
    sys.exit(main())
