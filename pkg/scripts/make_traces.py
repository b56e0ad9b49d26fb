#!/usr/bin/env python3
"""Regenerate the versioned scenario fixtures under scenarios/.

Everything written here is deterministic (no RNG, no timestamps), so
rerunning the script must leave the checked-in files byte-identical.
"""

from __future__ import annotations

import math
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
TRACES = ROOT / "scenarios" / "traces"

DURATION_MS = 120_000

# t_ms, speaker, kind, loudness, text[, end_ms]
TRANSCRIPT_ROWS = [
    (2000, "U", "partial", "-", "so last weekend", None),
    (2400, "U", "final", "0.8", "so last weekend I finally went camping", 4200),
    (5000, "P", "final", "0.5", "oh nice where did you go", 6200),
    (8000, "U", "final", "0.7", "up by the lake we went camping with my brother", 10500),
    (11000, "P", "final", "0.5", "camping", 11400),
    (13000, "U", "final", "0.8", "yeah the tent was brand new", 14600),
    (16000, "P", "final", "0.5", "uh huh", 16400),
    (18000, "U", "final", "0.75", "setting up the tent took almost an hour", 20100),
    (22000, "P", "final", "0.5", "an hour really", 23000),
    (26000, "U", "final", "0.8", "the gear bag was heavier than it looked", 28200),
    (30000, "U", "final", "0.7", "still the gear survived the rain", 31900),
    (35000, "P", "final", "0.5", "did it rain all night", 36200),
    (38000, "U", "final", "0.8", "only the first night", 39200),
    (45000, "U", "final", "0.7", "next month we want to try the coast", 47000),
    (50000, "P", "final", "0.5", "the coast sounds windy", 51200),
    (55000, "U", "final", "0.8", "maybe we bring the soccer ball too", 57000),
    (60000, "U", "final", "0.7", "beach soccer is harder than it looks", 62100),
    (66000, "P", "final", "0.5", "ha I bet", 66700),
    (70000, "U", "final", "0.8", "my brother plays soccer every sunday", 72000),
    (76000, "P", "final", "0.5", "every sunday wow", 77000),
    (80000, "U", "final", "0.7", "he keeps his boots in the camping box", 82100),
    (86000, "U", "final", "0.8", "anyway the campfire was the best part", 88200),
    (92000, "P", "final", "0.5", "campfire food always wins", 93500),
    (96000, "U", "final", "0.7", "we grilled corn on the campfire", 97900),
    (102000, "U", "final", "0.8", "next time you should come camping with us", 104300),
    (108000, "P", "final", "0.5", "i would like that", 109000),
    (112000, "U", "final", "0.6", "great i will pack an extra tent", 114200),
    (118000, "U", "final", "0.1", "whispered aside nobody caught", 119300),
]

# Gaze directive traces. ``follow`` chases the text panel; ``face`` the
# partner's face; ``arc N`` parks on a dwell arc; ``away``/``off`` break gaze.
GAZE_FULL = [
    (0, "follow"),
    (30000, "away"),
    (31000, "follow"),
    (45000, "arc 4"),
    (46300, "follow"),
    (50000, "arc 2"),
    (51300, "follow"),
    (100000, "off"),
    (101000, "follow"),
]

GAZE_READING = [
    (0, "follow"),
]

GAZE_TOGGLE_OFF = [
    (0, "follow"),
    (45000, "arc 4"),
    (46300, "follow"),
]


def write_transcript(path: Path) -> None:
    lines = ["# scripted dyadic conversation; tab-separated replay rows"]
    for t, spk, kind, loud, text, end in TRANSCRIPT_ROWS:
        fields = [str(t), spk, kind, loud, text]
        if end is not None:
            fields.append(str(end))
        lines.append("\t".join(fields))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_faces(path: Path) -> None:
    """Partner head ~600 mm from the camera with a slow, small sway."""
    lines = ["# t\tleft-eye xyz\tright-eye xyz\tnose xyz (mm, camera frame, y down)"]
    for t in range(0, DURATION_MS + 1, 100):
        cx = 8.0 * math.sin(2 * math.pi * t / 20000.0)
        cy = 3.0 * math.sin(2 * math.pi * t / 13000.0)
        cz = 600.0 + 10.0 * math.sin(2 * math.pi * t / 31000.0)
        le = (cx - 31.0, cy, cz)
        re = (cx + 31.0, cy, cz)
        nb = (cx, cy + 35.0, cz)
        def fmt(p):
            return " ".join(f"{v:.3f}" for v in p)
        lines.append(f"{t}\t{fmt(le)}\t{fmt(re)}\t{fmt(nb)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_gaze(path: Path, rows) -> None:
    lines = ["# t\tdirective"]
    for t, directive in rows:
        lines.append(f"{t}\t{directive}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def main() -> None:
    TRACES.mkdir(parents=True, exist_ok=True)
    write_transcript(TRACES / "transcript.tsv")
    write_faces(TRACES / "faces.tsv")
    write_gaze(TRACES / "gaze_full.tsv", GAZE_FULL)
    write_gaze(TRACES / "gaze_reading.tsv", GAZE_READING)
    write_gaze(TRACES / "gaze_toggle_off.tsv", GAZE_TOGGLE_OFF)
    print(f"wrote fixtures under {TRACES}")


if __name__ == "__main__":
    main()
