#!/usr/bin/env python3
"""Run one scenario under both presentation conditions and print headlines.

Convenience wrapper over `convassist-harness compare` for eyeballing the
face-anchored vs world-fixed gap without digging through report JSON.
"""

from __future__ import annotations

import argparse

from convassist.harness import compare, load_scenario


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("scenario", nargs="?", default="scenarios/reading.toml")
    args = parser.parse_args()

    pair = compare(load_scenario(args.scenario))
    a, b = pair["a"], pair["b"]
    rows = [
        ("gaze on face", f"{a['on_face']['proportion']:.3f}", f"{b['on_face']['proportion']:.3f}"),
        ("gaze on text", f"{a['reading']['proportion']:.3f}", f"{b['reading']['proportion']:.3f}"),
        ("shift events", str(len(a["events"]["shift"])), str(len(b["events"]["shift"]))),
        ("toggle events", str(len(a["events"]["toggle"])), str(len(b["events"]["toggle"]))),
        ("hint updates", str(sum(1 for h in a['events']['hints'] if h['lines'])),
         str(sum(1 for h in b['events']['hints'] if h['lines']))),
        ("turns (user/partner)",
         f"{a['turns']['turns_user']}/{a['turns']['turns_partner']}",
         f"{b['turns']['turns_user']}/{b['turns']['turns_partner']}"),
    ]
    name = pair["scenario"]
    print(f"scenario: {name}")
    print(f"{'metric':<22}{'face-anchored':>16}{'world-fixed':>16}")
    for label, fa, fx in rows:
        print(f"{label:<22}{fa:>16}{fx:>16}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
