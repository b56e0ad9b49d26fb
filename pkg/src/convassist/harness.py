"""Scenario runner: drives a headless session from scripted trace files.

A scenario bundles a transcript (replay format), a face-landmark trace,
and a gaze-directive trace on one session time base. The runner advances
a simulated clock tick by tick — no wall-clock sleeps — feeding frames
through the same protocol surface a live client would use, and collects
a metrics report plus a per-tick CSV table. Reports are byte-identical
for byte-identical inputs.

Gaze trace rows are directives, not raw coordinates, so one scenario
exercises both presentation conditions meaningfully: ``follow`` tracks
the text panel wherever the engine put it, ``face`` tracks the partner's
face, ``arc N`` parks on a dwell arc, ``away``/``off`` look elsewhere or
drop the signal, and ``point X Y`` pins exact pixels.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import analytics, geometry, protocol
from .config import (CONDITION_FACE, CONDITION_FIXED, PROTO_VERSION, EngineConfig,
                     engine_config_from_dict, load_structured_file)
from .engine import SessionEngine
from .fsm import GazeSample, PanelCircle, arc_center_point
from .geometry import FaceObservation, PixelRect
from .ingest import MalformedReplay, TranscriptEvent, read_replay
from .providers import make_provider


class ScenarioError(Exception):
    """A scenario could not be loaded or run to completion."""


@dataclass(frozen=True)
class FaceRow:
    t_ms: int
    le: tuple[float, float, float]
    re: tuple[float, float, float]
    nb: tuple[float, float, float]


@dataclass(frozen=True)
class GazeDirective:
    t_ms: int
    kind: str  # follow | face | arc | away | off | point
    arc: int = 0
    x: float = 0.0
    y: float = 0.0


@dataclass(frozen=True)
class Scenario:
    name: str
    transcript_path: Path
    gaze_path: Path
    face_path: Path
    condition: str = CONDITION_FACE
    duration_ms: int | None = None
    normalizer: str = "grapheme"
    filler_languages: tuple[str, ...] = ("en", "ja")
    config: EngineConfig = dataclasses.field(default_factory=EngineConfig)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        raw = load_structured_file(path)
    except (OSError, ValueError) as exc:
        raise ScenarioError(f"cannot load scenario {path}: {exc}") from exc
    base = path.parent
    try:
        cfg = engine_config_from_dict(raw.get("config", {}))
        scenario = Scenario(
            name=str(raw.get("name", path.stem)),
            transcript_path=base / raw["transcript"],
            gaze_path=base / raw["gaze"],
            face_path=base / raw["faces"],
            condition=str(raw.get("condition", CONDITION_FACE)),
            duration_ms=int(raw["duration_ms"]) if "duration_ms" in raw else None,
            normalizer=str(raw.get("normalizer", "grapheme")),
            filler_languages=tuple(raw.get("filler_languages", ("en", "ja"))),
            config=cfg,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad scenario {path}: {exc}") from exc
    if scenario.condition not in (CONDITION_FACE, CONDITION_FIXED):
        raise ScenarioError(f"bad scenario {path}: unknown condition {scenario.condition!r}")
    for p in (scenario.transcript_path, scenario.gaze_path, scenario.face_path):
        if not p.is_file():
            raise ScenarioError(f"scenario file missing: {p}")
    return scenario


def parse_face_trace(path: Path) -> list[FaceRow]:
    rows: list[FaceRow] = []
    last_t = -1
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ScenarioError(f"{path}:{line_no}: expected 4 tab fields, got {len(fields)}")
        try:
            t = int(fields[0])
            triples = [tuple(float(v) for v in f.split()) for f in fields[1:]]
        except ValueError as exc:
            raise ScenarioError(f"{path}:{line_no}: {exc}") from exc
        if any(len(tr) != 3 for tr in triples):
            raise ScenarioError(f"{path}:{line_no}: each landmark needs 3 coordinates")
        if t < last_t:
            raise ScenarioError(f"{path}:{line_no}: timestamps must be non-decreasing")
        last_t = t
        rows.append(FaceRow(t_ms=t, le=triples[0], re=triples[1], nb=triples[2]))
    return rows


_DIRECTIVES = {"follow", "face", "arc", "away", "off", "point"}


def parse_gaze_trace(path: Path) -> list[GazeDirective]:
    rows: list[GazeDirective] = []
    last_t = -1
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ScenarioError(f"{path}:{line_no}: expected 2 tab fields, got {len(fields)}")
        try:
            t = int(fields[0])
        except ValueError as exc:
            raise ScenarioError(f"{path}:{line_no}: {exc}") from exc
        if t < last_t:
            raise ScenarioError(f"{path}:{line_no}: timestamps must be non-decreasing")
        last_t = t
        parts = fields[1].split()
        if not parts or parts[0] not in _DIRECTIVES:
            raise ScenarioError(f"{path}:{line_no}: unknown gaze directive {fields[1]!r}")
        kind = parts[0]
        try:
            if kind == "arc":
                rows.append(GazeDirective(t_ms=t, kind=kind, arc=int(parts[1])))
            elif kind == "point":
                rows.append(GazeDirective(t_ms=t, kind=kind, x=float(parts[1]), y=float(parts[2])))
            else:
                if len(parts) != 1:
                    raise ScenarioError(
                        f"{path}:{line_no}: directive {kind!r} takes no arguments")
                rows.append(GazeDirective(t_ms=t, kind=kind))
        except (IndexError, ValueError) as exc:
            raise ScenarioError(f"{path}:{line_no}: {exc}") from exc
    return rows


class _Driver:
    """Feeds one engine from parsed traces and records everything it emits."""

    def __init__(self, scenario: Scenario, condition: str):
        cfg = dataclasses.replace(scenario.config, condition=condition)
        self.cfg = cfg
        self.engine = SessionEngine(cfg, provider=make_provider(cfg.provider))
        self.rows: list[dict] = []
        self.engine.on_tick_row = self.rows.append
        self.hint_log: dict[int, dict] = {}
        self.engine.on_hint_request = self._log_request
        self.shift_events: list[dict] = []
        self.toggle_events: list[dict] = []
        self.last_rect: PixelRect | None = None
        self.last_circle: PanelCircle | None = None
        self.last_face_rect: PixelRect | None = None
        self.directive: GazeDirective | None = None

    def _log_request(self, req) -> None:
        self.hint_log[req.seq] = {"seq": req.seq, "requested_at": req.issued_at_ms,
                                  "completed_at": None, "latency_ms": None, "lines": 0}

    def absorb(self, frames: list[dict]) -> None:
        for frame in frames:
            ty = frame["ty"]
            if ty == "error":
                raise ScenarioError(
                    f"session error at t={frame['t']}: {frame['code']}: {frame['detail']}")
            if ty == "layout_update":
                r = frame["text_rect"]
                c = frame["circle"]
                self.last_rect = PixelRect(x=r["x"], y=r["y"], w=r["w"], h=r["h"])
                band = self.cfg.panel.arc_band_ratio
                self.last_circle = PanelCircle(cx=c["cx"], cy=c["cy"],
                                               inner_r=c["r"] * band, outer_r=c["r"])
            elif ty == "shift_down":
                self.shift_events.append({"t": frame["t"], "dir": "down"})
            elif ty == "shift_up":
                self.shift_events.append({"t": frame["t"], "dir": "up"})
            elif ty == "toggle_state":
                self.toggle_events.append({"t": frame["t"], "enabled": frame["enabled"]})
            elif ty == "hint_update":
                entry = self.hint_log.get(frame["seq"])
                if entry is not None and frame["lines"] and entry["completed_at"] is None:
                    entry["completed_at"] = frame["t"]
                    entry["latency_ms"] = frame["t"] - entry["requested_at"]
                    entry["lines"] = len(frame["lines"])

    def send(self, msg: dict) -> None:
        self.absorb(self.engine.handle_inbound(msg))

    def resolve_gaze(self, t: int) -> dict | None:
        d = self.directive
        if d is None:
            return None
        if d.kind == "off":
            return {"ty": "gaze", "t": t, "x": 0.0, "y": 0.0, "valid": False}
        if d.kind == "point":
            return {"ty": "gaze", "t": t, "x": d.x, "y": d.y, "valid": True}
        if d.kind == "away":
            x, y = 2.0, float(self.cfg.camera.viewport[1] - 2)
        elif d.kind == "follow":
            if self.last_rect is None:
                return None
            x, y = self.last_rect.center()
        elif d.kind == "face":
            if self.last_face_rect is None:
                return None
            x, y = self.last_face_rect.center()
        else:  # arc
            if self.last_circle is None:
                return None
            x, y = arc_center_point(self.last_circle, d.arc, self.cfg.fsm.n_arcs)
        return {"ty": "gaze", "t": t, "x": x, "y": y, "valid": True}

    def note_face(self, row: FaceRow) -> None:
        obs = FaceObservation(t_ms=row.t_ms, left_eye_outer=row.le,
                              right_eye_outer=row.re, nose_base=row.nb)
        try:
            region = geometry.face_plane_region(obs, self.cfg.geometry)
            self.last_face_rect = geometry.project(region, self.cfg.camera)
        except (geometry.DegenerateFace, geometry.BehindCamera):
            self.last_face_rect = None


def _transcript_frame(ev: TranscriptEvent) -> dict:
    msg = {"ty": "transcript", "t": ev.t_ms, "spk": ev.speaker,
           "fin": ev.is_final, "loud": ev.loudness, "text": ev.text}
    return msg


def run_scenario(scenario: Scenario, condition: str | None = None,
                 csv_out: str | Path | None = None) -> dict:
    """Run one condition end to end and return the metrics report dict."""
    cond = condition or scenario.condition
    if cond not in (CONDITION_FACE, CONDITION_FIXED):
        raise ScenarioError(f"unknown condition {cond!r}")
    try:
        transcript = read_replay(scenario.transcript_path)
    except MalformedReplay as exc:
        raise ScenarioError(str(exc)) from exc
    faces = parse_face_trace(scenario.face_path)
    gaze = parse_gaze_trace(scenario.gaze_path)
    if not transcript or not faces or not gaze:
        empty = analytics.EmptyTrace("scenario traces must all be non-empty")
        raise ScenarioError(str(empty)) from empty

    drv = _Driver(scenario, cond)
    tick = drv.cfg.tick_ms
    ends = [transcript[-1].t_ms, faces[-1].t_ms, gaze[-1].t_ms]
    duration = scenario.duration_ms
    if duration is None:
        duration = max(ends) + 2 * tick
    drv.send({"ty": "hello", "proto_version": PROTO_VERSION, "role": "driver"})

    fi = ti = gi = 0
    t = 0
    while t <= duration:
        while fi < len(faces) and faces[fi].t_ms <= t:
            row = faces[fi]
            drv.send({"ty": "face_obs", "t": row.t_ms, "le": list(row.le),
                      "re": list(row.re), "nb": list(row.nb)})
            drv.note_face(row)
            fi += 1
        while ti < len(transcript) and transcript[ti].t_ms <= t:
            drv.send(_transcript_frame(transcript[ti]))
            ti += 1
        while gi < len(gaze) and gaze[gi].t_ms <= t:
            drv.directive = gaze[gi]
            gi += 1
        frame = drv.resolve_gaze(t)
        if frame is not None:
            drv.send(frame)
        drv.absorb(drv.engine.tick(t))
        t += tick

    if not drv.rows:
        empty = analytics.EmptyTrace("scenario produced no tick rows")
        raise ScenarioError(str(empty)) from empty

    if csv_out is not None:
        write_tick_csv(csv_out, drv.rows)
    return _build_report(scenario, cond, drv, duration)


_CSV_COLUMNS = ["t", "gaze_x", "gaze_y", "gaze_valid", "rect_x", "rect_y",
                "rect_w", "rect_h", "lowered", "visible", "in_text", "on_face"]


def write_tick_csv(path: str | Path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for row in rows:
            writer.writerow(["" if row[c] is None else row[c] for c in _CSV_COLUMNS])


def rows_to_traces(rows: list[dict]) -> tuple[list[GazeSample], list[tuple[int, PixelRect | None]]]:
    """Split per-tick rows into the gaze/rect traces the analytics math wants."""
    gaze_trace: list[GazeSample] = []
    rect_trace: list[tuple[int, PixelRect | None]] = []
    for row in rows:
        if row["gaze_x"] is None:
            gaze_trace.append(GazeSample(t_ms=row["t"], x=0.0, y=0.0, valid=False))
        else:
            gaze_trace.append(GazeSample(t_ms=row["t"], x=row["gaze_x"],
                                         y=row["gaze_y"], valid=bool(row["gaze_valid"])))
        if row["rect_x"] is None or not row["visible"]:
            rect_trace.append((row["t"], None))
        else:
            rect_trace.append((row["t"], PixelRect(x=row["rect_x"], y=row["rect_y"],
                                                   w=row["rect_w"], h=row["rect_h"])))
    return gaze_trace, rect_trace


def _build_report(scenario: Scenario, cond: str, drv: _Driver, duration: int) -> dict:
    gaze_trace, rect_trace = rows_to_traces(drv.rows)
    reading = analytics.reading_proportion(gaze_trace, rect_trace)
    tick = drv.cfg.tick_ms
    on_face_ms = sum(tick for row in drv.rows if row["on_face"])
    total_ms = tick * len(drv.rows)
    utts = analytics.utterances_from_replay(scenario.transcript_path, scenario.normalizer)
    lexicon = analytics.load_filler_lexicon(*scenario.filler_languages)
    turns = analytics.count_turns(utts, lexicon)
    hint_entries = [drv.hint_log[seq] for seq in sorted(drv.hint_log)]
    return {
        "scenario": scenario.name,
        "condition": cond,
        "tick_ms": tick,
        "duration_ms": duration,
        "turns": dataclasses.asdict(turns),
        "reading": {
            "total_ms": reading.total_ms,
            "in_region_ms": reading.in_region_ms,
            "proportion": reading.proportion,
        },
        "on_face": {
            "total_ms": total_ms,
            "on_face_ms": on_face_ms,
            "proportion": on_face_ms / total_ms,
        },
        "events": {
            "shift": drv.shift_events,
            "toggle": drv.toggle_events,
            "hints": hint_entries,
        },
        "counters": drv.engine.metrics.to_dict(),
    }


def compare(scenario: Scenario, cond_a: str = CONDITION_FACE,
            cond_b: str = CONDITION_FIXED) -> dict:
    """Run both conditions on identical inputs and diff the key numbers."""
    report_a = run_scenario(scenario, cond_a)
    report_b = run_scenario(scenario, cond_b)

    def _diff(path_fn) -> float:
        return path_fn(report_a) - path_fn(report_b)

    return {
        "scenario": scenario.name,
        "a": report_a,
        "b": report_b,
        "diff": {
            "reading_proportion": _diff(lambda r: r["reading"]["proportion"]),
            "on_face_proportion": _diff(lambda r: r["on_face"]["proportion"]),
            "shift_events": _diff(lambda r: len(r["events"]["shift"])),
            "toggle_events": _diff(lambda r: len(r["events"]["toggle"])),
            "hint_updates": _diff(lambda r: len(r["events"]["hints"])),
        },
    }


def dump_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="convassist-harness",
        description="Run scripted conversation scenarios against a headless session.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_run = sub.add_parser("run", help="run one scenario under one condition")
    p_run.add_argument("scenario", help="scenario .toml or .json file")
    p_run.add_argument("--condition", choices=[CONDITION_FACE, CONDITION_FIXED],
                       default=None, help="override the scenario's condition")
    p_run.add_argument("--out", default=None,
                       help="write the JSON report here (plus a .csv tick table sibling)")

    p_cmp = sub.add_parser("compare", help="run both conditions and diff them")
    p_cmp.add_argument("scenario", help="scenario .toml or .json file")
    p_cmp.add_argument("--out", required=True, help="write the paired JSON report here")

    args = parser.parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        if args.cmd == "run":
            csv_path = None
            if args.out is not None:
                csv_path = Path(args.out).with_suffix(".csv")
            report = run_scenario(scenario, args.condition, csv_out=csv_path)
            text = dump_report(report)
            if args.out is None:
                sys.stdout.write(text)
            else:
                Path(args.out).write_text(text, encoding="utf-8")
        else:
            pair = compare(scenario)
            Path(args.out).write_text(dump_report(pair), encoding="utf-8")
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
