"""Gaze-contingent presentation control.

Two cooperating machines advance on the session tick:

* fixation/shift: continuous gaze residence on the partner's face region
  accumulates (small excursions are forgiven); at the fixation threshold
  the display lowers, and after the return interval it snaps back.
* dwell: sustained gaze on one circumference arc fires a toggle, with the
  same gap forgiveness; switching arcs restarts the count.

Both are deterministic functions of (samples, ticks, config); no wall
clock is consulted anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .config import FsmConfig
from .geometry import PixelRect

MODE_ANCHORED = "anchored"
MODE_LOWERED = "lowered"


@dataclass(frozen=True)
class GazeSample:
    t_ms: int
    x: float
    y: float
    valid: bool = True


@dataclass(frozen=True)
class ShiftDown:
    t_ms: int


@dataclass(frozen=True)
class ShiftUp:
    t_ms: int


@dataclass(frozen=True)
class ToggleEvent:
    t_ms: int
    arc: int


@dataclass(frozen=True)
class PresentationState:
    mode: str = MODE_ANCHORED
    fixation_accum_ms: int = 0
    lowered_since_ms: int | None = None
    last_gap_start_ms: int | None = None
    last_in_ms: int | None = None  # t of the latest counted in-region sample


@dataclass(frozen=True)
class DwellState:
    active_arc: int | None = None
    dwell_accum_ms: int = 0
    toggle_count: int = 0
    last_gap_start_ms: int | None = None
    last_in_ms: int | None = None


@dataclass(frozen=True)
class PanelCircle:
    cx: float
    cy: float
    inner_r: float
    outer_r: float


def fixation_update(state: PresentationState, sample: GazeSample,
                    face_rect_px: PixelRect | None, cfg: FsmConfig) -> PresentationState:
    """Fold one gaze sample into the fixation accumulator.

    In-region time adds the inter-sample interval; excursions at or under
    gap_tolerance_ms pause the count without resetting it; longer ones
    clear it, as does a sample drought longer than the tolerance (time we
    did not observe is never counted). Accumulation is suspended while the
    display is lowered.
    """
    if state.mode == MODE_LOWERED:
        return state
    inside = (sample.valid and face_rect_px is not None
              and face_rect_px.contains(sample.x, sample.y))
    if inside:
        if state.last_gap_start_ms is not None:
            gap = sample.t_ms - state.last_gap_start_ms
            if gap > cfg.gap_tolerance_ms:
                return replace(state, fixation_accum_ms=0,
                               last_gap_start_ms=None, last_in_ms=sample.t_ms)
            # brief excursion: resume without counting the gap
            return replace(state, last_gap_start_ms=None, last_in_ms=sample.t_ms)
        if state.last_in_ms is None:
            return replace(state, last_in_ms=sample.t_ms)
        dt = max(0, sample.t_ms - state.last_in_ms)
        if dt > cfg.gap_tolerance_ms:
            return replace(state, fixation_accum_ms=0, last_in_ms=sample.t_ms)
        accum = min(state.fixation_accum_ms + dt, cfg.fixation_threshold_ms)
        return replace(state, fixation_accum_ms=accum, last_in_ms=sample.t_ms)
    if state.last_gap_start_ms is None:
        if state.last_in_ms is None:
            return state  # never fixated yet
        return replace(state, last_gap_start_ms=sample.t_ms)
    if sample.t_ms - state.last_gap_start_ms > cfg.gap_tolerance_ms:
        return replace(state, fixation_accum_ms=0, last_gap_start_ms=None, last_in_ms=None)
    return state


def step(state: PresentationState, session_now_ms: int,
         cfg: FsmConfig) -> tuple[PresentationState, list[ShiftDown | ShiftUp]]:
    """Advance the shift cycle at a clock tick (after fixation_update)."""
    events: list[ShiftDown | ShiftUp] = []
    if state.mode == MODE_ANCHORED:
        # stale gaze: a gap that outlived the tolerance resets even with no new samples
        if (state.last_gap_start_ms is not None
                and session_now_ms - state.last_gap_start_ms > cfg.gap_tolerance_ms):
            state = replace(state, fixation_accum_ms=0, last_gap_start_ms=None, last_in_ms=None)
        if state.fixation_accum_ms >= cfg.fixation_threshold_ms:
            events.append(ShiftDown(session_now_ms))
            state = PresentationState(mode=MODE_LOWERED, fixation_accum_ms=0,
                                      lowered_since_ms=session_now_ms)
    elif state.mode == MODE_LOWERED:
        assert state.lowered_since_ms is not None
        if session_now_ms - state.lowered_since_ms >= cfg.return_after_ms:
            events.append(ShiftUp(session_now_ms))
            state = PresentationState(mode=MODE_ANCHORED)
    return state, events


def hit_test_arc(point_px: tuple[float, float], panel: PanelCircle,
                 n_arcs: int) -> int | None:
    """Map a pixel to its circumference-arc index, or None off the annulus.

    Arc 0 starts at 12 o'clock; indices advance clockwise in equal sectors
    (screen coordinates, y down). Annulus bounds are inclusive.
    """
    if not panel.inner_r < panel.outer_r:
        raise ValueError("inner radius must be smaller than outer radius")
    dx = point_px[0] - panel.cx
    dy = point_px[1] - panel.cy
    dist = math.hypot(dx, dy)
    if not panel.inner_r <= dist <= panel.outer_r:
        return None
    # clockwise angle from 12 o'clock with y pointing down the screen
    deg = math.degrees(math.atan2(dx, -dy)) % 360.0
    idx = int(deg // (360.0 / n_arcs))
    return min(idx, n_arcs - 1)


def arc_center_point(panel: PanelCircle, arc: int, n_arcs: int) -> tuple[float, float]:
    """Center of an arc sector (mid-angle, mid-radius); inverse of hit_test_arc."""
    sector = 360.0 / n_arcs
    deg = (arc + 0.5) * sector
    rad = math.radians(deg)
    r = (panel.inner_r + panel.outer_r) / 2.0
    return (panel.cx + r * math.sin(rad), panel.cy - r * math.cos(rad))


def dwell_update(dstate: DwellState, sample: GazeSample, panel: PanelCircle | None,
                 cfg: FsmConfig) -> tuple[DwellState, ToggleEvent | None]:
    """Fold one gaze sample into the dwell accumulator; fire at the threshold.

    A toggle resets the count, so holding the gaze re-arms from zero.
    Moving between arcs resets immediately; leaving all arcs resets only
    once the excursion exceeds the gap tolerance, and a sample drought
    longer than the tolerance resets as well.
    """
    arc = None
    if sample.valid and panel is not None:
        arc = hit_test_arc((sample.x, sample.y), panel, cfg.n_arcs)
    if arc is not None:
        if dstate.active_arc is None or arc != dstate.active_arc:
            dstate = DwellState(active_arc=arc, dwell_accum_ms=0,
                                toggle_count=dstate.toggle_count, last_in_ms=sample.t_ms)
        elif dstate.last_gap_start_ms is not None:
            gap = sample.t_ms - dstate.last_gap_start_ms
            if gap > cfg.gap_tolerance_ms:
                dstate = replace(dstate, dwell_accum_ms=0,
                                 last_gap_start_ms=None, last_in_ms=sample.t_ms)
            else:
                dstate = replace(dstate, last_gap_start_ms=None, last_in_ms=sample.t_ms)
        else:
            prev = dstate.last_in_ms if dstate.last_in_ms is not None else sample.t_ms
            dt = max(0, sample.t_ms - prev)
            if dt > cfg.gap_tolerance_ms:
                dstate = replace(dstate, dwell_accum_ms=0, last_in_ms=sample.t_ms)
            else:
                dstate = replace(dstate, dwell_accum_ms=dstate.dwell_accum_ms + dt,
                                 last_in_ms=sample.t_ms)
        if dstate.dwell_accum_ms >= cfg.dwell_threshold_ms:
            fired = ToggleEvent(t_ms=sample.t_ms, arc=dstate.active_arc)
            dstate = replace(dstate, dwell_accum_ms=0, last_in_ms=sample.t_ms,
                             toggle_count=dstate.toggle_count + 1)
            return dstate, fired
        return dstate, None
    # off all arcs (or invalid sample)
    if dstate.active_arc is None:
        return dstate, None
    if dstate.last_gap_start_ms is None:
        return replace(dstate, last_gap_start_ms=sample.t_ms), None
    if sample.t_ms - dstate.last_gap_start_ms > cfg.gap_tolerance_ms:
        return DwellState(toggle_count=dstate.toggle_count), None
    return dstate, None
