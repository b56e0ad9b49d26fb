import { describe, expect, it } from "vitest";

import type { EngineFrame } from "../src/protocol.js";
import { arcAngles, render } from "../src/render.js";
import { DEFAULT_STYLE, applyFrame, initialState, setStatus } from "../src/viewstate.js";
import { FakeCtx } from "./helpers.js";

const W = 960;
const H = 600;

const LAYOUT: EngineFrame = {
  ty: "layout_update",
  t: 100,
  circle: { cx: 480, cy: 341.665, r: 180 },
  text_rect: { x: 405, y: 300, w: 150, h: 83.33 },
  lowered: false,
  visible: true,
};

const HINTS: EngineFrame = {
  ty: "hint_update",
  t: 120,
  seq: 1,
  keywords: ["camping", "tent"],
  lines: ["- tents pitch faster with two people", "- ask about the lake route"],
  expires_at: 300120,
};

function stateWithPanel() {
  let state = setStatus(initialState(), "connected");
  state = applyFrame(state, LAYOUT);
  state = applyFrame(state, HINTS);
  return state;
}

describe("render", () => {
  it("draws the text region exactly where the engine put it", () => {
    const ctx = new FakeCtx();
    render(stateWithPanel(), ctx, W, H);
    const rects = ctx.find("strokeRect");
    expect(rects).toHaveLength(1);
    expect(rects[0].args).toEqual([405, 300, 150, 83.33]);
  });

  it("draws the panel disc from the engine's circle", () => {
    const ctx = new FakeCtx();
    render(stateWithPanel(), ctx, W, H);
    const discs = ctx.find("arc").filter((o) => o.args[2] === 180);
    expect(discs).toHaveLength(1);
    expect(discs[0].args.slice(0, 2)).toEqual([480, 341.665]);
  });

  it("keywords sit at the top of the circle, lines centered in the rect", () => {
    const ctx = new FakeCtx();
    render(stateWithPanel(), ctx, W, H);
    const texts = ctx.find("fillText");
    const keywords = texts.find((o) => o.args[0] === "camping · tent");
    expect(keywords).toBeDefined();
    expect(keywords!.args[1]).toBe(480);
    expect(keywords!.args[2]).toBe(341.665 - 180 + 30);

    const lineOps = texts.filter((o) => String(o.args[0]).startsWith("- "));
    expect(lineOps).toHaveLength(2);
    const centerY = 300 + 83.33 / 2;
    const ys = lineOps.map((o) => Number(o.args[2]));
    // Two lines sit symmetrically around the rect's vertical center.
    expect((ys[0] + ys[1]) / 2).toBeCloseTo(centerY, 10);
    for (const op of lineOps) expect(op.args[1]).toBe(405 + 150 / 2);
  });

  it("draws one idle arc per dwell segment plus a progress overlay", () => {
    const ctx = new FakeCtx();
    let state = stateWithPanel();
    state = applyFrame(state, { ty: "dwell_progress", t: 130, arc: 3, frac: 0.5 });
    render(state, ctx, W, H);
    const innerR = 180 * DEFAULT_STYLE.arcBandRatio;
    const midR = (innerR + 180) / 2;
    const arcOps = ctx.find("arc").filter((o) => o.args[2] === midR);
    expect(arcOps).toHaveLength(DEFAULT_STYLE.nArcs + 1);

    const gap = 0.04;
    const [a0, a1] = arcAngles(3, DEFAULT_STYLE.nArcs);
    const overlay = arcOps[arcOps.length - 1];
    expect(overlay.args[3]).toBeCloseTo(a0 + gap / 2, 12);
    const sweep = Number(overlay.args[4]) - Number(overlay.args[3]);
    expect(sweep).toBeCloseTo((a1 - a0 - gap) * 0.5, 12);
  });

  it("skips stale dwell progress", () => {
    const ctx = new FakeCtx();
    let state = stateWithPanel();
    state = applyFrame(state, { ty: "dwell_progress", t: 130, arc: 3, frac: 0.5 });
    state = applyFrame(state, { ty: "shift_down", t: 5000 }); // lastT advances
    render(state, ctx, W, H);
    const innerR = 180 * DEFAULT_STYLE.arcBandRatio;
    const midR = (innerR + 180) / 2;
    expect(ctx.find("arc").filter((o) => o.args[2] === midR))
      .toHaveLength(DEFAULT_STYLE.nArcs);
  });

  it("renders the recognition indicator in both states", () => {
    const on = new FakeCtx();
    render(stateWithPanel(), on, W, H);
    expect(on.texts()).toContain("recognition on");

    const off = new FakeCtx();
    render(applyFrame(stateWithPanel(), { ty: "toggle_state", t: 1, enabled: false }),
           off, W, H);
    expect(off.texts()).toContain("recognition off");
    expect(off.texts()).not.toContain("recognition on");
  });

  it("hides the panel when the engine says it is not visible", () => {
    const ctx = new FakeCtx();
    let state = stateWithPanel();
    state = applyFrame(state, { ...(LAYOUT as object), visible: false } as EngineFrame);
    render(state, ctx, W, H);
    expect(ctx.find("strokeRect")).toHaveLength(0);
    expect(ctx.find("arc")).toHaveLength(0);
    expect(ctx.texts()).toContain("partner out of view");
  });

  it("shows status and warning counts in the banner", () => {
    const ctx = new FakeCtx();
    let state = setStatus(initialState(), "reconnecting", "socket closed");
    state = { ...state, decodeErrors: 2 };
    render(state, ctx, W, H);
    const banner = ctx.texts().find((t) => t.includes("reconnecting"));
    expect(banner).toBeDefined();
    expect(banner).toContain("error: socket closed");
    expect(banner).toContain("warnings: 2");
  });

  it("is deterministic: identical state renders identical ops", () => {
    const a = new FakeCtx();
    const b = new FakeCtx();
    const state = stateWithPanel();
    render(state, a, W, H);
    render(state, b, W, H);
    expect(a.ops).toEqual(b.ops);
  });
});
