import { describe, expect, it } from "vitest";

import {
  clampSlider,
  initialState,
  setAttributeRef,
  setLowImage,
  setMode,
  setRefs,
  setSlider,
  submitBlocker,
} from "../src/state.js";

const png = () => new Blob([new Uint8Array([137, 80, 78, 71])], { type: "image/png" });

describe("slider clamping", () => {
  it("clamps gamma into [0.5, 4]", () => {
    expect(clampSlider("gamma", 9)).toBe(4);
    expect(clampSlider("gamma", 0)).toBe(0.5);
    expect(clampSlider("gamma", 2.2)).toBe(2.2);
  });

  it("clamps correlations into [0, 1]", () => {
    expect(clampSlider("c_h", -0.3)).toBe(0);
    expect(clampSlider("c_n", 1.7)).toBe(1);
  });

  it("NaN falls back to the range floor", () => {
    expect(clampSlider("c_s", Number.NaN)).toBe(0);
  });

  it("setSlider clamps before storing", () => {
    const s = setSlider(initialState(), "gamma", 99);
    expect(s.sliders.gamma).toBe(4);
  });
});

describe("mode switching", () => {
  it("preserves the low image and resets mode payload", () => {
    let s = setLowImage(initialState(), png());
    s = setRefs(s, [png(), png()]);
    s = setMode(s, "parameters");
    expect(s.lowImage).not.toBeNull();
    expect(s.refSelections.refs).toHaveLength(0);
    expect(s.mode).toBe("parameters");
  });

  it("clears cross-attribution picks too", () => {
    let s = setLowImage(initialState(), png());
    s = setMode(s, "cross_attribution");
    s = setAttributeRef(s, "brightRef", png());
    s = setMode(s, "references");
    expect(s.refSelections.brightRef).toBeNull();
  });

  it("same-mode switch is a no-op", () => {
    let s = setRefs(initialState(), [png()]);
    const again = setMode(s, "references");
    expect(again.refSelections.refs).toHaveLength(1);
  });
});

describe("submit guard", () => {
  it("blocks without a low image", () => {
    expect(submitBlocker(initialState())).toMatch(/low-light/i);
  });

  it("blocks references mode without refs", () => {
    const s = setLowImage(initialState(), png());
    expect(submitBlocker(s)).toMatch(/reference/i);
  });

  it("blocks cross-attribution until all three picked", () => {
    let s = setLowImage(initialState(), png());
    s = setMode(s, "cross_attribution");
    s = setAttributeRef(s, "brightRef", png());
    s = setAttributeRef(s, "chromaRef", png());
    expect(submitBlocker(s)).toMatch(/noise/i);
    s = setAttributeRef(s, "noiseRef", png());
    expect(submitBlocker(s)).toBeNull();
  });

  it("parameters mode needs only the low image", () => {
    let s = setLowImage(initialState(), png());
    s = setMode(s, "parameters");
    expect(submitBlocker(s)).toBeNull();
  });
});
