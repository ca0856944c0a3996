import { describe, expect, it } from "vitest";

import {
  HistogramMismatch,
  REFERENCE_COLOR,
  RESULT_COLOR,
  drawOverlay,
  formatDistance,
  prepareOverlay,
} from "../src/histogram.js";

class RecordingContext {
  fillStyle: string = "";
  globalAlpha = 1;
  cleared: number[][] = [];
  rects: { color: string; x: number; y: number; w: number; h: number }[] = [];

  clearRect(x: number, y: number, w: number, h: number) {
    this.cleared.push([x, y, w, h]);
  }

  fillRect(x: number, y: number, w: number, h: number) {
    this.rects.push({ color: String(this.fillStyle), x, y, w, h });
  }
}

describe("prepareOverlay", () => {
  it("rejects mismatched bin counts", () => {
    expect(() => prepareOverlay(new Array(256).fill(0), [1, 2, 3])).toThrow(
      HistogramMismatch,
    );
  });

  it("accepts a missing result series", () => {
    const overlay = prepareOverlay([0.5, 0.5], null);
    expect(overlay.result).toBeNull();
    expect(overlay.peak).toBe(0.5);
  });

  it("peak covers both series", () => {
    const overlay = prepareOverlay([0.1, 0.2], [0.9, 0.0]);
    expect(overlay.peak).toBe(0.9);
  });
});

describe("drawOverlay", () => {
  it("identical series draw perfectly overlapping bars", () => {
    const ctx = new RecordingContext();
    const series = [0.25, 0.75, 0.0];
    drawOverlay(ctx, prepareOverlay(series, [...series]), 300, 100);
    const refRects = ctx.rects.filter((r) => r.color === REFERENCE_COLOR);
    const resRects = ctx.rects.filter((r) => r.color === RESULT_COLOR);
    expect(refRects.length).toBe(3);
    expect(resRects.length).toBe(3);
    refRects.forEach((r, i) => {
      expect(resRects[i]).toMatchObject({ x: r.x, y: r.y, w: r.w, h: r.h });
    });
  });

  it("reference-only rendering before the first response", () => {
    const ctx = new RecordingContext();
    drawOverlay(ctx, prepareOverlay([1, 0], null), 100, 50);
    expect(ctx.rects.every((r) => r.color === REFERENCE_COLOR)).toBe(true);
    expect(ctx.cleared).toHaveLength(1);
  });

  it("bars scale to the shared peak", () => {
    const ctx = new RecordingContext();
    drawOverlay(ctx, prepareOverlay([0.5], [1.0]), 10, 100);
    const [ref, res] = ctx.rects;
    expect(res.h).toBeCloseTo(100);
    expect(ref.h).toBeCloseTo(50);
  });
});

describe("formatDistance", () => {
  it("renders the service value verbatim to 4 places", () => {
    expect(formatDistance(0.123456)).toBe("L1 distance 0.1235");
    expect(formatDistance(2)).toBe("L1 distance 2.0000");
  });
});
