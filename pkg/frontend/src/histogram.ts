/** Dual-series brightness histogram overlay (reference vs result).
 *
 * Every displayed number comes from the service response; the client never
 * recomputes correlations or distances.
 */

export interface OverlaySeries {
  reference: number[];
  result: number[] | null;
  peak: number;
}

export class HistogramMismatch extends Error {}

/** Validate and package the two series; result may be absent before the
 * first response arrives. */
export function prepareOverlay(
  reference: number[],
  result: number[] | null,
): OverlaySeries {
  if (result !== null && result.length !== reference.length) {
    throw new HistogramMismatch(
      `bin count mismatch: ${reference.length} vs ${result.length}`,
    );
  }
  const peak = Math.max(
    ...reference,
    ...(result ?? [0]),
    1e-12,
  );
  return { reference, result, peak };
}

interface Context2dLike {
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillStyle: string | CanvasGradient | CanvasPattern;
  globalAlpha: number;
}

export const REFERENCE_COLOR = "#3b82f6"; // blue, matching convention
export const RESULT_COLOR = "#ef4444"; // red

/** Draw both series as translucent bars; identical series overlap exactly. */
export function drawOverlay(
  ctx: Context2dLike,
  series: OverlaySeries,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const barWidth = width / series.reference.length;
  ctx.globalAlpha = 0.6;
  ctx.fillStyle = REFERENCE_COLOR;
  series.reference.forEach((value, i) => {
    const h = (value / series.peak) * height;
    ctx.fillRect(i * barWidth, height - h, Math.max(barWidth, 1), h);
  });
  if (series.result) {
    ctx.fillStyle = RESULT_COLOR;
    series.result.forEach((value, i) => {
      const h = (value / series.peak) * height;
      ctx.fillRect(i * barWidth, height - h, Math.max(barWidth, 1), h);
    });
  }
  ctx.globalAlpha = 1.0;
}

/** Format the service-computed distance for the caption. */
export function formatDistance(histL1: number): string {
  return `L1 distance ${histL1.toFixed(4)}`;
}
