/** Geometry for drawing server-computed [min, max] peak pairs onto a
 *  canvas, plus the time<->x mapping used for seeking. Pure functions
 *  so they can be unit tested without a DOM. */

export interface PeakBar {
  x: number;
  width: number;
  top: number;
  height: number;
}

/** One vertical bar per peak pair, centered on the canvas midline.
 *  Amplitudes are clamped to [-1, 1]; a silent bucket still gets a
 *  1-pixel bar so the waveform never visually disappears. */
export function peakBars(
  peaks: [number, number][],
  width: number,
  height: number,
): PeakBar[] {
  const n = peaks.length;
  if (n === 0 || width <= 0 || height <= 0) return [];
  const mid = height / 2;
  const barWidth = width / n;
  return peaks.map(([lo, hi], i) => {
    const top = mid - Math.min(Math.max(hi, -1), 1) * mid;
    const bottom = mid - Math.min(Math.max(lo, -1), 1) * mid;
    return {
      x: i * barWidth,
      width: barWidth,
      top,
      height: Math.max(bottom - top, 1),
    };
  });
}

export function timeToX(time: number, duration: number, width: number): number {
  if (duration <= 0) return 0;
  return Math.min(Math.max(time / duration, 0), 1) * width;
}

export function xToTime(x: number, duration: number, width: number): number {
  if (width <= 0) return 0;
  return Math.min(Math.max(x / width, 0), 1) * duration;
}

export function drawWaveform(
  ctx: CanvasRenderingContext2D,
  peaks: [number, number][],
  cursorTime: number,
  duration: number,
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#4a7ab5";
  for (const bar of peakBars(peaks, width, height)) {
    ctx.fillRect(bar.x, bar.top, bar.width, bar.height);
  }
  ctx.fillStyle = "#e04040";
  ctx.fillRect(timeToX(cursorTime, duration, width) - 1, 0, 2, height);
}
