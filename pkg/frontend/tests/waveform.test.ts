import { describe, expect, it } from "vitest";
import { peakBars, timeToX, xToTime } from "../src/waveform.js";

describe("peakBars", () => {
  it("renders one bar per peak pair across the full width", () => {
    const peaks: [number, number][] = [
      [-1, 1],
      [-0.5, 0.5],
      [0, 0],
      [-0.25, 0.75],
    ];
    const bars = peakBars(peaks, 400, 100);
    expect(bars).toHaveLength(peaks.length);
    expect(bars[0].x).toBe(0);
    expect(bars[3].x + bars[3].width).toBeCloseTo(400);
  });

  it("maps amplitude to height around the midline", () => {
    const [full, half] = peakBars(
      [
        [-1, 1],
        [-0.5, 0.5],
      ],
      100,
      100,
    );
    expect(full.top).toBe(0);
    expect(full.height).toBe(100);
    expect(half.top).toBe(25);
    expect(half.height).toBe(50);
  });

  it("gives silent buckets a visible 1px bar", () => {
    const [bar] = peakBars([[0, 0]], 100, 100);
    expect(bar.height).toBe(1);
  });

  it("clamps out-of-range amplitudes", () => {
    const [bar] = peakBars([[-3, 3]], 100, 80);
    expect(bar.top).toBe(0);
    expect(bar.height).toBe(80);
  });

  it("returns nothing for empty input or degenerate canvases", () => {
    expect(peakBars([], 100, 100)).toEqual([]);
    expect(peakBars([[-1, 1]], 0, 100)).toEqual([]);
  });
});

describe("time/x mapping", () => {
  it("round-trips through the canvas width", () => {
    const duration = 3.2;
    const width = 800;
    for (const t of [0, 0.5, 1.6, 3.2]) {
      expect(xToTime(timeToX(t, duration, width), duration, width)).toBeCloseTo(t);
    }
  });

  it("seeking to the midpoint lands at half the duration", () => {
    expect(xToTime(400, 10, 800)).toBeCloseTo(5);
  });

  it("clamps positions outside the canvas", () => {
    expect(xToTime(-50, 10, 800)).toBe(0);
    expect(xToTime(900, 10, 800)).toBe(10);
    expect(timeToX(99, 10, 800)).toBe(800);
  });

  it("degenerate durations and widths map to 0", () => {
    expect(timeToX(1, 0, 800)).toBe(0);
    expect(xToTime(10, 5, 0)).toBe(0);
  });
});
