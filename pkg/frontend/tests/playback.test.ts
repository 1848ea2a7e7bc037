import { describe, expect, it } from "vitest";

import {
  FrameRequestCoalescer,
  PlaybackController,
  frameAt,
  frameIndexAt,
  lineAt,
  parseFrameStream,
} from "../src/playback.js";
import type { FrameDoc } from "../src/types.js";

function fakeFrame(t: number): FrameDoc {
  return { t, camera: { center: { lat: 0, lon: 0 }, zoom: 1, bearing: 0, pitch: 0 }, overlays: [] };
}

function fakeStream(fps: number, count: number) {
  const lines = Array.from({ length: count }, (_, i) => JSON.stringify(fakeFrame(i / fps)));
  return parseFrameStream(lines.join("\n") + "\n", fps);
}

describe("frame stream", () => {
  it("parses newline-delimited frames and keeps raw lines", () => {
    const stream = fakeStream(10, 31);
    expect(stream.frames).toHaveLength(31);
    expect(stream.lines).toHaveLength(31);
    expect(stream.frames[0]!.t).toBe(0);
  });

  it("maps playhead times onto sample indexes", () => {
    const stream = fakeStream(10, 31);
    expect(frameIndexAt(stream, 0)).toBe(0);
    expect(frameIndexAt(stream, 0.1)).toBe(1);
    expect(frameIndexAt(stream, 0.149)).toBe(1);
    expect(frameIndexAt(stream, 3.0)).toBe(30);
    expect(frameIndexAt(stream, 99)).toBe(30); // clamped to the final frame
    expect(frameAt(stream, 0.35).t).toBeCloseTo(0.3);
    expect(lineAt(stream, 0.35)).toBe(stream.lines[3]);
  });
});

describe("playback controller", () => {
  it("advances the playhead at wall-clock rate", () => {
    let clock = 0;
    const seen: number[] = [];
    const controller = new PlaybackController({
      now: () => clock,
      duration: () => 2.0,
      onFrame: (t) => seen.push(t),
    });
    controller.play(0);
    clock += 500;
    expect(controller.tick()).toBeCloseTo(0.5);
    clock += 1000;
    expect(controller.tick()).toBeCloseTo(1.5);
    clock += 1000;
    expect(controller.tick()).toBe(2.0); // stops at duration
    expect(controller.isPlaying).toBe(false);
    expect(seen.length).toBe(3);
  });

  it("restarts from zero when playing at the end", () => {
    let clock = 0;
    const controller = new PlaybackController({ now: () => clock, duration: () => 1.0, onFrame: () => {} });
    controller.play(1.0);
    expect(controller.position).toBe(0);
  });
});

describe("frame request coalescing", () => {
  it("keeps at most one request in flight and serves the newest t", async () => {
    const resolvers: ((f: FrameDoc) => void)[] = [];
    const requested: number[] = [];
    const received: number[] = [];
    const coalescer = new FrameRequestCoalescer(
      (t) => {
        requested.push(t);
        return new Promise((resolve) => resolvers.push((f) => resolve(f)));
      },
      (frame) => received.push(frame.t),
    );

    coalescer.request(0.1);
    coalescer.request(0.2); // queued
    coalescer.request(0.3); // replaces 0.2 in the queue
    expect(requested).toEqual([0.1]);

    resolvers[0]!(fakeFrame(0.1));
    await Promise.resolve();
    await Promise.resolve();
    await Promise.resolve();
    expect(requested).toEqual([0.1, 0.3]); // 0.2 was skipped
    resolvers[1]!(fakeFrame(0.3));
    await Promise.resolve();
    await Promise.resolve();
    await Promise.resolve();
    expect(received).toEqual([0.1, 0.3]);
    expect(coalescer.requestCount).toBe(2);
  });
});
