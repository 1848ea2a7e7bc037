/**
 * Playback: frame stream parsing, wall-clock playhead advance, and
 * scrub-time frame fetching.
 *
 * When an exported frame stream is available playback looks frames up
 * client-side (no server round-trips while scrubbing); otherwise it falls
 * back to per-t requests, coalesced to at most one in-flight request per
 * animation-frame tick.
 */

import type { FrameDoc } from "./types.js";

export interface ParsedStream {
  fps: number;
  frames: FrameDoc[];
  /** Raw canonical lines, byte-identical to what the server streamed. */
  lines: string[];
}

export function parseFrameStream(text: string, fps: number): ParsedStream {
  const lines = text.split("\n").filter((line) => line.length > 0);
  const frames = lines.map((line) => JSON.parse(line) as FrameDoc);
  return { fps, frames, lines };
}

/** Stream index for a playhead time: frames sample t = i / fps. */
export function frameIndexAt(stream: ParsedStream, t: number): number {
  const index = Math.floor(t * stream.fps + 1e-9);
  return Math.min(stream.frames.length - 1, Math.max(0, index));
}

export function frameAt(stream: ParsedStream, t: number): FrameDoc {
  const frame = stream.frames[frameIndexAt(stream, t)];
  if (!frame) {
    throw new Error("frame stream is empty");
  }
  return frame;
}

export function lineAt(stream: ParsedStream, t: number): string {
  const line = stream.lines[frameIndexAt(stream, t)];
  if (line === undefined) {
    throw new Error("frame stream is empty");
  }
  return line;
}

export interface PlaybackHooks {
  now(): number; // milliseconds, monotonic
  onFrame(t: number): void;
  duration(): number;
}

/** Advances the playhead at wall-clock rate between tick() calls. */
export class PlaybackController {
  private playing = false;
  private lastTick = 0;
  private playhead = 0;

  constructor(private readonly hooks: PlaybackHooks) {}

  get isPlaying(): boolean {
    return this.playing;
  }

  get position(): number {
    return this.playhead;
  }

  play(from?: number): void {
    if (from !== undefined) {
      this.playhead = from;
    }
    if (this.playhead >= this.hooks.duration()) {
      this.playhead = 0;
    }
    this.playing = true;
    this.lastTick = this.hooks.now();
  }

  pause(): void {
    this.playing = false;
  }

  seek(t: number): void {
    this.playhead = Math.min(this.hooks.duration(), Math.max(0, t));
    this.hooks.onFrame(this.playhead);
  }

  /** Call once per animation frame; returns the new playhead. */
  tick(): number {
    if (!this.playing) {
      return this.playhead;
    }
    const now = this.hooks.now();
    const dt = (now - this.lastTick) / 1000;
    this.lastTick = now;
    this.playhead += dt;
    const duration = this.hooks.duration();
    if (this.playhead >= duration) {
      this.playhead = duration;
      this.playing = false;
    }
    this.hooks.onFrame(this.playhead);
    return this.playhead;
  }
}

/**
 * Coalesces scrub-time frame requests: at most one request is in flight;
 * the newest requested t wins, intermediate ones are skipped.
 */
export class FrameRequestCoalescer {
  private inFlight = false;
  private queued: number | null = null;
  requestCount = 0;

  constructor(
    private readonly fetchFrame: (t: number) => Promise<FrameDoc>,
    private readonly onFrame: (frame: FrameDoc) => void,
    private readonly onError: (error: unknown) => void = () => {},
  ) {}

  request(t: number): void {
    if (this.inFlight) {
      this.queued = t;
      return;
    }
    this.launch(t);
  }

  private launch(t: number): void {
    this.inFlight = true;
    this.requestCount += 1;
    this.fetchFrame(t)
      .then((frame) => this.onFrame(frame))
      .catch((error) => this.onError(error))
      .finally(() => {
        this.inFlight = false;
        if (this.queued !== null) {
          const next = this.queued;
          this.queued = null;
          this.launch(next);
        }
      });
  }
}
