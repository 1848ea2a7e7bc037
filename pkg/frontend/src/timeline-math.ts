/**
 * Pure timeline-track geometry: time/pixel mapping, one track row per
 * block, and drag arithmetic for the three handle kinds (left edge, right
 * edge, whole-block move). All drags clamp so a block can never invert
 * (end must stay after start) or move before t=0; the service confirms or
 * rejects the final retime.
 */

import type { BlockDoc, TimelineDoc } from "./types.js";

export interface TrackLayout {
  pxPerSecond: number;
  trackHeight: number;
  headerWidth: number;
}

export const DEFAULT_LAYOUT: TrackLayout = {
  pxPerSecond: 24,
  trackHeight: 28,
  headerWidth: 160,
};

export const MIN_BLOCK_SECONDS = 0.1;

export function timeToX(t: number, layout: TrackLayout): number {
  return layout.headerWidth + t * layout.pxPerSecond;
}

export function xToTime(x: number, layout: TrackLayout): number {
  return Math.max(0, (x - layout.headerWidth) / layout.pxPerSecond);
}

export interface BlockRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

/** One track row per block, in timeline list order. */
export function rowIndex(timeline: TimelineDoc, blockId: string): number {
  const index = timeline.blocks.findIndex((b) => b.id === blockId);
  if (index < 0) {
    throw new Error(`no block ${blockId} in timeline`);
  }
  return index;
}

export function blockRect(timeline: TimelineDoc, block: BlockDoc, layout: TrackLayout): BlockRect {
  const row = rowIndex(timeline, block.id);
  return {
    x: timeToX(block.start_time, layout),
    y: row * layout.trackHeight,
    width: Math.max(2, (block.end_time - block.start_time) * layout.pxPerSecond),
    height: layout.trackHeight - 4,
  };
}

export interface Span {
  start_time: number;
  end_time: number;
}

export function dragRightEdge(block: Span, dxPixels: number, layout: TrackLayout): Span {
  const dt = dxPixels / layout.pxPerSecond;
  const end = Math.max(block.start_time + MIN_BLOCK_SECONDS, block.end_time + dt);
  return { start_time: block.start_time, end_time: round3(end) };
}

export function dragLeftEdge(block: Span, dxPixels: number, layout: TrackLayout): Span {
  const dt = dxPixels / layout.pxPerSecond;
  const start = Math.min(block.end_time - MIN_BLOCK_SECONDS, Math.max(0, block.start_time + dt));
  return { start_time: round3(start), end_time: block.end_time };
}

export function dragWholeBlock(block: Span, dxPixels: number, layout: TrackLayout): Span {
  const duration = block.end_time - block.start_time;
  const dt = dxPixels / layout.pxPerSecond;
  const start = Math.max(0, block.start_time + dt);
  return { start_time: round3(start), end_time: round3(start + duration) };
}

export function retimeEdit(blockId: string, span: Span) {
  return { op: "retime" as const, block_id: blockId, start_time: span.start_time, end_time: span.end_time };
}

/** Times travel the wire at millisecond precision, matching the engine. */
export function round3(value: number): number {
  return Math.round(value * 1000) / 1000;
}

export interface RulerTick {
  t: number;
  x: number;
  major: boolean;
}

export function rulerTicks(duration: number, layout: TrackLayout, step = 1.0): RulerTick[] {
  const ticks: RulerTick[] = [];
  const count = Math.floor(duration / step + 1e-9);
  for (let i = 0; i <= count; i += 1) {
    const t = i * step;
    ticks.push({ t, x: timeToX(t, layout), major: Math.round(t) % 5 === 0 });
  }
  return ticks;
}
