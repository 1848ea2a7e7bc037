/**
 * Studio state store.
 *
 * Holds the project snapshot plus its revision, the selection, the
 * playhead, and the set of pending agent calls. The store never mutates
 * project content locally: project changes only land via a successful
 * service round-trip that hands back the new snapshot and revision.
 * Invariants: playhead stays within [0, duration]; a block's edits are
 * disabled while an agent call for it is pending.
 */

import type { ProjectDoc, TimelineDoc } from "./types.js";

export type PlayState = "stopped" | "playing" | "scrubbing";

export interface StudioState {
  project: ProjectDoc | null;
  revision: number;
  selection: string | null;
  playhead: number;
  playState: PlayState;
  pending: ReadonlySet<string>;
  notice: string | null;
}

export type Listener = (state: StudioState) => void;

const EMPTY: StudioState = {
  project: null,
  revision: 0,
  selection: null,
  playhead: 0,
  playState: "stopped",
  pending: new Set(),
  notice: null,
};

export class StudioStore {
  private state: StudioState = EMPTY;
  private listeners = new Set<Listener>();

  getState(): StudioState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private commit(partial: Partial<StudioState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  duration(): number {
    return this.state.project?.timeline.duration ?? 0;
  }

  setProject(project: ProjectDoc, revision: number): void {
    const playhead = clamp(this.state.playhead, 0, project.timeline.duration);
    const ids = new Set([
      ...project.timeline.blocks.map((b) => b.id),
      ...project.breakdown.items.map((it) => it.id),
    ]);
    const selection = this.state.selection && ids.has(this.state.selection) ? this.state.selection : null;
    this.commit({ project, revision, playhead, selection });
  }

  setTimeline(timeline: TimelineDoc, revision: number): void {
    const project = this.state.project;
    if (!project) {
      return;
    }
    const updated: ProjectDoc = { ...project, timeline };
    this.commit({
      project: updated,
      revision,
      playhead: clamp(this.state.playhead, 0, timeline.duration),
    });
  }

  select(id: string | null): void {
    this.commit({ selection: id });
  }

  setPlayhead(t: number): void {
    this.commit({ playhead: clamp(t, 0, this.duration()) });
  }

  setPlayState(playState: PlayState): void {
    this.commit({ playState });
  }

  beginAgentCall(key: string): void {
    const pending = new Set(this.state.pending);
    pending.add(key);
    this.commit({ pending });
  }

  endAgentCall(key: string): void {
    const pending = new Set(this.state.pending);
    pending.delete(key);
    this.commit({ pending });
  }

  /** Edits are disabled for a block while its agent call is pending. */
  canEdit(blockId: string): boolean {
    return !this.state.pending.has(blockId) && !this.state.pending.has("project");
  }

  setNotice(notice: string | null): void {
    this.commit({ notice });
  }
}

export function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}
