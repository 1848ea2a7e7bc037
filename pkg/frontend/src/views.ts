/**
 * DOM panels: script editor, scene-breakdown list, researcher chat,
 * timeline tracks with drag handles, properties panel, and the map
 * canvas. The panels render from the store snapshot and never mutate
 * project state locally; every edit goes through the service and the
 * store is updated from the response.
 */

import { ApiError, Client } from "./api.js";
import { FrameRequestCoalescer, ParsedStream, PlaybackController, frameAt, parseFrameStream } from "./playback.js";
import { renderFrame } from "./overlay-render.js";
import { StudioStore } from "./state.js";
import {
  DEFAULT_LAYOUT,
  blockRect,
  dragLeftEdge,
  dragRightEdge,
  dragWholeBlock,
  retimeEdit,
  rulerTicks,
  timeToX,
  xToTime,
} from "./timeline-math.js";
import type { BlockDoc, FrameDoc, ProjectDoc } from "./types.js";
import { isCameraKind } from "./types.js";

export interface StudioDeps {
  client: Client;
  store: StudioStore;
  root: HTMLElement;
}

interface DragState {
  blockId: string;
  mode: "left" | "right" | "move";
  startX: number;
  original: { start_time: number; end_time: number };
  preview: { start_time: number; end_time: number };
}

export class StudioApp {
  private readonly client: Client;
  private readonly store: StudioStore;
  private readonly root: HTMLElement;

  private mapCanvas!: HTMLCanvasElement;
  private scriptArea!: HTMLTextAreaElement;
  private breakdownList!: HTMLElement;
  private chatLog!: HTMLElement;
  private chatInput!: HTMLInputElement;
  private timelineEl!: HTMLElement;
  private propertiesEl!: HTMLElement;
  private noticeEl!: HTMLElement;

  private drag: DragState | null = null;
  private stream: ParsedStream | null = null;
  private lastFrame: FrameDoc | null = null;
  private playback: PlaybackController;
  private coalescer: FrameRequestCoalescer;
  private rafScheduled = false;

  constructor(deps: StudioDeps) {
    this.client = deps.client;
    this.store = deps.store;
    this.root = deps.root;
    this.playback = new PlaybackController({
      now: () => performance.now(),
      duration: () => this.store.duration(),
      onFrame: (t) => this.store.setPlayhead(t),
    });
    this.coalescer = new FrameRequestCoalescer(
      (t) => {
        const project = this.store.getState().project;
        if (!project) {
          return Promise.reject(new Error("no project"));
        }
        return this.client.frame(project.id, t);
      },
      (frame) => {
        this.lastFrame = frame;
        this.drawMap();
      },
      (error) => this.showError(error),
    );
    this.buildDom();
    this.store.subscribe(() => this.render());
    this.loop();
  }

  // -- DOM scaffolding --------------------------------------------------

  private buildDom(): void {
    this.root.innerHTML = "";
    this.root.classList.add("studio");

    const top = el("div", "studio-top");
    const left = el("div", "studio-left");
    const center = el("div", "studio-center");
    const right = el("div", "studio-right");
    top.append(left, center, right);

    // script + breakdown
    left.append(el("h2", "", "Script"));
    this.scriptArea = document.createElement("textarea");
    this.scriptArea.rows = 6;
    left.append(this.scriptArea);
    const actions = el("div", "actions");
    actions.append(
      button("New project", () => void this.createProject()),
      button("Breakdown", () => void this.runBreakdown()),
      button("Research", () => void this.runResearch()),
      button("Compile", () => void this.runCompile()),
    );
    left.append(actions);
    left.append(el("h2", "", "Scene breakdown"));
    this.breakdownList = el("div", "breakdown-list");
    left.append(this.breakdownList);

    // map canvas
    this.mapCanvas = document.createElement("canvas");
    this.mapCanvas.width = 640;
    this.mapCanvas.height = 400;
    center.append(this.mapCanvas);
    this.noticeEl = el("div", "notice");
    center.append(this.noticeEl);

    // researcher chat + properties
    right.append(el("h2", "", "Researcher"));
    this.chatLog = el("div", "chat-log");
    this.chatInput = document.createElement("input");
    this.chatInput.placeholder = "Ask the researcher about the selected block";
    this.chatInput.addEventListener("keydown", (event) => {
      if (event.key === "Enter") {
        void this.sendChat();
      }
    });
    right.append(this.chatLog, this.chatInput);
    right.append(el("h2", "", "Properties"));
    this.propertiesEl = el("div", "properties");
    right.append(this.propertiesEl);

    // timeline
    const bottom = el("div", "studio-bottom");
    const transport = el("div", "transport");
    transport.append(
      button("Play", () => this.play()),
      button("Pause", () => this.pause()),
    );
    bottom.append(transport);
    this.timelineEl = el("div", "timeline");
    this.timelineEl.addEventListener("pointerdown", (event) => this.onTimelinePointerDown(event));
    window.addEventListener("pointermove", (event) => this.onPointerMove(event));
    window.addEventListener("pointerup", (event) => void this.onPointerUp(event));
    bottom.append(this.timelineEl);

    this.root.append(top, bottom);
  }

  // -- actions ------------------------------------------------------------

  private async createProject(): Promise<void> {
    try {
      const { revision, value } = await this.client.createProject(this.scriptArea.value);
      this.store.setProject(value, revision);
      this.stream = null;
    } catch (error) {
      this.showError(error);
    }
  }

  private async withProjectCall(key: string, run: (project: ProjectDoc, revision: number) => Promise<void>): Promise<void> {
    const { project, revision } = this.store.getState();
    if (!project) {
      this.store.setNotice("create a project first");
      return;
    }
    this.store.beginAgentCall(key);
    try {
      await run(project, revision);
    } catch (error) {
      this.showError(error);
    } finally {
      this.store.endAgentCall(key);
    }
  }

  private async runBreakdown(): Promise<void> {
    await this.withProjectCall("project", async (project, revision) => {
      await this.client.runBreakdown(project.id, revision);
      await this.reload(project.id);
    });
  }

  private async runResearch(): Promise<void> {
    await this.withProjectCall("project", async (project, revision) => {
      await this.client.research(project.id, revision);
      await this.reload(project.id);
    });
  }

  private async runCompile(): Promise<void> {
    await this.withProjectCall("project", async (project, revision) => {
      await this.client.compile(project.id, revision);
      await this.reload(project.id);
      await this.loadStream();
    });
  }

  private async sendChat(): Promise<void> {
    const { project, revision, selection } = this.store.getState();
    const message = this.chatInput.value.trim();
    if (!project || !selection || !message) {
      return;
    }
    this.chatInput.value = "";
    this.store.beginAgentCall(selection);
    try {
      await this.client.chat(project.id, selection, revision, message);
      await this.reload(project.id);
      await this.loadStream();
    } catch (error) {
      this.showError(error);
    } finally {
      this.store.endAgentCall(selection);
    }
  }

  async reload(projectId: string): Promise<void> {
    const { revision, value } = await this.client.getProject(projectId);
    this.store.setProject(value, revision);
  }

  async loadStream(fps = 30): Promise<void> {
    const project = this.store.getState().project;
    if (!project || project.timeline.blocks.length === 0) {
      this.stream = null;
      return;
    }
    const text = await this.client.frameStream(project.id, fps);
    this.stream = parseFrameStream(text, fps);
    this.drawMap();
  }

  private play(): void {
    this.store.setPlayState("playing");
    this.playback.play(this.store.getState().playhead);
  }

  private pause(): void {
    this.store.setPlayState("stopped");
    this.playback.pause();
  }

  // -- timeline dragging ----------------------------------------------------

  private onTimelinePointerDown(event: PointerEvent): void {
    const state = this.store.getState();
    const project = state.project;
    if (!project) {
      return;
    }
    const target = event.target as HTMLElement;
    const blockId = target.dataset["blockId"] ?? target.parentElement?.dataset["blockId"];
    if (!blockId) {
      // clicking the ruler area scrubs
      const bounds = this.timelineEl.getBoundingClientRect();
      const t = xToTime(event.clientX - bounds.left, DEFAULT_LAYOUT);
      this.store.setPlayState("scrubbing");
      this.store.setPlayhead(t);
      this.requestScrubFrame(t);
      return;
    }
    if (!this.store.canEdit(blockId)) {
      this.store.setNotice("block is busy with an agent call");
      return;
    }
    const block = project.timeline.blocks.find((b) => b.id === blockId);
    if (!block) {
      return;
    }
    this.store.select(blockId);
    const mode = target.classList.contains("handle-left")
      ? "left"
      : target.classList.contains("handle-right")
        ? "right"
        : "move";
    this.drag = {
      blockId,
      mode,
      startX: event.clientX,
      original: { start_time: block.start_time, end_time: block.end_time },
      preview: { start_time: block.start_time, end_time: block.end_time },
    };
  }

  private onPointerMove(event: PointerEvent): void {
    if (!this.drag) {
      return;
    }
    const dx = event.clientX - this.drag.startX;
    const { original, mode } = this.drag;
    this.drag.preview =
      mode === "left"
        ? dragLeftEdge(original, dx, DEFAULT_LAYOUT)
        : mode === "right"
          ? dragRightEdge(original, dx, DEFAULT_LAYOUT)
          : dragWholeBlock(original, dx, DEFAULT_LAYOUT);
    this.renderTimeline();
  }

  private async onPointerUp(_event: PointerEvent): Promise<void> {
    const drag = this.drag;
    this.drag = null;
    if (this.store.getState().playState === "scrubbing") {
      this.store.setPlayState("stopped");
    }
    if (!drag) {
      return;
    }
    const { project, revision } = this.store.getState();
    if (!project) {
      return;
    }
    const unchanged =
      drag.preview.start_time === drag.original.start_time &&
      drag.preview.end_time === drag.original.end_time;
    if (unchanged) {
      this.renderTimeline();
      return;
    }
    try {
      const result = await this.client.editTimeline(project.id, revision, retimeEdit(drag.blockId, drag.preview));
      this.store.setTimeline(result.value, result.revision);
      await this.loadStream();
    } catch (error) {
      // conflict or rejection: snap back to the authoritative state
      this.renderTimeline();
      if (error instanceof ApiError && error.code === "conflict") {
        this.store.setNotice("edit conflicted with a newer revision; reloading");
        await this.reload(project.id);
      } else {
        this.showError(error);
      }
    }
  }

  private requestScrubFrame(t: number): void {
    if (this.stream) {
      this.drawMap();
      return;
    }
    this.coalescer.request(t);
  }

  // -- rendering ------------------------------------------------------------

  private loop(): void {
    if (this.rafScheduled) {
      return;
    }
    this.rafScheduled = true;
    const step = () => {
      if (this.store.getState().playState === "playing") {
        this.playback.tick();
      }
      requestAnimationFrame(step);
    };
    requestAnimationFrame(step);
  }

  private render(): void {
    const state = this.store.getState();
    this.noticeEl.textContent = state.notice ?? "";
    if (state.project && this.scriptArea.value === "") {
      this.scriptArea.value = state.project.script;
    }
    this.renderBreakdown();
    this.renderChat();
    this.renderProperties();
    this.renderTimeline();
    this.drawMap();
  }

  private renderBreakdown(): void {
    const state = this.store.getState();
    this.breakdownList.innerHTML = "";
    if (!state.project) {
      return;
    }
    for (const item of state.project.breakdown.items) {
      const row = el("div", "breakdown-item" + (state.selection === item.id ? " selected" : ""));
      row.dataset["itemId"] = item.id;
      row.append(
        el("span", "kind-tag", item.kind),
        el("span", "desc", item.short_description),
        el("span", "status", item.resolved ? "resolved" : "pending"),
      );
      row.addEventListener("click", () => this.store.select(item.id));
      this.breakdownList.append(row);
    }
  }

  private renderChat(): void {
    const state = this.store.getState();
    this.chatLog.innerHTML = "";
    const session = state.selection ? state.project?.sessions[state.selection] : undefined;
    if (!session) {
      this.chatLog.append(el("div", "chat-empty", "select a block to chat with its researcher"));
      return;
    }
    for (const message of session.messages) {
      if (message.role === "system") {
        continue;
      }
      this.chatLog.append(el("div", `chat-message ${message.role}`, message.content));
    }
    if (session.error) {
      this.chatLog.append(el("div", "chat-message error", session.error));
    }
  }

  private renderProperties(): void {
    const state = this.store.getState();
    this.propertiesEl.innerHTML = "";
    const block = state.project?.timeline.blocks.find((b) => b.id === state.selection);
    if (!block) {
      this.propertiesEl.append(el("div", "", "no block selected"));
      return;
    }
    this.propertiesEl.append(
      el("div", "", `kind: ${block.kind}`),
      el("div", "", `start: ${block.start_time.toFixed(3)} s`),
      el("div", "", `end: ${block.end_time.toFixed(3)} s`),
      el("div", "", `opacity: ${block.style.opacity}`),
      el("div", "", `args: ${JSON.stringify(block.args).slice(0, 200)}`),
    );
  }

  private renderTimeline(): void {
    const state = this.store.getState();
    this.timelineEl.innerHTML = "";
    const project = state.project;
    if (!project) {
      return;
    }
    const layout = DEFAULT_LAYOUT;
    const ruler = el("div", "ruler");
    for (const tick of rulerTicks(project.timeline.duration, layout)) {
      const mark = el("div", tick.major ? "tick major" : "tick");
      mark.style.left = `${tick.x}px`;
      if (tick.major) {
        mark.textContent = `${tick.t}s`;
      }
      ruler.append(mark);
    }
    this.timelineEl.append(ruler);

    for (const block of project.timeline.blocks) {
      const preview =
        this.drag && this.drag.blockId === block.id
          ? { ...block, start_time: this.drag.preview.start_time, end_time: this.drag.preview.end_time }
          : block;
      const rect = blockRect(project.timeline, preview as BlockDoc, layout);
      const row = el("div", "track-row");
      row.style.height = `${layout.trackHeight}px`;
      const label = el("div", "track-label", `${block.kind}:${block.id}`);
      label.style.width = `${layout.headerWidth}px`;
      const bar = el(
        "div",
        "track-block" + (isCameraKind(block.kind) ? " camera" : "") + (state.selection === block.id ? " selected" : ""),
      );
      bar.dataset["blockId"] = block.id;
      bar.style.left = `${rect.x}px`;
      bar.style.width = `${rect.width}px`;
      const left = el("div", "handle handle-left");
      left.dataset["blockId"] = block.id;
      const right = el("div", "handle handle-right");
      right.dataset["blockId"] = block.id;
      bar.append(left, right);
      bar.addEventListener("click", () => this.store.select(block.id));
      row.append(label, bar);
      this.timelineEl.append(row);
    }

    const playhead = el("div", "playhead");
    playhead.style.left = `${timeToX(state.playhead, layout)}px`;
    this.timelineEl.append(playhead);
  }

  drawMap(): void {
    const ctx = this.mapCanvas.getContext("2d");
    const state = this.store.getState();
    if (!ctx) {
      return;
    }
    const viewport = { width: this.mapCanvas.width, height: this.mapCanvas.height };
    let frame: FrameDoc | null = null;
    if (this.stream) {
      frame = frameAt(this.stream, state.playhead);
    } else if (this.lastFrame) {
      frame = this.lastFrame;
    }
    if (!frame) {
      ctx.fillStyle = "#dddddd";
      ctx.fillRect(0, 0, viewport.width, viewport.height);
      return;
    }
    renderFrame(ctx, frame, viewport, state.project?.timeline.map_style ?? "streets");
  }

  private showError(error: unknown): void {
    if (error instanceof ApiError) {
      this.store.setNotice(`${error.code}: ${error.message}`);
    } else {
      this.store.setNotice(String(error));
    }
  }
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

function button(label: string, onClick: () => void): HTMLButtonElement {
  const node = document.createElement("button");
  node.textContent = label;
  node.addEventListener("click", onClick);
  return node;
}
