// Client-side playback of a server trace. Frame i renders exactly the
// server's states[i]; there is no local simulation.

import { renderBoard } from "./board.js";
import type { PuzzleDoc, TraceDoc, TraceFrame } from "./types.js";

export interface AnimationHandle {
  finished: Promise<void>;
  cancel(): void;
}

export class TracePlayer {
  cursor = 0;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly puzzle: PuzzleDoc,
    public frameMs = 220,
  ) {}

  renderFrame(frame: TraceFrame): void {
    renderBoard(this.root, this.puzzle, frame);
  }

  /** Play every frame in order; resolves after the last one is rendered. */
  play(trace: TraceDoc): AnimationHandle {
    this.stop();
    this.cursor = 0;
    this.renderFrame(trace.frames[0]);
    let cancelled = false;
    const finished = new Promise<void>((resolve) => {
      this.timer = setInterval(() => {
        this.cursor += 1;
        if (cancelled || this.cursor >= trace.frames.length) {
          this.stop();
          if (!cancelled && trace.frames.length > 0) {
            this.renderFrame(trace.frames[trace.frames.length - 1]);
          }
          resolve();
          return;
        }
        this.renderFrame(trace.frames[this.cursor]);
      }, this.frameMs);
    });
    return {
      finished,
      cancel: () => {
        cancelled = true;
        this.stop();
      },
    };
  }

  /** Render all frames synchronously and leave the final one visible. */
  playInstant(trace: TraceDoc): void {
    for (const frame of trace.frames) this.renderFrame(frame);
    this.cursor = trace.frames.length - 1;
  }

  private stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
