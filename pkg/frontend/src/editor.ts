// Drag-and-drop program editor. Renders only the affordances the session's
// condition grants: call chips and subprocess frames exist solely when
// subprocesses are allowed, and the stored-length counter solely when the
// condition shows it. Every edit is logged to the service and the counter is
// reconciled against the acknowledged server length.

import {
  addInstruction,
  applyEdit,
  Edit,
  EditorState,
  emptyEditor,
  FrameId,
  localProgramLength,
  toProgramDoc,
} from "./editorState.js";
import type { EventAck, InstructionToken, ProgramDoc, Violation } from "./types.js";
import { CALL_TOKENS, PRIMITIVE_TOKENS } from "./types.js";

export interface EditorCallbacks {
  /** Persist one edit server-side; resolves to the service acknowledgment. */
  logEdit(edit: Edit, program: ProgramDoc): Promise<EventAck>;
  /** Submit the current program for a test run. */
  run(program: ProgramDoc): void;
}

const FRAME_LABELS: Record<string, string> = {
  main: "Main program",
  "0": "Process 1",
  "1": "Process 2",
  "2": "Process 3",
  "3": "Process 4",
};

export class ProgramEditor {
  state: EditorState;
  activeFrame: FrameId = "main";
  private counterEl: HTMLElement | null = null;
  private framesEl!: HTMLElement;
  private violations: Violation[] = [];

  constructor(
    private readonly root: HTMLElement,
    subprocessesAllowed: number,
    counterVisible: boolean,
    private readonly callbacks: EditorCallbacks,
  ) {
    this.state = emptyEditor(subprocessesAllowed, counterVisible);
    this.build();
  }

  private build(): void {
    this.root.textContent = "";
    this.root.classList.add("editor");

    const palette = document.createElement("div");
    palette.className = "palette";
    palette.dataset.testid = "palette";
    const tokens: InstructionToken[] = [...PRIMITIVE_TOKENS];
    if (this.state.subprocessesAllowed > 0) {
      tokens.push(...CALL_TOKENS.slice(0, this.state.subprocessesAllowed));
    }
    for (const token of tokens) {
      palette.appendChild(this.paletteChip(token));
    }
    this.root.appendChild(palette);

    if (this.state.counterVisible) {
      const counter = document.createElement("div");
      counter.className = "counter";
      counter.dataset.testid = "counter";
      counter.textContent = "0";
      this.root.appendChild(counter);
      this.counterEl = counter;
    }

    this.framesEl = document.createElement("div");
    this.framesEl.className = "frames";
    this.root.appendChild(this.framesEl);

    const run = document.createElement("button");
    run.className = "run-button";
    run.dataset.testid = "run";
    run.textContent = "Run";
    run.addEventListener("click", () => this.callbacks.run(toProgramDoc(this.state)));
    this.root.appendChild(run);

    this.renderFrames();
  }

  private paletteChip(token: InstructionToken): HTMLElement {
    const chip = document.createElement("button");
    chip.className = "chip palette-chip";
    chip.dataset.token = token;
    chip.textContent = token;
    chip.draggable = true;
    chip.addEventListener("dragstart", (ev) => {
      ev.dataTransfer?.setData("text/plain", JSON.stringify({ token }));
    });
    // click-to-append keeps the editor keyboard operable
    chip.addEventListener("click", () => {
      const list = this.frameTokens(this.activeFrame);
      void this.performEdit({
        kind: "instruction_added",
        frame: this.activeFrame,
        index: list.length,
        token,
      });
    });
    return chip;
  }

  private frameTokens(frame: FrameId): InstructionToken[] {
    return frame === "main" ? this.state.main : this.state.procs[frame];
  }

  private renderFrames(): void {
    this.framesEl.textContent = "";
    const frames: FrameId[] = ["main"];
    for (let k = 0; k < this.state.subprocessesAllowed; k++) frames.push(k as FrameId);
    for (const frame of frames) {
      this.framesEl.appendChild(this.renderFrame(frame));
    }
    this.updateCounter(null);
  }

  private renderFrame(frame: FrameId): HTMLElement {
    const box = document.createElement("section");
    box.className = frame === "main" ? "frame frame-main" : "frame frame-proc";
    box.dataset.frame = String(frame);
    if (frame === this.activeFrame) box.classList.add("active");

    const header = document.createElement("h3");
    header.textContent = FRAME_LABELS[String(frame)];
    header.addEventListener("click", () => {
      this.activeFrame = frame;
      this.renderFrames();
    });
    box.appendChild(header);

    const list = document.createElement("ol");
    list.className = "instruction-list";
    const tokens = this.frameTokens(frame);
    tokens.forEach((token, index) => {
      list.appendChild(this.instructionChip(frame, index, token));
    });
    list.addEventListener("dragover", (ev) => ev.preventDefault());
    list.addEventListener("drop", (ev) => {
      ev.preventDefault();
      const raw = ev.dataTransfer?.getData("text/plain");
      if (!raw) return;
      const data = JSON.parse(raw) as { token: InstructionToken; from?: [string, number] };
      const target = this.frameTokens(frame).length;
      if (data.from) {
        const [fromFrame, fromIndex] = data.from;
        const from: FrameId = fromFrame === "main" ? "main" : (Number(fromFrame) as FrameId);
        if (from === frame) {
          void this.performEdit({
            kind: "instruction_reordered",
            frame,
            index: fromIndex,
            toIndex: target - 1,
          });
          return;
        }
        void this.performEdit({ kind: "instruction_removed", frame: from, index: fromIndex });
        void this.performEdit({ kind: "instruction_added", frame, index: this.frameTokens(frame).length, token: data.token });
        return;
      }
      void this.performEdit({ kind: "instruction_added", frame, index: target, token: data.token });
    });
    box.appendChild(list);
    return box;
  }

  private instructionChip(frame: FrameId, index: number, token: InstructionToken): HTMLElement {
    const item = document.createElement("li");
    item.className = "chip instruction";
    item.dataset.token = token;
    item.dataset.frame = String(frame);
    item.dataset.index = String(index);
    item.draggable = true;
    const bad = this.violations.find(
      (v) => v.index === index && v.frame === (frame === "main" ? "main" : `proc${(frame as number) + 1}`),
    );
    if (bad) {
      item.classList.add("violation");
      item.title = bad.message;
    }
    const label = document.createElement("span");
    label.textContent = token;
    item.appendChild(label);

    item.addEventListener("dragstart", (ev) => {
      ev.dataTransfer?.setData(
        "text/plain",
        JSON.stringify({ token, from: [String(frame), index] }),
      );
    });

    const up = document.createElement("button");
    up.className = "move-up";
    up.textContent = "▲";
    up.ariaLabel = "move earlier";
    up.addEventListener("click", () => {
      if (index > 0) {
        void this.performEdit({ kind: "instruction_reordered", frame, index, toIndex: index - 1 });
      }
    });
    item.appendChild(up);

    const remove = document.createElement("button");
    remove.className = "delete";
    remove.textContent = "×";
    remove.ariaLabel = "delete instruction";
    remove.addEventListener("click", () => {
      void this.performEdit({ kind: "instruction_removed", frame, index });
    });
    item.appendChild(remove);
    return item;
  }

  /** Apply an edit locally, log it, and reconcile the counter with the ack. */
  async performEdit(edit: Edit): Promise<void> {
    this.state = applyEdit(this.state, edit);
    this.violations = [];
    this.renderFrames();
    const ack = await this.callbacks.logEdit(edit, toProgramDoc(this.state));
    this.updateCounter(ack);
  }

  private updateCounter(ack: EventAck | null): void {
    if (!this.counterEl) return;
    const local = localProgramLength(this.state);
    if (ack && ack.program_length !== undefined) {
      if (ack.program_length !== local) {
        // client bug by contract: server length is authoritative
        console.warn("counter mismatch", { local, server: ack.program_length });
      }
      this.counterEl.textContent = String(ack.program_length);
    } else {
      this.counterEl.textContent = String(local);
    }
  }

  showViolations(violations: Violation[]): void {
    this.violations = violations;
    this.renderFrames();
  }

  programDoc(): ProgramDoc {
    return toProgramDoc(this.state);
  }

  displayedCounter(): string | null {
    return this.counterEl ? this.counterEl.textContent : null;
  }
}

export { addInstruction, emptyEditor, localProgramLength, toProgramDoc };
export type { Edit, EditorState, FrameId };
