// Counter fidelity: across a scripted 50-edit sequence the displayed counter
// equals the service-computed program length at every acknowledgment. The
// fake service computes lengths exactly as the wire contract specifies:
// |main| plus the length of every subprocess.

import { describe, expect, it } from "vitest";

import { Edit, ProgramEditor } from "../src/editor.js";
import type { EventAck, ProgramDoc } from "../src/types.js";

function serviceLength(program: ProgramDoc): number {
  return program.main.length + program.procs.reduce((total, proc) => total + proc.length, 0);
}

describe("counter fidelity", () => {
  it("matches the service-acknowledged length after each of 50 scripted edits", async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const ackLog: number[] = [];
    const editor = new ProgramEditor(root, 4, true, {
      logEdit: async (_edit, program): Promise<EventAck> => {
        const length = serviceLength(program);
        ackLog.push(length);
        return { ok: true, program_length: length };
      },
      run: () => {},
    });

    const primitives = ["walk", "jump", "left", "right", "light"] as const;
    const edits: Edit[] = [];
    // 20 appends to main
    for (let i = 0; i < 20; i++) {
      edits.push({ kind: "instruction_added", frame: "main", index: i, token: primitives[i % 5] });
    }
    // 12 appends across the four subprocess frames
    for (let i = 0; i < 12; i++) {
      const frame = (i % 4) as 0 | 1 | 2 | 3;
      edits.push({
        kind: "instruction_added",
        frame,
        index: Math.floor(i / 4),
        token: primitives[(i + 2) % 5],
      });
    }
    // 4 call chips into main
    for (let i = 0; i < 4; i++) {
      edits.push({ kind: "instruction_added", frame: "main", index: 0, token: "call1" });
    }
    // 8 reorders (length-preserving)
    for (let i = 0; i < 8; i++) {
      edits.push({ kind: "instruction_reordered", frame: "main", index: 0, toIndex: 5 + i });
    }
    // 6 removals
    for (let i = 0; i < 6; i++) {
      edits.push({ kind: "instruction_removed", frame: "main", index: 0 });
    }
    expect(edits.length).toBe(50);

    for (const edit of edits) {
      await editor.performEdit(edit);
      const displayed = editor.displayedCounter();
      expect(displayed).toBe(String(ackLog[ackLog.length - 1]));
    }
    expect(ackLog.length).toBe(50);
    // final sanity: 20 + 12 + 4 - 6 stored instructions
    expect(ackLog[ackLog.length - 1]).toBe(30);
  });

  it("adopts the server value when the ack disagrees with the local count", async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const editor = new ProgramEditor(root, 4, true, {
      logEdit: async (): Promise<EventAck> => ({ ok: true, program_length: 99 }),
      run: () => {},
    });
    await editor.performEdit({ kind: "instruction_added", frame: "main", index: 0, token: "walk" });
    expect(editor.displayedCounter()).toBe("99");
  });
});
