import { describe, expect, it } from "vitest";

import {
  addInstruction,
  applyEdit,
  emptyEditor,
  localProgramLength,
  removeInstruction,
  reorderInstruction,
  toProgramDoc,
} from "../src/editorState.js";

describe("editor state", () => {
  it("adds at the drop index", () => {
    let state = emptyEditor(4, true);
    state = addInstruction(state, "main", 0, "walk");
    state = addInstruction(state, "main", 0, "jump");
    state = addInstruction(state, "main", 1, "light");
    expect(state.main).toEqual(["jump", "light", "walk"]);
    expect(localProgramLength(state)).toBe(3);
  });

  it("adds into subprocess frames", () => {
    let state = emptyEditor(4, true);
    state = addInstruction(state, 1, 0, "walk");
    state = addInstruction(state, 1, 1, "call1");
    expect(state.procs[1]).toEqual(["walk", "call1"]);
    expect(localProgramLength(state)).toBe(2);
  });

  it("rejects call chips when subprocesses are not allowed", () => {
    const state = emptyEditor(0, false);
    expect(() => addInstruction(state, "main", 0, "call1")).toThrow(/not available/);
  });

  it("deleting the only instruction leaves an empty main and count 0", () => {
    let state = emptyEditor(0, true);
    state = addInstruction(state, "main", 0, "walk");
    state = removeInstruction(state, "main", 0);
    expect(state.main).toEqual([]);
    expect(localProgramLength(state)).toBe(0);
  });

  it("reorders within a frame", () => {
    let state = emptyEditor(4, true);
    for (const token of ["walk", "jump", "light"] as const) {
      state = addInstruction(state, 0, state.procs[0].length, token);
    }
    state = reorderInstruction(state, 0, 2, 0);
    expect(state.procs[0]).toEqual(["light", "walk", "jump"]);
  });

  it("length counts every stored instruction once, calls included", () => {
    let state = emptyEditor(4, true);
    state = addInstruction(state, "main", 0, "call1");
    state = addInstruction(state, "main", 1, "call1");
    state = addInstruction(state, 0, 0, "walk");
    state = addInstruction(state, 0, 1, "walk");
    expect(localProgramLength(state)).toBe(4);
    expect(toProgramDoc(state)).toEqual({
      main: ["call1", "call1"],
      procs: [["walk", "walk"], [], [], []],
    });
  });

  it("applyEdit dispatches and is immutable", () => {
    const state = emptyEditor(0, false);
    const next = applyEdit(state, { kind: "instruction_added", frame: "main", index: 0, token: "walk" });
    expect(state.main).toEqual([]);
    expect(next.main).toEqual(["walk"]);
    expect(() => applyEdit(next, { kind: "instruction_removed", frame: "main", index: 5 })).toThrow();
  });
});
