// Pure program-editing state. The DOM layer renders from this and the
// service reconciles its optimistic length after every acknowledged edit.

import type { EditKind, InstructionToken, ProgramDoc } from "./types.js";

export type FrameId = "main" | 0 | 1 | 2 | 3;

export interface EditorState {
  main: InstructionToken[];
  procs: InstructionToken[][];
  subprocessesAllowed: number;
  counterVisible: boolean;
}

export interface Edit {
  kind: EditKind;
  frame: FrameId;
  index: number;
  toIndex?: number;
  token?: InstructionToken;
}

export function emptyEditor(subprocessesAllowed: number, counterVisible: boolean): EditorState {
  return {
    main: [],
    procs: Array.from({ length: subprocessesAllowed }, () => []),
    subprocessesAllowed,
    counterVisible,
  };
}

function frameList(state: EditorState, frame: FrameId): InstructionToken[] {
  if (frame === "main") return state.main;
  const list = state.procs[frame];
  if (list === undefined) throw new Error(`no subprocess frame ${frame}`);
  return list;
}

function clampIndex(index: number, length: number): number {
  return Math.max(0, Math.min(index, length));
}

export function addInstruction(
  state: EditorState,
  frame: FrameId,
  index: number,
  token: InstructionToken,
): EditorState {
  if (token.startsWith("call") && state.subprocessesAllowed === 0) {
    throw new Error("subprocess calls are not available in this condition");
  }
  const next = cloneState(state);
  const list = frameList(next, frame);
  list.splice(clampIndex(index, list.length), 0, token);
  return next;
}

export function removeInstruction(state: EditorState, frame: FrameId, index: number): EditorState {
  const next = cloneState(state);
  const list = frameList(next, frame);
  if (index < 0 || index >= list.length) throw new Error(`no instruction at ${String(frame)}[${index}]`);
  list.splice(index, 1);
  return next;
}

export function reorderInstruction(
  state: EditorState,
  frame: FrameId,
  fromIndex: number,
  toIndex: number,
): EditorState {
  const next = cloneState(state);
  const list = frameList(next, frame);
  if (fromIndex < 0 || fromIndex >= list.length) {
    throw new Error(`no instruction at ${String(frame)}[${fromIndex}]`);
  }
  const [token] = list.splice(fromIndex, 1);
  list.splice(clampIndex(toIndex, list.length), 0, token);
  return next;
}

export function applyEdit(state: EditorState, edit: Edit): EditorState {
  switch (edit.kind) {
    case "instruction_added":
      if (edit.token === undefined) throw new Error("add requires a token");
      return addInstruction(state, edit.frame, edit.index, edit.token);
    case "instruction_removed":
      return removeInstruction(state, edit.frame, edit.index);
    case "instruction_reordered":
      if (edit.toIndex === undefined) throw new Error("reorder requires toIndex");
      return reorderInstruction(state, edit.frame, edit.index, edit.toIndex);
  }
}

/** Optimistic local count; the server-acknowledged value wins on mismatch. */
export function localProgramLength(state: EditorState): number {
  return state.main.length + state.procs.reduce((total, proc) => total + proc.length, 0);
}

export function toProgramDoc(state: EditorState): ProgramDoc {
  return { main: [...state.main], procs: state.procs.map((proc) => [...proc]) };
}

function cloneState(state: EditorState): EditorState {
  return {
    main: [...state.main],
    procs: state.procs.map((proc) => [...proc]),
    subprocessesAllowed: state.subprocessesAllowed,
    counterVisible: state.counterVisible,
  };
}
