// Wire types for the /v1 experiment API.

export type PrimitiveToken = "walk" | "jump" | "left" | "right" | "light";
export type CallToken = "call1" | "call2" | "call3" | "call4";
export type InstructionToken = PrimitiveToken | CallToken;

export const PRIMITIVE_TOKENS: PrimitiveToken[] = ["walk", "jump", "left", "right", "light"];
export const CALL_TOKENS: CallToken[] = ["call1", "call2", "call3", "call4"];

export interface ProgramDoc {
  main: InstructionToken[];
  procs: InstructionToken[][];
}

export interface TileDoc {
  h: number;
  light: boolean;
}

export interface PuzzleDoc {
  width: number;
  height: number;
  tiles: TileDoc[];
  start: { x: number; y: number; dir: "N" | "E" | "S" | "W" };
  name: string;
}

export interface TraceFrame {
  x: number;
  y: number;
  dir: "N" | "E" | "S" | "W";
  lit_bits: number;
}

export interface TraceDoc {
  actions: PrimitiveToken[];
  frames: TraceFrame[];
  status: "completed" | "program_ended" | "step_budget_exhausted" | "depth_exceeded";
}

export interface SessionInfo {
  session_id: string;
  condition: string;
  puzzle_count: number;
  cursor: number;
  finished: boolean;
}

export interface CurrentPuzzle {
  puzzle_id: string;
  index: number;
  total: number;
  puzzle: PuzzleDoc;
  subprocesses_allowed: number;
  counter_visible: boolean;
  efficiency_instructions: boolean;
  elapsed_s: number;
  skip_available_in_s: number;
}

export interface Violation {
  code: string;
  frame: string;
  index: number;
  message: string;
}

export interface SubmitResponse {
  valid: boolean;
  violations?: Violation[];
  completed?: boolean;
  trace?: TraceDoc;
  counter_visible: boolean;
  program_length?: number;
  next_puzzle_id?: string | null;
  session_finished?: boolean;
}

export interface SkipResponse {
  ok: boolean;
  remaining_s?: number;
  next_puzzle_id?: string | null;
  session_finished?: boolean;
}

export interface EventAck {
  ok: boolean;
  program_length?: number;
}

export type EditKind = "instruction_added" | "instruction_removed" | "instruction_reordered";
