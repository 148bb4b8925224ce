import { describe, expect, it } from "vitest";

import { TracePlayer } from "../src/animation.js";
import { lightBitIndex, startFrame } from "../src/board.js";
import type { PuzzleDoc, TraceDoc } from "../src/types.js";

const PUZZLE: PuzzleDoc = {
  width: 2,
  height: 1,
  tiles: [
    { h: 0, light: false },
    { h: 0, light: true },
  ],
  start: { x: 0, y: 0, dir: "E" },
  name: "mini",
};

const TRACE: TraceDoc = {
  actions: ["walk", "light"],
  frames: [
    { x: 0, y: 0, dir: "E", lit_bits: 0 },
    { x: 1, y: 0, dir: "E", lit_bits: 0 },
    { x: 1, y: 0, dir: "E", lit_bits: 1 },
  ],
  status: "completed",
};

describe("trace animation", () => {
  it("renders frame zero as the start pose", () => {
    const root = document.createElement("div");
    const player = new TracePlayer(root, PUZZLE);
    player.renderFrame(startFrame(PUZZLE));
    const robotCell = root.querySelector(".robot")!.parentElement!;
    expect(robotCell.getAttribute("data-x")).toBe("0");
    expect(root.querySelectorAll(".light-on").length).toBe(0);
  });

  it("final rendered lit tiles equal the final frame's mask", () => {
    const root = document.createElement("div");
    const player = new TracePlayer(root, PUZZLE);
    player.playInstant(TRACE);
    const last = TRACE.frames[TRACE.frames.length - 1];
    const lights = lightBitIndex(PUZZLE);
    for (const [key, bit] of lights) {
      const [x, y] = key.split(",");
      const cell = root.querySelector(`[data-x="${x}"][data-y="${y}"]`)!;
      const expected = (last.lit_bits >> bit) & 1 ? "1" : "0";
      expect(cell.getAttribute("data-lit")).toBe(expected);
    }
    const robotCell = root.querySelector(".robot")!.parentElement!;
    expect(robotCell.getAttribute("data-x")).toBe("1");
  });

  it("timed playback visits every frame and resolves", async () => {
    const root = document.createElement("div");
    const player = new TracePlayer(root, PUZZLE);
    player.frameMs = 1;
    await player.play(TRACE).finished;
    expect(root.querySelectorAll(".light-on").length).toBe(1);
  });
});
