// Grid rendering: tiles with heights, light overlays, and the robot sprite.

import type { PuzzleDoc, TraceFrame } from "./types.js";

const ARROWS: Record<string, string> = { N: "↑", E: "→", S: "↓", W: "←" };

export function startFrame(puzzle: PuzzleDoc): TraceFrame {
  return { x: puzzle.start.x, y: puzzle.start.y, dir: puzzle.start.dir, lit_bits: 0 };
}

/** Index of each light tile in row-major order, keyed by "x,y". */
export function lightBitIndex(puzzle: PuzzleDoc): Map<string, number> {
  const index = new Map<string, number>();
  puzzle.tiles.forEach((tile, i) => {
    if (tile.light) {
      index.set(`${i % puzzle.width},${Math.floor(i / puzzle.width)}`, index.size);
    }
  });
  return index;
}

export function renderBoard(root: HTMLElement, puzzle: PuzzleDoc, frame: TraceFrame): void {
  root.textContent = "";
  root.classList.add("board");
  root.style.gridTemplateColumns = `repeat(${puzzle.width}, var(--tile-size))`;
  const lights = lightBitIndex(puzzle);
  for (let y = 0; y < puzzle.height; y++) {
    for (let x = 0; x < puzzle.width; x++) {
      const tile = puzzle.tiles[y * puzzle.width + x];
      const cell = document.createElement("div");
      cell.className = "tile";
      cell.dataset.x = String(x);
      cell.dataset.y = String(y);
      const height = document.createElement("span");
      height.className = "tile-height";
      height.textContent = String(tile.h);
      cell.appendChild(height);
      if (tile.light) {
        const bit = lights.get(`${x},${y}`)!;
        const lit = (frame.lit_bits >> bit) & 1 ? true : false;
        cell.classList.add(lit ? "light-on" : "light-off");
        cell.dataset.lit = lit ? "1" : "0";
      }
      if (frame.x === x && frame.y === y) {
        const robot = document.createElement("span");
        robot.className = "robot";
        robot.dataset.dir = frame.dir;
        robot.textContent = ARROWS[frame.dir];
        cell.appendChild(robot);
      }
      root.appendChild(cell);
    }
  }
}
