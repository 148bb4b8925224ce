// App bootstrap: session flow, puzzle loading, run/animate/advance loop,
// kiosk presentation. All authoritative computation happens server-side.

import { TracePlayer } from "./animation.js";
import { ApiClient } from "./api.js";
import { startFrame } from "./board.js";
import { ProgramEditor } from "./editor.js";
import { SkipControl } from "./skip.js";
import { TutorialView } from "./tutorial.js";
import type { CurrentPuzzle, ProgramDoc } from "./types.js";

interface AppElements {
  board: HTMLElement;
  editor: HTMLElement;
  status: HTMLElement;
  controls: HTMLElement;
  overlay: HTMLElement;
}

export class App {
  private editor: ProgramEditor | null = null;
  private player: TracePlayer | null = null;
  private skip: SkipControl | null = null;
  private current: CurrentPuzzle | null = null;
  private running = false;

  constructor(
    private readonly api: ApiClient,
    private readonly sessionId: string,
    private readonly el: AppElements,
  ) {}

  async start(): Promise<void> {
    const info = await this.api.sessionInfo(this.sessionId);
    if (info.finished) {
      this.showFinished();
      return;
    }
    const first = await this.api.currentPuzzle(this.sessionId);
    if (info.cursor === 0) {
      new TutorialView(
        this.el.overlay,
        first.subprocesses_allowed,
        first.efficiency_instructions,
        () => void this.loadPuzzle(),
      );
    } else {
      await this.loadPuzzle();
    }
  }

  private async loadPuzzle(): Promise<void> {
    this.skip?.dispose();
    let current: CurrentPuzzle;
    try {
      current = await this.api.currentPuzzle(this.sessionId);
    } catch (err) {
      this.showRetry(err, () => void this.loadPuzzle());
      return;
    }
    this.current = current;
    this.setStatus(`Puzzle ${current.index + 1} of ${current.total}`);

    this.player = new TracePlayer(this.el.board, current.puzzle);
    this.player.renderFrame(startFrame(current.puzzle));

    this.editor = new ProgramEditor(
      this.el.editor,
      current.subprocesses_allowed,
      current.counter_visible,
      {
        logEdit: (edit, program) =>
          this.api.logEvent(this.sessionId, edit.kind, {
            puzzle_id: current.puzzle_id,
            frame: String(edit.frame),
            index: edit.index,
            to_index: edit.toIndex ?? null,
            token: edit.token ?? null,
            program,
          }),
        run: (program) => void this.runProgram(program),
      },
    );

    this.el.controls.textContent = "";
    this.skip = new SkipControl(this.el.controls, current.skip_available_in_s, current.elapsed_s, {
      requestSkip: (elapsed) => this.api.skipPuzzle(this.sessionId, current.puzzle_id, elapsed),
      onSkipped: () => void this.afterAdvance(),
    });
  }

  private async runProgram(program: ProgramDoc): Promise<void> {
    if (!this.current || !this.editor || !this.player || this.running) return;
    if (program.main.length === 0) {
      this.setStatus("The main program is empty.");
      return;
    }
    this.running = true;
    try {
      const result = await this.api.submitProgram(this.sessionId, this.current.puzzle_id, program);
      if (!result.valid) {
        this.editor.showViolations(result.violations ?? []);
        this.setStatus("That program is not allowed here; fix the marked instructions.");
        return;
      }
      if (result.trace) {
        await this.player.play(result.trace).finished;
      }
      if (result.completed) {
        this.setStatus("Level complete!");
        await this.afterAdvance();
      } else {
        this.setStatus("Not all lights are on yet; edit the program and run it again.");
      }
    } catch (err) {
      // no local fallback: the server is the only executor
      this.showRetry(err, () => void this.runProgram(program));
    } finally {
      this.running = false;
    }
  }

  private async afterAdvance(): Promise<void> {
    const info = await this.api.sessionInfo(this.sessionId);
    if (info.finished) {
      this.showFinished();
    } else {
      await this.loadPuzzle();
    }
  }

  private showFinished(): void {
    this.skip?.dispose();
    this.el.editor.textContent = "";
    this.el.controls.textContent = "";
    this.setStatus("All puzzles done. Thank you!");
  }

  private showRetry(err: unknown, retry: () => void): void {
    this.setStatus(`Could not reach the server (${String(err)}).`);
    const button = document.createElement("button");
    button.dataset.testid = "retry";
    button.textContent = "Retry";
    button.addEventListener("click", () => {
      button.remove();
      retry();
    });
    this.el.status.appendChild(button);
  }

  private setStatus(text: string): void {
    this.el.status.textContent = text;
  }
}

function enterKioskMode(): void {
  // fullscreen plus a navigation-away warning to keep attention on the task
  document.documentElement.requestFullscreen?.().catch(() => undefined);
  window.addEventListener("beforeunload", (ev) => {
    ev.preventDefault();
    ev.returnValue = "";
  });
}

export async function boot(): Promise<void> {
  const el: AppElements = {
    board: document.getElementById("board")!,
    editor: document.getElementById("editor")!,
    status: document.getElementById("status")!,
    controls: document.getElementById("controls")!,
    overlay: document.getElementById("overlay")!,
  };
  const api = new ApiClient("");
  const params = new URLSearchParams(window.location.search);
  let sessionId = params.get("session");
  if (!sessionId) {
    const condition = params.get("condition") ?? "default_hierarchy";
    const seed = Number(params.get("seed") ?? Math.floor(Math.random() * 1e9));
    const session = await api.createSession(condition, seed);
    sessionId = session.session_id;
    const url = new URL(window.location.href);
    url.searchParams.set("session", sessionId);
    window.history.replaceState(null, "", url.toString());
  }
  enterKioskMode();
  await new App(api, sessionId, el).start();
}

if (typeof document !== "undefined" && document.getElementById("board")) {
  void boot();
}
