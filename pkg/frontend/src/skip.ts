// Skip affordance: disabled until the server confirms the six-minute mark.
// The local countdown is advisory; any server rejection resets it to the
// server-reported remaining time.

export interface SkipCallbacks {
  /** Attempt the skip server-side; resolves to the server's verdict. */
  requestSkip(clientElapsedS: number): Promise<{ ok: boolean; remaining_s?: number }>;
  onSkipped(): void;
}

export class SkipControl {
  readonly button: HTMLButtonElement;
  private remainingS: number;
  private elapsedS: number;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    root: HTMLElement,
    initialRemainingS: number,
    initialElapsedS: number,
    private readonly callbacks: SkipCallbacks,
  ) {
    this.remainingS = Math.max(0, initialRemainingS);
    this.elapsedS = initialElapsedS;
    this.button = document.createElement("button");
    this.button.className = "skip-button";
    this.button.dataset.testid = "skip";
    this.button.addEventListener("click", () => void this.attempt());
    root.appendChild(this.button);
    this.render();
    this.timer = setInterval(() => this.tick(), 1000);
  }

  private tick(): void {
    this.elapsedS += 1;
    if (this.remainingS > 0) this.remainingS -= 1;
    this.render();
  }

  private render(): void {
    if (this.remainingS > 0) {
      this.button.disabled = true;
      const m = Math.floor(this.remainingS / 60);
      const s = Math.floor(this.remainingS % 60);
      this.button.textContent = `Skip in ${m}:${String(s).padStart(2, "0")}`;
    } else {
      this.button.disabled = false;
      this.button.textContent = "Skip puzzle";
    }
  }

  async attempt(): Promise<void> {
    if (this.button.disabled) return;
    const verdict = await this.callbacks.requestSkip(this.elapsedS);
    if (verdict.ok) {
      this.dispose();
      this.callbacks.onSkipped();
      return;
    }
    // clock skew: trust the server's remaining time
    this.remainingS = Math.max(0, verdict.remaining_s ?? 0);
    this.render();
  }

  dispose(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
