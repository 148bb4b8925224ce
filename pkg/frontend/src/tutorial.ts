// Condition-gated illustrated walkthrough shown before the first puzzle.
// Subprocess and recursion pages appear only when subprocesses are allowed;
// efficiency pages only when the condition instructs about efficiency.

export interface TutorialPage {
  title: string;
  body: string;
}

const BASE_PAGES: TutorialPage[] = [
  {
    title: "The robot and its world",
    body:
      "Guide the robot over the tiles and switch on every light (the glowing tiles). " +
      "Tiles have heights: walking only crosses level ground, jumping climbs exactly one " +
      "block up or drops any number down.",
  },
  {
    title: "Writing a program",
    body:
      "Drag instructions into the program frame, or click them to append. You can reorder " +
      "and delete instructions at any time. Press Run to watch the robot execute your " +
      "program from the beginning.",
  },
  {
    title: "Finishing a puzzle",
    body:
      "When a run turns on every light the puzzle is complete and the next one loads. " +
      "After six minutes on a puzzle you may skip it, but skipped puzzles earn no bonus.",
  },
];

const SUBPROCESS_PAGES: TutorialPage[] = [
  {
    title: "Sub-processes",
    body:
      "Four sub-process frames (P1-P4) store reusable instruction sequences. Dragging a " +
      "call chip into a program runs that whole sub-process at the cost of a single " +
      "instruction. Calls work inside the main program and inside other sub-processes.",
  },
  {
    title: "Recursion",
    body:
      "A sub-process may call itself: put its own call chip at its end and it repeats until " +
      "the puzzle is complete. Recursive programs can be very short.",
  },
];

const EFFICIENCY_FLAT_PAGE: TutorialPage = {
  title: "Shorter is better",
  body:
    "Your bonus grows as your solutions use fewer actions. Example: two walk instructions " +
    "beat walk, turn, turn, turn, turn, walk.",
};

const EFFICIENCY_HIERARCHY_PAGE: TutorialPage = {
  title: "Smaller programs are better",
  body:
    "Your bonus grows as your program stores fewer instructions, counted across the main " +
    "program and every sub-process. The length counter above the editor always shows the " +
    "current count. Storing a repeated sequence as a sub-process makes programs smaller.",
};

export function tutorialPages(
  subprocessesAllowed: number,
  efficiencyInstructions: boolean,
): TutorialPage[] {
  const pages = [...BASE_PAGES];
  if (subprocessesAllowed > 0) pages.push(...SUBPROCESS_PAGES);
  if (efficiencyInstructions) {
    pages.push(subprocessesAllowed > 0 ? EFFICIENCY_HIERARCHY_PAGE : EFFICIENCY_FLAT_PAGE);
  }
  return pages;
}

export class TutorialView {
  private pageIndex = 0;
  private readonly pages: TutorialPage[];

  constructor(
    private readonly root: HTMLElement,
    subprocessesAllowed: number,
    efficiencyInstructions: boolean,
    private readonly onDone: () => void,
  ) {
    this.pages = tutorialPages(subprocessesAllowed, efficiencyInstructions);
    this.render();
  }

  private render(): void {
    const page = this.pages[this.pageIndex];
    this.root.textContent = "";
    this.root.classList.add("tutorial");
    const title = document.createElement("h2");
    title.textContent = page.title;
    const body = document.createElement("p");
    body.textContent = page.body;
    const next = document.createElement("button");
    next.dataset.testid = "tutorial-next";
    next.textContent = this.pageIndex + 1 < this.pages.length ? "Next" : "Start";
    next.addEventListener("click", () => {
      this.pageIndex += 1;
      if (this.pageIndex >= this.pages.length) {
        this.root.textContent = "";
        this.root.classList.remove("tutorial");
        this.onDone();
      } else {
        this.render();
      }
    });
    this.root.append(title, body, next);
  }
}
