import { HttpApi } from "./api.js";
import { LockstepPlayer } from "./player.js";
import { SessionController } from "./session.js";
import { Rel } from "./types.js";

const REL_VALUES: Rel[] = [-2, -1, 0, 1, 2];
const REL_LABELS = ["A much more", "A slightly", "equal", "B slightly", "B much more"];
// Buttons read left to right as "A much more ... B much more", so the first
// button means rel = +2 (A greater) and the last rel = -2.
const BUTTON_RELS: Rel[] = [2, 1, 0, -1, -2];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function relButtons(container: HTMLElement, onPick: (rel: Rel) => void): HTMLButtonElement[] {
  const buttons: HTMLButtonElement[] = [];
  BUTTON_RELS.forEach((rel, i) => {
    const btn = document.createElement("button");
    btn.textContent = REL_LABELS[i];
    btn.dataset.rel = String(rel);
    btn.addEventListener("click", () => onPick(rel));
    container.appendChild(btn);
    buttons.push(btn);
  });
  return buttons;
}

function main(): void {
  const api = new HttpApi("");
  const player = new LockstepPlayer(
    el<HTMLCanvasElement>("canvas-a"),
    el<HTMLCanvasElement>("canvas-b"),
    (index) => {
      el("frame-indicator").textContent = `frame ${index}`;
    },
  );

  const session = new SessionController<ImageBitmap>(api, render, "web-ui");

  const objectRow = el("object-rel-row");
  const cameraRow = el("camera-rel-row");
  const objectButtons = relButtons(objectRow, (rel) => {
    session.draft.setObjectRel(rel);
    render();
  });
  const cameraButtons = relButtons(cameraRow, (rel) => {
    session.draft.setCameraRel(rel);
    render();
  });

  el("flag-a").addEventListener("click", () => {
    session.draft.toggleMoving("a");
    render();
  });
  el("flag-b").addEventListener("click", () => {
    session.draft.toggleMoving("b");
    render();
  });
  el("submit").addEventListener("click", () => void session.submit());
  el("retry").addEventListener("click", () => void session.retry());
  el("pause").addEventListener("click", () => {
    player.togglePlay();
    render();
  });
  el("step").addEventListener("click", () => {
    player.step();
  });
  el<HTMLInputElement>("half-speed").addEventListener("change", (ev) => {
    player.setHalfSpeed((ev.target as HTMLInputElement).checked);
  });

  document.addEventListener("keydown", (ev) => {
    if (session.state !== "labeling") return;
    const digit = Number(ev.key);
    if (ev.key === "a" || ev.key === "A") {
      session.draft.toggleMoving("a");
    } else if (ev.key === "d" || ev.key === "D") {
      session.draft.toggleMoving("b");
    } else if (ev.code.startsWith("Digit") && digit >= 1 && digit <= 5) {
      // 1..5 map onto {-2,-1,0,+1,+2}; Shift targets the camera row.
      const rel = REL_VALUES[digit - 1];
      if (ev.shiftKey) session.draft.setCameraRel(rel);
      else session.draft.setObjectRel(rel);
    } else if (ev.code.startsWith("Digit") && ev.shiftKey) {
      // Shift+digit produces symbols; recover the digit from the code.
      const n = Number(ev.code.slice(5));
      if (n >= 1 && n <= 5) session.draft.setCameraRel(REL_VALUES[n - 1]);
    } else if (ev.key === " ") {
      ev.preventDefault();
      player.togglePlay();
    } else if (ev.key === "Enter") {
      void session.submit();
    } else {
      return;
    }
    render();
  });

  function flagText(value: 0 | 1 | null): string {
    return value === null ? "unset" : value === 1 ? "moving" : "static";
  }

  function render(): void {
    el("progress").textContent =
      `${session.progress.labeled} / ${session.progress.total} labeled`;
    const states: Record<string, boolean> = {
      loading: session.state === "loading",
      labeling: session.state === "labeling" || session.state === "submitting",
      complete: session.state === "complete",
      error: session.state === "error",
    };
    for (const [name, visible] of Object.entries(states)) {
      el(`view-${name}`).style.display = visible ? "" : "none";
    }
    if (session.state === "error") {
      el("error-message").textContent = session.errorMessage;
      return;
    }
    if (session.state !== "labeling" && session.state !== "submitting") return;

    if (session.pair && session.framesA.length) {
      const loaded = el("pair-title").dataset.pair;
      if (loaded !== session.pair.pair_id) {
        el("pair-title").dataset.pair = session.pair.pair_id;
        el("pair-title").textContent = session.pair.pair_id;
        player.load(session.framesA, session.framesB, session.pair.fps);
      }
    }
    el("flag-a").textContent = `A: ${flagText(session.draft.objectAMoving)}`;
    el("flag-b").textContent = `B: ${flagText(session.draft.objectBMoving)}`;
    const locked = session.draft.objectRelLocked;
    objectButtons.forEach((btn) => {
      btn.disabled = locked;
      btn.classList.toggle(
        "selected",
        !locked && session.draft.objectRel === Number(btn.dataset.rel),
      );
    });
    cameraButtons.forEach((btn) => {
      btn.classList.toggle(
        "selected",
        session.draft.cameraRel === Number(btn.dataset.rel),
      );
    });
    el("object-locked-note").style.display = locked ? "" : "none";
    el<HTMLButtonElement>("submit").disabled = !session.canSubmit;
    el("validation").textContent = session.validationMessage;
    el("pause").textContent = player.isPlaying ? "pause" : "play";
  }

  void session.start();
}

main();
