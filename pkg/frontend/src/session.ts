import { Api } from "./api.js";
import { Draft } from "./draft.js";
import { ApiError, PairInfo, Progress } from "./types.js";

export type SessionState =
  | "loading"
  | "labeling"
  | "submitting"
  | "complete"
  | "error";

/**
 * Single-page state machine: fetch a pair, prefetch every frame of both
 * clips, collect a draft, submit, advance. One in-flight submission at a
 * time; a failed submission preserves the draft.
 */
export class SessionController<TFrame> {
  state: SessionState = "loading";
  pair: PairInfo | null = null;
  framesA: TFrame[] = [];
  framesB: TFrame[] = [];
  draft = new Draft();
  progress: Progress = { labeled: 0, total: 0 };
  errorMessage = "";
  validationMessage = "";
  private retryAction: (() => Promise<void>) | null = null;

  constructor(
    private readonly api: Api<TFrame>,
    private readonly onChange: () => void = () => {},
    private readonly annotatorId?: string,
  ) {}

  async start(): Promise<void> {
    await this.loadNext();
  }

  async loadNext(): Promise<void> {
    this.state = "loading";
    this.validationMessage = "";
    this.onChange();
    try {
      this.progress = await this.api.progress();
      const pair = await this.api.nextPair();
      if (pair === null) {
        this.state = "complete";
        this.onChange();
        return;
      }
      const [framesA, framesB] = await Promise.all([
        this.prefetch(pair.clip_a, pair.frames),
        this.prefetch(pair.clip_b, pair.frames),
      ]);
      this.pair = pair;
      this.framesA = framesA;
      this.framesB = framesB;
      this.draft = new Draft();
      this.state = "labeling";
    } catch (err) {
      this.fail(err, () => this.loadNext());
    }
    this.onChange();
  }

  private prefetch(clipId: string, frames: number): Promise<TFrame[]> {
    const jobs = [];
    for (let i = 0; i < frames; i++) jobs.push(this.api.fetchFrame(clipId, i));
    return Promise.all(jobs);
  }

  get canSubmit(): boolean {
    return this.state === "labeling" && this.draft.complete;
  }

  async submit(): Promise<void> {
    if (!this.canSubmit || this.pair === null) return;
    const payload = this.draft.toPayload(this.pair, this.annotatorId);
    this.state = "submitting";
    this.onChange();
    try {
      await this.api.submitAnnotation(payload);
      await this.loadNext();
    } catch (err) {
      if (err instanceof ApiError && err.status === 400) {
        // Validation failure: surface the message, keep the draft.
        this.validationMessage = err.message;
        this.state = "labeling";
      } else {
        this.fail(err, () => this.submit());
      }
      this.onChange();
    }
  }

  async retry(): Promise<void> {
    const action = this.retryAction;
    this.retryAction = null;
    if (action) await action();
  }

  private fail(err: unknown, retry: () => Promise<void>): void {
    this.errorMessage = err instanceof Error ? err.message : String(err);
    this.state = "error";
    this.retryAction = retry;
  }
}
