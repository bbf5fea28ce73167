/**
 * Lockstep playback of two frame sequences on two canvases: both clips are
 * always drawn at the same frame index, looping at the manifest fps.
 * Playback is pure presentation; the bitmaps are never modified.
 */
export class LockstepPlayer {
  private frameIndex = 0;
  private playing = false;
  private halfSpeed = false;
  private framesA: ImageBitmap[] = [];
  private framesB: ImageBitmap[] = [];
  private fps = 8;
  private accumulator = 0;
  private lastTick = 0;
  private rafHandle: number | null = null;

  constructor(
    private readonly canvasA: HTMLCanvasElement,
    private readonly canvasB: HTMLCanvasElement,
    private readonly onFrame: (index: number) => void = () => {},
  ) {}

  load(framesA: ImageBitmap[], framesB: ImageBitmap[], fps: number): void {
    this.framesA = framesA;
    this.framesB = framesB;
    this.fps = fps > 0 ? fps : 8;
    this.frameIndex = 0;
    this.sizeCanvas(this.canvasA, framesA[0]);
    this.sizeCanvas(this.canvasB, framesB[0]);
    this.draw();
    this.play();
  }

  private sizeCanvas(canvas: HTMLCanvasElement, frame: ImageBitmap | undefined): void {
    if (!frame) return;
    canvas.width = frame.width;
    canvas.height = frame.height;
  }

  get isPlaying(): boolean {
    return this.playing;
  }

  get index(): number {
    return this.frameIndex;
  }

  play(): void {
    if (this.playing || this.framesA.length === 0) return;
    this.playing = true;
    this.lastTick = performance.now();
    this.accumulator = 0;
    this.schedule();
  }

  pause(): void {
    this.playing = false;
    if (this.rafHandle !== null) {
      cancelAnimationFrame(this.rafHandle);
      this.rafHandle = null;
    }
  }

  togglePlay(): void {
    if (this.playing) this.pause();
    else this.play();
  }

  /** Advance one frame while paused. */
  step(): void {
    if (this.playing || this.framesA.length === 0) return;
    this.frameIndex = (this.frameIndex + 1) % this.framesA.length;
    this.draw();
  }

  setHalfSpeed(on: boolean): void {
    this.halfSpeed = on;
  }

  private schedule(): void {
    this.rafHandle = requestAnimationFrame(() => this.tick());
  }

  private tick(): void {
    if (!this.playing) return;
    const now = performance.now();
    this.accumulator += now - this.lastTick;
    this.lastTick = now;
    const frameMs = 1000 / (this.halfSpeed ? this.fps / 2 : this.fps);
    while (this.accumulator >= frameMs) {
      this.accumulator -= frameMs;
      this.frameIndex = (this.frameIndex + 1) % this.framesA.length;
    }
    this.draw();
    this.schedule();
  }

  private draw(): void {
    const a = this.framesA[this.frameIndex];
    const b = this.framesB[this.frameIndex];
    if (a) this.canvasA.getContext("2d")?.drawImage(a, 0, 0);
    if (b) this.canvasB.getContext("2d")?.drawImage(b, 0, 0);
    this.onFrame(this.frameIndex);
  }
}
