import { AnnotationPayload, ApiError, PairInfo, Progress } from "./types.js";

/**
 * Service client, generic over the frame payload so the session logic can be
 * exercised without a DOM (tests substitute plain strings for ImageBitmaps).
 */
export interface Api<TFrame> {
  nextPair(): Promise<PairInfo | null>; // null when everything is labeled (204)
  fetchFrame(clipId: string, index: number): Promise<TFrame>;
  submitAnnotation(payload: AnnotationPayload): Promise<void>;
  progress(): Promise<Progress>;
}

export class HttpApi implements Api<ImageBitmap> {
  constructor(private readonly base: string = "") {}

  async nextPair(): Promise<PairInfo | null> {
    const resp = await fetch(`${this.base}/api/pairs/next`);
    if (resp.status === 204) return null;
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return (await resp.json()) as PairInfo;
  }

  frameUrl(clipId: string, index: number): string {
    return `${this.base}/api/clip/${encodeURIComponent(clipId)}/frame/${index}`;
  }

  async fetchFrame(clipId: string, index: number): Promise<ImageBitmap> {
    const resp = await fetch(this.frameUrl(clipId, index));
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return createImageBitmap(await resp.blob());
  }

  async submitAnnotation(payload: AnnotationPayload): Promise<void> {
    const resp = await fetch(`${this.base}/api/annotations`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!resp.ok) {
      let message = `submit failed with ${resp.status}`;
      try {
        const body = await resp.json();
        if (body.error) message = body.error;
      } catch {
        // keep the generic message
      }
      throw new ApiError(resp.status, message);
    }
  }

  async progress(): Promise<Progress> {
    const resp = await fetch(`${this.base}/api/progress`);
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return (await resp.json()) as Progress;
  }
}
