import { AnnotationPayload, PairInfo, Rel } from "./types.js";

export type Tri = 0 | 1 | null;

/**
 * In-progress annotation for one pair.
 *
 * Rules: submit requires both moving-object flags and the camera label; the
 * object label is additionally required when either clip has a moving object,
 * and is cleared and locked when both flags are 0 (it is then recorded as 0,
 * the documented value for "no object motion to compare").
 */
export class Draft {
  objectAMoving: Tri = null;
  objectBMoving: Tri = null;
  objectRel: Rel | null = null;
  cameraRel: Rel | null = null;

  /** A/D keys: unset -> 1 (moving), then toggle 1 <-> 0. */
  toggleMoving(side: "a" | "b"): void {
    const current = side === "a" ? this.objectAMoving : this.objectBMoving;
    const next: Tri = current === null ? 1 : current === 1 ? 0 : 1;
    if (side === "a") this.objectAMoving = next;
    else this.objectBMoving = next;
    if (this.objectRelLocked) this.objectRel = null;
  }

  setMoving(side: "a" | "b", value: 0 | 1): void {
    if (side === "a") this.objectAMoving = value;
    else this.objectBMoving = value;
    if (this.objectRelLocked) this.objectRel = null;
  }

  /** Object comparison is disabled when neither clip has a moving object. */
  get objectRelLocked(): boolean {
    return this.objectAMoving === 0 && this.objectBMoving === 0;
  }

  get objectRelRequired(): boolean {
    return this.objectAMoving === 1 || this.objectBMoving === 1;
  }

  setObjectRel(value: Rel): void {
    if (this.objectRelLocked) return; // locked: never fabricate a comparison
    this.objectRel = value;
  }

  setCameraRel(value: Rel): void {
    this.cameraRel = value;
  }

  get complete(): boolean {
    if (this.objectAMoving === null || this.objectBMoving === null) return false;
    if (this.cameraRel === null) return false;
    if (this.objectRelRequired && this.objectRel === null) return false;
    return true;
  }

  toPayload(pair: PairInfo, annotatorId?: string): AnnotationPayload {
    if (!this.complete) {
      throw new Error("draft is incomplete");
    }
    return {
      pair_id: pair.pair_id,
      clip_a: pair.clip_a,
      clip_b: pair.clip_b,
      object_a_moving: this.objectAMoving as 0 | 1,
      object_b_moving: this.objectBMoving as 0 | 1,
      object_rel: this.objectRel ?? 0,
      camera_rel: this.cameraRel as Rel,
      ...(annotatorId ? { annotator_id: annotatorId } : {}),
    };
  }
}
