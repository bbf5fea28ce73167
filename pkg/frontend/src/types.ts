export interface PairInfo {
  pair_id: string;
  clip_a: string;
  clip_b: string;
  fps: number;
  frames: number;
}

export interface Progress {
  labeled: number;
  total: number;
}

/** Relative motion label: + means clip A has more motion, |2| means much more. */
export type Rel = -2 | -1 | 0 | 1 | 2;

export interface AnnotationPayload {
  pair_id: string;
  clip_a: string;
  clip_b: string;
  object_a_moving: 0 | 1;
  object_b_moving: 0 | 1;
  object_rel: Rel;
  camera_rel: Rel;
  annotator_id?: string;
}

/** Thrown for HTTP 4xx responses; carries the server's message. */
export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}
