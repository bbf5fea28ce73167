import { describe, expect, it } from "vitest";

import { Draft } from "../src/draft.js";
import { PairInfo } from "../src/types.js";

const pair: PairInfo = {
  pair_id: "pair-00001",
  clip_a: "pair-00001.a",
  clip_b: "pair-00001.b",
  fps: 8,
  frames: 4,
};

describe("Draft gating", () => {
  it("starts incomplete", () => {
    expect(new Draft().complete).toBe(false);
  });

  it("requires both flags and the camera label", () => {
    const d = new Draft();
    d.setMoving("a", 1);
    d.setMoving("b", 0);
    d.setObjectRel(2);
    expect(d.complete).toBe(false); // camera still unset
    d.setCameraRel(0);
    expect(d.complete).toBe(true);
  });

  it("requires the object label when either clip has a moving object", () => {
    const d = new Draft();
    d.setMoving("a", 1);
    d.setMoving("b", 0);
    d.setCameraRel(1);
    expect(d.complete).toBe(false); // object_rel missing but required
    d.setObjectRel(1);
    expect(d.complete).toBe(true);
  });

  it("allows submit with object label unset when both flags are 0", () => {
    const d = new Draft();
    d.setMoving("a", 0);
    d.setMoving("b", 0);
    d.setCameraRel(-2);
    expect(d.complete).toBe(true);
    expect(d.toPayload(pair).object_rel).toBe(0);
  });

  it("locks the object label when both flags are 0", () => {
    const d = new Draft();
    d.setMoving("a", 1);
    d.setMoving("b", 1);
    d.setObjectRel(2);
    d.setMoving("a", 0);
    d.setMoving("b", 0);
    expect(d.objectRelLocked).toBe(true);
    expect(d.objectRel).toBeNull(); // cleared, not silently kept
    d.setObjectRel(1);
    expect(d.objectRel).toBeNull(); // ignored while locked
  });

  it("toggle cycles unset -> moving -> static -> moving", () => {
    const d = new Draft();
    d.toggleMoving("a");
    expect(d.objectAMoving).toBe(1);
    d.toggleMoving("a");
    expect(d.objectAMoving).toBe(0);
    d.toggleMoving("a");
    expect(d.objectAMoving).toBe(1);
  });
});

describe("Draft payload", () => {
  it("maps fields one to one", () => {
    const d = new Draft();
    d.setMoving("a", 1);
    d.setMoving("b", 1);
    d.setObjectRel(-1);
    d.setCameraRel(2);
    const payload = d.toPayload(pair, "tester");
    expect(payload).toEqual({
      pair_id: "pair-00001",
      clip_a: "pair-00001.a",
      clip_b: "pair-00001.b",
      object_a_moving: 1,
      object_b_moving: 1,
      object_rel: -1,
      camera_rel: 2,
      annotator_id: "tester",
    });
  });

  it("refuses to build a payload from an incomplete draft", () => {
    expect(() => new Draft().toPayload(pair)).toThrow(/incomplete/);
  });
});
