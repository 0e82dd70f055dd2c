import { describe, expect, it } from "vitest";

import { meanPool, poolWordGroups } from "../src/pool.js";

describe("mean-word pooling", () => {
  it("single sub-word is the identity", () => {
    const v = Float32Array.from([1, 2, 3]);
    expect(Array.from(meanPool([v], 3))).toEqual([1, 2, 3]);
  });

  it("two sub-words average to the midpoint", () => {
    const pooled = meanPool([Float32Array.from([1, 3]), Float32Array.from([3, 1])], 2);
    expect(Array.from(pooled)).toEqual([2, 2]);
  });

  it("three sub-words pool per dimension", () => {
    const pooled = meanPool(
      [
        Float32Array.from([0, 0, 0]),
        Float32Array.from([3, 6, 9]),
        Float32Array.from([0, 0, 0]),
      ],
      3,
    );
    expect(Array.from(pooled)).toEqual([1, 2, 3]);
  });

  it("empty group pools to the zero vector", () => {
    expect(Array.from(meanPool([], 2))).toEqual([0, 0]);
  });

  it("is invariant to sub-word order", () => {
    const group = [Float32Array.from([1, 5]), Float32Array.from([2, 7]), Float32Array.from([6, 0])];
    const a = meanPool(group, 2);
    const b = meanPool([...group].reverse(), 2);
    expect(Array.from(a)).toEqual(Array.from(b));
  });

  it("rejects mismatched dimensions", () => {
    expect(() => meanPool([new Float32Array(3)], 2)).toThrow(/expected 2/);
  });

  it("pools one vector per word", () => {
    const groups = [[Float32Array.from([2])], [Float32Array.from([4]), Float32Array.from([6])]];
    const rows = poolWordGroups(groups, 1);
    expect(rows.length).toBe(2);
    expect(rows[0][0]).toBe(2);
    expect(rows[1][0]).toBe(5);
  });
});
