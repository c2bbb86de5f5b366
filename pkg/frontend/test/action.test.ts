import { describe, expect, it } from "vitest";
import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import {
  ActionFormState,
  buildAction,
  emptyForm,
  normalizeClick,
  validateAction,
} from "../src/action.js";

const HERE = dirname(fileURLToPath(import.meta.url));

/** Deterministic LCG so the fuzz corpus is stable across runs. */
function lcg(seed: number): () => number {
  let s = seed >>> 0;
  return () => {
    s = (s * 1664525 + 1013904223) >>> 0;
    return s / 2 ** 32;
  };
}

function fuzzNumberField(r: () => number): string {
  const roll = r();
  if (roll < 0.25) return "";
  if (roll < 0.35) return "not-a-number";
  if (roll < 0.45) return `  ${(r() * 40 - 20).toFixed(2)}  `; // out of range + spaces
  if (roll < 0.55) return String(r() * 2000 - 1000); // far out of range
  return (r() * 20 - 10).toFixed(3);
}

function fuzzText(r: () => number, alphabet: string): string {
  const n = Math.floor(r() * 8);
  let out = "";
  for (let i = 0; i < n; i++) out += alphabet[Math.floor(r() * alphabet.length)];
  return r() < 0.2 ? ` ${out} ` : out;
}

function fuzzForm(r: () => number): ActionFormState {
  return {
    moveForward: fuzzNumberField(r),
    rotateRight: fuzzNumberField(r),
    rotateDown: fuzzNumberField(r),
    jump: r() < 0.3,
    lookAt:
      r() < 0.5
        ? normalizeClick(r() * 700 - 50, r() * 700 - 50, { left: 0, top: 0, width: 512, height: 512 })
        : null,
    grab: r() < 0.4,
    useItemId: fuzzText(r, "keynot_123"),
    passwordInput: fuzzText(r, "0123456789"),
    readItemId: fuzzText(r, "keynot_123"),
    rationale: fuzzText(r, "abc def!? "),
  };
}

describe("buildAction", () => {
  it("emits nothing for an empty form", () => {
    expect(buildAction(emptyForm())).toEqual({});
  });

  it("parses and clamps numeric fields", () => {
    const form = { ...emptyForm(), moveForward: "99", rotateRight: "-500", rotateDown: "45.5" };
    const msg = buildAction(form);
    expect(msg.move_forward).toBe(10);
    expect(msg.rotate_right).toBe(-180);
    expect(msg.rotate_down).toBe(45.5);
  });

  it("drops unparsable numbers", () => {
    const msg = buildAction({ ...emptyForm(), moveForward: "quickly" });
    expect(msg.move_forward).toBeUndefined();
  });

  it("builds the grab-with-key message", () => {
    const msg = buildAction({ ...emptyForm(), grab: true, useItemId: "key_1" });
    expect(msg).toEqual({ grab: true, interactions: { use_item_id: "key_1" } });
  });

  it("omits empty interaction fields entirely", () => {
    const msg = buildAction({ ...emptyForm(), useItemId: "  ", passwordInput: "" });
    expect(msg.interactions).toBeUndefined();
  });

  it("keeps password input as typed (after trimming)", () => {
    const msg = buildAction({ ...emptyForm(), grab: true, passwordInput: " 9926 " });
    expect(msg.interactions).toEqual({ input: "9926" });
  });
});

describe("normalizeClick", () => {
  const rect = { left: 10, top: 20, width: 512, height: 512 };

  it("frame center maps to (0.5, 0.5)", () => {
    const uv = normalizeClick(10 + 256, 20 + 256, rect);
    expect(uv.u).toBeCloseTo(0.5, 10);
    expect(uv.v).toBeCloseTo(0.5, 10);
  });

  it("top-left pixel maps to about (0, 0)", () => {
    const uv = normalizeClick(10, 20, rect);
    expect(uv.u).toBe(0);
    expect(uv.v).toBe(0);
  });

  it("clicks outside the frame clamp into [0, 1]", () => {
    const uv = normalizeClick(9999, -50, rect);
    expect(uv.u).toBe(1);
    expect(uv.v).toBe(0);
  });

  it("uses the displayed bounding box for normalization", () => {
    const scaled = { left: 0, top: 0, width: 256, height: 128 };
    const uv = normalizeClick(64, 96, scaled);
    expect(uv.u).toBeCloseTo(0.25, 10);
    expect(uv.v).toBeCloseTo(0.75, 10);
  });
});

describe("schema conformance fuzz", () => {
  it("200 fuzzed form states all emit schema-valid messages", () => {
    const r = lcg(20240321);
    const messages: string[] = [];
    for (let i = 0; i < 200; i++) {
      const msg = buildAction(fuzzForm(r));
      const problems = validateAction(msg);
      expect(problems, JSON.stringify(msg)).toEqual([]);
      messages.push(JSON.stringify(msg));
    }
    const outDir = join(HERE, "..", "test-output");
    mkdirSync(outDir, { recursive: true });
    writeFileSync(join(outDir, "fuzzed_messages.jsonl"), messages.join("\n") + "\n");
  });

  it("validateAction rejects what the server rejects", () => {
    expect(validateAction({ teleport: true })).toContain("unknown key teleport");
    expect(validateAction({ move_forward: 99 })[0]).toMatch(/out of/);
    expect(validateAction({ look_at: [2, 0.5] })[0]).toMatch(/\[0, 1\]/);
    expect(validateAction({ grab: "yes" })[0]).toMatch(/boolean/);
    expect(validateAction({ interactions: { cast: "spell" } })[0]).toMatch(/interactions key/);
  });
});
