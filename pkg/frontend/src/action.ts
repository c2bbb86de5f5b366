/** Form state -> schema-valid action message.
 *
 * The builder is total: whatever the form holds (garbage text, out-of-range
 * sliders, stray whitespace), the emitted message conforms to the action
 * schema the server enforces. Out-of-range numbers are clamped, unparsable
 * ones dropped, empty strings omitted.
 */

import type { ActionMessage } from "./types.js";

export const MOVE_RANGE: [number, number] = [-10, 10];
export const ROTATE_RIGHT_RANGE: [number, number] = [-180, 180];
export const ROTATE_DOWN_RANGE: [number, number] = [-90, 90];

export interface ActionFormState {
  moveForward: string;
  rotateRight: string;
  rotateDown: string;
  jump: boolean;
  lookAt: { u: number; v: number } | null;
  grab: boolean;
  useItemId: string;
  passwordInput: string;
  readItemId: string;
  rationale: string;
}

export function emptyForm(): ActionFormState {
  return {
    moveForward: "",
    rotateRight: "",
    rotateDown: "",
    jump: false,
    lookAt: null,
    grab: false,
    useItemId: "",
    passwordInput: "",
    readItemId: "",
    rationale: "",
  };
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}

function parseBounded(text: string, range: [number, number]): number | undefined {
  const trimmed = text.trim();
  if (trimmed === "") return undefined;
  const v = Number(trimmed);
  if (!Number.isFinite(v)) return undefined;
  return clamp(v, range[0], range[1]);
}

/** Normalized image coordinates of a click, (0,0) top-left, clamped to [0,1]. */
export function normalizeClick(
  clientX: number,
  clientY: number,
  rect: { left: number; top: number; width: number; height: number },
): { u: number; v: number } {
  const u = rect.width > 0 ? (clientX - rect.left) / rect.width : 0.5;
  const v = rect.height > 0 ? (clientY - rect.top) / rect.height : 0.5;
  return { u: clamp(u, 0, 1), v: clamp(v, 0, 1) };
}

export function buildAction(form: ActionFormState): ActionMessage {
  const msg: ActionMessage = {};
  const move = parseBounded(form.moveForward, MOVE_RANGE);
  if (move !== undefined) msg.move_forward = move;
  const rotR = parseBounded(form.rotateRight, ROTATE_RIGHT_RANGE);
  if (rotR !== undefined) msg.rotate_right = rotR;
  const rotD = parseBounded(form.rotateDown, ROTATE_DOWN_RANGE);
  if (rotD !== undefined) msg.rotate_down = rotD;
  if (form.jump) msg.jump = true;
  if (form.lookAt !== null) {
    msg.look_at = [clamp(form.lookAt.u, 0, 1), clamp(form.lookAt.v, 0, 1)];
  }
  if (form.grab) msg.grab = true;
  const useItem = form.useItemId.trim();
  const input = form.passwordInput.trim();
  if (useItem !== "" || input !== "") {
    msg.interactions = {};
    if (useItem !== "") msg.interactions.use_item_id = useItem;
    if (input !== "") msg.interactions.input = input;
  }
  const read = form.readItemId.trim();
  if (read !== "") msg.read = read;
  const rationale = form.rationale.trim();
  if (rationale !== "") msg.rationale = rationale;
  return msg;
}

/** Local mirror of the server-side schema; returns violations (empty = valid). */
export function validateAction(msg: unknown): string[] {
  const errors: string[] = [];
  if (typeof msg !== "object" || msg === null || Array.isArray(msg)) {
    return ["message must be an object"];
  }
  const allowed = new Set([
    "move_forward",
    "rotate_right",
    "rotate_down",
    "jump",
    "look_at",
    "grab",
    "interactions",
    "read",
    "rationale",
  ]);
  const m = msg as Record<string, unknown>;
  for (const key of Object.keys(m)) {
    if (!allowed.has(key)) errors.push(`unknown key ${key}`);
  }
  const num = (name: string, range: [number, number]) => {
    const v = m[name];
    if (v === undefined || v === null) return;
    if (typeof v !== "number" || !Number.isFinite(v)) errors.push(`${name} must be a number`);
    else if (v < range[0] || v > range[1]) errors.push(`${name} out of ${range}`);
  };
  num("move_forward", MOVE_RANGE);
  num("rotate_right", ROTATE_RIGHT_RANGE);
  num("rotate_down", ROTATE_DOWN_RANGE);
  for (const name of ["jump", "grab"]) {
    const v = m[name];
    if (v !== undefined && v !== null && typeof v !== "boolean") {
      errors.push(`${name} must be a boolean`);
    }
  }
  const la = m["look_at"];
  if (la !== undefined && la !== null) {
    if (!Array.isArray(la) || la.length !== 2) errors.push("look_at must be [x, y]");
    else {
      for (const c of la) {
        if (typeof c !== "number" || !Number.isFinite(c) || c < 0 || c > 1) {
          errors.push("look_at coordinates must be within [0, 1]");
        }
      }
    }
  }
  const inter = m["interactions"];
  if (inter !== undefined && inter !== null) {
    if (typeof inter !== "object" || Array.isArray(inter)) errors.push("interactions must be an object");
    else {
      for (const key of Object.keys(inter as object)) {
        if (key !== "use_item_id" && key !== "input") errors.push(`unknown interactions key ${key}`);
        const v = (inter as Record<string, unknown>)[key];
        if (v !== undefined && v !== null && typeof v !== "string") {
          errors.push(`interactions.${key} must be a string`);
        }
      }
    }
  }
  for (const name of ["read", "rationale"]) {
    const v = m[name];
    if (v !== undefined && v !== null && typeof v !== "string") errors.push(`${name} must be a string`);
  }
  return errors;
}
