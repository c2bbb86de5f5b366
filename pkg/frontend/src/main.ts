/** DOM wiring: session setup, frame stream, action form, panels. */

import { SessionClient } from "./api.js";
import { ActionFormState, buildAction, emptyForm, normalizeClick, validateAction } from "./action.js";
import { backoffDelay, bagRows, bannerFor, stepCounter } from "./view.js";
import type { Observation, StreamFramePayload } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const state = {
  client: null as SessionClient | null,
  form: emptyForm(),
  inFlight: false,
  streamAttempt: 0,
  stream: null as EventSource | null,
  terminal: false,
};

function setFrame(b64: string): void {
  $<HTMLImageElement>("frame").src = `data:image/png;base64,${b64}`;
}

function renderObservation(obs: Observation): void {
  $("feedback").textContent = obs.feedback;
  $("steps").textContent = stepCounter(obs.steps_used, obs.step_limit);
  renderBag(obs.bag);
  setFrame(obs.frame_b64);
  const banner = bannerFor(obs.status, obs.steps_used);
  const bannerEl = $("banner");
  bannerEl.textContent = banner ?? "";
  bannerEl.className = banner ? `banner ${obs.status}` : "banner hidden";
  state.terminal = banner !== null;
  updateSubmitState();
  if (state.terminal && state.client) {
    $<HTMLAnchorElement>("log-link").href = state.client.logUrl();
    $("log-row").classList.remove("hidden");
  }
}

function renderBag(bag: string): void {
  const rows = bagRows(bag);
  const list = $("bag");
  list.innerHTML = "";
  const useSel = $<HTMLSelectElement>("use-item");
  const readSel = $<HTMLSelectElement>("read-item");
  for (const sel of [useSel, readSel]) {
    sel.innerHTML = '<option value="">(none)</option>';
  }
  if (rows.length === 0) {
    const li = document.createElement("li");
    li.textContent = "(empty)";
    li.className = "muted";
    list.appendChild(li);
    return;
  }
  for (const row of rows) {
    const li = document.createElement("li");
    li.textContent = row.label;
    list.appendChild(li);
    for (const sel of [useSel, readSel]) {
      const opt = document.createElement("option");
      opt.value = row.itemId;
      opt.textContent = row.itemId;
      sel.appendChild(opt);
    }
  }
}

function updateSubmitState(): void {
  $<HTMLButtonElement>("submit").disabled = state.inFlight || state.terminal || !state.client;
}

function openStream(): void {
  if (!state.client) return;
  state.stream?.close();
  const es = new EventSource(state.client.streamUrl());
  state.stream = es;
  es.addEventListener("frame", (ev) => {
    state.streamAttempt = 0;
    const payload = JSON.parse((ev as MessageEvent).data) as StreamFramePayload;
    setFrame(payload.frame_b64);
    $("feedback").textContent = payload.feedback;
    renderBag(payload.bag);
  });
  es.addEventListener("end", () => es.close());
  es.onerror = () => {
    es.close();
    if (state.terminal) return;
    state.streamAttempt += 1;
    setTimeout(openStream, backoffDelay(state.streamAttempt));
  };
}

function readFormFromControls(): ActionFormState {
  return {
    moveForward: $<HTMLInputElement>("move-forward").value,
    rotateRight: $<HTMLInputElement>("rotate-right").value,
    rotateDown: $<HTMLInputElement>("rotate-down").value,
    jump: $<HTMLInputElement>("jump").checked,
    lookAt: state.form.lookAt,
    grab: $<HTMLInputElement>("grab").checked,
    useItemId: $<HTMLSelectElement>("use-item").value,
    passwordInput: $<HTMLInputElement>("password").value,
    readItemId: $<HTMLSelectElement>("read-item").value,
    rationale: $<HTMLTextAreaElement>("rationale").value,
  };
}

function resetControls(): void {
  for (const id of ["move-forward", "rotate-right", "rotate-down", "password"]) {
    $<HTMLInputElement>(id).value = "";
  }
  $<HTMLInputElement>("jump").checked = false;
  $<HTMLInputElement>("grab").checked = false;
  $<HTMLSelectElement>("use-item").value = "";
  $<HTMLSelectElement>("read-item").value = "";
  $<HTMLTextAreaElement>("rationale").value = "";
  state.form = emptyForm();
  $("look-at-display").textContent = "(click the frame to aim)";
}

async function submit(): Promise<void> {
  if (!state.client || state.inFlight || state.terminal) return;
  state.form = readFormFromControls();
  const message = buildAction(state.form);
  const problems = validateAction(message);
  if (problems.length > 0) {
    $("error").textContent = problems.join("; ");
    return;
  }
  state.inFlight = true;
  updateSubmitState();
  $("error").textContent = "";
  try {
    const obs = await state.client.act(message);
    renderObservation(obs);
    resetControls();
  } catch (err) {
    $("error").textContent = String(err);
  } finally {
    state.inFlight = false;
    updateSubmitState();
  }
}

async function startSession(): Promise<void> {
  const base = window.location.origin;
  const client = new SessionClient(base);
  const spec = {
    difficulty: $<HTMLSelectElement>("difficulty").value,
    style: $<HTMLSelectElement>("style").value,
    seed: Number($<HTMLInputElement>("seed").value) || 0,
  };
  const info = await client.createFromGenerator(spec);
  state.client = client;
  state.terminal = false;
  window.location.hash = `${info.session_id}.${info.token}`;
  $("scene-id").textContent = info.scene_id;
  $("setup").classList.add("hidden");
  $("game").classList.remove("hidden");
  renderObservation(await client.observation());
  openStream();
}

async function resumeFromHash(): Promise<boolean> {
  const hash = window.location.hash.replace(/^#/, "");
  if (!hash.includes(".")) return false;
  const [sid, token] = hash.split(".", 2);
  const client = new SessionClient(window.location.origin, sid!, token!);
  try {
    const obs = await client.observation();
    state.client = client;
    $("scene-id").textContent = obs.scene_id;
    $("setup").classList.add("hidden");
    $("game").classList.remove("hidden");
    renderObservation(obs);
    openStream();
    return true;
  } catch {
    return false;
  }
}

function wire(): void {
  $("start").addEventListener("click", () => void startSession());
  $("submit").addEventListener("click", () => void submit());
  $("clear-look").addEventListener("click", () => {
    state.form.lookAt = null;
    $("look-at-display").textContent = "(click the frame to aim)";
  });
  const frame = $<HTMLImageElement>("frame");
  frame.addEventListener("click", (ev) => {
    const rect = frame.getBoundingClientRect();
    const uv = normalizeClick(ev.clientX, ev.clientY, rect);
    state.form.lookAt = uv;
    $("look-at-display").textContent = `look_at (${uv.u.toFixed(3)}, ${uv.v.toFixed(3)})`;
  });
  $<HTMLInputElement>("debug-toggle").addEventListener("change", (ev) => {
    const on = (ev.target as HTMLInputElement).checked;
    $("debug-panel").classList.toggle("hidden", !on);
    if (on && state.client) {
      void state.client.observation().then((obs) => {
        const { frame_b64: _omit, ...rest } = obs as unknown as Record<string, unknown>;
        $("debug-panel").textContent = JSON.stringify(rest, null, 2);
      });
    }
  });
  void resumeFromHash();
}

document.addEventListener("DOMContentLoaded", wire);
