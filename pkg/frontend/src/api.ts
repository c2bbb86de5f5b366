/** Thin client for the session endpoints; the service owns all game state. */

import type { ActionMessage, Observation, SessionInfo } from "./types.js";

export interface GenerateSpec {
  difficulty: string;
  style: string;
  seed: number;
}

export class SessionClient {
  constructor(
    readonly baseUrl: string,
    public sessionId: string = "",
    public token: string = "",
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createFromGenerator(spec: GenerateSpec): Promise<SessionInfo> {
    const resp = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ generate: spec, role: "human" }),
    });
    if (!resp.ok) throw new Error(`create failed: ${resp.status} ${await resp.text()}`);
    const info = (await resp.json()) as SessionInfo;
    this.sessionId = info.session_id;
    this.token = info.token;
    return info;
  }

  async observation(): Promise<Observation> {
    const resp = await fetch(this.url(`/sessions/${this.sessionId}/observation`));
    if (!resp.ok) throw new Error(`observation failed: ${resp.status}`);
    return (await resp.json()) as Observation;
  }

  /** Posts one action; the server reply is the fresh observation. */
  async act(message: ActionMessage): Promise<Observation> {
    const resp = await fetch(this.url(`/sessions/${this.sessionId}/actions`), {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        "X-Session-Token": this.token,
      },
      body: JSON.stringify({ raw: JSON.stringify(message) }),
    });
    if (!resp.ok) throw new Error(`action rejected: ${resp.status} ${await resp.text()}`);
    return (await resp.json()) as Observation;
  }

  logUrl(): string {
    return this.url(`/sessions/${this.sessionId}/log`);
  }

  streamUrl(): string {
    return this.url(`/sessions/${this.sessionId}/stream`);
  }
}
