/** Wire types for the session service (see docs/protocol.md). */

export interface SessionInfo {
  session_id: string;
  token: string;
  scene_id: string;
  step_limit: number;
  system_prompt: string;
}

export interface FrameHeader {
  width: number;
  height: number;
  episode_id: string;
  step_index: number;
}

export interface Observation {
  session_id: string;
  scene_id: string;
  status: "running" | "escaped" | "failed";
  steps_used: number;
  step_limit: number;
  /** debug-only server pose; hidden unless the debug toggle is on */
  pose?: { x: number; z: number; yaw: number; pitch: number };
  feedback: string;
  bag: string;
  step_prompt: string;
  frame_b64: string;
  frame_header: FrameHeader;
}

export interface StreamFramePayload extends FrameHeader {
  frame_b64: string;
  status: string;
  feedback: string;
  bag: string;
}

export interface ActionInteractions {
  use_item_id?: string;
  input?: string;
}

/** One protocol action message; absent fields mean "not performed". */
export interface ActionMessage {
  move_forward?: number;
  rotate_right?: number;
  rotate_down?: number;
  jump?: boolean;
  look_at?: [number, number];
  grab?: boolean;
  interactions?: ActionInteractions;
  read?: string;
  rationale?: string;
}
