/** Wire schema of the dialogue service, mirrored field for field. */

export interface IntentOut {
  label: string;
  confidence: number;
  evidence: string;
  direction: string | null;
  step_number: number | null;
}

export interface ActionOut {
  kind: string;
  goal_id: string | null;
  step_index: number | null;
  slot: string | null;
  question_kind: string | null;
}

export interface StateOut {
  phase: string;
  sub_state: string;
  active_goal: string | null;
  step_cursor: number | null;
  skipped_steps: number[];
  proposed_goal: string | null;
  proposed_step: number | null;
}

export interface SlotOut {
  name: string;
  description: string;
  required: boolean;
  value: string | null;
  filled: boolean;
}

export interface BeliefOut {
  workflow_id: string;
  slots: SlotOut[];
  missing: string[];
  last_requested_slot: string | null;
  complete: boolean;
}

export interface StepOut {
  index: number;
  number: number;
  total: number;
  name: string;
  description: string;
  steps: string[];
  skipped: number[];
}

export interface SqlOut {
  text: string;
  explanation: string;
}

export interface TurnResponse {
  session_id: string;
  turn_index: number;
  reply: string;
  intent: IntentOut | null;
  action: ActionOut | null;
  state: StateOut;
  belief: BeliefOut | null;
  step: StepOut | null;
  citations: string[] | null;
  sql: SqlOut | null;
  error: boolean;
}

export interface SessionTurn {
  index: number;
  speaker: string;
  text: string;
  intent: string | null;
  action: string | null;
  timestamp: number;
}

export interface SessionView {
  session_id: string;
  created_at: number;
  updated_at: number;
  state: StateOut;
  belief: BeliefOut | null;
  step: StepOut | null;
  turns: SessionTurn[];
}

export interface SessionCreated {
  session_id: string;
  state: StateOut;
}

/** The slice of a server payload the view layer reads; both the per-turn
 * response and the whole-session view satisfy it. */
export interface StateSnapshot {
  state: StateOut;
  belief: BeliefOut | null;
  step: StepOut | null;
}
