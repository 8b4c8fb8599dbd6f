/** Pure view-model builders: server payload slices in, render models out.
 * No DOM access here, so every rule is unit-testable as plain data.
 */

import type { StateSnapshot, TurnResponse } from "./types";

export interface SidebarItem {
  number: number;
  name: string;
  current: boolean;
  skipped: boolean;
  done: boolean;
}

export interface SidebarModel {
  items: SidebarItem[];
  completed: boolean;
}

export interface ChecklistItem {
  name: string;
  value: string | null;
  filled: boolean;
  requested: boolean;
}

export interface ChecklistModel {
  items: ChecklistItem[];
  filledCount: number;
  complete: boolean;
}

export interface PageModel {
  sidebar: SidebarModel | null;
  checklist: ChecklistModel | null;
  quickReplies: string[];
  completed: boolean;
  citations: string[];
  sql: { text: string; explanation: string } | null;
}

const GUIDANCE_ACTIVE = new Set(["presenting_overview", "executing_step"]);

/** Step list for a guidance goal: which item is current, which were skipped,
 * which are behind the cursor. */
export function sidebarModel(snapshot: StateSnapshot): SidebarModel | null {
  const step = snapshot.step;
  if (step === null) return null;
  const completed = snapshot.state.sub_state === "completed";
  const active = GUIDANCE_ACTIVE.has(snapshot.state.sub_state);
  if (!active && !completed) return null;
  const skipped = new Set(step.skipped);
  const items = step.steps.map((name, index) => ({
    number: index + 1,
    name,
    current: !completed && index === step.index,
    skipped: skipped.has(index),
    done: !skipped.has(index) && (completed || index < step.index),
  }));
  return { items, completed };
}

/** Slot checklist for a slot-filling goal, straight off the belief view. */
export function checklistModel(snapshot: StateSnapshot): ChecklistModel | null {
  const belief = snapshot.belief;
  if (belief === null) return null;
  const items = belief.slots.map((slot) => ({
    name: slot.name,
    value: slot.filled ? slot.value : null,
    filled: slot.filled,
    requested: slot.name === belief.last_requested_slot && !slot.filled,
  }));
  return {
    items,
    filledCount: items.filter((item) => item.filled).length,
    complete: belief.complete,
  };
}

/** The literal strings the quick-reply buttons send during a proposal. */
export function quickReplies(snapshot: StateSnapshot): string[] {
  return snapshot.state.sub_state === "proposing_transition" ? ["yes", "no"] : [];
}

export function pageModel(snapshot: StateSnapshot, turn?: TurnResponse): PageModel {
  return {
    sidebar: sidebarModel(snapshot),
    checklist: checklistModel(snapshot),
    quickReplies: quickReplies(snapshot),
    completed: snapshot.state.sub_state === "completed",
    citations: turn?.citations ?? [],
    sql: turn?.sql ?? null,
  };
}

/** One-line diagnostics summary for the drawer (default hidden). */
export function diagnosticsLine(turn: TurnResponse): string {
  const intent = turn.intent ? turn.intent.label : "-";
  const action = turn.action ? turn.action.kind : "-";
  const state = `${turn.state.phase}/${turn.state.sub_state}`;
  return `intent=${intent} action=${action} state=${state}`;
}
