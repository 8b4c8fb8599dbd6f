/** DOM rendering and the chat controller. The controller owns the only
 * mutable client state (message log, busy flag, last snapshot); everything
 * painted comes from the latest server payload via the view models.
 */

import { ApiClient, ApiError } from "./api";
import type { StateSnapshot, TurnResponse } from "./types";
import {
  ChecklistModel,
  PageModel,
  SidebarModel,
  diagnosticsLine,
  pageModel,
} from "./view";

export interface Elements {
  messages: HTMLElement;
  sidebar: HTMLElement;
  checklist: HTMLElement;
  quickReplies: HTMLElement;
  errorBanner: HTMLElement;
  diagnostics: HTMLElement;
  input: HTMLInputElement;
  sendButton: HTMLButtonElement;
}

export function collectElements(root: Document): Elements {
  const byId = (id: string) => {
    const el = root.getElementById(id);
    if (el === null) throw new Error(`missing #${id}`);
    return el;
  };
  return {
    messages: byId("messages"),
    sidebar: byId("sidebar"),
    checklist: byId("checklist"),
    quickReplies: byId("quick-replies"),
    errorBanner: byId("error-banner"),
    diagnostics: byId("diagnostics"),
    input: byId("chat-input") as HTMLInputElement,
    sendButton: byId("send-button") as HTMLButtonElement,
  };
}

export interface Message {
  speaker: string;
  text: string;
}

export function renderMessages(el: HTMLElement, messages: Message[]): void {
  el.innerHTML = "";
  for (const message of messages) {
    const row = el.ownerDocument.createElement("div");
    row.className = `message ${message.speaker}`;
    row.textContent = message.text;
    el.appendChild(row);
  }
  el.scrollTop = el.scrollHeight;
}

export function renderSidebar(el: HTMLElement, model: SidebarModel | null): void {
  el.innerHTML = "";
  el.hidden = model === null;
  if (model === null) return;
  const doc = el.ownerDocument;
  const heading = doc.createElement("h2");
  heading.textContent = "Steps";
  el.appendChild(heading);
  const list = doc.createElement("ol");
  for (const item of model.items) {
    const li = doc.createElement("li");
    li.dataset.number = String(item.number);
    if (item.current) li.classList.add("current");
    if (item.done) li.classList.add("done");
    if (item.skipped) {
      li.classList.add("skipped");
      const struck = doc.createElement("s");
      struck.textContent = item.name;
      li.appendChild(struck);
    } else {
      li.textContent = item.name;
    }
    list.appendChild(li);
  }
  el.appendChild(list);
  if (model.completed) {
    const badge = doc.createElement("div");
    badge.className = "badge";
    badge.textContent = "Completed";
    el.appendChild(badge);
  }
}

export function renderChecklist(el: HTMLElement, model: ChecklistModel | null): void {
  el.innerHTML = "";
  el.hidden = model === null;
  if (model === null) return;
  const doc = el.ownerDocument;
  const heading = doc.createElement("h2");
  heading.textContent = `Details (${model.filledCount}/${model.items.length})`;
  el.appendChild(heading);
  const list = doc.createElement("ul");
  for (const item of model.items) {
    const li = doc.createElement("li");
    if (item.requested) li.classList.add("requested");
    if (item.filled) li.classList.add("filled");
    const box = doc.createElement("input");
    box.type = "checkbox";
    box.disabled = true;
    box.checked = item.filled;
    li.appendChild(box);
    const label = doc.createElement("span");
    label.className = "slot-name";
    label.textContent = item.name;
    li.appendChild(label);
    if (item.filled && item.value !== null) {
      const value = doc.createElement("span");
      value.className = "slot-value";
      value.textContent = item.value;
      li.appendChild(value);
    }
    list.appendChild(li);
  }
  el.appendChild(list);
  if (model.complete) {
    const badge = doc.createElement("div");
    badge.className = "badge";
    badge.textContent = "Completed";
    el.appendChild(badge);
  }
}

export function renderQuickReplies(
  el: HTMLElement,
  replies: string[],
  send: (text: string) => void,
): void {
  el.innerHTML = "";
  el.hidden = replies.length === 0;
  for (const reply of replies) {
    const button = el.ownerDocument.createElement("button");
    button.type = "button";
    button.className = "quick-reply";
    button.textContent = reply;
    // the button sends the literal string, never a paraphrase
    button.addEventListener("click", () => send(reply));
    el.appendChild(button);
  }
}

export function renderError(el: HTMLElement, message: string | null): void {
  el.hidden = message === null;
  el.textContent = message ?? "";
}

export class ChatController {
  busy = false;
  sessionId: string | null = null;
  showDiagnostics = false;
  private messages: Message[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly el: Elements,
  ) {}

  /** Create a session, or rebuild the view of an existing one (page refresh). */
  async start(existingId?: string): Promise<void> {
    try {
      if (existingId) {
        const view = await this.api.getSession(existingId);
        this.sessionId = view.session_id;
        this.messages = view.turns.map((t) => ({ speaker: t.speaker, text: t.text }));
        this.paint(view);
      } else {
        const created = await this.api.createSession();
        this.sessionId = created.session_id;
        this.paint({ state: created.state, belief: null, step: null });
      }
      renderError(this.el.errorBanner, null);
      this.setInputEnabled(true);
    } catch (err) {
      renderError(this.el.errorBanner, describe(err));
      this.setInputEnabled(false);
    }
  }

  /** One in-flight message at a time; extra sends while busy are dropped. */
  async send(text: string): Promise<void> {
    const trimmed = text.trim();
    if (trimmed === "" || this.busy || this.sessionId === null) return;
    this.busy = true;
    this.setInputEnabled(false);
    this.messages.push({ speaker: "user", text: trimmed });
    renderMessages(this.el.messages, this.messages);
    try {
      const turn = await this.api.sendMessage(this.sessionId, trimmed);
      this.messages.push({ speaker: "assistant", text: turn.reply });
      this.paint(turn, turn);
      renderError(this.el.errorBanner, null);
      this.busy = false;
      this.setInputEnabled(true);
    } catch (err) {
      renderError(this.el.errorBanner, describe(err));
      this.busy = false;
      // an unreachable server keeps the input off; an HTTP error lets
      // the user try again
      const reachable = err instanceof ApiError && err.status !== null;
      this.setInputEnabled(reachable);
    }
  }

  toggleDiagnostics(): void {
    this.showDiagnostics = !this.showDiagnostics;
    this.el.diagnostics.hidden = !this.showDiagnostics;
  }

  private paint(snapshot: StateSnapshot, turn?: TurnResponse): void {
    const model: PageModel = pageModel(snapshot, turn);
    renderMessages(this.el.messages, this.messages);
    renderSidebar(this.el.sidebar, model.sidebar);
    renderChecklist(this.el.checklist, model.checklist);
    renderQuickReplies(this.el.quickReplies, model.quickReplies, (reply) => {
      void this.send(reply);
    });
    if (turn !== undefined) {
      this.el.diagnostics.textContent = diagnosticsLine(turn);
    }
    this.el.diagnostics.hidden = !this.showDiagnostics;
  }

  private setInputEnabled(enabled: boolean): void {
    this.el.input.disabled = !enabled;
    this.el.sendButton.disabled = !enabled;
    if (enabled) this.el.input.focus();
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return `unexpected error: ${String(err)}`;
}
