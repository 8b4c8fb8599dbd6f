/** Page bootstrap: resolve the service URL, start (or resume) a session,
 * wire the composer form and the diagnostics toggle.
 */

import { ApiClient, resolveBaseUrl } from "./api";
import { ChatController, collectElements } from "./ui";

function boot(): void {
  const api = new ApiClient(resolveBaseUrl(window.location.href));
  const elements = collectElements(document);
  const controller = new ChatController(api, elements);

  const existing = window.location.hash.replace(/^#/, "") || undefined;
  void controller.start(existing).then(() => {
    if (controller.sessionId !== null) {
      window.location.hash = controller.sessionId;
    }
  });

  const form = document.getElementById("chat-form") as HTMLFormElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = elements.input.value;
    elements.input.value = "";
    void controller.send(text);
  });

  const toggle = document.getElementById("diagnostics-toggle");
  toggle?.addEventListener("click", () => controller.toggleDiagnostics());
}

document.addEventListener("DOMContentLoaded", boot);
