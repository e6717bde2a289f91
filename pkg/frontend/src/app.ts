// Browser entry point: mounts the comparison screen against a running
// service. Open index.html with ?session=<session-id> (and optionally
// &api=<service base url>) after creating the session via the API.

import { ApiClient } from "./api.js";
import { ComparisonScreen } from "./comparison.js";
import { renderToHtml } from "./vdom.js";
import type { PreferenceChoice } from "./types.js";

function mount(root: HTMLElement, screen: ComparisonScreen): void {
  const draw = () => {
    root.innerHTML = renderToHtml(screen.render());
    for (const button of Array.from(root.querySelectorAll("button[data-label]"))) {
      button.addEventListener("click", () => {
        const label = button.getAttribute("data-label") as PreferenceChoice;
        void screen.choose(label);
      });
    }
  };
  screen.onUpdate = draw;
  draw();
}

export async function main(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8000";
  const sessionId = params.get("session");
  if (!sessionId) {
    root.textContent = "Pass ?session=<session-id> (and optionally &api=<service base url>).";
    return;
  }
  const screen = new ComparisonScreen(new ApiClient(base), sessionId);
  mount(root, screen);
  await screen.start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void main();
}
