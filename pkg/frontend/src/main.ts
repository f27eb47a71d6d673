// Studio bootstrap: two independent panels over one corpus API.

import { ApiClient } from "./api.js";
import { PanelView } from "./panel.js";
import { decodePanels, encodePanels, type PanelState } from "./state.js";

async function boot(): Promise<void> {
  const api = new ApiClient();
  const data = await api.texts();

  const { left, right } = decodePanels(window.location.search);
  if (!left.documentId) left.documentId = data.texts[0]?.id ?? null;
  if (!right.documentId) right.documentId = data.texts[1]?.id ?? data.texts[0]?.id ?? null;

  const states: { left: PanelState; right: PanelState } = { left, right };
  const syncUrl = (side: "left" | "right") => (state: PanelState) => {
    states[side] = state;
    const query = encodePanels(states.left, states.right);
    window.history.replaceState(null, "", query ? `?${query}` : window.location.pathname);
  };

  const leftRoot = document.getElementById("panel-left");
  const rightRoot = document.getElementById("panel-right");
  if (!leftRoot || !rightRoot) throw new Error("panel containers missing");

  const leftPanel = new PanelView(leftRoot, api, data.categories, data.texts, left, syncUrl("left"));
  const rightPanel = new PanelView(rightRoot, api, data.categories, data.texts, right, syncUrl("right"));
  leftPanel.start();
  rightPanel.start();

  const about = document.getElementById("about-link");
  const dialog = document.getElementById("about-dialog") as HTMLDialogElement | null;
  about?.addEventListener("click", (event) => {
    event.preventDefault();
    dialog?.showModal();
  });
  dialog?.querySelector("button")?.addEventListener("click", () => dialog.close());
}

boot().catch((error) => {
  const banner = document.getElementById("boot-error");
  if (banner) {
    banner.textContent = `failed to load corpus metadata: ${error instanceof Error ? error.message : error}`;
    banner.classList.remove("hidden");
  }
});
