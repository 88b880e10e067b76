/** Wires the queue view, filters, and controller to the page. */

import { EntryStatus, ModerationApi } from "./api.js";
import { Notice, QueueController } from "./controller.js";
import { renderQueue } from "./queue.js";

export function mount(root: HTMLElement, baseUrl: string): QueueController {
  root.innerHTML = `
    <header class="toolbar">
      <h1>Moderation queue</h1>
      <label>min probability
        <input type="number" id="min-p" min="0" max="1" step="0.05" value="0">
      </label>
      <label>status
        <select id="status-filter">
          <option value="">all</option>
          <option value="pending" selected>pending</option>
          <option value="approved">approved</option>
          <option value="blocked">blocked</option>
        </select>
      </label>
      <button id="refresh" type="button">Refresh</button>
      <span id="notice" role="status"></span>
    </header>
    <main id="queue"></main>
  `;
  const queueEl = root.querySelector<HTMLElement>("#queue")!;
  const noticeEl = root.querySelector<HTMLElement>("#notice")!;
  const minPInput = root.querySelector<HTMLInputElement>("#min-p")!;
  const statusSelect = root.querySelector<HTMLSelectElement>("#status-filter")!;
  const refreshButton = root.querySelector<HTMLButtonElement>("#refresh")!;

  const api = new ModerationApi(baseUrl);
  const showNotice = (notice: Notice): void => {
    noticeEl.textContent = notice.message;
    noticeEl.className = `notice-${notice.kind}`;
  };
  const controller = new QueueController(
    api,
    (entries) => renderQueue(queueEl, entries, (id, action, reason) =>
      controller.decide(id, action, reason)),
    showNotice,
  );

  const applyFilter = (): void => {
    const minP = Number.parseFloat(minPInput.value);
    controller.filter = {
      min_p: Number.isFinite(minP) && minP > 0 ? minP : undefined,
      status: (statusSelect.value || undefined) as EntryStatus | undefined,
    };
    controller.refresh().catch((error: unknown) => {
      showNotice({ kind: "error", message: `refresh failed: ${String(error)}` });
    });
  };

  minPInput.addEventListener("change", applyFilter);
  statusSelect.addEventListener("change", applyFilter);
  refreshButton.addEventListener("click", applyFilter);
  applyFilter();
  return controller;
}

declare global {
  interface Window {
    MODLENS_API?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document.getElementById("app")!, window.MODLENS_API ?? "");
}
