/** Queue rendering: one card per entry, in exactly the served order. */

import { Action, QueueEntry, Reason } from "./api.js";
import { createDecisionForm } from "./decision.js";
import { renderHighlighted } from "./highlight.js";

export type DecideHandler = (id: string, action: Action, reason?: Reason) => Promise<void>;

export function renderCard(entry: QueueEntry, onDecide: DecideHandler): HTMLElement {
  const card = document.createElement("article");
  card.className = `card status-${entry.status}`;
  card.dataset.entryId = entry.id;

  const header = document.createElement("header");
  const badge = document.createElement("span");
  badge.className = "probability";
  badge.textContent = entry.probability.toFixed(3);
  const status = document.createElement("span");
  status.className = "status";
  status.textContent = entry.status + (entry.reason ? ` (${entry.reason})` : "");
  header.append(badge, status);

  const body = document.createElement("p");
  body.className = "comment-text";
  const { fragment, warning } = renderHighlighted(entry.text, entry.spans);
  body.appendChild(fragment);
  if (warning) {
    const marker = document.createElement("span");
    marker.className = "span-warning";
    marker.title = "served highlight spans were malformed";
    marker.textContent = "⚠";
    header.appendChild(marker);
  }

  card.append(header, body);
  if (entry.status === "pending") {
    const form = createDecisionForm((action, reason) => onDecide(entry.id, action, reason));
    card.appendChild(form.root);
  }
  return card;
}

export function renderQueue(
  container: HTMLElement,
  entries: readonly QueueEntry[],
  onDecide: DecideHandler,
): void {
  container.textContent = "";
  if (entries.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "Queue is empty.";
    container.appendChild(empty);
    return;
  }
  for (const entry of entries) {
    container.appendChild(renderCard(entry, onDecide));
  }
}
