import { describe, expect, it, vi } from "vitest";

import { QueueEntry } from "../src/api.js";
import { renderQueue } from "../src/queue.js";

function entry(id: string, overrides: Partial<QueueEntry> = {}): QueueEntry {
  return {
    id,
    text: `comment ${id}`,
    probability: 0.5,
    spans: [],
    status: "pending",
    reason: null,
    decided_by: null,
    decided_at: null,
    ingested_at: "2026-08-17T00:00:00+00:00",
    seq: 1,
    metadata: {},
    ...overrides,
  };
}

describe("renderQueue", () => {
  it("renders cards in exactly the served order", () => {
    const container = document.createElement("div");
    const served = [
      entry("high", { probability: 0.99 }),
      entry("mid", { probability: 0.7 }),
      entry("low", { probability: 0.1 }),
    ];
    renderQueue(container, served, async () => {});
    const ids = [...container.querySelectorAll(".card")].map(
      (card) => (card as HTMLElement).dataset.entryId,
    );
    expect(ids).toEqual(["high", "mid", "low"]);
  });

  it("shows an explicit empty state", () => {
    const container = document.createElement("div");
    renderQueue(container, [], async () => {});
    expect(container.querySelector(".empty-state")?.textContent).toMatch(/empty/i);
  });

  it("mutes decided entries and drops their form", () => {
    const container = document.createElement("div");
    renderQueue(
      container,
      [entry("done", { status: "blocked", reason: "spam" }), entry("todo")],
      async () => {},
    );
    const done = container.querySelector(".status-blocked")!;
    expect(done.querySelector(".decision-form")).toBeNull();
    expect(done.querySelector(".status")!.textContent).toContain("spam");
    const todo = container.querySelector(".status-pending")!;
    expect(todo.querySelector(".decision-form")).not.toBeNull();
  });

  it("marks entries whose served spans are malformed, keeping the text", () => {
    const container = document.createElement("div");
    const bad = entry("warn", {
      text: "short",
      spans: [{ token_start: 0, token_end: 0, char_start: 2, char_end: 99 }],
    });
    renderQueue(container, [bad], async () => {});
    const card = container.querySelector(".card")!;
    expect(card.querySelector(".span-warning")).not.toBeNull();
    expect(card.querySelector(".comment-text")!.textContent).toBe("short");
  });

  it("routes form submissions to the decide handler", () => {
    const container = document.createElement("div");
    const onDecide = vi.fn(async () => {});
    renderQueue(container, [entry("c9")], onDecide);
    const approve = container.querySelector<HTMLButtonElement>("button.approve")!;
    approve.click();
    expect(onDecide).toHaveBeenCalledWith("c9", "approve", undefined);
  });
});
