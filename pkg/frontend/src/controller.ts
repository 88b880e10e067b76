/** Queue state and the optimistic decision flow.
 *
 * A decision flips the card immediately, then reconciles with the
 * server: success keeps the server entry, a 409 refetches the
 * authoritative entry, and a network failure rolls back.
 */

import { Action, ApiError, QueueEntry, QueueFilter, Reason } from "./api.js";

export type Notice = { kind: "info" | "error"; message: string };

/** The slice of the API client the controller needs; eases test stubs. */
export interface QueueApi {
  fetchQueue(filter: QueueFilter): Promise<QueueEntry[]>;
  getComment(id: string): Promise<QueueEntry>;
  decide(id: string, action: Action, reason?: Reason): Promise<QueueEntry>;
}

export class QueueController {
  entries: QueueEntry[] = [];
  filter: QueueFilter = {};

  constructor(
    private readonly api: QueueApi,
    private readonly onChange: (entries: readonly QueueEntry[]) => void,
    private readonly onNotice: (notice: Notice) => void = () => {},
  ) {}

  async refresh(): Promise<void> {
    this.entries = await this.api.fetchQueue(this.filter);
    this.onChange(this.entries);
  }

  private replace(entry: QueueEntry): void {
    const index = this.entries.findIndex((e) => e.id === entry.id);
    if (index >= 0) {
      this.entries[index] = entry;
      this.onChange(this.entries);
    }
  }

  async decide(id: string, action: Action, reason?: Reason): Promise<void> {
    const current = this.entries.find((e) => e.id === id);
    if (!current || current.status !== "pending") return;

    const optimistic: QueueEntry = {
      ...current,
      status: action === "approve" ? "approved" : "blocked",
      reason: reason ?? null,
    };
    this.replace(optimistic);

    try {
      const confirmed = await this.api.decide(id, action, reason);
      this.replace(confirmed);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // Another moderator got there first; show the server's truth.
        const authoritative = await this.api.getComment(id);
        this.replace(authoritative);
        this.onNotice({ kind: "info", message: `already decided: ${authoritative.status}` });
        return;
      }
      this.replace(current); // rollback
      const message = error instanceof Error ? error.message : String(error);
      this.onNotice({ kind: "error", message: `decision failed: ${message}` });
    }
  }
}
