/** Typed client for the moderation queue HTTP API. */

export interface HighlightSpan {
  token_start: number;
  token_end: number;
  char_start: number;
  char_end: number;
}

export type EntryStatus = "pending" | "approved" | "blocked";

export interface QueueEntry {
  id: string;
  text: string;
  probability: number;
  spans: HighlightSpan[];
  status: EntryStatus;
  reason: string | null;
  decided_by: string | null;
  decided_at: string | null;
  ingested_at: string;
  seq: number;
  metadata: Record<string, string>;
}

export type Action = "approve" | "block";

export const REASONS = ["insults", "racism", "profanity", "spam"] as const;
export type Reason = (typeof REASONS)[number];

export interface QueueFilter {
  limit?: number;
  min_p?: number;
  status?: EntryStatus;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ModerationApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  fetchQueue(filter: QueueFilter = {}): Promise<QueueEntry[]> {
    const params = new URLSearchParams();
    if (filter.limit !== undefined) params.set("limit", String(filter.limit));
    if (filter.min_p !== undefined) params.set("min_p", String(filter.min_p));
    if (filter.status !== undefined) params.set("status", filter.status);
    const query = params.toString();
    return this.request<QueueEntry[]>(`/queue${query ? `?${query}` : ""}`);
  }

  getComment(id: string): Promise<QueueEntry> {
    return this.request<QueueEntry>(`/comments/${encodeURIComponent(id)}`);
  }

  ingest(id: string, text: string, metadata: Record<string, string> = {}): Promise<QueueEntry> {
    return this.request<QueueEntry>("/comments", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ id, text, metadata }),
    });
  }

  decide(id: string, action: Action, reason?: Reason, decidedBy?: string): Promise<QueueEntry> {
    return this.request<QueueEntry>(`/comments/${encodeURIComponent(id)}/decision`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        action,
        reason: reason ?? null,
        decided_by: decidedBy ?? null,
      }),
    });
  }

  health(): Promise<{ status: string; entries: number }> {
    return this.request<{ status: string; entries: number }>("/health");
  }
}
