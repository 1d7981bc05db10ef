import type { PeaksResponse, SegmentPage, Stats, Tag, TagAck } from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

type FetchFn = typeof fetch;

/** Thin typed wrapper over the review service HTTP API. */
export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchFn = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        /* non-JSON error body; keep statusText */
      }
      throw new ApiError(resp.status, detail);
    }
    return resp.json() as Promise<T>;
  }

  listSegments(filter = "", page = 1, pageSize = 500): Promise<SegmentPage> {
    const q = new URLSearchParams({
      filter,
      page: String(page),
      page_size: String(pageSize),
    });
    return this.request(`/api/segments?${q}`);
  }

  peaks(id: string, buckets = 800): Promise<PeaksResponse> {
    return this.request(
      `/api/segments/${encodeURIComponent(id)}/peaks?buckets=${buckets}`,
    );
  }

  setTag(id: string, tag: Tag, note = ""): Promise<TagAck> {
    return this.request(`/api/segments/${encodeURIComponent(id)}/tag`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ tag, note }),
    });
  }

  stats(): Promise<Stats> {
    return this.request("/api/stats");
  }

  audioUrl(id: string): string {
    return `${this.base}/api/segments/${encodeURIComponent(id)}/audio`;
  }
}
