/** API client with monotone request sequencing.
 *
 * Every issued request gets an increasing sequence number; a response is
 * delivered only when no newer request has been issued since, so rapid
 * slider drags render only the final answer.
 */

import { ApiRequest } from "./types.js";

export type FetchLike = (url: string) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export interface ApiResult<T> {
  stale: boolean;
  seq: number;
  data?: T;
  error?: string;
}

export class ApiClient {
  private seq = 0;
  private delivered = 0;
  requestsIssued = 0;

  constructor(private baseUrl: string, private fetchFn: FetchLike) {}

  url(req: ApiRequest): string {
    const params = new URLSearchParams(req.params);
    return `${this.baseUrl}${req.path}?${params.toString()}`;
  }

  async request<T>(req: ApiRequest): Promise<ApiResult<T>> {
    const id = ++this.seq;
    this.requestsIssued += 1;
    let data: T | undefined;
    let error: string | undefined;
    try {
      const res = await this.fetchFn(this.url(req));
      const body = (await res.json()) as T & { message?: string };
      if (!res.ok) {
        error = body?.message ?? `HTTP ${res.status}`;
      } else {
        data = body;
      }
    } catch (exc) {
      error = String(exc);
    }
    if (id !== this.seq || id <= this.delivered) {
      return { stale: true, seq: id };
    }
    this.delivered = id;
    return { stale: false, seq: id, data, error };
  }
}
