import {
  ApiError,
  Dfg,
  OperationApplied,
  OperationRequest,
  SessionCreated,
  SessionInfo,
} from "./types.js";

type FetchLike = typeof fetch;

async function unwrap<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let code = `HTTP ${response.status}`;
  let message = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") {
      code = body.error;
      message = body.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(response.status, code, message);
}

/** Thin client over the session service; base URL "" means same origin. */
export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  createSession(body: Uint8Array | string): Promise<SessionCreated> {
    return this.fetchImpl(this.url("/api/sessions"), {
      method: "POST",
      body: body as BodyInit,
      headers: { "content-type": "application/json" },
    }).then((r) => unwrap<SessionCreated>(r));
  }

  sessionInfo(sessionId: string): Promise<SessionInfo> {
    return this.fetchImpl(this.url(`/api/sessions/${sessionId}`)).then((r) =>
      unwrap<SessionInfo>(r),
    );
  }

  applyOperation(
    sessionId: string,
    request: OperationRequest,
  ): Promise<OperationApplied> {
    return this.fetchImpl(this.url(`/api/sessions/${sessionId}/operations`), {
      method: "POST",
      body: JSON.stringify(request),
      headers: { "content-type": "application/json" },
    }).then((r) => unwrap<OperationApplied>(r));
  }

  undo(sessionId: string): Promise<{ version: number }> {
    return this.fetchImpl(this.url(`/api/sessions/${sessionId}/undo`), {
      method: "POST",
    }).then((r) => unwrap<{ version: number }>(r));
  }

  getDfg(
    sessionId: string,
    options: { version?: number; minArcFrequency?: number } = {},
  ): Promise<Dfg> {
    const params = new URLSearchParams();
    if (options.version !== undefined) {
      params.set("version", String(options.version));
    }
    if (options.minArcFrequency !== undefined) {
      params.set("min_arc_frequency", String(options.minArcFrequency));
    }
    const query = params.toString();
    const path = `/api/sessions/${sessionId}/dfg${query ? `?${query}` : ""}`;
    return this.fetchImpl(this.url(path)).then((r) => unwrap<Dfg>(r));
  }

  exportLog(sessionId: string, version?: number): Promise<string> {
    const query = version === undefined ? "" : `?version=${version}`;
    return this.fetchImpl(this.url(`/api/sessions/${sessionId}/log${query}`)).then(
      async (r) => {
        if (!r.ok) {
          await unwrap(r);
        }
        return r.text();
      },
    );
  }
}
