// Session state and the handlers the menus, slider, and breadcrumb bar
// call. One mutation may be in flight at a time, matching the server's
// per-session serialization; views subscribe and re-render on each change.

import { ApiClient } from "./api.js";
import { ApiError, Dfg, OperationRequest, Summary } from "./types.js";

export interface ExplorerState {
  sessionId: string | null;
  version: number;
  summary: Summary | null;
  dfg: Dfg | null;
  history: OperationRequest[];
  threshold: number;
  pending: boolean;
  error: string | null;
}

export function initialState(): ExplorerState {
  return {
    sessionId: null,
    version: 0,
    summary: null,
    dfg: null,
    history: [],
    threshold: 1,
    pending: false,
    error: null,
  };
}

type Listener = (state: ExplorerState) => void;

export class ExplorerController {
  state: ExplorerState = initialState();
  private listeners: Listener[] = [];

  constructor(private api: ApiClient) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  private set(patch: Partial<ExplorerState>): void {
    this.state = { ...this.state, ...patch };
    this.emit();
  }

  private fail(error: unknown): void {
    const message =
      error instanceof ApiError
        ? `${error.code}: ${error.message}`
        : String(error);
    this.set({ pending: false, error: message });
  }

  /** Upload a log file and open a fresh session for it. */
  async upload(data: Uint8Array | string): Promise<void> {
    if (this.state.pending) {
      return;
    }
    this.set({ pending: true, error: null });
    try {
      const created = await this.api.createSession(data);
      const dfg = await this.api.getDfg(created.session_id, {
        minArcFrequency: this.state.threshold,
      });
      this.set({
        sessionId: created.session_id,
        version: 0,
        summary: created.summary,
        dfg,
        history: [],
        pending: false,
        error: null,
      });
    } catch (error) {
      this.fail(error);
    }
  }

  /** Re-attach to an existing session (page reload). */
  async rehydrate(sessionId: string): Promise<void> {
    this.set({ pending: true, error: null });
    try {
      const info = await this.api.sessionInfo(sessionId);
      const dfg = await this.api.getDfg(sessionId, {
        minArcFrequency: this.state.threshold,
      });
      this.set({
        sessionId,
        version: info.version,
        summary: info.summary,
        dfg,
        history: info.history,
        pending: false,
      });
    } catch (error) {
      this.fail(error);
    }
  }

  /** Apply one operation picked from the menus. */
  async apply(request: OperationRequest): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId || this.state.pending) {
      return;
    }
    this.set({ pending: true, error: null });
    try {
      const applied = await this.api.applyOperation(sessionId, request);
      const dfg =
        this.state.threshold === 1
          ? applied.dfg
          : await this.api.getDfg(sessionId, {
              minArcFrequency: this.state.threshold,
            });
      this.set({
        version: applied.version,
        summary: applied.summary,
        dfg,
        history: [...this.state.history, request],
        pending: false,
      });
    } catch (error) {
      this.fail(error); // 422 details surface here; state is untouched
    }
  }

  /** Drop the newest version. */
  async undo(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId || this.state.pending) {
      return;
    }
    this.set({ pending: true, error: null });
    try {
      const result = await this.api.undo(sessionId);
      const info = await this.api.sessionInfo(sessionId);
      const dfg = await this.api.getDfg(sessionId, {
        minArcFrequency: this.state.threshold,
      });
      this.set({
        version: result.version,
        summary: info.summary,
        dfg,
        history: info.history,
        pending: false,
      });
    } catch (error) {
      this.fail(error);
    }
  }

  /** Re-filter the current version; creates no new version. */
  async setThreshold(threshold: number): Promise<void> {
    if (threshold < 1) {
      return;
    }
    const sessionId = this.state.sessionId;
    if (!sessionId) {
      this.set({ threshold });
      return;
    }
    this.set({ threshold, pending: true, error: null });
    try {
      const dfg = await this.api.getDfg(sessionId, {
        version: this.state.version,
        minArcFrequency: threshold,
      });
      this.set({ dfg, pending: false });
    } catch (error) {
      this.fail(error);
    }
  }
}
