/** Thin typed client for the annotation service. */

import type { DecisionBody, MentionView, RolesetInfo } from "./types.js";

export interface PostResult {
  ok: boolean;
  status: number;
  detail?: string;
  storeVersion?: number;
}

export class ApiClient {
  constructor(private base: string = "") {}

  async nextMention(annotator: string, split?: string): Promise<MentionView | null> {
    const params = new URLSearchParams({ annotator });
    if (split) {
      params.set("split", split);
    }
    const response = await fetch(`${this.base}/api/session/next?${params}`);
    if (response.status === 204) {
      return null;
    }
    if (!response.ok) {
      throw new Error(`session/next failed: ${response.status}`);
    }
    return (await response.json()) as MentionView;
  }

  async postDecision(body: DecisionBody): Promise<PostResult> {
    const response = await fetch(`${this.base}/api/decision`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (response.status === 201) {
      const payload = await response.json();
      return { ok: true, status: 201, storeVersion: payload.store_version };
    }
    let detail = "";
    try {
      detail = JSON.stringify((await response.json()).detail ?? "");
    } catch {
      detail = response.statusText;
    }
    return { ok: false, status: response.status, detail };
  }

  async searchFrames(query: string, k = 10): Promise<RolesetInfo[]> {
    const params = new URLSearchParams({ q: query, k: String(k) });
    const response = await fetch(`${this.base}/api/frames/search?${params}`);
    if (!response.ok) {
      throw new Error(`frames/search failed: ${response.status}`);
    }
    return (await response.json()) as RolesetInfo[];
  }

  async getRoleset(rolesetId: string): Promise<RolesetInfo | null> {
    const response = await fetch(`${this.base}/api/frames/${encodeURIComponent(rolesetId)}`);
    if (response.status === 404) {
      return null;
    }
    if (!response.ok) {
      throw new Error(`frames get failed: ${response.status}`);
    }
    return (await response.json()) as RolesetInfo;
  }

  async stats(): Promise<unknown> {
    const response = await fetch(`${this.base}/api/stats`);
    return response.json();
  }

  async exportAnnotations(): Promise<string> {
    const response = await fetch(`${this.base}/api/annotations/export`);
    return response.text();
  }

  async health(): Promise<{ status: string; mentions: number; decisions: number }> {
    const response = await fetch(`${this.base}/healthz`);
    if (!response.ok) {
      throw new Error(`healthz ${response.status}`);
    }
    return response.json();
  }
}
