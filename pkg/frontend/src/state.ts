/** Client-side session state. Everything persistent lives server-side; this
 * only tracks the current view, per-slot selections, and progress counters,
 * so a refresh loses at most unsubmitted edits. */

import { decisionAction } from "./decision.js";
import type { DecisionBody, MentionView, SlotName, SlotValue } from "./types.js";

export interface SlotState {
  selected: SlotValue | null;
  dirty: boolean;
}

export class UiState {
  view: MentionView | null = null;
  slots = new Map<SlotName, SlotState>();
  submittedDecisions = 0;
  completedViews = 0;

  constructor(public annotator: string) {}

  loadView(view: MentionView): void {
    this.view = view;
    this.slots.clear();
    for (const slot of view.slots) {
      this.slots.set(slot, { selected: view.defaults[slot] ?? null, dirty: false });
    }
  }

  setSelection(slot: SlotName, value: SlotValue | null): void {
    const state = this.slots.get(slot);
    if (!state) {
      return;
    }
    state.selected = value;
    state.dirty = true;
  }

  get phase(): 1 | 2 {
    return this.view?.phase ?? 1;
  }

  /** Phase 1 requires a roleset before submit; phase 2 slots may stay empty. */
  canSubmit(): boolean {
    if (!this.view) {
      return false;
    }
    if (this.view.phase === 1) {
      const roleset = this.slots.get("ROLESET");
      return roleset !== undefined && roleset.selected !== null && roleset.selected !== "";
    }
    return true;
  }

  buildDecisions(): DecisionBody[] {
    if (!this.view) {
      return [];
    }
    const out: DecisionBody[] = [];
    for (const slot of this.view.slots) {
      const served = this.view.defaults[slot] ?? null;
      const submitted = this.slots.get(slot)?.selected ?? null;
      const suggestionValues = (this.view.suggestions[slot] ?? []).map((s) => s.value);
      out.push({
        mention_id: this.view.mention.mention_id,
        slot,
        suggested: served,
        action: decisionAction(served, submitted, suggestionValues),
        final: submitted,
        annotator: this.annotator,
      });
    }
    return out;
  }

  markSubmitted(count: number): void {
    this.submittedDecisions += count;
    this.completedViews += 1;
  }
}
