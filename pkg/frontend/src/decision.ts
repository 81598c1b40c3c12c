/** The action mapping is a pure function of (served default, submitted value,
 * suggestion membership) and never fabricates anything else:
 *   - submitting the served default unchanged is an ACCEPT;
 *   - switching to a different served suggestion is a MODIFY;
 *   - anything typed fresh (or submitted with nothing served) is REJECT_CREATE.
 */

import type { DecisionAction, SlotValue } from "./types.js";

export function valueEquals(a: SlotValue | null, b: SlotValue | null): boolean {
  if (a === null || b === null) {
    return a === b;
  }
  if (typeof a === "string" || typeof b === "string") {
    return a === b;
  }
  if (a.kind !== b.kind) {
    return false;
  }
  if (a.kind === "entity" && b.kind === "entity") {
    return a.surface === b.surface && a.wiki === b.wiki;
  }
  if (a.kind === "nested_event" && b.kind === "nested_event") {
    return a.roleset_id === b.roleset_id && a.linked_mention === b.linked_mention;
  }
  return false;
}

export function decisionAction(
  served: SlotValue | null,
  submitted: SlotValue | null,
  suggestions: SlotValue[],
): DecisionAction {
  if (served !== null && valueEquals(submitted, served)) {
    return "ACCEPT";
  }
  if (submitted !== null && suggestions.some((s) => valueEquals(s, submitted))) {
    return "MODIFY";
  }
  return "REJECT_CREATE";
}
