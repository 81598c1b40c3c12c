/** Pure HTML builders for the four panes; DOM wiring lives in main.ts. */

import type { RolesetInfo, SlotName, SlotValue, Suggestion } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Convert the server's **trigger** marking into a highlighted span. */
export function markedToHtml(marked: string, chip = false): string {
  const escaped = escapeHtml(marked);
  const tag = chip ? '<span class="chip-tag">EVT</span>' : "";
  return escaped.replace(
    /\*\*(.+?)\*\*/g,
    (_, trigger) => `<mark class="trigger" id="trigger-mark">${trigger}${tag}</mark>`,
  );
}

export function valueLabel(value: SlotValue | null): string {
  if (value === null) {
    return "(empty)";
  }
  if (typeof value === "string") {
    return value;
  }
  if (value.kind === "nested_event") {
    return `event: ${value.roleset_id}`;
  }
  return value.wiki ? `${value.surface} [${value.wiki}]` : value.surface;
}

export const SLOT_TITLES: Record<SlotName, string> = {
  ROLESET: "Roleset ID",
  ARG0: "ARG-0",
  ARG1: "ARG-1",
  LOC: "ARG-Loc",
  TIME: "ARG-Time",
};

export function renderSlotForm(
  slot: SlotName,
  suggestions: Suggestion[],
  selected: SlotValue | null,
): string {
  const options = suggestions
    .map((s, i) => {
      const isSelected = valueLabel(s.value) === valueLabel(selected);
      return `<option value="${i}"${isSelected ? " selected" : ""}>${escapeHtml(
        `${s.rank}. ${valueLabel(s.value)} (${s.score.toFixed(3)})`,
      )}</option>`;
    })
    .join("");
  const blank = `<option value="-1"${selected === null ? " selected" : ""}>(no selection)</option>`;
  return `
  <div class="slot-form" data-slot="${slot}">
    <label class="slot-title">${SLOT_TITLES[slot]}</label>
    <select class="slot-dropdown" data-slot="${slot}" ${suggestions.length === 0 ? "disabled" : ""}>
      ${blank}${options}
    </select>
    <input class="slot-text" data-slot="${slot}" type="text"
           placeholder="${suggestions.length ? "or type a new value" : "type a value"}"
           value="" />
  </div>`;
}

export function renderRolesetCard(info: RolesetInfo): string {
  const rows = info.roles
    .map((r) => `<tr><td class="role-label">${escapeHtml(r.label)}</td><td>${escapeHtml(r.description)}</td></tr>`)
    .join("");
  const aliases = info.aliases.length
    ? `<div class="aliases">aliases: ${escapeHtml(info.aliases.join(", "))}</div>`
    : "";
  return `
  <div class="roleset-card" data-roleset="${escapeHtml(info.roleset_id)}" tabindex="0">
    <div class="roleset-id">${escapeHtml(info.roleset_id)}</div>
    <div class="roleset-def">${escapeHtml(info.definition)}</div>
    <table class="roles">${rows}</table>
    ${aliases}
  </div>`;
}

export function renderNotFound(query: string): string {
  return `<div class="empty-state">No rolesets found for "${escapeHtml(query)}"</div>`;
}

export function renderCompletion(submitted: number): string {
  return `
  <div class="completion">
    <h2>Queue complete</h2>
    <p>${submitted} decisions submitted. All assigned mentions are annotated.</p>
    <p><a href="/api/stats" target="_blank">View statistics</a> ·
       <a href="/api/annotations/export" target="_blank">Export annotations</a></p>
  </div>`;
}

export function renderProgress(phase: number, completed: number, decisions: number): string {
  return `phase ${phase} · ${completed} views done · ${decisions} decisions`;
}
