/** Four-pane annotation screen: embedded roleset browser, document view with
 * the trigger auto-scrolled into sight, sentence view with the trigger chip,
 * and per-slot forms whose dropdowns carry the ranked suggestions with the
 * top item pre-selected.
 *
 * Keyboard: digits 1-9 pick a dropdown rank for the focused slot, Enter
 * submits the current view.
 */

import { ApiClient } from "./api.js";
import {
  markedToHtml,
  renderCompletion,
  renderNotFound,
  renderProgress,
  renderRolesetCard,
  renderSlotForm,
} from "./render.js";
import { UiState } from "./state.js";
import type { MentionView, SlotName, SlotValue } from "./types.js";

const api = new ApiClient("");
const annotator = new URLSearchParams(window.location.search).get("annotator") ?? "a1";
const split = new URLSearchParams(window.location.search).get("split") ?? undefined;
const state = new UiState(annotator);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function showError(message: string): void {
  const banner = el<HTMLDivElement>("error-banner");
  banner.textContent = message;
  banner.classList.toggle("hidden", message === "");
}

function slotInputValue(slot: SlotName, text: string): SlotValue | null {
  const trimmed = text.trim();
  if (!trimmed) {
    return null;
  }
  if (slot === "ROLESET" || slot === "TIME") {
    return trimmed;
  }
  return { kind: "entity", surface: trimmed, wiki: null, roleset_id: null, linked_mention: null };
}

function renderView(view: MentionView): void {
  state.loadView(view);
  showError("");

  el<HTMLDivElement>("document-pane").innerHTML = markedToHtml(view.marked_document);
  el<HTMLDivElement>("sentence-pane").innerHTML = markedToHtml(view.marked_sentence, true);

  const forms = view.slots
    .map((slot) => renderSlotForm(slot, view.suggestions[slot] ?? [], view.defaults[slot] ?? null))
    .join("");
  el<HTMLDivElement>("forms-pane").innerHTML = `
    ${forms}
    <button id="submit-button" type="button">Submit (Enter)</button>`;
  el<HTMLSpanElement>("progress").textContent = renderProgress(
    view.phase,
    state.completedViews,
    state.submittedDecisions,
  );

  for (const dropdown of document.querySelectorAll<HTMLSelectElement>(".slot-dropdown")) {
    dropdown.addEventListener("change", () => {
      const slot = dropdown.dataset.slot as SlotName;
      const idx = parseInt(dropdown.value, 10);
      const suggestions = view.suggestions[slot] ?? [];
      state.setSelection(slot, idx >= 0 ? suggestions[idx].value : null);
    });
  }
  for (const input of document.querySelectorAll<HTMLInputElement>(".slot-text")) {
    input.addEventListener("input", () => {
      const slot = input.dataset.slot as SlotName;
      state.setSelection(slot, slotInputValue(slot, input.value));
    });
  }
  el<HTMLButtonElement>("submit-button").addEventListener("click", submitCurrent);

  // the sentence is usually enough on its own, so it takes focus first;
  // the document pane scrolls to the highlighted trigger
  el<HTMLDivElement>("sentence-pane").focus();
  document.getElementById("trigger-mark")?.scrollIntoView({ block: "center" });
}

async function advance(): Promise<void> {
  const view = await api.nextMention(annotator, split);
  if (view === null) {
    el<HTMLDivElement>("main-grid").classList.add("hidden");
    el<HTMLDivElement>("completion-pane").innerHTML = renderCompletion(state.submittedDecisions);
    el<HTMLDivElement>("completion-pane").classList.remove("hidden");
    return;
  }
  renderView(view);
}

async function submitCurrent(): Promise<void> {
  if (!state.canSubmit()) {
    showError("phase 1 needs a roleset before submitting");
    return;
  }
  const decisions = state.buildDecisions();
  el<HTMLButtonElement>("submit-button").disabled = true;
  for (const body of decisions) {
    const result = await api.postDecision(body);
    if (!result.ok) {
      // 409/422 come back inline; entered values stay on screen
      showError(`decision rejected (${result.status}): ${result.detail ?? ""}`);
      el<HTMLButtonElement>("submit-button").disabled = false;
      return;
    }
  }
  state.markSubmitted(decisions.length);
  await advance();
}

async function searchFrames(query: string): Promise<void> {
  const results = el<HTMLDivElement>("frame-results");
  if (!query.trim()) {
    results.innerHTML = '<div class="empty-state">Type to search rolesets</div>';
    return;
  }
  const infos = await api.searchFrames(query, 10);
  results.innerHTML = infos.length
    ? infos.map(renderRolesetCard).join("")
    : renderNotFound(query);
  for (const card of results.querySelectorAll<HTMLDivElement>(".roleset-card")) {
    const pick = () => {
      const rolesetId = card.dataset.roleset ?? "";
      state.setSelection("ROLESET", rolesetId);
      const input = document.querySelector<HTMLInputElement>('.slot-text[data-slot="ROLESET"]');
      if (input) {
        input.value = rolesetId;
      }
    };
    card.addEventListener("click", pick);
    card.addEventListener("keydown", (e) => {
      if (e.key === "Enter") {
        pick();
      }
    });
  }
}

function wireKeyboard(): void {
  document.addEventListener("keydown", (e) => {
    if (e.target instanceof HTMLInputElement) {
      if (e.key === "Enter") {
        void submitCurrent();
      }
      return;
    }
    if (e.key === "Enter") {
      void submitCurrent();
    } else if (/^[1-9]$/.test(e.key)) {
      const dropdown = document.querySelector<HTMLSelectElement>(".slot-dropdown:not([disabled])");
      if (dropdown && state.view) {
        const slot = dropdown.dataset.slot as SlotName;
        const idx = parseInt(e.key, 10) - 1;
        const suggestions = state.view.suggestions[slot] ?? [];
        if (idx < suggestions.length) {
          dropdown.value = String(idx);
          state.setSelection(slot, suggestions[idx].value);
        }
      }
    }
  });
}

function init(): void {
  wireKeyboard();
  const search = el<HTMLInputElement>("frame-search");
  let timer: number | undefined;
  search.addEventListener("input", () => {
    window.clearTimeout(timer);
    timer = window.setTimeout(() => void searchFrames(search.value), 150);
  });
  void advance();
}

document.addEventListener("DOMContentLoaded", init);
