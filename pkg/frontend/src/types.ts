/** Payload shapes of the annotation service REST API. */

export type SlotName = "ROLESET" | "ARG0" | "ARG1" | "LOC" | "TIME";

export interface EntityValue {
  kind: "entity";
  surface: string;
  wiki: string | null;
  roleset_id: null;
  linked_mention: null;
}

export interface NestedEventValue {
  kind: "nested_event";
  surface: null;
  wiki: null;
  roleset_id: string;
  linked_mention: string | null;
}

/** ROLESET and TIME slots carry canonical strings; the rest are objects. */
export type SlotValue = string | EntityValue | NestedEventValue;

export interface Suggestion {
  value: SlotValue;
  score: number;
  rank: number;
}

export interface MentionPayload {
  mention_id: string;
  topic_id: number;
  doc_id: string;
  sentence_idx: number;
  doc_text: string;
  sentence_text: string;
  trigger_start: number;
  trigger_end: number;
  trigger_lemma: string;
  split: string;
  sentence_offset: number;
  gold_cluster_id: string | null;
}

export interface MentionView {
  mention: MentionPayload;
  marked_document: string;
  marked_sentence: string;
  phase: 1 | 2;
  slots: SlotName[];
  suggestions: Record<string, Suggestion[]>;
  defaults: Record<string, SlotValue | null>;
  store_version: number;
}

export interface RoleRow {
  label: string;
  description: string;
}

export interface RolesetInfo {
  roleset_id: string;
  definition: string;
  roles: RoleRow[];
  aliases: string[];
}

export type DecisionAction = "ACCEPT" | "MODIFY" | "REJECT_CREATE";

export interface DecisionBody {
  mention_id: string;
  slot: SlotName;
  suggested: SlotValue | null;
  action: DecisionAction;
  final: SlotValue | null;
  annotator: string;
}
