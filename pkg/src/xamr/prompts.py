"""Prompt construction for the two-step extraction pipeline.

Both prompts share the same instruction list and JSON key definitions; the
second step appends one instruction and one key, and swaps the inputs from
(document, sentence) to (candidate event descriptions, target description,
sentence). Builders are pure: the same inputs always render the same bytes,
and the rendered bytes are pinned by golden-file tests.

Event triggers are marked inline by wrapping them in ``**`` markers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Mention
from .errors import SpanOutOfBounds

INSTRUCTION_HEADER = "You are a concise annotator that follows these instructions:"

INSTRUCTION_ITEMS = (
    "Identify the target event trigger lemma and its correct roleset sense in the given text.",
    "Annotate the document-level ARG-0 and ARG-1 roles using the PropBank website for the roleset definitions.",
    "If the ARG-1 role is an event, identify the head predicate and provide its roleset ID.",
    "Perform within-document and cross-document anaphora resolution of the ARG-0 and ARG-1 using Wikipedia.",
    "Use external resources, such as Wikipedia, to annotate ARG-Loc and ARG-Time.",
)

INSTRUCTION_ITEM_6 = (
    "Identify the most informative (having Wikipedia and complete dates) and best matching "
    "Event Description from the provided list of descriptions."
)

LABELS_HEADER = "Here are the definitions of the keys in the JSON output:"

LABEL_DEFINITIONS = (
    ("Roleset ID", "The PropBank Roleset ID corresponding to the event trigger"),
    ("ARG-0", "The text in the Document corresponding to the typical agent"),
    ("ARG-0 Coreference", "The reference to the ARG-0 in Wikipedia in the format /wiki/Wikipedia_ID"),
    ("ARG-1", "The text in the Document corresponding to the typical patient"),
    ("ARG-1 Coreference", "The reference to the ARG-1 in Wikipedia in the format /wiki/Wikipedia_ID"),
    ("ARG-1 Roleset ID", "If the Event is Nested, provide the Roleset ID for the head event in ARG-1 clause"),
    ("ARG-Location", "The reference to the event location in Wikipedia"),
    ("ARG-Time", "The event time in the format of Month-Day-Year in your knowledge of the world or the document"),
    (
        "Event Description",
        "In a single sentence, summarize the event capturing the Roleset_ID and the names and "
        "wiki links of the Participants, Location and Time",
    ),
)

MOST_INFORMATIVE_LABEL = (
    "Most Informative Event Description",
    # "starts starts" is intentional: the instruction is reproduced as published.
    "Pick the most informative event description from the Event Description List. Choose by "
    "selecting the one that has complete date and Wikipedia links for the arguments and also "
    'is coreferent with the target Event. Hint: choose the one starts starts with "On DATE"',
)

DESCRIPTION_LIST_HEADER = (
    "Event Description List: Event descriptions of the three most informative and "
    "similar events in the corpus."
)

MAX_CANDIDATE_DESCRIPTIONS = 3


def mark_trigger(text: str, span: tuple[int, int], marker: str = "**") -> str:
    """Wrap the trigger span of ``text`` in inline markers."""
    start, end = span
    if not (0 <= start < end <= len(text)):
        raise SpanOutOfBounds(f"span ({start},{end}) outside text of length {len(text)}")
    return f"{text[:start]}{marker}{text[start:end]}{marker}{text[end:]}"


def _instructions(items: tuple[str, ...]) -> str:
    lines = [INSTRUCTION_HEADER]
    lines += [f"{i}. {item}" for i, item in enumerate(items, start=1)]
    return "\n".join(lines)


def _labels(definitions) -> str:
    lines = [LABELS_HEADER]
    lines += [f"{key}: {definition}" for key, definition in definitions]
    return "\n".join(lines)


@dataclass(frozen=True)
class PromptA:
    instructions: str
    labels: str
    marked_document: str
    marked_sentence: str

    def render(self) -> str:
        return (
            f"{self.instructions}\n\n{self.labels}\n\n"
            f"Target Mention Document: {self.marked_document}\n"
            f"Target Mention Sentence: {self.marked_sentence}\n"
        )


@dataclass(frozen=True)
class PromptB:
    instructions: str
    labels: str
    description_list: tuple[str, ...]
    target_description: str
    marked_sentence: str

    def __post_init__(self):
        if len(self.description_list) > MAX_CANDIDATE_DESCRIPTIONS:
            raise ValueError("at most three candidate descriptions")

    def render(self) -> str:
        desc_lines = "".join(
            f"{i}. {desc}\n" for i, desc in enumerate(self.description_list, start=1)
        )
        return (
            f"{self.instructions}\n\n{self.labels}\n\n"
            f"{DESCRIPTION_LIST_HEADER}\n{desc_lines}"
            f"Target Event Description: {self.target_description}\n"
            f"Target Mention Sentence: {self.marked_sentence}\n"
        )


def marked_views(mention: Mention) -> tuple[str, str]:
    """(document, sentence) with the trigger marked in both."""
    doc = mark_trigger(mention.doc_text, mention.doc_trigger_span)
    sent = mark_trigger(mention.sentence_text, (mention.trigger_start, mention.trigger_end))
    return doc, sent


def build_prompt_a(mention: Mention) -> PromptA:
    doc, sent = marked_views(mention)
    return PromptA(
        instructions=_instructions(INSTRUCTION_ITEMS),
        labels=_labels(LABEL_DEFINITIONS),
        marked_document=doc,
        marked_sentence=sent,
    )


def build_prompt_b(
    mention: Mention, target_description: str, candidate_descriptions: list[str]
) -> PromptB:
    _, sent = marked_views(mention)
    return PromptB(
        instructions=_instructions(INSTRUCTION_ITEMS + (INSTRUCTION_ITEM_6,)),
        labels=_labels(LABEL_DEFINITIONS + (MOST_INFORMATIVE_LABEL,)),
        description_list=tuple(candidate_descriptions[:MAX_CANDIDATE_DESCRIPTIONS]),
        target_description=target_description,
        marked_sentence=sent,
    )
