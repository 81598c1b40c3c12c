"""Two-step extraction pipeline against a provider-agnostic LLM client.

Step 1 prompts for the roleset, document-level arguments, and a one-sentence
event description per mention. Step 2 retrieves the most informative similar
descriptions from the same topic and prompts again so missing corpus-level
fields (date, location) can be filled in; step-2 output only ever fills
fields the step-1 draft left empty.

Responses are cached in content-addressed files keyed by the SHA-256 of the
prompt, so reruns cost zero client calls. Per-mention failures are isolated:
a bad response marks that mention failed and the batch continues.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol

import numpy as np

from .annotations import (
    EMPTY,
    ArgValue,
    Empty,
    EntityRef,
    NestedEvent,
    TimeRef,
    XAmr,
    parse_time,
)
from .corpus import Mention
from .embedding import EmbeddingProvider, HashingEmbedder, cosine
from .errors import ClientError, MalformedRolesetId, MissingRequiredKey, NoJsonFound
from .frames import parse_roleset_id
from .prompts import build_prompt_a, build_prompt_b

_WIKI_RE = re.compile(r"^/wiki/.+$")


@dataclass(frozen=True)
class DecodingParams:
    temperature: float = 0.0  # deterministic by default
    max_tokens: int = 1024


class LlmClient(Protocol):
    model: str

    def send(self, prompt: str, params: DecodingParams) -> str: ...


class HttpLlmClient:
    """Chat-completion client over HTTPS; the API key comes from the
    XAMR_LLM_API_KEY environment variable and is never logged."""

    def __init__(
        self,
        base_url: str,
        model: str,
        timeout: float = 60.0,
        max_retries: int = 2,
        trace: bool = False,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.timeout = timeout
        self.max_retries = max_retries
        self.trace = trace

    def send(self, prompt: str, params: DecodingParams) -> str:
        import httpx

        api_key = os.environ.get("XAMR_LLM_API_KEY", "")
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        if self.trace:
            print(f"[trace] POST {self.base_url}/chat/completions body={json.dumps(body)[:2000]}")
        last = None
        for _ in range(self.max_retries + 1):
            try:
                resp = httpx.post(
                    f"{self.base_url}/chat/completions",
                    json=body,
                    headers={"Authorization": f"Bearer {api_key}"},
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                payload = resp.json()
                if self.trace:
                    print(f"[trace] response={json.dumps(payload)[:2000]}")
                return payload["choices"][0]["message"]["content"]
            except Exception as e:  # noqa: BLE001 - every transport failure is retryable
                last = e
        raise ClientError(f"LLM call failed after {self.max_retries + 1} attempts: {last}")


class CannedResponseClient:
    """Deterministic mock: responses read from files named by the SHA-256 of
    the prompt. Missing responses raise ClientError."""

    def __init__(self, directory: str | Path, model: str = "canned"):
        self.directory = Path(directory)
        self.model = model
        self.calls = 0

    def send(self, prompt: str, params: DecodingParams) -> str:
        self.calls += 1
        path = self.directory / f"{prompt_key(prompt)}.txt"
        if not path.exists():
            raise ClientError(f"no canned response for prompt {prompt_key(prompt)}")
        return path.read_text(encoding="utf-8")


def prompt_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class ResponseCache:
    """Content-addressed prompt->response cache; safe for concurrent writes."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, prompt: str) -> Path:
        return self.directory / f"{prompt_key(prompt)}.txt"

    def get(self, prompt: str) -> Optional[str]:
        path = self._path(prompt)
        if path.exists():
            return path.read_text(encoding="utf-8")
        return None

    def put(self, prompt: str, response: str) -> None:
        path = self._path(prompt)
        tmp = path.with_suffix(".tmp")
        with self._lock:
            tmp.write_text(response, encoding="utf-8")
            tmp.replace(path)


# -- response parsing ------------------------------------------------------------

RESPONSE_KEYS = {
    "rolesetid": "roleset_id",
    "arg0": "arg0",
    "arg0coreference": "arg0_coref",
    "arg1": "arg1",
    "arg1coreference": "arg1_coref",
    "arg1rolesetid": "arg1_roleset_id",
    "arglocation": "arg_location",
    "argtime": "arg_time",
    "eventdescription": "event_description",
    "mostinformativeeventdescription": "most_informative",
}

REQUIRED_KEYS = ("roleset_id", "arg0", "arg1", "arg_location", "arg_time", "event_description")


@dataclass(frozen=True)
class LlmResponseA:
    roleset_id: str
    arg0: Optional[str]
    arg0_coref: Optional[str]
    arg1: Optional[str]
    arg1_coref: Optional[str]
    arg1_roleset_id: Optional[str]
    arg_location: Optional[str]
    arg_time: TimeRef
    event_description: str
    most_informative: Optional[str] = None
    time_recognized: bool = True

    def render(self) -> str:
        """Inverse of parse_response_a on field values (used by tests and the
        scripted mock)."""
        payload = {
            "Roleset ID": self.roleset_id,
            "ARG-0": self.arg0 or "",
            "ARG-0 Coreference": self.arg0_coref or "",
            "ARG-1": self.arg1 or "",
            "ARG-1 Coreference": self.arg1_coref or "",
            "ARG-1 Roleset ID": self.arg1_roleset_id or "",
            "ARG-Location": self.arg_location or "",
            "ARG-Time": self.arg_time.canonical(),
            "Event Description": self.event_description,
        }
        if self.most_informative is not None:
            payload["Most Informative Event Description"] = self.most_informative
        return json.dumps(payload, ensure_ascii=False, indent=1)


def _first_json_object(text: str) -> dict:
    decoder = json.JSONDecoder()
    for start in range(len(text)):
        if text[start] != "{":
            continue
        try:
            obj, _ = decoder.raw_decode(text[start:])
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            return obj
    raise NoJsonFound("no JSON object found in response")


def _norm_key(key: str) -> str:
    return re.sub(r"[^a-z0-9]", "", key.lower())


def _clean(value) -> Optional[str]:
    if value is None:
        return None
    value = str(value).strip()
    return value or None


def parse_response_a(text: str) -> LlmResponseA:
    """Tolerantly extract the first JSON object and map its keys.

    Key matching ignores case and punctuation so ``Roleset_ID`` and
    ``Roleset ID`` are the same key. Empty strings count as absent; absent
    required keys raise MissingRequiredKey. Wiki references that do not
    start with ``/wiki/`` are dropped; an unparseable date leaves the time
    empty and flags it.
    """
    obj = _first_json_object(text)
    fields: dict[str, Optional[str]] = {}
    for key, value in obj.items():
        name = RESPONSE_KEYS.get(_norm_key(key))
        if name:
            fields[name] = _clean(value)
    for required in REQUIRED_KEYS:
        if required not in fields:
            raise MissingRequiredKey(required)
    if fields.get("roleset_id") is None:
        raise MissingRequiredKey("roleset_id")

    def wiki(name: str) -> Optional[str]:
        value = fields.get(name)
        return value if value is not None and _WIKI_RE.match(value) else None

    parsed_time = parse_time(fields.get("arg_time") or "")
    return LlmResponseA(
        roleset_id=fields["roleset_id"],
        arg0=fields.get("arg0"),
        arg0_coref=wiki("arg0_coref"),
        arg1=fields.get("arg1"),
        arg1_coref=wiki("arg1_coref"),
        arg1_roleset_id=fields.get("arg1_roleset_id"),
        arg_location=fields.get("arg_location"),
        arg_time=parsed_time.time,
        event_description=fields.get("event_description") or "",
        most_informative=fields.get("most_informative"),
        time_recognized=parsed_time.recognized,
    )


# -- event descriptions and retrieval ---------------------------------------------

_COMPLETE_DATE_RES = (
    re.compile(
        r"\b(january|february|march|april|may|june|july|august|september|october|november|december)"
        r"\.?\s+\d{1,2}(st|nd|rd|th)?\s*,?\s*\d{4}",
        re.IGNORECASE,
    ),
    re.compile(r"\b\d{1,2}/\d{1,2}/\d{4}\b"),
    re.compile(r"\b\d{2}-\d{2}-\d{4}\b"),
)


def count_wiki_links(text: str) -> int:
    return len(re.findall(r"/wiki/[^\s\"',)\]]+", text))


def has_complete_date(text: str) -> bool:
    return any(rx.search(text) for rx in _COMPLETE_DATE_RES)


@dataclass(frozen=True)
class EventDescription:
    mention_id: str
    text: str
    wiki_link_count: int
    complete_date: bool
    embedding: np.ndarray = field(compare=False, repr=False)

    @property
    def informativeness(self) -> int:
        return self.wiki_link_count + (1 if self.complete_date else 0)

    @classmethod
    def from_text(
        cls, mention_id: str, text: str, provider: EmbeddingProvider
    ) -> "EventDescription":
        return cls(
            mention_id=mention_id,
            text=text,
            wiki_link_count=count_wiki_links(text),
            complete_date=has_complete_date(text),
            embedding=provider.embed(text),
        )


def select_candidates(
    descriptions: list[EventDescription], target: EventDescription
) -> list[EventDescription]:
    """Pick at most three candidate descriptions for the retrieval prompt:
    prefer informative ones (wiki links or a complete date) when any exist,
    rank by cosine to the target with informativeness breaking ties."""
    pool = [d for d in descriptions if d.mention_id != target.mention_id]
    informative = [d for d in pool if d.informativeness >= 1]
    if informative:
        pool = informative
    pool.sort(
        key=lambda d: (
            -cosine(target.embedding, d.embedding),
            -d.informativeness,
            d.mention_id,
        )
    )
    return pool[:3]


# -- pipeline -----------------------------------------------------------------

@dataclass(frozen=True)
class PipelineFailure:
    mention_id: str
    stage: str  # "step_a" or "step_b"
    error: str


@dataclass
class PipelineResult:
    annotations: list[XAmr]
    descriptions: list[EventDescription]
    failures: list[PipelineFailure]
    client_calls: int


def _arg1_value(resp: LlmResponseA) -> ArgValue:
    if resp.arg1_roleset_id:
        try:
            return NestedEvent(parse_roleset_id(resp.arg1_roleset_id))
        except MalformedRolesetId:
            pass
    if resp.arg1:
        return EntityRef(resp.arg1, resp.arg1_coref)
    return EMPTY


def _location_value(resp: LlmResponseA) -> Optional[EntityRef]:
    if not resp.arg_location:
        return None
    wiki = resp.arg_location if _WIKI_RE.match(resp.arg_location) else None
    return EntityRef(resp.arg_location, wiki)


def _draft_xamr(mention_id: str, resp: LlmResponseA, annotator_id: str) -> XAmr:
    return XAmr(
        mention_id=mention_id,
        roleset=parse_roleset_id(resp.roleset_id),
        arg0=EntityRef(resp.arg0, resp.arg0_coref) if resp.arg0 else None,
        arg1=_arg1_value(resp),
        arg_loc=_location_value(resp),
        arg_time=resp.arg_time if not resp.arg_time.is_empty() else None,
        annotator_id=annotator_id,
    )


def _merge_step_b(draft: XAmr, resp: LlmResponseA) -> XAmr:
    """Fill only the fields the step-1 draft left empty."""
    updates = {}
    if draft.arg0 is None and resp.arg0:
        updates["arg0"] = EntityRef(resp.arg0, resp.arg0_coref)
    if isinstance(draft.arg1, Empty):
        arg1 = _arg1_value(resp)
        if not isinstance(arg1, Empty):
            updates["arg1"] = arg1
    if draft.arg_loc is None:
        loc = _location_value(resp)
        if loc is not None:
            updates["arg_loc"] = loc
    if (draft.arg_time is None or draft.arg_time.is_empty()) and not resp.arg_time.is_empty():
        updates["arg_time"] = resp.arg_time
    if not updates:
        return draft
    return dataclasses.replace(draft, **updates)


class _CachedSend:
    def __init__(self, client: LlmClient, cache: Optional[ResponseCache], params: DecodingParams):
        self.client = client
        self.cache = cache
        self.params = params
        self.calls = 0
        self._lock = threading.Lock()

    def __call__(self, prompt: str) -> str:
        if self.cache is not None:
            hit = self.cache.get(prompt)
            if hit is not None:
                return hit
        with self._lock:
            self.calls += 1
        response = self.client.send(prompt, self.params)
        if self.cache is not None:
            self.cache.put(prompt, response)
        return response


def run_pipeline(
    mentions: list[Mention],
    client: LlmClient,
    cache_dir: str | Path | None = None,
    annotator_id: str | None = None,
    params: DecodingParams = DecodingParams(),
    provider: EmbeddingProvider | None = None,
    parallelism: int = 1,
) -> PipelineResult:
    """Run the full two-step extraction over ``mentions``.

    Phase-complete: every step-1 prompt runs before any step-2 prompt, since
    step 2 retrieves across the step-1 descriptions of the whole topic.
    Output order follows input order regardless of completion order.
    """
    provider = provider or HashingEmbedder()
    annotator_id = annotator_id or getattr(client, "model", "llm")
    cache = ResponseCache(cache_dir) if cache_dir is not None else None
    send = _CachedSend(client, cache, params)

    drafts: dict[str, XAmr] = {}
    responses_a: dict[str, LlmResponseA] = {}
    descriptions: dict[str, EventDescription] = {}
    failures: list[PipelineFailure] = []
    fail_lock = threading.Lock()

    def step_a(mention: Mention):
        prompt = build_prompt_a(mention).render()
        try:
            resp = parse_response_a(send(prompt))
            draft = _draft_xamr(mention.mention_id, resp, annotator_id)
        except Exception as e:  # noqa: BLE001 - per-mention isolation
            with fail_lock:
                failures.append(PipelineFailure(mention.mention_id, "step_a", str(e)))
            return
        responses_a[mention.mention_id] = resp
        drafts[mention.mention_id] = draft
        descriptions[mention.mention_id] = EventDescription.from_text(
            mention.mention_id, resp.event_description, provider
        )

    def run_phase(fn, items):
        if parallelism <= 1:
            for item in items:
                fn(item)
        else:
            with ThreadPoolExecutor(max_workers=parallelism) as pool:
                list(pool.map(fn, items))

    run_phase(step_a, mentions)

    by_topic: dict[int, list[EventDescription]] = {}
    topic_of = {m.mention_id: m.topic_id for m in mentions}
    for mid, desc in descriptions.items():
        by_topic.setdefault(topic_of[mid], []).append(desc)
    for topic_descs in by_topic.values():
        topic_descs.sort(key=lambda d: d.mention_id)

    annotations: dict[str, XAmr] = {}

    def step_b(mention: Mention):
        if mention.mention_id not in drafts:
            return
        target = descriptions[mention.mention_id]
        candidates = select_candidates(by_topic[mention.topic_id], target)
        prompt = build_prompt_b(mention, target.text, [c.text for c in candidates]).render()
        try:
            resp = parse_response_a(send(prompt))
        except Exception as e:  # noqa: BLE001
            with fail_lock:
                failures.append(PipelineFailure(mention.mention_id, "step_b", str(e)))
            # the step-1 draft still stands
            annotations[mention.mention_id] = drafts[mention.mention_id]
            return
        annotations[mention.mention_id] = _merge_step_b(drafts[mention.mention_id], resp)

    run_phase(step_b, mentions)

    ordered = [annotations[m.mention_id] for m in mentions if m.mention_id in annotations]
    ordered_descs = [descriptions[m.mention_id] for m in mentions if m.mention_id in descriptions]
    failures.sort(key=lambda f: (f.stage, f.mention_id))
    return PipelineResult(
        annotations=ordered,
        descriptions=ordered_descs,
        failures=failures,
        client_calls=send.calls,
    )
