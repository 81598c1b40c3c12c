"""PropBank rolesets: identifiers, frame-file ingestion, and search.

Frame files are the standard frameset XML: a ``frameset`` root holding
``predicate lemma="..."`` elements, each holding ``roleset id="lemma.NN"
name="..."`` elements with ``roles/role`` children (attributes ``n`` and
``descr``) and optional ``aliases/alias`` children. Unknown elements are
ignored.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

from .errors import FrameParseError, MalformedRolesetId

_SENSE_RE = re.compile(r"^(\d{2}|LV)$")
_LEMMA_RE = re.compile(r"^[^\s.]+$")


@dataclass(frozen=True, order=True)
class RolesetId:
    """A predicate sense, canonically written ``lemma.sense`` (e.g. agree.01)."""

    lemma: str
    sense: str

    def __post_init__(self):
        if not _LEMMA_RE.match(self.lemma) or self.lemma != self.lemma.lower():
            raise MalformedRolesetId(f"bad lemma: {self.lemma!r}")
        if not _SENSE_RE.match(self.sense):
            raise MalformedRolesetId(f"bad sense: {self.sense!r}")

    def __str__(self) -> str:
        return f"{self.lemma}.{self.sense}"


def parse_roleset_id(text: str) -> RolesetId:
    """Parse a roleset id, accepting both the dot and the dash spelling.

    ``acquire.01`` is the canonical form; a single trailing ``-NN`` (as in
    AMR's ``acquire-01``) is treated as ``.NN``. Raises MalformedRolesetId
    when there is no sense separator, more than one dot, or the parts do
    not form a legal lemma/sense pair.
    """
    if not text:
        raise MalformedRolesetId("empty roleset id")
    text = text.strip()
    if "." in text:
        parts = text.split(".")
        if len(parts) != 2:
            raise MalformedRolesetId(f"multiple sense separators in {text!r}")
        lemma, sense = parts
    else:
        m = re.match(r"^(.+)-(\d{2}|[Ll][Vv])$", text)
        if not m:
            raise MalformedRolesetId(f"no sense separator in {text!r}")
        lemma, sense = m.group(1), m.group(2)
    return RolesetId(lemma.lower(), sense.upper())


@dataclass(frozen=True)
class Roleset:
    id: RolesetId
    definition: str
    roles: tuple[tuple[str, str], ...]  # (label, description), label unique
    aliases: tuple[str, ...] = ()

    def __post_init__(self):
        labels = [label for label, _ in self.roles]
        if len(labels) != len(set(labels)):
            raise ValueError(f"duplicate role labels in {self.id}: {labels}")


def _role_label(n: str, f: str) -> str:
    if n.isdigit():
        return f"ARG-{n}"
    if n.upper() == "M":
        return f"ARG-M-{f.upper()}" if f else "ARG-M"
    raise ValueError(f"unsupported role number {n!r}")


def _parse_frame_file(path: Path) -> list[Roleset]:
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as e:
        raise FrameParseError(f"not well-formed XML: {e}", str(path), f"line {e.position[0]}")
    rolesets = []
    for predicate in root.iter("predicate"):
        for rs in predicate.findall("roleset"):
            rs_id = rs.get("id", "")
            try:
                rid = parse_roleset_id(rs_id)
            except MalformedRolesetId as e:
                raise FrameParseError(f"bad roleset id: {e}", str(path), rs_id or "<missing id>")
            roles: list[tuple[str, str]] = []
            for roles_el in rs.findall("roles"):
                for role in roles_el.findall("role"):
                    try:
                        label = _role_label(role.get("n", ""), role.get("f", ""))
                    except ValueError as e:
                        raise FrameParseError(str(e), str(path), str(rid))
                    roles.append((label, role.get("descr", "")))
            aliases = tuple(
                alias.text.strip()
                for aliases_el in rs.findall("aliases")
                for alias in aliases_el.findall("alias")
                if alias.text and alias.text.strip()
            )
            try:
                rolesets.append(Roleset(rid, rs.get("name", ""), tuple(roles), aliases))
            except ValueError as e:
                raise FrameParseError(str(e), str(path), str(rid))
    return rolesets


class FrameIndex:
    """Read-only index of rolesets, searchable by lemma, alias, and definition."""

    def __init__(self, rolesets: list[Roleset] | None = None):
        self._by_id: dict[RolesetId, Roleset] = {}
        self._by_lemma: dict[str, list[Roleset]] = {}
        self._by_alias: dict[str, list[Roleset]] = {}
        for rs in rolesets or []:
            self._add(rs)

    def _add(self, rs: Roleset) -> None:
        self._by_id[rs.id] = rs
        self._by_lemma.setdefault(rs.id.lemma, []).append(rs)
        for alias in rs.aliases:
            self._by_alias.setdefault(alias.lower(), []).append(rs)

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, rid: RolesetId) -> bool:
        return rid in self._by_id

    def get(self, rid: RolesetId) -> Roleset | None:
        return self._by_id.get(rid)

    def by_lemma(self, lemma: str) -> list[Roleset]:
        return sorted(self._by_lemma.get(lemma.lower(), []), key=lambda r: r.id)

    def all(self) -> list[Roleset]:
        return sorted(self._by_id.values(), key=lambda r: r.id)


def load_frames(source: str | Path) -> FrameIndex:
    """Load every ``*.xml`` frame file under ``source`` into a FrameIndex."""
    source = Path(source)
    index = FrameIndex()
    for path in sorted(source.glob("*.xml")):
        for rs in _parse_frame_file(path):
            index._add(rs)
    return index


def search_rolesets(index: FrameIndex, query: str, k: int = 10) -> list[Roleset]:
    """Rank rolesets for a query: exact-lemma matches first (sense ascending),
    then alias matches, then definition-substring matches. Deterministic; at
    most ``k`` results; an empty query matches nothing.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    query = query.strip().lower()
    if not query:
        return []
    seen: set[RolesetId] = set()
    out: list[Roleset] = []

    def take(candidates: list[Roleset]) -> None:
        for rs in candidates:
            if rs.id not in seen:
                seen.add(rs.id)
                out.append(rs)

    take(index.by_lemma(query))
    take(sorted(index._by_alias.get(query, []), key=lambda r: r.id))
    take(sorted((rs for rs in index.all() if query in rs.definition.lower()), key=lambda r: r.id))
    return out[:k]
