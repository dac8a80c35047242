"""Input document model: biography entries, person aggregation, corpus stats.

An entry has three parts: a file description (author/publisher/year), the
person metadata, and the biography text. Entries for the same historical
person are grouped into a PersonRecord. Offsets into the text count Unicode
scalar values after line endings are normalized to a single newline.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .dates import PartialDate
from .errors import IntegrityError, ParseError

FACET_NAMES = ("source", "gender", "birth-century", "death-century")
GENDERS = ("female", "male", "unknown")
UNKNOWN = "unknown"


def normalize_text(text: str) -> str:
    """Canonical indexing convention: \\r\\n and \\r become \\n."""
    return text.replace("\r\n", "\n").replace("\r", "\n")


@dataclass(frozen=True)
class LifeEvent:
    date: PartialDate | None = None
    place: str | None = None


@dataclass(frozen=True)
class FileDesc:
    author: str | None = None
    publisher: str | None = None
    year: int | None = None


@dataclass(frozen=True)
class PersonMetadata:
    names: tuple[str, ...] = ()
    gender: str = UNKNOWN
    birth: LifeEvent | None = None
    death: LifeEvent | None = None
    education: tuple[str, ...] = ()
    occupation: tuple[str, ...] = ()

    def __post_init__(self):
        if self.gender not in GENDERS:
            raise IntegrityError(f"unknown gender value: {self.gender!r}")


@dataclass(frozen=True)
class BiographyEntry:
    entry_id: str
    source_id: str
    file_desc: FileDesc
    person_metadata: PersonMetadata
    text: str

    def __post_init__(self):
        if not any(n.strip() for n in self.person_metadata.names):
            raise IntegrityError(f"entry {self.entry_id}: no usable name")


@dataclass(frozen=True)
class PersonRecord:
    person_id: str
    entry_ids: tuple[str, ...]

    def __post_init__(self):
        if not self.entry_ids:
            raise IntegrityError(f"person {self.person_id}: no entries")


@dataclass(frozen=True)
class Corpus:
    """Parsed entries plus the entry→person link relation."""

    entries: tuple[BiographyEntry, ...]
    links: tuple[tuple[str, str], ...] = ()

    def entry(self, entry_id: str) -> BiographyEntry:
        for e in self.entries:
            if e.entry_id == entry_id:
                return e
        raise KeyError(entry_id)


# ---------------------------------------------------------------------------
# Parsing / serialization


def _life_event_from_xml(el) -> LifeEvent:
    date_el = el.find("date")
    place_el = el.find("place")
    date = PartialDate.parse(date_el.text) if date_el is not None and date_el.text else None
    place = place_el.text if place_el is not None else None
    return LifeEvent(date=date, place=place)


def _entry_from_xml(bio) -> tuple[BiographyEntry, str | None]:
    entry_id = bio.get("id")
    source = bio.get("source")
    if not entry_id or not source:
        raise ParseError("biography element missing id or source attribute")
    fd_el = bio.find("fileDesc")
    fd = FileDesc()
    if fd_el is not None:
        year_el = fd_el.find("year")
        fd = FileDesc(
            author=getattr(fd_el.find("author"), "text", None),
            publisher=getattr(fd_el.find("publisher"), "text", None),
            year=int(year_el.text) if year_el is not None and year_el.text else None,
        )
    p_el = bio.find("person")
    if p_el is None:
        raise ParseError(f"biography {entry_id}: missing person element")
    birth = death = None
    for ev in p_el.findall("event"):
        kind = ev.get("type")
        if kind == "birth":
            birth = _life_event_from_xml(ev)
        elif kind == "death":
            death = _life_event_from_xml(ev)
        else:
            raise ParseError(f"biography {entry_id}: unknown event type {kind!r}")
    education = []
    occupation = []
    for st in p_el.findall("state"):
        kind = st.get("type")
        if kind == "education":
            education.append(st.text or "")
        elif kind == "occupation":
            occupation.append(st.text or "")
        else:
            raise ParseError(f"biography {entry_id}: unknown state type {kind!r}")
    gender_el = p_el.find("gender")
    meta = PersonMetadata(
        names=tuple(n.text or "" for n in p_el.findall("name")),
        gender=gender_el.text if gender_el is not None and gender_el.text else UNKNOWN,
        birth=birth,
        death=death,
        education=tuple(education),
        occupation=tuple(occupation),
    )
    text_el = bio.find("text")
    text = normalize_text(text_el.text or "") if text_el is not None else ""
    entry = BiographyEntry(entry_id, source, fd, meta, text)
    return entry, bio.get("person")


def _life_event_from_json(obj) -> LifeEvent | None:
    if obj is None:
        return None
    return LifeEvent(
        date=PartialDate.parse(obj["date"]) if obj.get("date") else None,
        place=obj.get("place"),
    )


def _entry_from_json(obj) -> tuple[BiographyEntry, str | None]:
    try:
        entry_id = obj["id"]
        source = obj["source"]
    except KeyError as exc:
        raise ParseError(f"biography object missing key {exc}") from exc
    fd_obj = obj.get("fileDesc") or {}
    fd = FileDesc(
        author=fd_obj.get("author"),
        publisher=fd_obj.get("publisher"),
        year=fd_obj.get("year"),
    )
    p = obj.get("person") or {}
    meta = PersonMetadata(
        names=tuple(p.get("names", ())),
        gender=p.get("gender") or UNKNOWN,
        birth=_life_event_from_json(p.get("birth")),
        death=_life_event_from_json(p.get("death")),
        education=tuple(p.get("education", ())),
        occupation=tuple(p.get("occupation", ())),
    )
    entry = BiographyEntry(
        entry_id, source, fd, meta, normalize_text(obj.get("text", ""))
    )
    return entry, obj.get("personId")


def parse_corpus(data: bytes | str, format: str) -> Corpus:
    """Parse a corpus document in XML or JSON form."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    pairs: list[tuple[BiographyEntry, str | None]] = []
    if format == "xml":
        try:
            root = ET.fromstring(data)
        except ET.ParseError as exc:
            line, col = exc.position
            raise ParseError("malformed XML document", line, col) from exc
        if root.tag != "corpus":
            raise ParseError(f"expected root element 'corpus', got {root.tag!r}")
        pairs = [_entry_from_xml(b) for b in root.findall("biography")]
    elif format == "json":
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError("malformed JSON document", exc.lineno, exc.colno) from exc
        pairs = [_entry_from_json(b) for b in doc.get("corpus", [])]
    else:
        raise ParseError(f"unknown corpus format: {format!r}")

    seen: set[str] = set()
    for entry, _ in pairs:
        if entry.entry_id in seen:
            raise ParseError(f"duplicate entry id: {entry.entry_id!r}")
        seen.add(entry.entry_id)
    links = tuple(
        (entry.entry_id, pid) for entry, pid in pairs if pid is not None
    )
    return Corpus(entries=tuple(e for e, _ in pairs), links=links)


def parse_entries(data: bytes | str, format: str) -> list[BiographyEntry]:
    return list(parse_corpus(data, format).entries)


def _life_event_to_json(ev: LifeEvent | None):
    if ev is None:
        return None
    out = {}
    if ev.date is not None:
        out["date"] = ev.date.lexical()
    if ev.place is not None:
        out["place"] = ev.place
    return out


def entry_to_json(entry: BiographyEntry, person_id: str | None = None) -> dict:
    fd = {}
    if entry.file_desc.author is not None:
        fd["author"] = entry.file_desc.author
    if entry.file_desc.publisher is not None:
        fd["publisher"] = entry.file_desc.publisher
    if entry.file_desc.year is not None:
        fd["year"] = entry.file_desc.year
    meta = entry.person_metadata
    p: dict = {"names": list(meta.names), "gender": meta.gender}
    if meta.birth is not None:
        p["birth"] = _life_event_to_json(meta.birth)
    if meta.death is not None:
        p["death"] = _life_event_to_json(meta.death)
    if meta.education:
        p["education"] = list(meta.education)
    if meta.occupation:
        p["occupation"] = list(meta.occupation)
    obj = {"id": entry.entry_id, "source": entry.source_id}
    if person_id is not None:
        obj["personId"] = person_id
    if fd:
        obj["fileDesc"] = fd
    obj["person"] = p
    obj["text"] = entry.text
    return obj


def serialize_corpus(corpus: Corpus, format: str = "json") -> str:
    link_map = dict(corpus.links)
    if format == "json":
        doc = {
            "corpus": [
                entry_to_json(e, link_map.get(e.entry_id)) for e in corpus.entries
            ]
        }
        return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"
    if format == "xml":
        root = ET.Element("corpus")
        for e in corpus.entries:
            bio = ET.SubElement(root, "biography", id=e.entry_id, source=e.source_id)
            pid = link_map.get(e.entry_id)
            if pid is not None:
                bio.set("person", pid)
            fd = e.file_desc
            if fd.author or fd.publisher or fd.year is not None:
                fd_el = ET.SubElement(bio, "fileDesc")
                if fd.author is not None:
                    ET.SubElement(fd_el, "author").text = fd.author
                if fd.publisher is not None:
                    ET.SubElement(fd_el, "publisher").text = fd.publisher
                if fd.year is not None:
                    ET.SubElement(fd_el, "year").text = str(fd.year)
            meta = e.person_metadata
            p_el = ET.SubElement(bio, "person")
            for n in meta.names:
                ET.SubElement(p_el, "name").text = n
            ET.SubElement(p_el, "gender").text = meta.gender
            for kind, ev in (("birth", meta.birth), ("death", meta.death)):
                if ev is None:
                    continue
                ev_el = ET.SubElement(p_el, "event", type=kind)
                if ev.date is not None:
                    ET.SubElement(ev_el, "date").text = ev.date.lexical()
                if ev.place is not None:
                    ET.SubElement(ev_el, "place").text = ev.place
            for kind, vals in (("education", meta.education), ("occupation", meta.occupation)):
                for v in vals:
                    ET.SubElement(p_el, "state", type=kind).text = v
            ET.SubElement(bio, "text").text = e.text
        ET.indent(root)
        return ET.tostring(root, encoding="unicode") + "\n"
    raise ParseError(f"unknown corpus format: {format!r}")


# ---------------------------------------------------------------------------
# Person aggregation


def aggregate_persons(
    entries: list[BiographyEntry], links: list[tuple[str, str]]
) -> list[PersonRecord]:
    """Group entries sharing a person id; unlinked entries become singletons."""
    known = {e.entry_id for e in entries}
    assigned: dict[str, str] = {}
    groups: dict[str, list[str]] = {}
    for entry_id, person_id in links:
        if entry_id not in known:
            raise IntegrityError(f"link references unknown entry {entry_id!r}")
        if entry_id in assigned and assigned[entry_id] != person_id:
            raise IntegrityError(
                f"entry {entry_id!r} linked to two persons: "
                f"{assigned[entry_id]!r} and {person_id!r}"
            )
        if entry_id not in assigned:
            assigned[entry_id] = person_id
            groups.setdefault(person_id, []).append(entry_id)
    records = [PersonRecord(pid, tuple(eids)) for pid, eids in groups.items()]
    for e in entries:
        if e.entry_id not in assigned:
            records.append(PersonRecord(f"person:{e.entry_id}", (e.entry_id,)))
    return records


# ---------------------------------------------------------------------------
# Corpus statistics


@dataclass
class CorpusStats:
    facets: tuple[str, ...]
    cells: dict[tuple[str, ...], int] = field(default_factory=dict)

    def total(self) -> int:
        return sum(self.cells.values())

    def marginal(self, facet: str) -> dict[str, int]:
        idx = self.facets.index(facet)
        out: dict[str, int] = {}
        for key, count in self.cells.items():
            out[key[idx]] = out.get(key[idx], 0) + count
        return out


def _facet_value(entry: BiographyEntry, facet: str) -> str:
    meta = entry.person_metadata
    if facet == "source":
        return entry.source_id
    if facet == "gender":
        return meta.gender
    if facet == "birth-century":
        if meta.birth is not None and meta.birth.date is not None:
            return str(meta.birth.date.century)
        return UNKNOWN
    if facet == "death-century":
        if meta.death is not None and meta.death.date is not None:
            return str(meta.death.date.century)
        return UNKNOWN
    raise IntegrityError(f"unknown facet name: {facet!r}")


def corpus_stats(entries: list[BiographyEntry], facets: list[str]) -> CorpusStats:
    for f in facets:
        if f not in FACET_NAMES:
            raise IntegrityError(f"unknown facet name: {f!r}")
    stats = CorpusStats(facets=tuple(facets))
    for e in entries:
        key = tuple(_facet_value(e, f) for f in facets)
        stats.cells[key] = stats.cells.get(key, 0) + 1
    return stats
