"""Read-model payloads shared by the CLI and the HTTP service.

Both front ends serialize through canonical_json, so the same workspace
state always yields byte-identical output regardless of the transport.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import analytics
from .analytics import StoreView
from .annotate import LayeredDocument, load_document
from .corpus import BiographyEntry, Corpus, PersonRecord, UNKNOWN, aggregate_persons, parse_corpus
from .errors import BiographError
from .graphstore import Iris, Literal, QuadStore, RDF_TYPE, parse as parse_store


class ViewError(BiographError):
    """Carries an error code for the HTTP envelope."""

    def __init__(self, code: str, message: str, details=None):
        super().__init__(message)
        self.code = code
        self.details = details


def canonical_json(payload) -> bytes:
    """One JSON encoding for everything user facing; stable byte output."""
    return (
        json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
        + "\n"
    ).encode("utf-8")


# ---------------------------------------------------------------------------
# Workspace


@dataclass
class Workspace:
    corpus: Corpus
    persons: list[PersonRecord]
    store: QuadStore
    lads: dict[str, LayeredDocument] = field(default_factory=dict)
    iris: Iris = field(default_factory=Iris)

    @classmethod
    def load(
        cls,
        corpus_path: str | Path,
        store_path: str | Path | None = None,
        lads_dir: str | Path | None = None,
        corpus_format: str | None = None,
    ) -> "Workspace":
        corpus_path = Path(corpus_path)
        fmt = corpus_format or ("xml" if corpus_path.suffix == ".xml" else "json")
        corpus = parse_corpus(corpus_path.read_bytes(), fmt)
        persons = aggregate_persons(list(corpus.entries), list(corpus.links))
        store = QuadStore()
        if store_path is not None:
            store = parse_store(Path(store_path).read_bytes())
        lads = {}
        if lads_dir is not None:
            for p in sorted(Path(lads_dir).glob("*.json")):
                lad = load_document(p.read_text(encoding="utf-8"))
                lads[lad.doc_id] = lad
        return cls(corpus, persons, store, lads)

    def person(self, person_id: str) -> PersonRecord:
        for p in self.persons:
            if p.person_id == person_id:
                return p
        raise ViewError("not-found", f"unknown person: {person_id}")

    def person_of_entry(self, entry_id: str) -> str | None:
        for p in self.persons:
            if entry_id in p.entry_ids:
                return p.person_id
        return None

    def entry(self, entry_id: str) -> BiographyEntry:
        return self.corpus.entry(entry_id)

    def person_labels(self) -> dict[str, str]:
        out = {}
        for p in self.persons:
            entry = self.entry(p.entry_ids[0])
            names = [n for n in entry.person_metadata.names if n.strip()]
            out[self.iris.person(p.person_id)] = names[0] if names else p.person_id
        return out


# ---------------------------------------------------------------------------
# Search

FACET_FIELDS = (
    "source", "gender", "birth-century", "place", "profession", "event-type"
)
_MATCH_WEIGHTS = {"name": 0, "metadata": 1, "text": 2}
MAX_PAGE_SIZE = 200


def _facet_value(ws: Workspace, entry: BiographyEntry, facet: str) -> str:
    meta = entry.person_metadata
    if facet == "source":
        return entry.source_id
    if facet == "gender":
        return meta.gender
    if facet == "birth-century":
        if meta.birth is not None and meta.birth.date is not None:
            return str(meta.birth.date.century)
        return UNKNOWN
    if facet == "place":
        for ev in (meta.birth, meta.death):
            if ev is not None and ev.place:
                return ev.place
        return UNKNOWN
    if facet == "profession":
        return meta.occupation[0] if meta.occupation else UNKNOWN
    if facet == "event-type":
        lad = ws.lads.get(entry.entry_id)
        if lad is not None:
            for pred in lad.predicates:
                if pred.frame_id is not None:
                    return pred.frame_id
        if meta.birth is not None:
            return "Birth"
        if meta.death is not None:
            return "Death"
        return UNKNOWN
    raise ViewError("bad-facet", f"unknown facet field: {facet!r}")


def _match_entry(ws: Workspace, entry: BiographyEntry, q: str) -> str | None:
    """Best matching field for a query, or None. Empty query matches all."""
    if not q:
        return "text"
    needle = q.casefold()
    meta = entry.person_metadata
    if any(needle in name.casefold() for name in meta.names):
        return "name"
    meta_values = [entry.source_id, meta.gender, *meta.education, *meta.occupation]
    for ev in (meta.birth, meta.death):
        if ev is not None:
            if ev.place:
                meta_values.append(ev.place)
            if ev.date is not None:
                meta_values.append(ev.date.lexical())
    if any(needle in v.casefold() for v in meta_values):
        return "metadata"
    lad = ws.lads.get(entry.entry_id)
    if lad is not None:
        for term in lad.terms:
            if term.lemma.casefold() == needle:
                return "text"
        for tok in lad.tokens:
            if tok.surface.casefold() == needle:
                return "text"
    else:
        if needle in (w.casefold() for w in entry.text.split()):
            return "text"
    return None


def parse_search_request(body: dict) -> dict:
    q = body.get("q", "")
    if not isinstance(q, str):
        raise ViewError("bad-request", "q must be a string")
    facets = body.get("facets") or {}
    if not isinstance(facets, dict):
        raise ViewError("bad-request", "facets must be an object")
    for fld in facets:
        if fld not in FACET_FIELDS:
            raise ViewError("bad-facet", f"unknown facet field: {fld!r}")
    page = body.get("page", 1)
    page_size = body.get("pageSize", 20)
    if not isinstance(page, int) or page < 1:
        raise ViewError("bad-request", "page must be a positive integer")
    if not isinstance(page_size, int) or not 1 <= page_size <= MAX_PAGE_SIZE:
        raise ViewError(
            "bad-request", f"pageSize must be between 1 and {MAX_PAGE_SIZE}"
        )
    return {"q": q, "facets": {f: list(v) for f, v in facets.items()},
            "page": page, "pageSize": page_size}


def search(ws: Workspace, request: dict) -> dict:
    req = parse_search_request(request)
    hits: list[tuple[int, str, str]] = []  # (weight, entry_id, field)
    for entry in ws.corpus.entries:
        fld = _match_entry(ws, entry, req["q"])
        if fld is None:
            continue
        keep = True
        for facet, accepted in req["facets"].items():
            if _facet_value(ws, entry, facet) not in accepted:
                keep = False
                break
        if keep:
            hits.append((_MATCH_WEIGHTS[fld], entry.entry_id, fld))
    hits.sort(key=lambda h: (h[0], h[1]))
    facet_counts: dict[str, dict[str, int]] = {f: {} for f in FACET_FIELDS}
    for _, entry_id, _ in hits:
        entry = ws.entry(entry_id)
        for f in FACET_FIELDS:
            value = _facet_value(ws, entry, f)
            facet_counts[f][value] = facet_counts[f].get(value, 0) + 1
    # persons ranked by their best entry hit
    best: dict[str, tuple[int, str]] = {}
    for weight, entry_id, _ in hits:
        pid = ws.person_of_entry(entry_id)
        if pid is None:
            continue
        key = (weight, pid)
        if pid not in best or key < best[pid]:
            best[pid] = key
    ranked = sorted(best.items(), key=lambda kv: kv[1])
    page, size = req["page"], req["pageSize"]
    window = hits[(page - 1) * size : page * size]
    return {
        "query": req,
        "total": len(hits),
        "page": page,
        "pageSize": size,
        "persons": [
            {
                "personId": pid,
                "names": list(
                    ws.entry(ws.person(pid).entry_ids[0]).person_metadata.names
                ),
                "matchWeight": weight_pid[0],
            }
            for pid, weight_pid in ranked
        ],
        "entries": [
            {
                "entryId": entry_id,
                "personId": ws.person_of_entry(entry_id),
                "matchField": fld,
            }
            for _, entry_id, fld in window
        ],
        "facets": facet_counts,
    }


# ---------------------------------------------------------------------------
# Person bundle / timeline


def person_bundle(ws: Workspace, person_id: str) -> dict:
    person = ws.person(person_id)
    view = StoreView(ws.store, ws.iris)
    originals = []
    derived = []
    for entry_id in person.entry_ids:
        entry = ws.entry(entry_id)
        meta = entry.person_metadata
        orig_desc = ws.iris.description(entry_id, "original")
        originals.append(
            {
                "entryId": entry_id,
                "source": entry.source_id,
                "author": entry.file_desc.author,
                "names": list(meta.names),
                "birth": _life_event_json(meta.birth),
                "death": _life_event_json(meta.death),
                "provenance": orig_desc,
            }
        )
        nlp_desc = ws.iris.description(entry_id, "nlp")
        if view.objects(nlp_desc, RDF_TYPE):
            includes = sorted(
                o for o in view.objects(nlp_desc, "bgn:includes") if isinstance(o, str)
            )
            derived.append(
                {
                    "entryId": entry_id,
                    "includes": includes,
                    "provenance": nlp_desc,
                }
            )
    return {
        "personId": person.person_id,
        "iri": ws.iris.person(person.person_id),
        "entryIds": list(person.entry_ids),
        "originalDescriptions": originals,
        "derivedDescriptions": derived,
    }


def _life_event_json(ev):
    if ev is None:
        return None
    return {
        "date": ev.date.lexical() if ev.date is not None else None,
        "place": ev.place,
    }


def timeline_payload(ws: Workspace, person_id: str) -> dict:
    ws.person(person_id)
    try:
        tl = analytics.timeline(ws.iris.person(person_id), ws.store, ws.iris)
    except analytics.AnalyticsError as exc:
        raise ViewError("not-found", str(exc)) from exc
    return {
        "personId": person_id,
        "entries": [
            {
                "event": e.event_iri,
                "type": e.event_type,
                "date": e.date.lexical() if e.date is not None else None,
                "place": e.place,
                "sourceEntry": e.source_entry,
                "offsets": [list(o) for o in e.offsets],
            }
            for e in tl.entries
        ],
    }


# ---------------------------------------------------------------------------
# Fact view

FRAGMENT_CONTEXT = 60  # characters of surrounding text shown per mention


def _fragment(text: str, begin: int, end: int) -> dict:
    lo = max(0, begin - FRAGMENT_CONTEXT)
    hi = min(len(text), end + FRAGMENT_CONTEXT)
    return {
        "text": text[lo:hi],
        "highlightBegin": begin - lo,
        "highlightEnd": end - lo,
        "docBegin": begin,
        "docEnd": end,
    }


def fact_payload(ws: Workspace, person_id: str, kind: str) -> dict:
    ws.person(person_id)
    try:
        facts = analytics.fact_alternatives(
            ws.iris.person(person_id), kind, ws.store, ws.iris
        )
    except analytics.AnalyticsError as exc:
        code = "bad-request" if "fact kind" in str(exc) else "not-found"
        raise ViewError(code, str(exc)) from exc
    alternatives = []
    for i, alt in enumerate(facts.alternatives):
        sources = []
        for src in alt.sources:
            fragments = []
            if src.grounded and src.entry_id is not None:
                text = ws.entry(src.entry_id).text
                fragments = [_fragment(text, b, e) for b, e in src.offsets]
            sources.append(
                {
                    "entryId": src.entry_id,
                    "author": src.author,
                    "title": src.title,
                    "grounded": src.grounded,
                    "fragments": fragments,
                }
            )
        alternatives.append(
            {
                "value": alt.value,
                "sources": sources,
                "agreementWithSelected": analytics.classify_values(
                    kind, facts.alternatives[0].value, alt.value
                ),
                "selected": i == 0,
            }
        )
    return {"personId": person_id, "kind": kind, "alternatives": alternatives}


# ---------------------------------------------------------------------------
# Visualization payloads


def participation_payload(
    ws: Workspace,
    person_ids: list[str] | None = None,
    event_types: list[str] | None = None,
) -> dict:
    if person_ids is None:
        person_ids = sorted(p.person_id for p in ws.persons)
    else:
        for pid in person_ids:
            ws.person(pid)
    labels = ws.person_labels()
    graph = analytics.participation_graph(
        [ws.iris.person(pid) for pid in person_ids],
        ws.store,
        event_types=event_types,
        labels=labels,
        iris=ws.iris,
    )
    series = analytics.climax_scores(ws.store, ws.iris)
    return analytics.storyteller_export(graph, series)


def climax_payload(ws: Workspace, count_events: bool = False) -> dict:
    series = analytics.climax_scores(ws.store, ws.iris, count_events=count_events)
    return {
        "scoring": "events" if count_events else "participants",
        "groups": [
            {
                "type": g.event_type,
                "points": [{"year": p.year, "score": p.score} for p in g.points],
            }
            for g in series.groups
        ],
    }


# ---------------------------------------------------------------------------
# Provenance

DOCS_LINK = "/docs/provenance.md"


def provenance_payload(ws: Workspace, entity: str) -> dict:
    view = StoreView(ws.store, ws.iris)
    if entity not in view.by_subject:
        raise ViewError("not-found", f"unknown entity: {entity}")
    derived = [o for o in view.objects(entity, "prov:wasDerivedFrom") if isinstance(o, str)]
    payload: dict = {
        "entity": entity,
        "documentation": DOCS_LINK,
        "data": {"derivedFrom": sorted(derived)},
    }
    activities = [
        o for o in view.objects(entity, "prov:wasGeneratedBy") if isinstance(o, str)
    ]
    if not activities:
        return payload
    act = activities[0]
    subs = sorted(
        (o for o in view.objects(act, "bgn:subActivity") if isinstance(o, str)),
        key=lambda s: _literal_int(view, s, "bgn:stepIndex"),
    )
    payload["process"] = {
        "activity": act,
        "used": sorted(o for o in view.objects(act, "prov:used") if isinstance(o, str)),
        "steps": [
            {
                "name": _literal_str(view, sub, "bgn:stepName"),
                "toolVersion": _literal_str(view, sub, "bgn:toolVersion"),
                "commit": _literal_str(view, sub, "bgn:commit"),
                "planStep": next(
                    (o for o in view.objects(sub, "pplan:correspondsToStep")
                     if isinstance(o, str)),
                    None,
                ),
            }
            for sub in subs
        ],
    }
    payload["responsibility"] = [
        {
            "agent": agent,
            "role": _literal_str(view, agent, "bgn:agentRole"),
            "contact": _literal_str(view, agent, "bgn:contact"),
        }
        for agent in sorted(
            o for o in view.objects(act, "prov:wasAssociatedWith") if isinstance(o, str)
        )
    ]
    return payload


def _literal_str(view: StoreView, s: str, p: str) -> str | None:
    for o in view.objects(s, p):
        if isinstance(o, Literal):
            return str(o.value)
    return None


def _literal_int(view: StoreView, s: str, p: str) -> int:
    for o in view.objects(s, p):
        if isinstance(o, Literal):
            return int(o.value)
    return 0
