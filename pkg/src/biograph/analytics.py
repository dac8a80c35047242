"""Historical queries over the statement store.

Covers person timelines, concept statistics with synonym expansion,
adjective ratios per source, liberal name counting, participation graphs,
climax scores, and grouped fact alternatives with agreement classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .annotate import LayeredDocument, tokenize
from .corpus import BiographyEntry, UNKNOWN
from .dates import PartialDate
from .errors import BiographError
from .graphstore import Iris, Literal, QuadStore, RDF_TYPE
from .lexicon import LexiconSet


class AnalyticsError(BiographError):
    pass


# ---------------------------------------------------------------------------
# Store view helpers


def _entry_of_iri(iri: str, base: str) -> str | None:
    """Entry id embedded in instance/description/mention iris."""
    if not iri.startswith(base):
        return None
    parts = iri[len(base):].split("/")
    if len(parts) >= 2 and parts[0] in ("instance", "description", "mention", "proxy"):
        return parts[1]
    return None


class StoreView:
    """Indexes over a quad store for read-only analytics."""

    def __init__(self, store: QuadStore, iris: Iris = Iris()):
        self.store = store
        self.iris = iris
        self.by_subject: dict[str, list[tuple[str, object]]] = {}
        self.same_as: dict[str, str] = {}
        self.persons: set[str] = set()
        self.events: list[str] = []
        for s, p, o in store.triples():
            self.by_subject.setdefault(s, []).append((p, o))
            if p == "owl:sameAs" and isinstance(o, str):
                self.same_as[s] = o
            if p == RDF_TYPE and o == "edm:ProvidedCHO":
                self.persons.add(s)
            if p == RDF_TYPE and o == "sem:Event":
                self.events.append(s)
        self.events = sorted(set(self.events))

    def objects(self, s: str, p: str) -> list:
        out = [o for pred, o in self.by_subject.get(s, []) if pred == p]
        out.sort(key=lambda o: o.lexical() if isinstance(o, Literal) else str(o))
        return out

    def event_type(self, ev: str) -> str:
        types = [o for o in self.objects(ev, RDF_TYPE) if isinstance(o, str)]
        for t in types:
            if t.startswith("frame:"):
                return t.split(":", 1)[1]
        for t in types:
            if t.startswith("concept:"):
                return t.split(":", 1)[1]
        return "event"

    def event_time(self, ev: str) -> PartialDate | None:
        for o in self.objects(ev, "sem:hasTime"):
            if isinstance(o, Literal) and isinstance(o.value, PartialDate):
                return o.value
        return None

    def event_place(self, ev: str) -> str | None:
        for o in self.objects(ev, "sem:hasPlace"):
            if isinstance(o, Literal):
                return str(o.value)
        return None

    def event_participants(self, ev: str) -> list[str]:
        out = []
        for p in ("pb:Arg0", "pb:Arg1", "pb:Arg2"):
            out.extend(o for o in self.objects(ev, p) if isinstance(o, str))
        return out

    def resolved_participants(self, ev: str) -> set[str]:
        """Participants mapped through owl:sameAs when linked."""
        return {self.same_as.get(p, p) for p in self.event_participants(ev)}

    def mention_offsets(self, inst: str) -> list[tuple[int, int]]:
        spans = []
        for m in self.objects(inst, "gaf:denotedBy"):
            if not isinstance(m, str):
                continue
            begins = self.objects(m, "bgn:mentionBegin")
            ends = self.objects(m, "bgn:mentionEnd")
            if begins and ends:
                spans.append((int(begins[0].value), int(ends[0].value)))
        return sorted(spans)

    def description_meta(self, desc: str) -> dict:
        def first(p):
            objs = self.objects(desc, p)
            return str(objs[0].value) if objs else None

        return {
            "author": first("bgn:author"),
            "title": first("bgn:title"),
            "source": first("bgn:sourceId"),
        }


# ---------------------------------------------------------------------------
# Timelines


@dataclass(frozen=True)
class TimelineEntry:
    event_iri: str
    event_type: str
    date: PartialDate | None
    place: str | None
    source_entry: str | None
    offsets: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Timeline:
    person_iri: str
    entries: tuple[TimelineEntry, ...]


def timeline(person_iri: str, store: QuadStore, iris: Iris = Iris()) -> Timeline:
    view = StoreView(store, iris)
    if person_iri not in view.persons:
        raise AnalyticsError(f"unknown person: {person_iri}")
    entries = []
    for ev in view.events:
        if person_iri not in view.resolved_participants(ev):
            continue
        entries.append(
            TimelineEntry(
                event_iri=ev,
                event_type=view.event_type(ev),
                date=view.event_time(ev),
                place=view.event_place(ev),
                source_entry=_entry_of_iri(ev, iris.base),
                offsets=tuple(view.mention_offsets(ev)),
            )
        )
    entries.sort(key=_timeline_key)
    return Timeline(person_iri, tuple(entries))


def _timeline_key(e: TimelineEntry):
    dated = e.date is not None
    date_key = e.date.sort_key() if dated else (9999, 99, 99)
    first_offset = e.offsets[0][0] if e.offsets else -1
    return (not dated, date_key, first_offset, e.event_iri)


# ---------------------------------------------------------------------------
# Concept statistics


@dataclass
class ConceptStats:
    query: str
    concept_ids: tuple[str, ...]
    group_by: str
    counts: dict[str, int] = field(default_factory=dict)
    group_sizes: dict[str, int] = field(default_factory=dict)
    diagnostic: str | None = None

    def rates(self) -> dict[str, float]:
        return {
            g: (self.counts.get(g, 0) / self.group_sizes[g]) if self.group_sizes[g] else 0.0
            for g in self.group_sizes
        }


_GROUPS = ("source", "birth-century", "gender")


def _entry_group(entry: BiographyEntry, group_by: str) -> str:
    if group_by == "source":
        return entry.source_id
    if group_by == "gender":
        return entry.person_metadata.gender
    if group_by == "birth-century":
        b = entry.person_metadata.birth
        if b is not None and b.date is not None:
            return str(b.date.century)
        return UNKNOWN
    raise AnalyticsError(f"unknown grouping: {group_by!r}")


def concept_stats(
    query: str,
    group_by: str,
    store: QuadStore,
    entries: list[BiographyEntry],
    lexicons: LexiconSet,
    iris: Iris = Iris(),
) -> ConceptStats:
    """Count biographies whose NLP description includes the queried concept.

    The query resolves through the concept lexicon so synonymous lemmas
    count together; an unresolvable query falls back to lemma matching.
    """
    if group_by not in _GROUPS:
        raise AnalyticsError(f"unknown grouping: {group_by!r}")
    concept_ids = sorted(
        {
            sense.concept_id
            for (lemma, _pos), senses in lexicons.concepts.items()
            if lemma == query
            for sense in senses
        }
    )
    if query.startswith("c-") or query in {
        s.concept_id for senses in lexicons.concepts.values() for s in senses
    }:
        concept_ids = sorted(set(concept_ids) | {query})
    targets = {f"concept:{cid}" for cid in concept_ids} | {f"lemma:{query}"}
    view = StoreView(store, iris)
    stats = ConceptStats(query=query, concept_ids=tuple(concept_ids), group_by=group_by)
    if not concept_ids:
        stats.diagnostic = f"query {query!r} matches no concept; lemma matching only"
    for entry in entries:
        group = _entry_group(entry, group_by)
        stats.group_sizes[group] = stats.group_sizes.get(group, 0) + 1
        desc = iris.description(entry.entry_id, "nlp")
        includes = {
            o for o in view.objects(desc, "bgn:includes") if isinstance(o, str)
        }
        if includes & targets:
            stats.counts[group] = stats.counts.get(group, 0) + 1
    return stats


# ---------------------------------------------------------------------------
# Adjective ratio


def adjective_ratio(
    source_id: str,
    entries: list[BiographyEntry],
    lads: dict[str, LayeredDocument],
) -> Fraction:
    """Adjective terms over non-punctuation terms for one source."""
    adj = 0
    total = 0
    seen = 0
    for entry in entries:
        if entry.source_id != source_id:
            continue
        lad = lads.get(entry.entry_id)
        if lad is None:
            continue
        seen += 1
        for term in lad.terms:
            if term.pos == "PUNCT":
                continue
            total += 1
            if term.pos == "ADJ":
                adj += 1
    if seen == 0:
        raise AnalyticsError(f"no annotated documents for source {source_id!r}")
    if total == 0:
        return Fraction(0)
    return Fraction(adj, total)


# ---------------------------------------------------------------------------
# Liberal name counting

DEFAULT_PARTICLES = ("van", "de", "der", "den", "ter", "ten", "te", "von")


def name_mentions(
    texts: list[str],
    particles: tuple[str, ...] = DEFAULT_PARTICLES,
    stoplist: frozenset[str] = frozenset(),
) -> list[tuple[str, int]]:
    """Count every string that remotely looks like a name.

    High recall by design: runs of capitalized tokens, optionally joined by
    name particles. Single sentence-initial tokens from the stoplist are
    dropped; everything else is left for a human to weed out.
    """
    counts: dict[str, int] = {}
    for text in texts:
        tokens = tokenize(text)
        sentence_starts = set()
        seen_sentences = set()
        for tok in tokens:
            if tok.sentence_index not in seen_sentences:
                seen_sentences.add(tok.sentence_index)
                sentence_starts.add(tok.token_id)
        i = 0
        n = len(tokens)
        while i < n:
            tok = tokens[i]
            if not (tok.surface[0].isupper() and tok.surface[0].isalpha()):
                i += 1
                continue
            run = [tok.surface]
            j = i + 1
            while j < n:
                nxt = tokens[j]
                if nxt.surface[0].isupper() and nxt.surface[0].isalpha():
                    run.append(nxt.surface)
                    j += 1
                    continue
                # particles join only when a capitalized token follows
                k = j
                bridge = []
                while k < n and tokens[k].surface.lower() in particles:
                    bridge.append(tokens[k].surface)
                    k += 1
                if bridge and k < n and tokens[k].surface[0].isupper() and tokens[k].surface[0].isalpha():
                    run.extend(bridge)
                    run.append(tokens[k].surface)
                    j = k + 1
                    continue
                break
            candidate = " ".join(run)
            if not (
                len(run) == 1
                and tok.token_id in sentence_starts
                and tok.surface in stoplist
            ):
                counts[candidate] = counts.get(candidate, 0) + 1
            i = j
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


# ---------------------------------------------------------------------------
# Participation graphs


@dataclass(frozen=True)
class ActorRow:
    iri: str
    label: str
    color_index: int
    event_count: int


@dataclass(frozen=True)
class EventNode:
    year: int
    event_type: str
    participants: tuple[str, ...]


@dataclass(frozen=True)
class ParticipationGraph:
    actors: tuple[ActorRow, ...]
    nodes: tuple[EventNode, ...]
    undated: tuple[str, ...]  # residue: event iris excluded for lacking a year


def participation_graph(
    person_iris: list[str],
    store: QuadStore,
    event_types: list[str] | None = None,
    labels: dict[str, str] | None = None,
    iris: Iris = Iris(),
) -> ParticipationGraph:
    """Bucket events by (type, year); persons sharing a bucket share a node."""
    view = StoreView(store, iris)
    labels = labels or {}
    wanted = set(person_iris)
    buckets: dict[tuple[str, int], set[str]] = {}
    undated: list[str] = []
    for ev in view.events:
        participants = view.resolved_participants(ev) & wanted
        if not participants:
            continue
        etype = view.event_type(ev)
        if event_types is not None and etype not in event_types:
            continue
        date = view.event_time(ev)
        if date is None:
            undated.append(ev)
            continue
        buckets.setdefault((etype, date.year), set()).update(participants)
    nodes = tuple(
        EventNode(year, etype, tuple(sorted(parts)))
        for (etype, year), parts in sorted(buckets.items())
    )
    actor_iris = sorted(wanted, key=lambda p: (labels.get(p, p), p))
    actors = tuple(
        ActorRow(
            iri=p,
            label=labels.get(p, p),
            color_index=i,
            event_count=sum(1 for node in nodes if p in node.participants),
        )
        for i, p in enumerate(actor_iris)
    )
    return ParticipationGraph(actors, nodes, tuple(sorted(undated)))


# ---------------------------------------------------------------------------
# Climax scores


@dataclass(frozen=True)
class ClimaxPoint:
    year: int
    score: int


@dataclass(frozen=True)
class ClimaxGroup:
    event_type: str
    points: tuple[ClimaxPoint, ...]


@dataclass(frozen=True)
class ClimaxSeries:
    groups: tuple[ClimaxGroup, ...]


def climax_scores(
    store: QuadStore,
    iris: Iris = Iris(),
    count_events: bool = False,
) -> ClimaxSeries:
    """Per (event type, year): number of distinct participants.

    With count_events=True the score counts events instead of distinct
    participants.
    """
    view = StoreView(store, iris)
    cells: dict[tuple[str, int], set[str] | int] = {}
    for ev in view.events:
        date = view.event_time(ev)
        if date is None:
            continue
        key = (view.event_type(ev), date.year)
        if count_events:
            cells[key] = cells.get(key, 0) + 1
        else:
            bucket = cells.setdefault(key, set())
            bucket.update(view.resolved_participants(ev))
    scores: dict[str, list[ClimaxPoint]] = {}
    for (etype, year), value in cells.items():
        score = value if isinstance(value, int) else len(value)
        if score >= 1:
            scores.setdefault(etype, []).append(ClimaxPoint(year, score))
    groups = [
        ClimaxGroup(etype, tuple(sorted(points, key=lambda p: p.year)))
        for etype, points in scores.items()
    ]
    groups.sort(key=lambda g: (-max(p.score for p in g.points), g.event_type))
    return ClimaxSeries(tuple(groups))


# ---------------------------------------------------------------------------
# Fact alternatives

FACT_KINDS = ("birth-date", "birth-place", "death-date", "death-place")

_EVENT_TYPE_FOR_KIND = {"birth": "Birth", "death": "Death"}


@dataclass(frozen=True)
class FactSource:
    entry_id: str | None
    author: str | None
    title: str | None
    grounded: bool
    offsets: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class FactAlternative:
    value: str  # partial-date lexical form or place string
    sources: tuple[FactSource, ...]


@dataclass(frozen=True)
class FactAlternatives:
    kind: str
    alternatives: tuple[FactAlternative, ...]


def classify_values(kind: str, a: str, b: str) -> str:
    """agree / partial / contradict for two fact values of the same kind."""
    if kind.endswith("-date"):
        da, db = PartialDate.parse(a), PartialDate.parse(b)
        if da == db:
            return "agree"
        return "partial" if da.compatible(db) else "contradict"
    la, lb = a.strip().lower(), b.strip().lower()
    if la == lb:
        return "agree"
    if la in lb or lb in la:
        return "partial"
    return "contradict"


def fact_alternatives(
    person_iri: str,
    kind: str,
    store: QuadStore,
    iris: Iris = Iris(),
) -> FactAlternatives:
    """Collect one biographical fact from every description, grouped by value."""
    if kind not in FACT_KINDS:
        raise AnalyticsError(f"unknown fact kind: {kind!r}")
    event_kind, aspect = kind.split("-")
    wanted_type = _EVENT_TYPE_FOR_KIND[event_kind]
    view = StoreView(store, iris)
    if person_iri not in view.persons:
        raise AnalyticsError(f"unknown person: {person_iri}")
    found: dict[str, list[FactSource]] = {}
    for ev in view.events:
        if view.event_type(ev) != wanted_type:
            continue
        if person_iri not in view.resolved_participants(ev):
            continue
        if aspect == "date":
            date = view.event_time(ev)
            value = date.lexical() if date is not None else None
        else:
            value = view.event_place(ev)
        if value is None:
            continue
        entry_id = _entry_of_iri(ev, iris.base)
        offsets = tuple(view.mention_offsets(ev))
        is_meta = "/meta/" in ev
        desc = iris.description(entry_id, "original" if is_meta else "nlp") if entry_id else None
        meta = view.description_meta(desc) if desc else {}
        found.setdefault(value, []).append(
            FactSource(
                entry_id=entry_id,
                author=meta.get("author"),
                title=meta.get("title"),
                grounded=bool(offsets),
                offsets=offsets,
            )
        )
    alternatives = tuple(
        FactAlternative(value, tuple(sorted(srcs, key=lambda s: (s.entry_id or "", not s.grounded))))
        for value, srcs in sorted(found.items())
    )
    return FactAlternatives(kind, alternatives)


# ---------------------------------------------------------------------------
# Storyteller export


def storyteller_export(
    graph: ParticipationGraph, series: ClimaxSeries
) -> dict:
    """The JSON contract consumed by the web UI and external plotters."""
    return {
        "actors": [
            {
                "iri": a.iri,
                "label": a.label,
                "colorIndex": a.color_index,
                "eventCount": a.event_count,
            }
            for a in graph.actors
        ],
        "events": [
            {
                "year": n.year,
                "type": n.event_type,
                "participants": list(n.participants),
            }
            for n in graph.nodes
        ],
        "groups": [
            {
                "type": g.event_type,
                "points": [{"year": p.year, "score": p.score} for p in g.points],
            }
            for g in series.groups
        ],
        "undated": list(graph.undated),
    }
