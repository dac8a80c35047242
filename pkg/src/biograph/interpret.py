"""Turn a layered document into grounded graph statements.

Four steps: direct concept/lemma/frame links, event and participant
extraction with entity/timex precedence over role labels, profession and
family-relation patterns, and pronoun/name linking to the biographee.
Every produced instance is grounded to character offsets in the source
text; the result carries a full provenance record.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

from .annotate import LayeredDocument, Predicate, StepRun, Term, plan_step_id
from .corpus import BiographyEntry, PersonRecord
from .dates import PartialDate
from .errors import IntegrityError
from .graphstore import (
    Activity,
    Agent,
    Iris,
    Literal,
    Plan,
    PlanStep,
    ProvenanceRecord,
    RDF_TYPE,
    Statement,
    build_provenance,
)

GENERIC_EVENT = "sem:Event"
COPULA_LEMMAS = frozenset({"zijn", "worden", "be"})

DEFAULT_AGENT = Agent(
    iri="https://biograph.example/agent/pipeline-maintainers",
    role="developer",
    contact="maintainers@biograph.example",
)


@dataclass(frozen=True)
class Mention:
    doc_id: str
    char_begin: int
    char_end: int
    lemma: str
    pos: str
    polarity: str | None = None


@dataclass(frozen=True)
class EventRole:
    relation: str  # Arg0 | Arg1 | Arg2 | hasTime | hasPlace
    target: str | PartialDate  # instance iri, date, or place literal
    is_place_literal: bool = False


@dataclass
class EventInstance:
    event_iri: str
    concept_id: str | None
    frame_id: str | None
    roles: list[EventRole] = field(default_factory=list)
    mentions: list[Mention] = field(default_factory=list)


@dataclass
class ParticipantInstance:
    instance_iri: str
    kind: str  # person | location | organization | other
    same_as: str | None = None
    mentions: list[Mention] = field(default_factory=list)


@dataclass
class InterpretationResult:
    new_description_iri: str
    statements: list[Statement]
    events: list[EventInstance]
    participants: list[ParticipantInstance]
    provenance: ProvenanceRecord


class _Minter:
    """Per-document deterministic iri counter."""

    def __init__(self, iris: Iris, entry_id: str, seed: int = 0):
        self.iris = iris
        self.entry_id = entry_id
        self._counters: dict[str, int] = {}
        self.seed = seed

    def next(self, layer: str) -> str:
        n = self._counters.get(layer, self.seed)
        self._counters[layer] = n + 1
        return self.iris.instance(self.entry_id, layer, n)

    def mention(self) -> str:
        n = self._counters.get("mention", self.seed)
        self._counters["mention"] = n + 1
        return self.iris.mention(self.entry_id, n)


def _term_mention(lad: LayeredDocument, term: Term) -> Mention:
    begin, end = lad.term_span([term.term_id])
    polarity = None
    for op in lad.opinions:
        if term.term_id in op.term_ids:
            polarity = op.polarity
    return Mention(lad.doc_id, begin, end, term.lemma, term.pos, polarity)


def _participant_mention(lad: LayeredDocument, term_ids) -> Mention:
    """Mention for an NP span: the anchor term, widened to its entity.

    A span like "Desiderius Erasmus" grounds as the full name, so later
    name matching sees the same surface the entity tagger saw.
    """
    anchor = _anchor_term(lad, term_ids)
    span_ids = [anchor.term_id]
    for ent in lad.entities:
        if anchor.term_id in ent.term_ids:
            span_ids = list(ent.term_ids)
            break
    begin, end = lad.term_span(span_ids)
    polarity = None
    for op in lad.opinions:
        if anchor.term_id in op.term_ids:
            polarity = op.polarity
    return Mention(lad.doc_id, begin, end, anchor.lemma, anchor.pos, polarity)


def _anchor_term(lad: LayeredDocument, term_ids) -> Term:
    terms = [lad.term(tid) for tid in term_ids]
    terms.sort(key=lambda t: lad.term_tokens(t)[0].offset)
    # head noun over pronoun: "haar vader" is anchored on "vader"
    for wanted in (("NOUN", "NAME"), ("PRON", "VERB")):
        for t in terms:
            if t.pos in wanted:
                return t
    return terms[0]


# ---------------------------------------------------------------------------
# Step 1: direct links


def step1_direct(lad: LayeredDocument, description_iri: str, graph: str) -> list[Statement]:
    """Link every distinct concept, lemma and frame to the description."""
    objects: set[str] = set()
    for c in lad.concepts:
        objects.add(f"concept:{c.concept_id}")
    for t in lad.terms:
        objects.add(f"lemma:{t.lemma}")
    for p in lad.predicates:
        if p.frame_id is not None:
            objects.add(f"frame:{p.frame_id}")
    return [
        Statement(description_iri, "bgn:includes", obj, graph)
        for obj in sorted(objects)
    ]


# ---------------------------------------------------------------------------
# Step 2: events and participants


def _span_kind(lad: LayeredDocument, term_ids) -> str:
    ids = set(term_ids)
    classes = {e.cls for e in lad.entities if set(e.term_ids) & ids}
    if "PER" in classes:
        return "person"
    if any(lad.term(tid).pos == "PRON" for tid in ids):
        return "person"
    if "LOC" in classes:
        return "location"
    if "ORG" in classes:
        return "organization"
    return "other"


def _span_has_timex(lad: LayeredDocument, term_ids) -> PartialDate | None:
    ids = set(term_ids)
    for tx in lad.timexes:
        if set(tx.term_ids) & ids:
            return tx.value
    return None


def _span_loc_surface(lad: LayeredDocument, term_ids) -> str | None:
    ids = set(term_ids)
    for e in lad.entities:
        if e.cls == "LOC" and set(e.term_ids) & ids:
            return lad.term_surface(e.term_ids)
    return None


def step2_events(
    lad: LayeredDocument, minter: _Minter
) -> tuple[list[EventInstance], list[ParticipantInstance]]:
    preds_by_id = {p.pred_id: p for p in lad.predicates}
    groups = lad.coref_sets or [frozenset({p.pred_id}) for p in lad.predicates]
    groups = sorted(groups, key=min)
    events: list[EventInstance] = []
    participants: dict[tuple[str, ...], ParticipantInstance] = {}

    def participant_for(term_ids: tuple[str, ...]) -> ParticipantInstance:
        if term_ids not in participants:
            inst = ParticipantInstance(
                instance_iri=minter.next("participant"),
                kind=_span_kind(lad, term_ids),
            )
            inst.mentions.append(_participant_mention(lad, term_ids))
            participants[term_ids] = inst
        return participants[term_ids]

    for group in groups:
        preds: list[Predicate] = sorted(
            (preds_by_id[pid] for pid in group), key=lambda p: p.pred_id
        )
        event = EventInstance(
            event_iri=minter.next("event"),
            concept_id=next((p.concept_id for p in preds if p.concept_id), None),
            frame_id=next((p.frame_id for p in preds if p.frame_id), None),
        )
        has_time = False
        for pred in preds:
            event.mentions.append(_term_mention(lad, lad.term(pred.term_id)))
            for role in pred.roles:
                timex_value = _span_has_timex(lad, role.term_ids)
                loc_surface = _span_loc_surface(lad, role.term_ids)
                if role.label in ("Arg0", "Arg1", "Arg2"):
                    inst = participant_for(role.term_ids)
                    event.roles.append(EventRole(role.label, inst.instance_iri))
                elif role.label == "time":
                    # a "time" span holding a location but no date becomes a place
                    if timex_value is not None:
                        if not has_time:
                            event.roles.append(EventRole("hasTime", timex_value))
                            has_time = True
                    elif loc_surface is not None:
                        event.roles.append(
                            EventRole("hasPlace", loc_surface, is_place_literal=True)
                        )
                elif role.label == "location":
                    # entity/timex layers win over the role label
                    if timex_value is not None:
                        if not has_time:
                            event.roles.append(EventRole("hasTime", timex_value))
                            has_time = True
                    else:
                        surface = loc_surface or lad.term_surface(role.term_ids)
                        event.roles.append(
                            EventRole("hasPlace", surface, is_place_literal=True)
                        )
        events.append(event)
    return events, list(participants.values())


def reference_role_conversion(
    label: str, has_timex: bool, has_loc: bool, timex_value, surface
):
    """Brute-force restatement of the precedence rule, for property tests.

    Returns ("hasTime", value), ("hasPlace", surface) or None for one
    SRL time/location role.
    """
    if label == "time":
        if has_timex:
            return ("hasTime", timex_value)
        if has_loc:
            return ("hasPlace", surface)
        return None
    if label == "location":
        if has_timex:
            return ("hasTime", timex_value)
        return ("hasPlace", surface)
    raise ValueError(label)


def event_statements(
    events: list[EventInstance], description_iri: str, graph: str
) -> list[Statement]:
    st = []
    for ev in events:
        st.append(Statement(ev.event_iri, RDF_TYPE, GENERIC_EVENT, graph))
        if ev.concept_id is not None:
            st.append(
                Statement(ev.event_iri, RDF_TYPE, f"concept:{ev.concept_id}", graph)
            )
        if ev.frame_id is not None:
            st.append(
                Statement(ev.event_iri, RDF_TYPE, f"frame:{ev.frame_id}", graph)
            )
        st.append(Statement(description_iri, "bgn:includes", ev.event_iri, graph))
        for role in ev.roles:
            if role.relation == "hasTime":
                st.append(
                    Statement(ev.event_iri, "sem:hasTime", Literal(role.target), graph)
                )
            elif role.relation == "hasPlace":
                st.append(
                    Statement(ev.event_iri, "sem:hasPlace", Literal(role.target), graph)
                )
            else:
                st.append(
                    Statement(ev.event_iri, f"pb:{role.relation}", role.target, graph)
                )
    return st


KIND_CLASSES = {
    "person": "bgn:Person",
    "location": "bgn:Location",
    "organization": "bgn:Organization",
    "other": "bgn:Thing",
}


def participant_statements(
    participants: list[ParticipantInstance], graph: str
) -> list[Statement]:
    return [
        Statement(p.instance_iri, RDF_TYPE, KIND_CLASSES[p.kind], graph)
        for p in participants
    ]


# ---------------------------------------------------------------------------
# Step 3: profession and family relations


def step3_relations(
    lad: LayeredDocument,
    minter: _Minter,
    description_iri: str,
    graph: str,
) -> tuple[list[Statement], list[ParticipantInstance]]:
    statements: list[Statement] = []
    participants: dict[str, ParticipantInstance] = {}

    def instance_for(term: Term) -> ParticipantInstance:
        if term.term_id not in participants:
            inst = ParticipantInstance(
                instance_iri=minter.next("relation"), kind="person"
            )
            inst.mentions.append(_term_mention(lad, term))
            participants[term.term_id] = inst
        return participants[term.term_id]

    family_tags = {t.term_id: t.label for t in lad.term_tags if t.kind == "FAMILY"}
    prof_tags = {t.term_id: t.label for t in lad.term_tags if t.kind == "PROFESSION"}
    per_terms = {
        tid for e in lad.entities if e.cls == "PER" for tid in e.term_ids
    }
    sentences = sorted({lad.sentence_of_term(t) for t in lad.terms})
    for sent in sentences:
        terms = lad.sentence_terms(sent)
        consumed_profs: set[str] = set()
        fam_positions = [
            i for i, t in enumerate(terms) if t.term_id in family_tags
        ]
        for i in fam_positions:
            fam = terms[i]
            fam_inst = instance_for(fam)
            statements.append(
                Statement(
                    fam_inst.instance_iri,
                    "bgn:relationLabel",
                    Literal(family_tags[fam.term_id]),
                    graph,
                )
            )
            # possessive pronoun immediately before the family term
            if i > 0 and terms[i - 1].pos == "PRON" and (
                terms[i - 1].morpho_map().get("poss") == "1"
            ):
                pron_inst = instance_for(terms[i - 1])
                statements.append(
                    Statement(
                        pron_inst.instance_iri,
                        "bgn:hasRelative",
                        fam_inst.instance_iri,
                        graph,
                    )
                )
            # apposition: family term immediately followed by a person name
            if i + 1 < len(terms) and terms[i + 1].term_id in per_terms:
                name_inst = instance_for(terms[i + 1])
                statements.append(
                    Statement(
                        name_inst.instance_iri,
                        "bgn:sameAsCandidate",
                        fam_inst.instance_iri,
                        graph,
                    )
                )
            # copula pattern: family subject + copula + profession complement
            copula_at = next(
                (
                    j
                    for j in range(i + 1, len(terms))
                    if terms[j].pos == "VERB" and terms[j].lemma in COPULA_LEMMAS
                ),
                None,
            )
            if copula_at is not None:
                for j in range(copula_at + 1, len(terms)):
                    if terms[j].term_id in prof_tags:
                        statements.append(
                            Statement(
                                fam_inst.instance_iri,
                                "bgn:hasProfession",
                                Literal(prof_tags[terms[j].term_id]),
                                graph,
                            )
                        )
                        consumed_profs.add(terms[j].term_id)
                        break
        # professions not consumed by the copula pattern attach to the
        # sentence subject when one exists, else to the description
        for t in terms:
            if t.term_id not in prof_tags or t.term_id in consumed_profs:
                continue
            subject = next(
                (
                    s
                    for s in terms
                    if (s.pos == "PRON" and s.morpho_map().get("poss") != "1")
                    or s.term_id in per_terms
                ),
                None,
            )
            label = Literal(prof_tags[t.term_id])
            if subject is not None:
                subj_inst = instance_for(subject)
                statements.append(
                    Statement(subj_inst.instance_iri, "bgn:hasProfession", label, graph)
                )
            else:
                statements.append(
                    Statement(description_iri, "bgn:hasProfession", label, graph)
                )
    return statements, list(participants.values())


# ---------------------------------------------------------------------------
# Step 4: pronoun and name references


def _participant_gender(inst: ParticipantInstance, lad: LayeredDocument) -> str | None:
    for m in inst.mentions:
        if m.pos == "PRON":
            surface = lad.text[m.char_begin : m.char_end]
            for term in lad.terms:
                if term.pos == "PRON" and lad.term_span([term.term_id]) == (
                    m.char_begin,
                    m.char_end,
                ):
                    return term.morpho_map().get("gender")
            del surface
    return None


def _name_matches(surface: str, names) -> bool:
    s = surface.strip().lower()
    for name in names:
        full = name.strip().lower()
        if s == full:
            return True
        parts = full.split()
        if parts and s == parts[-1]:
            return True
    return False


def step4_pronouns(
    participants: list[ParticipantInstance],
    lad: LayeredDocument,
    biographee_gender: str,
    biographee_names,
    proxy_iri: str,
    graph: str,
) -> list[Statement]:
    statements = []
    for inst in participants:
        if inst.kind != "person":
            continue
        linked = False
        gender = _participant_gender(inst, lad)
        if (
            gender is not None
            and gender != "unknown"
            and biographee_gender != "unknown"
            and gender == biographee_gender
        ):
            linked = True
        if not linked:
            for m in inst.mentions:
                if m.pos == "NAME" and _name_matches(
                    lad.text[m.char_begin : m.char_end], biographee_names
                ):
                    linked = True
                    break
        if linked:
            inst.same_as = proxy_iri
            statements.append(
                Statement(inst.instance_iri, "owl:sameAs", proxy_iri, graph)
            )
    return statements


# ---------------------------------------------------------------------------
# Grounding


def ground_mentions(
    instances, minter: _Minter, graph: str
) -> list[Statement]:
    """One denotedBy statement per (instance, mention)."""
    statements = []
    for inst in instances:
        iri = getattr(inst, "event_iri", None) or getattr(inst, "instance_iri")
        if not inst.mentions:
            raise IntegrityError(f"instance {iri} has no mentions")
        for m in inst.mentions:
            m_iri = minter.mention()
            statements.append(Statement(iri, "gaf:denotedBy", m_iri, graph))
            statements.append(
                Statement(m_iri, "bgn:mentionDocument", Literal(m.doc_id), graph)
            )
            statements.append(
                Statement(m_iri, "bgn:mentionBegin", Literal(m.char_begin), graph)
            )
            statements.append(
                Statement(m_iri, "bgn:mentionEnd", Literal(m.char_end), graph)
            )
            statements.append(
                Statement(m_iri, "bgn:mentionLemma", Literal(m.lemma), graph)
            )
            statements.append(
                Statement(m_iri, "bgn:mentionPos", Literal(m.pos), graph)
            )
            if m.polarity is not None:
                statements.append(
                    Statement(m_iri, "bgn:mentionPolarity", Literal(m.polarity), graph)
                )
    return statements


# ---------------------------------------------------------------------------
# Whole-document interpretation


def _plan_from_trace(
    trace: list[StepRun], iris: Iris, extra: StepRun | None = None
) -> Plan:
    runs = list(trace) + ([extra] if extra else [])
    if not runs:
        raise IntegrityError("document has no processing trace")
    # plan id is the common prefix of the step ids: "<plan>/step/<n>-<name>"
    plan_id = runs[0].plan_step_id.rsplit("/step/", 1)[0]
    steps = tuple(
        PlanStep(r.plan_step_id, r.input_layers, r.output_layers) for r in runs
    )
    return Plan(iris.plan(plan_id), steps)


def interpret_document(
    lad: LayeredDocument,
    entry: BiographyEntry,
    person: PersonRecord,
    iris: Iris = Iris(),
    iri_seed: int = 0,
    clock=time.time,
    agent: Agent = DEFAULT_AGENT,
) -> InterpretationResult:
    if entry.entry_id != lad.doc_id:
        raise IntegrityError(
            f"document {lad.doc_id!r} does not annotate entry {entry.entry_id!r}"
        )
    if entry.entry_id not in person.entry_ids:
        raise IntegrityError(
            f"entry {entry.entry_id!r} does not belong to person {person.person_id!r}"
        )
    started = clock()
    graph = iris.graph(entry.entry_id, "nlp")
    desc = iris.description(entry.entry_id, "nlp")
    person_iri = iris.person(person.person_id)
    minter = _Minter(iris, entry.entry_id, iri_seed)

    statements: list[Statement] = []
    # structural statements: the new description is a sibling view
    proxy = f"{iris.proxy(entry.entry_id)}/nlp"
    statements.append(Statement(desc, RDF_TYPE, "bgn:Description", graph))
    statements.append(Statement(proxy, "ore:proxyFor", person_iri, graph))
    statements.append(
        Statement(proxy, "ore:proxyIn", iris.aggregation(person.person_id), graph)
    )
    statements.append(Statement(proxy, "bgn:description", desc, graph))

    statements += step1_direct(lad, desc, graph)
    events, participants = step2_events(lad, minter)
    rel_statements, rel_participants = step3_relations(lad, minter, desc, graph)
    participants = participants + rel_participants
    statements += event_statements(events, desc, graph)
    statements += participant_statements(participants, graph)
    statements += rel_statements
    statements += step4_pronouns(
        participants,
        lad,
        entry.person_metadata.gender,
        entry.person_metadata.names,
        person_iri,
        graph,
    )
    statements += ground_mentions(list(events) + participants, minter, graph)

    ended = clock()
    interp_run = StepRun(
        step_name="interpret",
        tool_version=(lad.trace[0].tool_version if lad.trace else "0"),
        commit_ref=(lad.trace[0].commit_ref if lad.trace else "0"),
        started_at=started,
        ended_at=ended,
        input_layers=tuple(sorted({l for r in lad.trace for l in r.output_layers})),
        output_layers=("statements",),
        plan_step_id=plan_step_id(
            lad.trace[0].plan_step_id.rsplit("/step/", 1)[0] if lad.trace else "plan/default",
            len(lad.trace),
            "interpret",
        ),
    )
    plan = _plan_from_trace(lad.trace, iris, interp_run)
    provenance = ProvenanceRecord(
        entity_iri=desc,
        derived_from=(iris.text_entity(entry.entry_id),),
        activity=Activity(
            iri=iris.activity(entry.entry_id, "nlp"),
            started=lad.trace[0].started_at if lad.trace else started,
            ended=ended,
            used=(iris.text_entity(entry.entry_id),),
            step_runs=tuple(lad.trace) + (interp_run,),
        ),
        agents=(agent,),
        plan=plan,
    )
    statements += build_provenance(provenance, graph)
    return InterpretationResult(
        new_description_iri=desc,
        statements=statements,
        events=events,
        participants=participants,
        provenance=provenance,
    )
