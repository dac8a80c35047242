"""Named-graph statement store with a closed vocabulary.

Statements are (subject, predicate, object, graph) quads with set semantics
per named graph. Objects are IRIs (plain strings) or typed literals. The
interchange format is quads-lines: one statement per line, terms in
N-Triples-like syntax, lines sorted lexicographically so equal statement
sets serialize to equal bytes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .annotate import StepRun
from .dates import PartialDate
from .errors import BiographError, IntegrityError, ParseError

DEFAULT_BASE = "https://biograph.example/"

XSD_INTEGER = "xsd:integer"
XSD_DECIMAL = "xsd:decimal"
PARTIAL_DATE = "bgn:partialDate"


# ---------------------------------------------------------------------------
# Vocabulary

RDF_TYPE = "rdf:type"

VOCABULARY = frozenset({
    # project terms
    "bgn:includes", "bgn:hasRelative", "bgn:hasProfession", "bgn:relationLabel",
    "bgn:sameAsCandidate", "bgn:description", "bgn:author", "bgn:title",
    "bgn:sourceId", "bgn:subActivity", "bgn:stepName", "bgn:toolVersion",
    "bgn:commit", "bgn:agentRole", "bgn:contact", "bgn:stepIndex",
    "bgn:hasStep", "bgn:expectsInput", "bgn:producesOutput",
    "bgn:mentionDocument", "bgn:mentionBegin", "bgn:mentionEnd",
    "bgn:mentionLemma", "bgn:mentionPos", "bgn:mentionPolarity",
    # event model
    "sem:hasTime", "sem:hasPlace",
    # grounding
    "gaf:denotedBy",
    # roles
    "pb:Arg0", "pb:Arg1", "pb:Arg2",
    # provenance
    "prov:wasDerivedFrom", "prov:wasGeneratedBy", "prov:wasAssociatedWith",
    "prov:used", "prov:startedAtTime", "prov:endedAtTime",
    # plans
    "pplan:correspondsToStep",
    # aggregation model
    "ore:aggregates", "ore:proxyFor", "ore:proxyIn",
    # identity and typing
    "owl:sameAs", RDF_TYPE,
})

CLASSES = frozenset({
    "bgn:Description", "bgn:Person", "bgn:Location", "bgn:Organization",
    "bgn:Thing", "sem:Event", "prov:Activity", "prov:Agent", "prov:Entity",
    "pplan:Plan", "pplan:Step", "edm:ProvidedCHO", "ore:Aggregation",
})


# ---------------------------------------------------------------------------
# Terms and statements


@dataclass(frozen=True)
class Literal:
    value: str | int | float | PartialDate
    datatype: str | None = None

    def __post_init__(self):
        if self.datatype is None:
            dt = None
            if isinstance(self.value, bool):
                raise IntegrityError("boolean literals are not supported")
            if isinstance(self.value, int):
                dt = XSD_INTEGER
            elif isinstance(self.value, float):
                dt = XSD_DECIMAL
            elif isinstance(self.value, PartialDate):
                dt = PARTIAL_DATE
            object.__setattr__(self, "datatype", dt)

    def lexical(self) -> str:
        if isinstance(self.value, PartialDate):
            return self.value.lexical()
        if isinstance(self.value, float):
            return repr(self.value)
        return str(self.value)


Term = str | Literal  # an IRI or a literal


@dataclass(frozen=True)
class Statement:
    subject: str
    predicate: str
    object: Term
    graph: str


def _escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def _unescape(s: str) -> str:
    out = []
    i = 0
    while i < len(s):
        if s[i] == "\\" and i + 1 < len(s):
            nxt = s[i + 1]
            out.append({"n": "\n", '"': '"', "\\": "\\"}.get(nxt, nxt))
            i += 2
        else:
            out.append(s[i])
            i += 1
    return "".join(out)


def render_term(term: Term) -> str:
    if isinstance(term, Literal):
        lex = f'"{_escape(term.lexical())}"'
        if term.datatype is not None:
            lex += f"^^<{term.datatype}>"
        return lex
    return f"<{term}>"


_TERM_RE = re.compile(
    r'\s*(?:<(?P<iri>[^>\s]+)>|"(?P<lit>(?:[^"\\]|\\.)*)"(?:\^\^<(?P<dt>[^>\s]+)>)?)'
)


def _parse_term(text: str, pos: int, lineno: int) -> tuple[Term, int]:
    m = _TERM_RE.match(text, pos)
    if m is None:
        raise ParseError("malformed term", lineno)
    if m.group("iri") is not None:
        return m.group("iri"), m.end()
    raw = _unescape(m.group("lit"))
    dt = m.group("dt")
    if dt == XSD_INTEGER:
        return Literal(int(raw)), m.end()
    if dt == XSD_DECIMAL:
        return Literal(float(raw)), m.end()
    if dt == PARTIAL_DATE:
        return Literal(PartialDate.parse(raw)), m.end()
    return Literal(raw, dt), m.end()


# ---------------------------------------------------------------------------
# Store


class VocabularyError(BiographError):
    pass


class QuadStore:
    """In-memory quad store with set semantics per named graph."""

    def __init__(self):
        self._graphs: dict[str, set[tuple[str, str, Term]]] = {}

    def __len__(self) -> int:
        return sum(len(g) for g in self._graphs.values())

    def graphs(self) -> list[str]:
        return sorted(self._graphs)

    def assert_statements(self, statements, graph: str | None = None) -> int:
        """Insert statements; returns the number actually added."""
        bad = [
            s for s in statements
            if s.predicate not in VOCABULARY
        ]
        if bad:
            listing = ", ".join(sorted({s.predicate for s in bad}))
            raise VocabularyError(f"unregistered predicates: {listing}")
        inserted = 0
        for s in statements:
            g = graph if graph is not None else s.graph
            triples = self._graphs.setdefault(g, set())
            t = (s.subject, s.predicate, s.object)
            if t not in triples:
                triples.add(t)
                inserted += 1
        return inserted

    def statements(self, graph: str | None = None) -> list[Statement]:
        out = []
        for g, triples in self._graphs.items():
            if graph is not None and g != graph:
                continue
            out.extend(Statement(s, p, o, g) for s, p, o in triples)
        return out

    def triples(self) -> set[tuple[str, str, Term]]:
        out: set[tuple[str, str, Term]] = set()
        for triples in self._graphs.values():
            out |= triples
        return out

    # -- pattern matching ---------------------------------------------------

    def match(
        self,
        pattern: list[tuple[Term | None, Term | None, Term | None]],
        graph: str | None = None,
    ) -> list[dict[str, Term]]:
        """Conjunctive basic-graph-pattern matching.

        Variables are strings starting with '?'; None is an anonymous
        wildcard. Returns the distinct variable bindings, sorted for
        determinism.
        """
        if not pattern:
            raise IntegrityError("empty pattern")
        statements = self.statements(graph)

        def is_var(t):
            return isinstance(t, str) and t.startswith("?")

        # most-selective-first join order; result is order independent
        def selectivity(triple):
            return sum(1 for t in triple if t is not None and not is_var(t))

        order = sorted(range(len(pattern)), key=lambda i: -selectivity(pattern[i]))

        def unify(triple, stmt, binding):
            new = dict(binding)
            for pat, val in zip(triple, (stmt.subject, stmt.predicate, stmt.object)):
                if pat is None:
                    continue
                if is_var(pat):
                    if pat in new and new[pat] != val:
                        return None
                    new[pat] = val
                elif pat != val:
                    return None
            return new

        bindings = [{}]
        for idx in order:
            triple = pattern[idx]
            nxt = []
            for binding in bindings:
                for stmt in statements:
                    u = unify(triple, stmt, binding)
                    if u is not None:
                        nxt.append(u)
            bindings = nxt
        unique = {tuple(sorted(b.items(), key=lambda kv: kv[0])) for b in bindings}
        return [dict(t) for t in sorted(unique, key=_binding_key)]


def _binding_key(items):
    return [(k, render_term(v)) for k, v in items]


# ---------------------------------------------------------------------------
# Serialization


def serialize(store: QuadStore, format: str = "quads-lines") -> bytes:
    if format == "quads-lines":
        lines = [
            f"{render_term(s.subject)} {render_term(s.predicate)} "
            f"{render_term(s.object)} {render_term(s.graph)} ."
            for s in store.statements()
        ]
    elif format == "triples-lines":
        lines = [
            f"{render_term(s)} {render_term(p)} {render_term(o)} ."
            for s, p, o in store.triples()
        ]
    elif format == "json":
        import json

        doc = {
            g: sorted(
                f"{render_term(s)} {render_term(p)} {render_term(o)}"
                for s, p, o in store._graphs[g]
            )
            for g in store.graphs()
        }
        return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
    else:
        raise ParseError(f"unknown serialization format: {format!r}")
    return "".join(line + "\n" for line in sorted(lines)).encode("utf-8")


def parse(data: bytes | str, format: str = "quads-lines") -> QuadStore:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    store = QuadStore()
    if format == "json":
        import json

        doc = json.loads(data)
        for g, lines in doc.items():
            for lineno, line in enumerate(lines, 1):
                s, p, o = _parse_triple(line, lineno, expect_dot=False)
                store._graphs.setdefault(g, set()).add((s, p, o))
        return store
    if format not in ("quads-lines", "triples-lines"):
        raise ParseError(f"unknown serialization format: {format!r}")
    default_graph = DEFAULT_BASE + "graph/default"
    for lineno, line in enumerate(data.splitlines(), 1):
        if not line.strip():
            continue
        if format == "quads-lines":
            s, p, o, g = _parse_quad(line, lineno)
        else:
            s, p, o = _parse_triple(line, lineno, expect_dot=True)
            g = default_graph
        store._graphs.setdefault(g, set()).add((s, p, o))
    return store


def _parse_terms(line: str, lineno: int, count: int, expect_dot: bool):
    terms = []
    pos = 0
    for _ in range(count):
        term, pos = _parse_term(line, pos, lineno)
        terms.append(term)
    rest = line[pos:].strip()
    if expect_dot and rest != ".":
        raise ParseError("expected terminating '.'", lineno)
    if not expect_dot and rest not in ("", "."):
        raise ParseError("trailing content after statement", lineno)
    return terms


def _parse_quad(line, lineno):
    s, p, o, g = _parse_terms(line, lineno, 4, expect_dot=True)
    for t, what in ((s, "subject"), (p, "predicate"), (g, "graph")):
        if isinstance(t, Literal):
            raise ParseError(f"{what} must be an IRI", lineno)
    return s, p, o, g


def _parse_triple(line, lineno, expect_dot):
    s, p, o = _parse_terms(line, lineno, 3, expect_dot=expect_dot)
    for t, what in ((s, "subject"), (p, "predicate")):
        if isinstance(t, Literal):
            raise ParseError(f"{what} must be an IRI", lineno)
    return s, p, o


# ---------------------------------------------------------------------------
# Provenance records


@dataclass(frozen=True)
class Agent:
    iri: str
    role: str  # developer | operator
    contact: str | None = None


@dataclass(frozen=True)
class PlanStep:
    step_id: str
    expected_input_layers: tuple[str, ...]
    expected_output_layers: tuple[str, ...]


@dataclass(frozen=True)
class Plan:
    plan_iri: str
    steps: tuple[PlanStep, ...]


@dataclass(frozen=True)
class Activity:
    iri: str
    started: float
    ended: float
    used: tuple[str, ...] = ()
    step_runs: tuple[StepRun, ...] = ()


@dataclass(frozen=True)
class ProvenanceRecord:
    entity_iri: str
    derived_from: tuple[str, ...]
    activity: Activity
    agents: tuple[Agent, ...]
    plan: Plan


def build_provenance(record: ProvenanceRecord, graph: str) -> list[Statement]:
    """Emit data-view, process-view, responsibility-view and plan statements."""
    plan_ids = {s.step_id for s in record.plan.steps}
    for run in record.activity.step_runs:
        if run.plan_step_id not in plan_ids:
            raise IntegrityError(
                f"step run {run.step_name!r} cites unknown plan step "
                f"{run.plan_step_id!r}"
            )
    st = []

    def add(s, p, o):
        st.append(Statement(s, p, o, graph))

    e = record.entity_iri
    a = record.activity
    add(e, RDF_TYPE, "prov:Entity")
    for src in record.derived_from:
        add(e, "prov:wasDerivedFrom", src)
    add(e, "prov:wasGeneratedBy", a.iri)
    add(a.iri, RDF_TYPE, "prov:Activity")
    add(a.iri, "prov:startedAtTime", Literal(float(a.started)))
    add(a.iri, "prov:endedAtTime", Literal(float(a.ended)))
    for used in a.used:
        add(a.iri, "prov:used", used)
    for agent in record.agents:
        add(a.iri, "prov:wasAssociatedWith", agent.iri)
        add(agent.iri, RDF_TYPE, "prov:Agent")
        add(agent.iri, "bgn:agentRole", Literal(agent.role))
        if agent.contact is not None:
            add(agent.iri, "bgn:contact", Literal(agent.contact))
    for i, run in enumerate(a.step_runs):
        sub = f"{a.iri}/run/{i}"
        add(a.iri, "bgn:subActivity", sub)
        add(sub, RDF_TYPE, "prov:Activity")
        add(sub, "bgn:stepName", Literal(run.step_name))
        add(sub, "bgn:toolVersion", Literal(run.tool_version))
        add(sub, "bgn:commit", Literal(run.commit_ref))
        add(sub, "prov:startedAtTime", Literal(float(run.started_at)))
        add(sub, "prov:endedAtTime", Literal(float(run.ended_at)))
        add(sub, "bgn:stepIndex", Literal(i))
        add(sub, "pplan:correspondsToStep", run.plan_step_id)
    p = record.plan
    add(p.plan_iri, RDF_TYPE, "pplan:Plan")
    for i, step in enumerate(p.steps):
        add(p.plan_iri, "bgn:hasStep", step.step_id)
        add(step.step_id, RDF_TYPE, "pplan:Step")
        add(step.step_id, "bgn:stepIndex", Literal(i))
        for layer in step.expected_input_layers:
            add(step.step_id, "bgn:expectsInput", Literal(layer))
        for layer in step.expected_output_layers:
            add(step.step_id, "bgn:producesOutput", Literal(layer))
    return st


def read_provenance(store: QuadStore, entity_iri: str) -> ProvenanceRecord:
    """Reconstruct a ProvenanceRecord from asserted statements."""

    def objects(s, p):
        return sorted(
            (o for subj, pred, o in store.triples() if subj == s and pred == p),
            key=render_term,
        )

    def one(s, p):
        objs = objects(s, p)
        if len(objs) != 1:
            raise IntegrityError(f"expected one {p} for {s}, found {len(objs)}")
        return objs[0]

    derived = tuple(o for o in objects(entity_iri, "prov:wasDerivedFrom"))
    activity_iri = one(entity_iri, "prov:wasGeneratedBy")
    started = one(activity_iri, "prov:startedAtTime").value
    ended = one(activity_iri, "prov:endedAtTime").value
    used = tuple(objects(activity_iri, "prov:used"))
    subs = objects(activity_iri, "bgn:subActivity")
    subs.sort(key=lambda s: one(s, "bgn:stepIndex").value)
    runs = []
    for sub in subs:
        plan_step = one(sub, "pplan:correspondsToStep")
        step_ins = tuple(
            str(o.value) for o in objects(plan_step, "bgn:expectsInput")
        )
        step_outs = tuple(
            str(o.value) for o in objects(plan_step, "bgn:producesOutput")
        )
        runs.append(
            StepRun(
                step_name=str(one(sub, "bgn:stepName").value),
                tool_version=str(one(sub, "bgn:toolVersion").value),
                commit_ref=str(one(sub, "bgn:commit").value),
                started_at=float(one(sub, "prov:startedAtTime").value),
                ended_at=float(one(sub, "prov:endedAtTime").value),
                input_layers=step_ins,
                output_layers=step_outs,
                plan_step_id=plan_step,
            )
        )
    agents = []
    for agent_iri in objects(activity_iri, "prov:wasAssociatedWith"):
        contacts = objects(agent_iri, "bgn:contact")
        agents.append(
            Agent(
                iri=agent_iri,
                role=str(one(agent_iri, "bgn:agentRole").value),
                contact=str(contacts[0].value) if contacts else None,
            )
        )
    plans = [
        s for s, p, o in store.triples() if p == RDF_TYPE and o == "pplan:Plan"
        and any(run.plan_step_id in set(objects(s, "bgn:hasStep")) for run in runs)
    ]
    if not plans:
        plans = sorted(
            s for s, p, o in store.triples() if p == RDF_TYPE and o == "pplan:Plan"
        )[:1]
    if not plans:
        raise IntegrityError(f"no plan found for {entity_iri}")
    plan_iri = sorted(plans)[0]
    steps = sorted(
        objects(plan_iri, "bgn:hasStep"),
        key=lambda s: one(s, "bgn:stepIndex").value,
    )
    plan = Plan(
        plan_iri,
        tuple(
            PlanStep(
                s,
                tuple(str(o.value) for o in objects(s, "bgn:expectsInput")),
                tuple(str(o.value) for o in objects(s, "bgn:producesOutput")),
            )
            for s in steps
        ),
    )
    return ProvenanceRecord(
        entity_iri=entity_iri,
        derived_from=derived,
        activity=Activity(activity_iri, started, ended, used, tuple(runs)),
        agents=tuple(agents),
        plan=plan,
    )


# ---------------------------------------------------------------------------
# Person/aggregation structure for original metadata


@dataclass(frozen=True)
class Iris:
    """Deterministic IRI scheme shared by metadata conversion and interpretation."""

    base: str = DEFAULT_BASE

    def person(self, person_id: str) -> str:
        return f"{self.base}person/{person_id}"

    def aggregation(self, person_id: str) -> str:
        return f"{self.base}aggregation/{person_id}"

    def proxy(self, entry_id: str) -> str:
        return f"{self.base}proxy/{entry_id}"

    def description(self, entry_id: str, kind: str) -> str:
        return f"{self.base}description/{entry_id}/{kind}"

    def text_entity(self, entry_id: str) -> str:
        return f"{self.base}text/{entry_id}"

    def entry_record(self, entry_id: str) -> str:
        return f"{self.base}entry/{entry_id}"

    def meta_event(self, entry_id: str, kind: str) -> str:
        return f"{self.base}instance/{entry_id}/meta/{kind}"

    def instance(self, entry_id: str, layer: str, n: int) -> str:
        return f"{self.base}instance/{entry_id}/{layer}/{n}"

    def mention(self, entry_id: str, n: int) -> str:
        return f"{self.base}mention/{entry_id}/{n}"

    def graph(self, entry_id: str, process: str) -> str:
        return f"{self.base}graph/{entry_id}/{process}"

    def activity(self, entry_id: str, process: str) -> str:
        return f"{self.base}activity/{entry_id}/{process}"

    def plan(self, plan_id: str) -> str:
        return f"{self.base}{plan_id}"


META_EVENT_TYPES = {"birth": "frame:Birth", "death": "frame:Death"}


def build_person_graph(person, entries, iris: Iris = Iris()) -> list[Statement]:
    """Statements for one person: ProvidedCHO, aggregation, original entries."""
    st: list[Statement] = []
    person_iri = iris.person(person.person_id)
    agg = iris.aggregation(person.person_id)
    by_id = {e.entry_id: e for e in entries}
    first_graph = iris.graph(person.entry_ids[0], "meta")
    st.append(Statement(person_iri, RDF_TYPE, "edm:ProvidedCHO", first_graph))
    st.append(Statement(agg, RDF_TYPE, "ore:Aggregation", first_graph))
    st.append(Statement(agg, "ore:aggregates", person_iri, first_graph))
    for entry_id in person.entry_ids:
        entry = by_id[entry_id]
        g = iris.graph(entry_id, "meta")

        def add(s, p, o, graph=g):
            st.append(Statement(s, p, o, graph))

        proxy = iris.proxy(entry_id)
        desc = iris.description(entry_id, "original")
        add(proxy, "ore:proxyFor", person_iri)
        add(proxy, "ore:proxyIn", agg)
        add(proxy, "bgn:description", desc)
        add(desc, RDF_TYPE, "bgn:Description")
        add(desc, "bgn:sourceId", Literal(entry.source_id))
        if entry.file_desc.author is not None:
            add(desc, "bgn:author", Literal(entry.file_desc.author))
        if entry.file_desc.publisher is not None:
            add(desc, "bgn:title", Literal(entry.file_desc.publisher))
        add(desc, "prov:wasDerivedFrom", iris.entry_record(entry_id))
        txt = iris.text_entity(entry_id)
        add(txt, RDF_TYPE, "prov:Entity")
        add(txt, "prov:wasDerivedFrom", iris.entry_record(entry_id))
        meta = entry.person_metadata
        for kind, life in (("birth", meta.birth), ("death", meta.death)):
            if life is None or (life.date is None and life.place is None):
                continue
            ev = iris.meta_event(entry_id, kind)
            add(ev, RDF_TYPE, "sem:Event")
            add(ev, RDF_TYPE, META_EVENT_TYPES[kind])
            add(ev, "pb:Arg0", person_iri)
            add(desc, "bgn:includes", ev)
            if life.date is not None:
                add(ev, "sem:hasTime", Literal(life.date))
            if life.place is not None:
                add(ev, "sem:hasPlace", Literal(life.place))
    return st


# ---------------------------------------------------------------------------
# Store-wide conformance


def provenance_closure_violations(store: QuadStore, iris: Iris = Iris()) -> list[str]:
    """Entities generated by interpretation that lack a complete chain.

    Checks: description → wasDerivedFrom → source text entity, description →
    wasGeneratedBy → activity → wasAssociatedWith → agent, and every
    sub-activity corresponding to a plan step of a declared plan.
    """
    problems = []
    triples = store.triples()
    nlp_descs = sorted(
        s
        for s, p, o in triples
        if p == RDF_TYPE and o == "bgn:Description" and s.endswith("/nlp")
    )

    def objs(s, p):
        return [o for subj, pred, o in triples if subj == s and pred == p]

    plan_steps = {
        o for s, p, o in triples if p == "bgn:hasStep"
    }
    for desc in nlp_descs:
        derived = [o for o in objs(desc, "prov:wasDerivedFrom")]
        if not derived:
            problems.append(f"{desc}: no derivation source")
        activities = objs(desc, "prov:wasGeneratedBy")
        if not activities:
            problems.append(f"{desc}: no generating activity")
            continue
        for act in activities:
            if not objs(act, "prov:wasAssociatedWith"):
                problems.append(f"{desc}: activity {act} has no agent")
            for sub in objs(act, "bgn:subActivity"):
                steps = objs(sub, "pplan:correspondsToStep")
                if not steps:
                    problems.append(f"{desc}: sub-activity {sub} has no plan step")
                elif not set(steps) <= plan_steps:
                    problems.append(
                        f"{desc}: sub-activity {sub} cites undeclared plan step"
                    )
    return problems


def sameas_closure(store: QuadStore, iri: str) -> set[str]:
    """Explicit utility: nodes reachable from iri over owl:sameAs, both ways."""
    triples = store.triples()
    out = {iri}
    frontier = {iri}
    while frontier:
        nxt = set()
        for s, p, o in triples:
            if p != "owl:sameAs":
                continue
            if s in out and isinstance(o, str) and o not in out:
                nxt.add(o)
            if isinstance(o, str) and o in out and s not in out:
                nxt.add(s)
        out |= nxt
        frontier = nxt
    return out
