"""Rule/lexicon-based annotation pipeline producing layered documents.

Each analyzer adds one stand-off layer over the source text; higher layers
reference lower ones by id. The pipeline records a StepRun per executed
step so the generating process can be reconstructed later.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

from .corpus import BiographyEntry, normalize_text
from .dates import PartialDate
from .errors import BiographError, IntegrityError
from .lexicon import LexiconSet

TOOL_VERSION = "0.1.0"
DEFAULT_COMMIT = "a" * 12

POS_VALUES = ("NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "NAME", "NUM", "PUNCT", "OTHER")
ENTITY_CLASSES = ("PER", "LOC", "ORG", "MISC")
CONTENT_POS = ("NOUN", "VERB", "ADJ", "ADV")
SPEECH_FRAMES = frozenset({"Statement"})

MONTHS = {
    "januari": 1, "februari": 2, "maart": 3, "april": 4, "mei": 5, "juni": 6,
    "juli": 7, "augustus": 8, "september": 9, "oktober": 10, "november": 11,
    "december": 12,
    "january": 1, "february": 2, "march": 3, "may": 5, "june": 6, "july": 7,
    "august": 8, "october": 10,
}
MONTH_NAMES_NL = {
    1: "januari", 2: "februari", 3: "maart", 4: "april", 5: "mei", 6: "juni",
    7: "juli", 8: "augustus", 9: "september", 10: "oktober", 11: "november",
    12: "december",
}

SENTENCE_FINAL = frozenset({".", "!", "?"})


# ---------------------------------------------------------------------------
# Layer records


@dataclass(frozen=True)
class Token:
    token_id: str
    surface: str
    offset: int
    length: int
    sentence_index: int


@dataclass(frozen=True)
class Term:
    term_id: str
    token_ids: tuple[str, ...]
    lemma: str
    pos: str
    morpho: tuple[tuple[str, str], ...] = ()

    def morpho_map(self) -> dict[str, str]:
        return dict(self.morpho)


@dataclass(frozen=True)
class Entity:
    entity_id: str
    term_ids: tuple[str, ...]
    cls: str
    external_ref: str | None = None


@dataclass(frozen=True)
class Timex:
    timex_id: str
    term_ids: tuple[str, ...]
    value: PartialDate


@dataclass(frozen=True)
class TermTag:
    term_id: str
    kind: str  # PROFESSION | FAMILY
    label: str


@dataclass(frozen=True)
class ConceptTag:
    term_id: str
    concept_id: str


@dataclass(frozen=True)
class Role:
    label: str  # Arg0 | Arg1 | Arg2 | location | time
    term_ids: tuple[str, ...]


@dataclass(frozen=True)
class Predicate:
    pred_id: str
    term_id: str
    frame_id: str | None
    concept_id: str | None
    roles: tuple[Role, ...]


@dataclass(frozen=True)
class Opinion:
    term_ids: tuple[str, ...]
    polarity: str  # pos | neg
    holder_term_ids: tuple[str, ...] | None = None


@dataclass(frozen=True)
class StepRun:
    step_name: str
    tool_version: str
    commit_ref: str
    started_at: float
    ended_at: float
    input_layers: tuple[str, ...]
    output_layers: tuple[str, ...]
    plan_step_id: str


@dataclass
class LayeredDocument:
    doc_id: str
    text: str
    tokens: list[Token] = field(default_factory=list)
    terms: list[Term] = field(default_factory=list)
    entities: list[Entity] = field(default_factory=list)
    timexes: list[Timex] = field(default_factory=list)
    term_tags: list[TermTag] = field(default_factory=list)
    concepts: list[ConceptTag] = field(default_factory=list)
    predicates: list[Predicate] = field(default_factory=list)
    opinions: list[Opinion] = field(default_factory=list)
    coref_sets: list[frozenset[str]] = field(default_factory=list)
    trace: list[StepRun] = field(default_factory=list)

    def term(self, term_id: str) -> Term:
        for t in self.terms:
            if t.term_id == term_id:
                return t
        raise KeyError(term_id)

    def term_tokens(self, term: Term) -> list[Token]:
        by_id = {t.token_id: t for t in self.tokens}
        return [by_id[i] for i in term.token_ids]

    def term_span(self, term_ids) -> tuple[int, int]:
        """Character span (begin, end-exclusive) covering the given terms."""
        toks = [
            tok
            for term in self.terms
            if term.term_id in set(term_ids)
            for tok in self.term_tokens(term)
        ]
        if not toks:
            raise IntegrityError("empty term span")
        return min(t.offset for t in toks), max(t.offset + t.length for t in toks)

    def term_surface(self, term_ids) -> str:
        begin, end = self.term_span(term_ids)
        return self.text[begin:end]

    def sentence_of_term(self, term: Term) -> int:
        return self.term_tokens(term)[0].sentence_index

    def sentence_terms(self, sentence_index: int) -> list[Term]:
        out = [
            t for t in self.terms if self.sentence_of_term(t) == sentence_index
        ]
        out.sort(key=lambda t: self.term_tokens(t)[0].offset)
        return out


LAYER_NAMES = (
    "tokens", "terms", "entities", "timexes", "term_tags", "concepts",
    "predicates", "opinions", "coref_sets",
)


def validate_document(lad: LayeredDocument) -> None:
    """Check referential integrity and span invariants of every layer."""
    text_len = len(lad.text)
    prev_end = -1
    token_ids = set()
    for tok in lad.tokens:
        if tok.offset < prev_end:
            raise IntegrityError(
                f"token {tok.token_id}: overlapping or out-of-order span"
            )
        if not (0 <= tok.offset and tok.offset + tok.length <= text_len):
            raise IntegrityError(f"token {tok.token_id}: span out of bounds")
        if lad.text[tok.offset : tok.offset + tok.length] != tok.surface:
            raise IntegrityError(f"token {tok.token_id}: surface mismatch")
        prev_end = tok.offset + tok.length
        token_ids.add(tok.token_id)
    term_ids = set()
    for term in lad.terms:
        if not term.token_ids:
            raise IntegrityError(f"term {term.term_id}: no tokens")
        if not set(term.token_ids) <= token_ids:
            raise IntegrityError(f"term {term.term_id}: unknown token reference")
        if term.pos not in POS_VALUES:
            raise IntegrityError(f"term {term.term_id}: bad pos {term.pos!r}")
        term_ids.add(term.term_id)

    def check_terms(refs, what):
        if not set(refs) <= term_ids:
            raise IntegrityError(f"{what}: unknown term reference")

    covered: set[str] = set()
    for ent in lad.entities:
        check_terms(ent.term_ids, f"entity {ent.entity_id}")
        if ent.cls not in ENTITY_CLASSES:
            raise IntegrityError(f"entity {ent.entity_id}: bad class {ent.cls!r}")
        if covered & set(ent.term_ids):
            raise IntegrityError(f"entity {ent.entity_id}: overlapping entities")
        covered |= set(ent.term_ids)
    for tx in lad.timexes:
        check_terms(tx.term_ids, f"timex {tx.timex_id}")
    for tag in lad.term_tags:
        check_terms([tag.term_id], "term tag")
    for c in lad.concepts:
        check_terms([c.term_id], "concept tag")
    pred_ids = set()
    for pred in lad.predicates:
        check_terms([pred.term_id], f"predicate {pred.pred_id}")
        for role in pred.roles:
            if not role.term_ids:
                raise IntegrityError(f"predicate {pred.pred_id}: empty role span")
            check_terms(role.term_ids, f"predicate {pred.pred_id} role")
            if pred.term_id in role.term_ids:
                raise IntegrityError(
                    f"predicate {pred.pred_id}: role overlaps predicate term"
                )
        pred_ids.add(pred.pred_id)
    for op in lad.opinions:
        check_terms(op.term_ids, "opinion")
        if op.holder_term_ids is not None:
            check_terms(op.holder_term_ids, "opinion holder")
    seen_preds: set[str] = set()
    for cs in lad.coref_sets:
        if not cs <= pred_ids:
            raise IntegrityError("coref set references unknown predicate")
        if cs & seen_preds:
            raise IntegrityError("coref sets not disjoint")
        seen_preds |= cs


# ---------------------------------------------------------------------------
# Tokenization

_WORD_CHARS = set("abcdefghijklmnopqrstuvwxyz0123456789_'" "áàäéèëïíóöúüç")


def _is_word_char(ch: str) -> bool:
    return ch.lower() in _WORD_CHARS or ch.isalnum()


def tokenize(text: str, abbreviations: frozenset[str] = frozenset()) -> list[Token]:
    """Split text into tokens with offsets and sentence indices.

    Terminal punctuation closes a sentence unless it belongs to a listed
    abbreviation (matched with its trailing dot, case-insensitive).
    """
    raw: list[tuple[str, int]] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if _is_word_char(ch):
            j = i
            while j < n and _is_word_char(text[j]):
                j += 1
            word = text[i:j]
            # keep an abbreviation's dot inside the token
            if j < n and text[j] == "." and (word + ".").lower() in {
                a.lower() for a in abbreviations
            }:
                j += 1
                word = text[i:j]
            raw.append((word, i))
            i = j
        else:
            raw.append((ch, i))
            i += 1
    tokens: list[Token] = []
    sentence = 0
    for k, (surface, offset) in enumerate(raw):
        tokens.append(
            Token(f"t{k}", surface, offset, len(surface), sentence)
        )
        if surface in SENTENCE_FINAL:
            sentence += 1
    return tokens


# ---------------------------------------------------------------------------
# Terms

_SUFFIX_RULES = (
    # (suffix, min length, replacement, pos)
    ("de", 5, "en", "VERB"),
    ("te", 5, "en", "VERB"),
    ("s", 4, "", "NOUN"),
)


def lemmatize_and_tag(tokens: list[Token], lexicons: LexiconSet) -> list[Term]:
    terms = []
    for k, tok in enumerate(tokens):
        surface = tok.surface
        entry = lexicons.lemmas.get(surface.lower())
        morpho: tuple[tuple[str, str], ...] = ()
        if entry is not None:
            lemma, pos, morpho = entry.lemma, entry.pos, entry.morpho
        elif surface.isdigit():
            lemma, pos = surface, "NUM"
        elif all(not ch.isalnum() for ch in surface):
            lemma, pos = surface, "PUNCT"
        elif surface[0].isupper() and surface[0].isalpha():
            lemma, pos = surface, "NAME"
        else:
            for suffix, minlen, repl, rpos in _SUFFIX_RULES:
                if surface.endswith(suffix) and len(surface) >= minlen:
                    lemma, pos = surface[: -len(suffix)] + repl, rpos
                    break
            else:
                lemma, pos = surface.lower(), "OTHER"
        if pos == "PRON":
            pron = lexicons.pronouns.get(surface.lower())
            if pron is not None:
                m = dict(morpho)
                m["gender"] = pron.gender
                m["person"] = pron.person
                if pron.possessive:
                    m["poss"] = "1"
                morpho = tuple(sorted(m.items()))
        terms.append(Term(f"w{k}", (tok.token_id,), lemma, pos, morpho))
    return terms


# ---------------------------------------------------------------------------
# Time expressions


def _year_of(term: Term) -> int | None:
    if term.pos == "NUM" and term.lemma.isdigit() and len(term.lemma) == 4:
        y = int(term.lemma)
        if 1000 <= y <= 2100:
            return y
    return None


def _day_of(term: Term) -> int | None:
    if term.pos == "NUM" and term.lemma.isdigit() and len(term.lemma) <= 2:
        d = int(term.lemma)
        if 1 <= d <= 31:
            return d
    return None


def tag_timex(lad: LayeredDocument) -> list[Timex]:
    """Recognize day-month-year, month-year and bare-year expressions."""
    timexes = []
    terms = sorted(lad.terms, key=lambda t: lad.term_tokens(t)[0].offset)
    i = 0
    n = len(terms)
    count = 0
    while i < n:
        value = None
        width = 0
        day = _day_of(terms[i])
        if day is not None and i + 2 < n:
            month = MONTHS.get(terms[i + 1].lemma.lower())
            year = _year_of(terms[i + 2])
            if month is not None and year is not None:
                try:
                    value = PartialDate(year, month, day)
                    width = 3
                except ValueError:
                    value = None
        if value is None and i + 1 < n:
            month = MONTHS.get(terms[i].lemma.lower())
            year = _year_of(terms[i + 1])
            if month is not None and year is not None:
                value, width = PartialDate(year, month), 2
        if value is None:
            year = _year_of(terms[i])
            if year is not None:
                value, width = PartialDate(year), 1
        if value is not None:
            timexes.append(
                Timex(
                    f"tx{count}",
                    tuple(t.term_id for t in terms[i : i + width]),
                    value,
                )
            )
            count += 1
            i += width
        else:
            i += 1
    return timexes


def render_timex(value: PartialDate) -> str:
    """Render a partial date back to a recognizable surface string."""
    if value.month is None:
        return str(value.year)
    name = MONTH_NAMES_NL[value.month]
    if value.day is None:
        return f"{name} {value.year}"
    return f"{value.day} {name} {value.year}"


# ---------------------------------------------------------------------------
# Entities


def tag_entities(lad: LayeredDocument, lexicons: LexiconSet) -> list[Entity]:
    terms = sorted(lad.terms, key=lambda t: lad.term_tokens(t)[0].offset)
    gaz = {tuple(name.split()): cls for name, cls in lexicons.gazetteer.items()}
    max_len = max((len(k) for k in gaz), default=0)
    entities: list[Entity] = []
    used: set[str] = set()
    count = 0
    i = 0
    n = len(terms)
    # pass 1: maximal gazetteer matches, longest-leftmost
    while i < n:
        match = None
        for width in range(min(max_len, n - i), 0, -1):
            window = terms[i : i + width]
            key = tuple(lad.term_surface([t.term_id]) for t in window)
            if key in gaz:
                match = (width, gaz[key])
                break
        if match is not None:
            width, cls = match
            ids = tuple(t.term_id for t in terms[i : i + width])
            entities.append(Entity(f"e{count}", ids, cls))
            used |= set(ids)
            count += 1
            i += width
        else:
            i += 1
    # pass 2: leftover capitalized NAME runs, skipping sentence-initial ones
    i = 0
    while i < n:
        t = terms[i]
        if t.pos == "NAME" and t.term_id not in used:
            j = i
            while j < n and terms[j].pos == "NAME" and terms[j].term_id not in used:
                j += 1
            run = terms[i:j]
            first_tok = lad.term_tokens(run[0])[0]
            sent = first_tok.sentence_index
            sent_start = min(
                tok.offset for tok in lad.tokens if tok.sentence_index == sent
            )
            if first_tok.offset != sent_start:
                ids = tuple(t.term_id for t in run)
                entities.append(Entity(f"e{count}", ids, "MISC"))
                used |= set(ids)
                count += 1
            i = j
        else:
            i += 1
    entities.sort(key=lambda e: lad.term_span(e.term_ids)[0])
    return [replace(e, entity_id=f"e{k}") for k, e in enumerate(entities)]


# ---------------------------------------------------------------------------
# Term tags and concepts


def tag_terms(lad: LayeredDocument, lexicons: LexiconSet) -> list[TermTag]:
    tags = []
    for term in lad.terms:
        if term.lemma in lexicons.professions:
            tags.append(TermTag(term.term_id, "PROFESSION", lexicons.professions[term.lemma]))
        if term.lemma in lexicons.family:
            tags.append(TermTag(term.term_id, "FAMILY", lexicons.family[term.lemma]))
    return tags


def tag_concepts(lad: LayeredDocument, lexicons: LexiconSet) -> list[ConceptTag]:
    tags = []
    for term in lad.terms:
        if term.pos in CONTENT_POS:
            concept = lexicons.best_sense(term.lemma, term.pos)
            if concept is not None:
                tags.append(ConceptTag(term.term_id, concept))
    return tags


# ---------------------------------------------------------------------------
# Predicates and roles

_NP_POS = frozenset({"NOUN", "NAME", "PRON", "DET", "ADJ", "NUM"})
_ANCHOR_POS = frozenset({"NOUN", "NAME", "PRON"})


def _is_prep(term: Term) -> bool:
    return term.morpho_map().get("prep") == "1"


def _prep_groups(sent_terms: list[Term]) -> list[list[Term]]:
    """Prepositional groups: a preposition plus the run of NP terms after it."""
    groups = []
    i = 0
    n = len(sent_terms)
    while i < n:
        if _is_prep(sent_terms[i]):
            j = i + 1
            while j < n and sent_terms[j].pos in _NP_POS and not _is_prep(sent_terms[j]):
                j += 1
            groups.append(sent_terms[i:j])
            i = j
        else:
            i += 1
    return groups


def _expand_np(sent_terms: list[Term], anchor: int) -> list[Term]:
    lo = anchor
    while lo > 0 and sent_terms[lo - 1].pos in _NP_POS:
        lo -= 1
    hi = anchor
    while hi + 1 < len(sent_terms) and sent_terms[hi + 1].pos in {"NOUN", "NAME"}:
        hi += 1
    return sent_terms[lo : hi + 1]


def tag_predicates(lad: LayeredDocument, lexicons: LexiconSet) -> list[Predicate]:
    concept_by_term = {c.term_id: c.concept_id for c in lad.concepts}
    loc_terms = {
        tid for e in lad.entities if e.cls == "LOC" for tid in e.term_ids
    }
    timex_terms = {tid for tx in lad.timexes for tid in tx.term_ids}
    per_terms = {
        tid for e in lad.entities if e.cls == "PER" for tid in e.term_ids
    }
    preds: list[Predicate] = []
    count = 0
    sentences = sorted({lad.sentence_of_term(t) for t in lad.terms})
    for sent in sentences:
        sent_terms = lad.sentence_terms(sent)
        grouped = {
            t.term_id for g in _prep_groups(sent_terms) for t in g
        }
        for vi, verb in enumerate(sent_terms):
            if verb.pos != "VERB":
                continue
            concept = concept_by_term.get(verb.term_id)
            frame = None
            if concept is not None and concept in lexicons.frames:
                frame = lexicons.frames[concept].frame_id
            roles: list[Role] = []
            # Arg0: nearest preceding nominal anchor outside prep groups
            for k in range(vi - 1, -1, -1):
                t = sent_terms[k]
                if t.term_id in grouped:
                    continue
                if t.pos in _ANCHOR_POS or t.term_id in per_terms:
                    span = _expand_np(sent_terms, k)
                    ids = tuple(
                        s.term_id for s in span if s.term_id != verb.term_id
                    )
                    if ids:
                        roles.append(Role("Arg0", ids))
                    break
            # Arg1: nearest following nominal anchor outside prep groups
            for k in range(vi + 1, len(sent_terms)):
                t = sent_terms[k]
                if t.term_id in grouped:
                    continue
                if t.pos == "VERB":
                    break
                if t.pos in {"NOUN", "NAME"} or t.term_id in per_terms:
                    span = _expand_np(sent_terms, k)
                    ids = tuple(
                        s.term_id
                        for s in span
                        if s.term_id != verb.term_id and s.term_id not in grouped
                    )
                    if ids:
                        roles.append(Role("Arg1", ids))
                    break
            # prepositional groups: time before place
            for group in _prep_groups(sent_terms):
                gids = {t.term_id for t in group}
                tx_ids = [
                    tx.term_ids for tx in lad.timexes if set(tx.term_ids) <= gids
                ]
                if tx_ids:
                    roles.append(Role("time", tx_ids[0]))
                    continue
                loc_ids = tuple(t.term_id for t in group if t.term_id in loc_terms)
                if loc_ids:
                    roles.append(Role("location", loc_ids))
            preds.append(
                Predicate(f"p{count}", verb.term_id, frame, concept, tuple(roles))
            )
            count += 1
    return preds


# ---------------------------------------------------------------------------
# Event coreference


def _merge_rule(lad: LayeredDocument, a: Predicate, b: Predicate) -> bool:
    """Two predicates corefer when frame, Arg0 surface and time all agree."""
    if a.frame_id is None or a.frame_id != b.frame_id:
        return False

    def arg0_surfaces(p: Predicate) -> set[str]:
        out = set()
        for role in p.roles:
            if role.label == "Arg0":
                out |= {
                    lad.term_surface([tid]).lower() for tid in role.term_ids
                }
        return out

    if not (arg0_surfaces(a) & arg0_surfaces(b)):
        return False

    def times(p: Predicate) -> list[PartialDate]:
        tx_by_ids = {tx.term_ids: tx.value for tx in lad.timexes}
        return [
            tx_by_ids[role.term_ids]
            for role in p.roles
            if role.label == "time" and role.term_ids in tx_by_ids
        ]

    for ta in times(a):
        for tb in times(b):
            if not ta.compatible(tb):
                return False
    return True


def resolve_event_coref(lad: LayeredDocument) -> list[frozenset[str]]:
    preds = lad.predicates
    parent = {p.pred_id: p.pred_id for p in preds}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, a in enumerate(preds):
        for b in preds[i + 1 :]:
            if _merge_rule(lad, a, b):
                parent[find(a.pred_id)] = find(b.pred_id)
    groups: dict[str, set[str]] = {}
    for p in preds:
        groups.setdefault(find(p.pred_id), set()).add(p.pred_id)
    return [frozenset(g) for g in sorted(groups.values(), key=min)]


# ---------------------------------------------------------------------------
# Opinions


def tag_opinions(lad: LayeredDocument, lexicons: LexiconSet) -> list[Opinion]:
    per_terms = {
        tid for e in lad.entities if e.cls == "PER" for tid in e.term_ids
    }
    opinions = []
    for term in lad.terms:
        if term.pos not in ("ADJ", "ADV"):
            continue
        polarity = lexicons.polarity.get(term.lemma)
        if polarity is None:
            continue
        holder = None
        sent = lad.sentence_of_term(term)
        for pred in lad.predicates:
            if pred.frame_id not in SPEECH_FRAMES:
                continue
            if lad.sentence_of_term(lad.term(pred.term_id)) != sent:
                continue
            for role in pred.roles:
                if role.label == "Arg0" and set(role.term_ids) & per_terms:
                    holder = role.term_ids
        opinions.append(Opinion((term.term_id,), polarity, holder))
    return opinions


# ---------------------------------------------------------------------------
# Pipeline


@dataclass(frozen=True)
class StepSpec:
    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]


STEP_SPECS = {
    s.name: s
    for s in (
        StepSpec("tokenize", (), ("tokens",)),
        StepSpec("terms", ("tokens",), ("terms",)),
        StepSpec("timex", ("terms",), ("timexes",)),
        StepSpec("entities", ("terms",), ("entities",)),
        StepSpec("term_tags", ("terms",), ("term_tags",)),
        StepSpec("concepts", ("terms",), ("concepts",)),
        StepSpec(
            "predicates", ("terms", "entities", "timexes", "concepts"), ("predicates",)
        ),
        StepSpec("event_coref", ("predicates", "entities", "timexes"), ("coref_sets",)),
        StepSpec("opinions", ("terms", "predicates", "entities"), ("opinions",)),
    )
}

DEFAULT_STEPS = (
    "tokenize", "terms", "timex", "entities", "term_tags", "concepts",
    "predicates", "event_coref", "opinions",
)


@dataclass(frozen=True)
class PipelineConfig:
    steps: tuple[str, ...] = DEFAULT_STEPS
    plan_id: str = "plan/default"
    tool_version: str = TOOL_VERSION
    commit_ref: str = DEFAULT_COMMIT


def plan_step_id(plan_id: str, index: int, step_name: str) -> str:
    return f"{plan_id}/step/{index}-{step_name}"


class PipelineError(BiographError):
    pass


def check_step_order(steps: tuple[str, ...]) -> None:
    available: set[str] = set()
    for name in steps:
        spec = STEP_SPECS.get(name)
        if spec is None:
            raise PipelineError(f"unknown pipeline step: {name!r}")
        missing = set(spec.inputs) - available
        if missing:
            raise PipelineError(
                f"step {name!r} requires layers {sorted(missing)} "
                "that no earlier step produces"
            )
        available |= set(spec.outputs)


def run_pipeline(
    entry: BiographyEntry,
    lexicons: LexiconSet,
    config: PipelineConfig = PipelineConfig(),
    clock=time.time,
    validate: bool = False,
) -> LayeredDocument:
    """Run the configured steps in order over one entry's text."""
    check_step_order(config.steps)
    lad = LayeredDocument(doc_id=entry.entry_id, text=normalize_text(entry.text))
    for index, name in enumerate(config.steps):
        spec = STEP_SPECS[name]
        started = clock()
        if name == "tokenize":
            lad.tokens = tokenize(lad.text, lexicons.abbreviations)
        elif name == "terms":
            lad.terms = lemmatize_and_tag(lad.tokens, lexicons)
        elif name == "timex":
            lad.timexes = tag_timex(lad)
        elif name == "entities":
            lad.entities = tag_entities(lad, lexicons)
        elif name == "term_tags":
            lad.term_tags = tag_terms(lad, lexicons)
        elif name == "concepts":
            lad.concepts = tag_concepts(lad, lexicons)
        elif name == "predicates":
            lad.predicates = tag_predicates(lad, lexicons)
        elif name == "event_coref":
            lad.coref_sets = resolve_event_coref(lad)
        elif name == "opinions":
            lad.opinions = tag_opinions(lad, lexicons)
        ended = clock()
        lad.trace.append(
            StepRun(
                step_name=name,
                tool_version=config.tool_version,
                commit_ref=config.commit_ref,
                started_at=started,
                ended_at=ended,
                input_layers=spec.inputs,
                output_layers=spec.outputs,
                plan_step_id=plan_step_id(config.plan_id, index, name),
            )
        )
        if validate:
            validate_document(lad)
    return lad


# ---------------------------------------------------------------------------
# lad-1 serialization

LAD_SCHEMA = "lad-1"


def document_to_json(lad: LayeredDocument) -> dict:
    return {
        "schema": LAD_SCHEMA,
        "docId": lad.doc_id,
        "text": lad.text,
        "tokens": [
            {
                "id": t.token_id, "surface": t.surface, "offset": t.offset,
                "length": t.length, "sentence": t.sentence_index,
            }
            for t in lad.tokens
        ],
        "terms": [
            {
                "id": t.term_id, "tokens": list(t.token_ids), "lemma": t.lemma,
                "pos": t.pos, "morpho": dict(t.morpho),
            }
            for t in lad.terms
        ],
        "entities": [
            {
                "id": e.entity_id, "terms": list(e.term_ids), "class": e.cls,
                **({"externalRef": e.external_ref} if e.external_ref else {}),
            }
            for e in lad.entities
        ],
        "timexes": [
            {"id": x.timex_id, "terms": list(x.term_ids), "value": x.value.lexical()}
            for x in lad.timexes
        ],
        "termTags": [
            {"term": t.term_id, "kind": t.kind, "label": t.label}
            for t in lad.term_tags
        ],
        "concepts": [
            {"term": c.term_id, "concept": c.concept_id} for c in lad.concepts
        ],
        "predicates": [
            {
                "id": p.pred_id, "term": p.term_id,
                "frame": p.frame_id, "concept": p.concept_id,
                "roles": [
                    {"label": r.label, "terms": list(r.term_ids)} for r in p.roles
                ],
            }
            for p in lad.predicates
        ],
        "opinions": [
            {
                "terms": list(o.term_ids), "polarity": o.polarity,
                "holder": list(o.holder_term_ids) if o.holder_term_ids else None,
            }
            for o in lad.opinions
        ],
        "corefSets": [sorted(cs) for cs in lad.coref_sets],
        "trace": [
            {
                "step": r.step_name, "version": r.tool_version,
                "commit": r.commit_ref, "started": r.started_at,
                "ended": r.ended_at, "inputs": list(r.input_layers),
                "outputs": list(r.output_layers), "planStep": r.plan_step_id,
            }
            for r in lad.trace
        ],
    }


def document_from_json(doc: dict) -> LayeredDocument:
    if doc.get("schema") != LAD_SCHEMA:
        raise BiographError(f"unsupported document schema: {doc.get('schema')!r}")
    lad = LayeredDocument(doc_id=doc["docId"], text=doc["text"])
    lad.tokens = [
        Token(t["id"], t["surface"], t["offset"], t["length"], t["sentence"])
        for t in doc["tokens"]
    ]
    lad.terms = [
        Term(
            t["id"], tuple(t["tokens"]), t["lemma"], t["pos"],
            tuple(sorted(t.get("morpho", {}).items())),
        )
        for t in doc["terms"]
    ]
    lad.entities = [
        Entity(e["id"], tuple(e["terms"]), e["class"], e.get("externalRef"))
        for e in doc["entities"]
    ]
    lad.timexes = [
        Timex(x["id"], tuple(x["terms"]), PartialDate.parse(x["value"]))
        for x in doc["timexes"]
    ]
    lad.term_tags = [
        TermTag(t["term"], t["kind"], t["label"]) for t in doc["termTags"]
    ]
    lad.concepts = [
        ConceptTag(c["term"], c["concept"]) for c in doc["concepts"]
    ]
    lad.predicates = [
        Predicate(
            p["id"], p["term"], p.get("frame"), p.get("concept"),
            tuple(Role(r["label"], tuple(r["terms"])) for r in p["roles"]),
        )
        for p in doc["predicates"]
    ]
    lad.opinions = [
        Opinion(
            tuple(o["terms"]), o["polarity"],
            tuple(o["holder"]) if o.get("holder") else None,
        )
        for o in doc["opinions"]
    ]
    lad.coref_sets = [frozenset(cs) for cs in doc["corefSets"]]
    lad.trace = [
        StepRun(
            r["step"], r["version"], r["commit"], r["started"], r["ended"],
            tuple(r["inputs"]), tuple(r["outputs"]), r["planStep"],
        )
        for r in doc["trace"]
    ]
    return lad


def dump_document(lad: LayeredDocument) -> str:
    return json.dumps(document_to_json(lad), ensure_ascii=False, indent=2) + "\n"


def load_document(text: str) -> LayeredDocument:
    return document_from_json(json.loads(text))
