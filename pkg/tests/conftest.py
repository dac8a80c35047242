import json

import pytest

from biograph import graphstore, interpret
from biograph.annotate import PipelineConfig, run_pipeline, validate_document
from biograph.corpus import aggregate_persons, parse_corpus
from biograph.lexicon import load_default_lexicons
from biograph.views import Workspace


@pytest.fixture(scope="session")
def lex():
    return load_default_lexicons()


def counter_clock(start: float):
    state = {"t": start}

    def clock():
        t = state["t"]
        state["t"] = t + 1.0
        return t

    return clock


# the Fig-3-style single-biography fixture: inflected marriage verb,
# female biographee, one dated and located marriage
MARRIAGE_CORPUS = {
    "corpus": [
        {
            "id": "fig3",
            "source": "bwn",
            "personId": "maria",
            "fileDesc": {"author": "A. Schrijver", "publisher": "Biographisch Woordenboek"},
            "person": {
                "names": ["Maria van Dalen"],
                "gender": "female",
                "birth": {"date": "1470", "place": "Gouda"},
            },
            "text": "Zij huwde Frederik in 1490 te Gouda.",
        }
    ]
}

# four sources disagreeing on Erasmus' birth, as in the fact-conflict demo
ERASMUS_CORPUS = {
    "corpus": [
        {
            "id": "er-1",
            "source": "vdaa",
            "personId": "erasmus",
            "fileDesc": {"author": "Van der Aa", "publisher": "Biographisch Woordenboek der Nederlanden"},
            "person": {
                "names": ["Desiderius Erasmus"],
                "gender": "male",
                "birth": {"date": "1466-10-28", "place": "Rotterdam"},
                "death": {"date": "1536-07-12", "place": "Bazel"},
                "occupation": ["humanist"],
            },
            "text": "Desiderius Erasmus werd geboren te Rotterdam op 28 oktober 1466. Hij overleed te Bazel op 12 juli 1536.",
        },
        {
            "id": "er-2",
            "source": "nnbw",
            "personId": "erasmus",
            "fileDesc": {"author": "Molhuysen", "publisher": "Nieuw Nederlandsch Biografisch Woordenboek"},
            "person": {
                "names": ["Desiderius Erasmus"],
                "gender": "male",
                "birth": {"date": "1467-10-28", "place": "Rotterdam"},
            },
            "text": "Erasmus werd geboren op 28 oktober 1467 te Rotterdam.",
        },
        {
            "id": "er-3",
            "source": "bwn",
            "personId": "erasmus",
            "fileDesc": {"author": "C. Redacteur", "publisher": "Biografisch Woordenboek van Nederland"},
            "person": {
                "names": ["Desiderius Erasmus"],
                "gender": "male",
                "birth": {"date": "1469-10-28", "place": "Gouda"},
            },
            "text": "Erasmus werd geboren op 28 oktober 1469 te Gouda.",
        },
        {
            "id": "er-4",
            "source": "dbnl",
            "personId": "erasmus",
            "fileDesc": {"author": "D. Letterkundige", "publisher": "Digitale Bibliotheek"},
            "person": {
                "names": ["Desiderius Erasmus"],
                "gender": "male",
                "birth": {"date": "1466-10-28", "place": "Rotterdam"},
                "death": {"date": "1536-07-12", "place": "Bazel"},
            },
            "text": "Erasmus was een beroemd humanist. Hij overleed te Bazel in 1536.",
        },
    ]
}


def stats_corpus():
    """100 synthetic entries in one source, exactly 7 of them female."""
    entries = []
    for i in range(100):
        gender = "female" if i < 7 else "male"
        entries.append(
            {
                "id": f"st-{i}",
                "source": "bwn2",
                "person": {
                    "names": [f"Persoon {i}"],
                    "gender": gender,
                    "birth": {"date": str(1500 + i)},
                },
                "text": f"Persoon {i} leefde lang.",
            }
        )
    return {"corpus": entries}


def build_workspace(corpus_doc: dict, lexicons, iri_seed: int = 0) -> Workspace:
    """Annotate and interpret a corpus document under deterministic clocks."""
    corpus = parse_corpus(json.dumps(corpus_doc), "json")
    persons = aggregate_persons(list(corpus.entries), list(corpus.links))
    person_of = {eid: p for p in persons for eid in p.entry_ids}
    iris = graphstore.Iris()
    store = graphstore.QuadStore()
    for person in persons:
        entries = [corpus.entry(eid) for eid in person.entry_ids]
        store.assert_statements(graphstore.build_person_graph(person, entries, iris))
    lads = {}
    clock = counter_clock(100.0)
    interp_clock = counter_clock(1000.0)
    for entry in corpus.entries:
        lad = run_pipeline(entry, lexicons, PipelineConfig(), clock=clock)
        validate_document(lad)
        lads[entry.entry_id] = lad
        result = interpret.interpret_document(
            lad, entry, person_of[entry.entry_id], iris,
            iri_seed=iri_seed, clock=interp_clock,
        )
        store.assert_statements(result.statements)
    return Workspace(corpus, persons, store, lads, iris)


@pytest.fixture(scope="session")
def marriage_ws(lex):
    return build_workspace(MARRIAGE_CORPUS, lex)


@pytest.fixture(scope="session")
def erasmus_ws(lex):
    return build_workspace(ERASMUS_CORPUS, lex)


def make_role_lad(role_specs):
    """Synthetic single-predicate document for precedence testing.

    role_specs: list of (label, has_timex, has_loc) with label in
    {"time", "location"}. Word i+1 carries role i; word 0 is the verb.
    """
    from biograph.annotate import (
        Entity, LayeredDocument, Predicate, Role, Term, Timex, Token,
    )
    from biograph.dates import PartialDate

    words = ["verb"] + [f"r{i}" for i in range(len(role_specs))]
    text = " ".join(words)
    lad = LayeredDocument(doc_id="synth", text=text)
    offset = 0
    for k, w in enumerate(words):
        lad.tokens.append(Token(f"t{k}", w, offset, len(w), 0))
        offset += len(w) + 1
    lad.terms.append(Term("w0", ("t0",), "huwen", "VERB"))
    roles = []
    tx_count = ent_count = 0
    for i, (label, has_timex, has_loc) in enumerate(role_specs):
        tid = f"w{i + 1}"
        lad.terms.append(Term(tid, (f"t{i + 1}",), words[i + 1], "NOUN"))
        if has_timex:
            lad.timexes.append(Timex(f"tx{tx_count}", (tid,), PartialDate(1400 + i)))
            tx_count += 1
        if has_loc:
            lad.entities.append(Entity(f"e{ent_count}", (tid,), "LOC"))
            ent_count += 1
        roles.append(Role(label, (tid,)))
    lad.predicates.append(Predicate("p0", "w0", "Marriage", "c-marry", tuple(roles)))
    lad.coref_sets = [frozenset({"p0"})]
    return lad


def role_conversion_oracle(lad, role_specs):
    """Sequential restatement of the precedence rule with the one-time cap."""
    from biograph.interpret import reference_role_conversion

    expected = []
    has_time = False
    for i, (label, has_timex, has_loc) in enumerate(role_specs):
        tid = f"w{i + 1}"
        value = next((tx.value for tx in lad.timexes if tid in tx.term_ids), None)
        surface = lad.term_surface([tid])
        res = reference_role_conversion(label, has_timex, has_loc, value, surface)
        if res is None:
            continue
        if res[0] == "hasTime":
            if not has_time:
                expected.append(res)
                has_time = True
        else:
            expected.append(res)
    return expected


# ---------------------------------------------------------------------------
# Acceptance summary: one pass/fail line per criterion on every run

_acceptance_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance.py" not in str(report.nodeid):
        return
    _acceptance_results[report.nodeid.split("::")[-1]] = (
        "PASS" if report.passed else "FAIL"
    )


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance_results.items()):
        terminalreporter.write_line(f"{outcome}  {name}")
