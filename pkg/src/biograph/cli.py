"""Command line front end.

All stages exchange data through files: a normalized corpus store (JSON),
a directory of layered-document JSON files, and quads-lines graph stores.
Query subcommands with --json print exactly the bytes the HTTP API
returns for the equivalent endpoint.
"""

from __future__ import annotations

import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import click

from . import analytics, evaluate, graphstore, interpret, views
from .annotate import PipelineConfig, dump_document, run_pipeline, validate_document
from .corpus import aggregate_persons, parse_corpus, serialize_corpus
from .errors import BiographError
from .lexicon import load_default_lexicons, load_lexicons
from .views import Workspace, canonical_json


def _fail(message: str) -> "click.exceptions.Exit":
    click.echo(f"error: {message}", err=True)
    return click.exceptions.Exit(1)


def _counter_clock(start: float):
    state = {"t": start}

    def clock():
        t = state["t"]
        state["t"] = t + 1.0
        return t

    return clock


@click.group()
def main():
    """Biographical knowledge-graph toolkit."""


# ---------------------------------------------------------------------------
# Pipeline stages


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["xml", "json"]), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
def ingest(in_path, fmt, out_path):
    """Parse a corpus file and write the normalized corpus store."""
    path = Path(in_path)
    fmt = fmt or ("xml" if path.suffix == ".xml" else "json")
    try:
        corpus = parse_corpus(path.read_bytes(), fmt)
    except BiographError as exc:
        raise _fail(str(exc))
    Path(out_path).write_text(serialize_corpus(corpus, "json"), encoding="utf-8")
    click.echo(f"ingested {len(corpus.entries)} entries -> {out_path}")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--lexicons", "lexicon_dir", type=click.Path(exists=True), default=None)
@click.option("--fixed-clock", type=float, default=None,
              help="Deterministic step timestamps starting at this value.")
def annotate(corpus_path, config_path, out_dir, lexicon_dir, fixed_clock):
    """Run the annotation pipeline over every entry in the corpus store."""
    corpus = parse_corpus(Path(corpus_path).read_bytes(), "json")
    lex = load_lexicons(lexicon_dir) if lexicon_dir else load_default_lexicons()
    config = PipelineConfig()
    if config_path is not None:
        raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
        config = PipelineConfig(
            steps=tuple(raw.get("steps", config.steps)),
            plan_id=raw.get("planId", config.plan_id),
            tool_version=raw.get("toolVersion", config.tool_version),
            commit_ref=raw.get("commitRef", config.commit_ref),
        )
    clock = _counter_clock(fixed_clock) if fixed_clock is not None else time.time
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for entry in corpus.entries:
        try:
            lad = run_pipeline(entry, lex, config, clock=clock)
            validate_document(lad)
        except BiographError as exc:
            raise _fail(f"{entry.entry_id}: {exc}")
        (out / f"{entry.entry_id}.json").write_text(
            dump_document(lad), encoding="utf-8"
        )
    click.echo(f"annotated {len(corpus.entries)} entries -> {out_dir}")


@main.command(name="interpret")
@click.option("--lad", "lad_dir", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--iri-seed", type=int, default=0)
@click.option("--fixed-clock", type=float, default=None)
def interpret_cmd(lad_dir, corpus_path, out_path, iri_seed, fixed_clock):
    """Convert metadata and annotations into the knowledge graph."""
    corpus = parse_corpus(Path(corpus_path).read_bytes(), "json")
    persons = aggregate_persons(list(corpus.entries), list(corpus.links))
    person_of = {eid: p for p in persons for eid in p.entry_ids}
    clock = _counter_clock(fixed_clock) if fixed_clock is not None else time.time
    store = graphstore.QuadStore()
    iris = graphstore.Iris()
    for person in persons:
        entries = [corpus.entry(eid) for eid in person.entry_ids]
        store.assert_statements(graphstore.build_person_graph(person, entries, iris))
    from .annotate import load_document

    interpreted = 0
    for path in sorted(Path(lad_dir).glob("*.json")):
        lad = load_document(path.read_text(encoding="utf-8"))
        try:
            entry = corpus.entry(lad.doc_id)
        except KeyError:
            raise _fail(f"document {lad.doc_id!r} not in corpus store")
        result = interpret.interpret_document(
            lad, entry, person_of[lad.doc_id], iris,
            iri_seed=iri_seed, clock=clock,
        )
        store.assert_statements(result.statements)
        interpreted += 1
    Path(out_path).write_bytes(graphstore.serialize(store))
    click.echo(
        f"interpreted {interpreted} documents, {len(store)} statements -> {out_path}"
    )


# ---------------------------------------------------------------------------
# Graph store


@main.group()
def graph():
    """Export or query a graph store."""


@graph.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt",
              type=click.Choice(["quads-lines", "triples-lines", "json"]),
              default="quads-lines")
@click.option("--out", "out_path", type=click.Path(), default=None)
def export(store_path, fmt, out_path):
    store = graphstore.parse(Path(store_path).read_bytes())
    data = graphstore.serialize(store, fmt)
    if out_path is None:
        sys.stdout.buffer.write(data)
    else:
        Path(out_path).write_bytes(data)


def _parse_pattern(text: str):
    pattern = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        terms = []
        pos = 0
        for _ in range(3):
            while pos < len(line) and line[pos].isspace():
                pos += 1
            if pos < len(line) and line[pos] == "?":
                end = pos
                while end < len(line) and not line[end].isspace():
                    end += 1
                terms.append(line[pos:end])
                pos = end
            elif pos < len(line) and line[pos] == "_":
                terms.append(None)
                pos += 1
            else:
                term, pos = graphstore._parse_term(line, pos, lineno)
                terms.append(term)
        pattern.append(tuple(terms))
    return pattern


@graph.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--pattern", "pattern_path", required=True, type=click.Path(exists=True))
def query(store_path, pattern_path):
    """Match a basic graph pattern; one binding set per output line."""
    store = graphstore.parse(Path(store_path).read_bytes())
    pattern = _parse_pattern(Path(pattern_path).read_text(encoding="utf-8"))
    try:
        bindings = store.match(pattern)
    except BiographError as exc:
        raise _fail(str(exc))
    for b in bindings:
        rendered = {
            var: graphstore.render_term(val) for var, val in sorted(b.items())
        }
        click.echo(json.dumps(rendered, ensure_ascii=False, sort_keys=True))


# ---------------------------------------------------------------------------
# Analytics queries

_workspace_options = [
    click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True)),
    click.option("--store", "store_path", type=click.Path(exists=True), default=None),
    click.option("--lads", "lads_dir", type=click.Path(exists=True), default=None),
    click.option("--json", "as_json", is_flag=True),
]


def _with_workspace(fn):
    for opt in reversed(_workspace_options):
        fn = opt(fn)
    return fn


def _load_ws(corpus_path, store_path, lads_dir) -> Workspace:
    try:
        return Workspace.load(corpus_path, store_path, lads_dir)
    except BiographError as exc:
        raise _fail(str(exc))


def _emit(payload: dict, as_json: bool, human_lines) -> None:
    if as_json:
        sys.stdout.buffer.write(canonical_json(payload))
    else:
        for line in human_lines(payload):
            click.echo(line)


@main.group(name="query")
def query_group():
    """Historical queries over an interpreted workspace."""


@query_group.command()
@_with_workspace
@click.option("--person", "person_id", required=True)
def timeline(corpus_path, store_path, lads_dir, as_json, person_id):
    ws = _load_ws(corpus_path, store_path, lads_dir)
    try:
        payload = views.timeline_payload(ws, person_id)
    except views.ViewError as exc:
        raise _fail(str(exc))
    _emit(payload, as_json, lambda p: (
        f"{e['date'] or '????'}  {e['type']:<12} {e['place'] or ''}"
        for e in p["entries"]
    ))


@query_group.command(name="concept-stats")
@_with_workspace
@click.option("--concept", "concept_query", required=True)
@click.option("--group-by", default="source",
              type=click.Choice(["source", "birth-century", "gender"]))
def concept_stats(corpus_path, store_path, lads_dir, as_json, concept_query, group_by):
    ws = _load_ws(corpus_path, store_path, lads_dir)
    lex = load_default_lexicons()
    stats = analytics.concept_stats(
        concept_query, group_by, ws.store, list(ws.corpus.entries), lex, ws.iris
    )
    payload = {
        "query": stats.query,
        "conceptIds": list(stats.concept_ids),
        "groupBy": stats.group_by,
        "counts": stats.counts,
        "groupSizes": stats.group_sizes,
        "rates": {g: r for g, r in stats.rates().items()},
        "diagnostic": stats.diagnostic,
    }
    _emit(payload, as_json, lambda p: (
        f"{g}: {p['counts'].get(g, 0)}/{p['groupSizes'][g]}"
        for g in sorted(p["groupSizes"])
    ))


@query_group.command(name="adjective-ratio")
@_with_workspace
@click.option("--source", "source_id", required=True)
def adjective_ratio(corpus_path, store_path, lads_dir, as_json, source_id):
    ws = _load_ws(corpus_path, store_path, lads_dir)
    try:
        ratio = analytics.adjective_ratio(
            source_id, list(ws.corpus.entries), ws.lads
        )
    except analytics.AnalyticsError as exc:
        raise _fail(str(exc))
    payload = {
        "source": source_id,
        "numerator": ratio.numerator,
        "denominator": ratio.denominator,
        "ratio": float(ratio),
    }
    _emit(payload, as_json,
          lambda p: [f"{p['numerator']}/{p['denominator']} = {p['ratio']:.4f}"])


@query_group.command()
@_with_workspace
@click.option("--stoplist", default="", help="Comma-separated sentence-initial stoplist.")
def names(corpus_path, store_path, lads_dir, as_json, stoplist):
    ws = _load_ws(corpus_path, store_path, lads_dir)
    stop = frozenset(s for s in stoplist.split(",") if s)
    counts = analytics.name_mentions(
        [e.text for e in ws.corpus.entries], stoplist=stop
    )
    payload = {"names": [{"name": n, "count": c} for n, c in counts]}
    _emit(payload, as_json,
          lambda p: (f"{row['count']:>5}  {row['name']}" for row in p["names"]))


@query_group.command()
@_with_workspace
@click.option("--person", "person_ids", multiple=True)
@click.option("--type", "event_types", multiple=True)
def participation(corpus_path, store_path, lads_dir, as_json, person_ids, event_types):
    ws = _load_ws(corpus_path, store_path, lads_dir)
    try:
        payload = views.participation_payload(
            ws, list(person_ids) or None, list(event_types) or None
        )
    except views.ViewError as exc:
        raise _fail(str(exc))
    _emit(payload, as_json, lambda p: (
        f"{e['year']}  {e['type']:<12} {', '.join(e['participants'])}"
        for e in p["events"]
    ))


@query_group.command()
@_with_workspace
@click.option("--count-events", is_flag=True,
              help="Score by event count instead of distinct participants.")
def climax(corpus_path, store_path, lads_dir, as_json, count_events):
    ws = _load_ws(corpus_path, store_path, lads_dir)
    payload = views.climax_payload(ws, count_events=count_events)
    _emit(payload, as_json, lambda p: (
        f"{g['type']}: " + " ".join(f"{pt['year']}={pt['score']}" for pt in g["points"])
        for g in p["groups"]
    ))


@query_group.command()
@_with_workspace
@click.option("--person", "person_id", required=True)
@click.option("--kind", required=True,
              type=click.Choice(list(analytics.FACT_KINDS)))
def facts(corpus_path, store_path, lads_dir, as_json, person_id, kind):
    ws = _load_ws(corpus_path, store_path, lads_dir)
    try:
        payload = views.fact_payload(ws, person_id, kind)
    except views.ViewError as exc:
        raise _fail(str(exc))
    _emit(payload, as_json, lambda p: (
        f"{alt['value']}  [{alt['agreementWithSelected']}] "
        f"({len(alt['sources'])} source(s))"
        for alt in p["alternatives"]
    ))


# ---------------------------------------------------------------------------
# Evaluation


@main.group(name="eval")
def eval_group():
    """Intrinsic and hypothesis-based evaluation."""


@eval_group.command()
@click.option("--system", "system_path", required=True, type=click.Path(exists=True))
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--matching", type=click.Choice(list(evaluate.MATCHING_MODES)),
              default="exact-span")
def intrinsic(system_path, gold_path, matching):
    from .annotate import load_document

    lad = load_document(Path(system_path).read_text(encoding="utf-8"))
    gold = evaluate.gold_from_json(Path(gold_path).read_text(encoding="utf-8"))
    try:
        report = evaluate.intrinsic_eval(lad, gold, matching)
    except evaluate.EvalError as exc:
        raise _fail(str(exc))
    click.echo(f"layer={report.layer} matching={report.matching}")
    click.echo(
        f"P = {report.precision} ({float(report.precision):.4f})  "
        f"R = {report.recall} ({float(report.recall):.4f})  "
        f"F1 = {float(report.f1):.4f}"
    )
    for err in report.errors:
        click.echo(
            f"  {err.kind}: [{err.begin},{err.end}) "
            f"gold={err.gold_label} system={err.system_label}"
        )


def _load_scores(path) -> dict[str, Fraction]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return {doc: Fraction(value).limit_denominator(10**9) for doc, value in raw.items()}


@eval_group.command()
@click.option("--scores-a", required=True, type=click.Path(exists=True))
@click.option("--scores-b", required=True, type=click.Path(exists=True))
@click.option("-k", "k", required=True, type=int)
def sample(scores_a, scores_b, k):
    try:
        triple = evaluate.hypothesis_sample(_load_scores(scores_a), _load_scores(scores_b), k)
    except evaluate.EvalError as exc:
        raise _fail(str(exc))
    for name, docs in (
        ("confirm", triple.confirm), ("oppose", triple.oppose), ("neutral", triple.neutral)
    ):
        click.echo(f"{name}:")
        for doc_id, source, score in sorted(docs):
            click.echo(f"  {source} {doc_id} score={score}")


@eval_group.command()
@click.option("--scores-a", required=True, type=click.Path(exists=True))
@click.option("--scores-b", required=True, type=click.Path(exists=True))
@click.option("-k", "k", required=True, type=int)
@click.option("--human", "human_path", required=True, type=click.Path(exists=True))
@click.option("--system", "system_path", required=True, type=click.Path(exists=True))
def compare(scores_a, scores_b, k, human_path, system_path):
    human = json.loads(Path(human_path).read_text(encoding="utf-8"))
    system = json.loads(Path(system_path).read_text(encoding="utf-8"))
    try:
        triple = evaluate.hypothesis_sample(_load_scores(scores_a), _load_scores(scores_b), k)
        report = evaluate.compare_conclusions(triple, human, system)
    except evaluate.EvalError as exc:
        raise _fail(str(exc))
    for s in report.samples:
        click.echo(
            f"{s.sample}: agreement {s.agreement} "
            f"({s.agreed}/{s.considered}, {len(s.missing)} missing)"
        )
    for bias in report.biases:
        click.echo(f"source {bias.source}: over={bias.over} under={bias.under}")
    if report.flags:
        click.echo("bias flags: " + " ".join(report.flags))


# ---------------------------------------------------------------------------
# Service


@main.command()
@click.option("--addr", envvar="BGF_ADDR", default="127.0.0.1:8000")
@click.option("--store", "store_path", envvar="BGF_STORE", required=True,
              type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--lads", "lads_dir", type=click.Path(exists=True), default=None)
@click.option("--sessions", "sessions_path", envvar="BGF_SESSIONS", default=None)
def serve(addr, store_path, corpus_path, lads_dir, sessions_path):
    """Serve the HTTP API over a read-only workspace."""
    from . import service

    ws = _load_ws(corpus_path, store_path, lads_dir)
    service.serve(ws, addr, sessions_path)


if __name__ == "__main__":
    main()
