"""Evaluation harness: intrinsic precision/recall and hypothesis-based sampling.

Metrics use exact rational arithmetic so reported numbers are reproducible
and comparable across runs without float drift.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .annotate import LayeredDocument
from .errors import BiographError

EVAL_LAYERS = ("entities", "timexes", "events", "roles")
MATCHING_MODES = ("exact-span", "overlap")


class EvalError(BiographError):
    pass


# ---------------------------------------------------------------------------
# Gold annotations


@dataclass(frozen=True)
class GoldItem:
    begin: int
    end: int
    label: str


@dataclass(frozen=True)
class GoldAnnotation:
    doc_id: str
    layer: str
    items: tuple[GoldItem, ...]

    def __post_init__(self):
        if self.layer not in EVAL_LAYERS:
            raise EvalError(f"unknown evaluation layer: {self.layer!r}")
        for item in self.items:
            if item.begin < 0 or item.end <= item.begin:
                raise EvalError(f"bad gold span ({item.begin}, {item.end})")


def gold_from_json(text: str) -> GoldAnnotation:
    doc = json.loads(text)
    return GoldAnnotation(
        doc_id=doc["docId"],
        layer=doc["layer"],
        items=tuple(
            GoldItem(i["begin"], i["end"], i["label"]) for i in doc["items"]
        ),
    )


def gold_to_json(gold: GoldAnnotation) -> str:
    doc = {
        "docId": gold.doc_id,
        "layer": gold.layer,
        "items": [
            {"begin": i.begin, "end": i.end, "label": i.label}
            for i in gold.items
        ],
    }
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def system_items(lad: LayeredDocument, layer: str) -> list[GoldItem]:
    """Project one document layer onto (span, label) items for scoring."""
    out = []
    if layer == "entities":
        for e in lad.entities:
            b, end = lad.term_span(e.term_ids)
            out.append(GoldItem(b, end, e.cls))
    elif layer == "timexes":
        for x in lad.timexes:
            b, end = lad.term_span(x.term_ids)
            out.append(GoldItem(b, end, x.value.lexical()))
    elif layer == "events":
        for p in lad.predicates:
            if p.frame_id is None:
                continue
            b, end = lad.term_span([p.term_id])
            out.append(GoldItem(b, end, p.frame_id))
    elif layer == "roles":
        for p in lad.predicates:
            for role in p.roles:
                b, end = lad.term_span(role.term_ids)
                out.append(GoldItem(b, end, role.label))
    else:
        raise EvalError(f"unknown evaluation layer: {layer!r}")
    return sorted(out, key=lambda i: (i.begin, i.end, i.label))


# ---------------------------------------------------------------------------
# Intrinsic scoring


@dataclass(frozen=True)
class EvalErrorItem:
    kind: str  # miss | false-positive | label-confusion
    begin: int
    end: int
    gold_label: str | None
    system_label: str | None


@dataclass(frozen=True)
class EvalReport:
    layer: str
    matching: str
    true_positives: int
    gold_total: int
    system_total: int
    precision: Fraction
    recall: Fraction
    f1: Fraction
    errors: tuple[EvalErrorItem, ...]


def _span_match(a: GoldItem, b: GoldItem, matching: str) -> bool:
    if matching == "exact-span":
        return a.begin == b.begin and a.end == b.end
    return a.begin < b.end and b.begin < a.end


def intrinsic_eval(
    system: LayeredDocument,
    gold: GoldAnnotation,
    matching: str = "exact-span",
) -> EvalReport:
    """Precision/recall of one layer against gold spans.

    A true positive needs a span match under the chosen criterion and an
    equal label. Span matches with differing labels are itemized as
    label confusions; they still count as a miss plus a false positive.
    """
    if matching not in MATCHING_MODES:
        raise EvalError(f"unknown matching mode: {matching!r}")
    if gold.doc_id != system.doc_id:
        raise EvalError(
            f"document mismatch: gold {gold.doc_id!r} vs system {system.doc_id!r}"
        )
    sys_items = system_items(system, gold.layer)
    gold_items = sorted(gold.items, key=lambda i: (i.begin, i.end, i.label))
    matched_sys: set[int] = set()
    matched_gold: set[int] = set()
    # pass 1: span and label agree
    for gi, g in enumerate(gold_items):
        for si, s in enumerate(sys_items):
            if si in matched_sys:
                continue
            if _span_match(g, s, matching) and g.label == s.label:
                matched_gold.add(gi)
                matched_sys.add(si)
                break
    tp = len(matched_gold)
    errors: list[EvalErrorItem] = []
    # pass 2: span agrees, label does not
    confused_sys: set[int] = set()
    for gi, g in enumerate(gold_items):
        if gi in matched_gold:
            continue
        for si, s in enumerate(sys_items):
            if si in matched_sys or si in confused_sys:
                continue
            if _span_match(g, s, matching):
                confused_sys.add(si)
                errors.append(
                    EvalErrorItem("label-confusion", g.begin, g.end, g.label, s.label)
                )
                break
        else:
            errors.append(EvalErrorItem("miss", g.begin, g.end, g.label, None))
    for si, s in enumerate(sys_items):
        if si not in matched_sys and si not in confused_sys:
            errors.append(
                EvalErrorItem("false-positive", s.begin, s.end, None, s.label)
            )
    precision = Fraction(tp, len(sys_items)) if sys_items else Fraction(0)
    recall = Fraction(tp, len(gold_items)) if gold_items else Fraction(0)
    f1 = (
        Fraction(2) * precision * recall / (precision + recall)
        if tp > 0
        else Fraction(0)
    )
    errors.sort(key=lambda e: (e.begin, e.end, e.kind))
    return EvalReport(
        layer=gold.layer,
        matching=matching,
        true_positives=tp,
        gold_total=len(gold_items),
        system_total=len(sys_items),
        precision=precision,
        recall=recall,
        f1=f1,
        errors=tuple(errors),
    )


# ---------------------------------------------------------------------------
# Hypothesis-based sampling

SampleDoc = tuple[str, str, Fraction]  # (doc_id, source_id, score)


@dataclass(frozen=True)
class SampleTriple:
    confirm: frozenset[SampleDoc]
    oppose: frozenset[SampleDoc]
    neutral: frozenset[SampleDoc]

    def all_docs(self) -> set[SampleDoc]:
        return set(self.confirm) | set(self.oppose) | set(self.neutral)


def _tertiles(scores: dict[str, Fraction]) -> tuple[list, list, list]:
    """Split docs into low/mid/high thirds by (score, doc_id) rank."""
    ranked = sorted(scores.items(), key=lambda kv: (kv[1], kv[0]))
    n = len(ranked)
    cut = n // 3
    return ranked[:cut], ranked[cut : n - cut], ranked[n - cut :]


def _pick(stratum: list, k: int, name: str, source: str, high_first: bool) -> list:
    if len(stratum) < k:
        raise EvalError(
            f"stratum {name} of source {source} has {len(stratum)} documents, "
            f"need {k}"
        )
    ordered = sorted(stratum, key=lambda kv: (kv[1], kv[0]), reverse=high_first)
    return [(doc_id, source, score) for doc_id, score in ordered[:k]]


def hypothesis_sample(
    scores_a: dict[str, Fraction | float],
    scores_b: dict[str, Fraction | float],
    k: int,
    source_a: str = "A",
    source_b: str = "B",
) -> SampleTriple:
    """Three samples testing 'source A is more subjective than source B'.

    confirm pairs the most subjective A docs with the least subjective B
    docs; oppose inverts that; neutral takes the middle of both. Selection
    is by score rank then doc_id, so the output is order independent.
    """
    if k < 1:
        raise EvalError("sample size k must be at least 1")
    a = {d: Fraction(s).limit_denominator(10**9) if isinstance(s, float) else Fraction(s) for d, s in scores_a.items()}
    b = {d: Fraction(s).limit_denominator(10**9) if isinstance(s, float) else Fraction(s) for d, s in scores_b.items()}
    low_a, mid_a, high_a = _tertiles(a)
    low_b, mid_b, high_b = _tertiles(b)
    confirm = _pick(high_a, k, "high", source_a, True) + _pick(low_b, k, "low", source_b, False)
    oppose = _pick(low_a, k, "low", source_a, False) + _pick(high_b, k, "high", source_b, True)
    neutral = _pick(mid_a, k, "mid", source_a, False) + _pick(mid_b, k, "mid", source_b, False)
    return SampleTriple(frozenset(confirm), frozenset(oppose), frozenset(neutral))


# ---------------------------------------------------------------------------
# Conclusion comparison


@dataclass(frozen=True)
class SampleAgreement:
    sample: str
    agreement: Fraction
    considered: int
    agreed: int
    missing: tuple[str, ...]  # doc ids lacking one of the label sets


@dataclass(frozen=True)
class SourceBias:
    source: str
    over: int  # system positive where human is not
    under: int  # human positive where system is not
    direction: str | None  # "+", "-" or None when balanced


@dataclass(frozen=True)
class AgreementReport:
    samples: tuple[SampleAgreement, ...]
    biases: tuple[SourceBias, ...]
    flags: tuple[str, ...]  # e.g. "A+" when the system over-classifies source A
    missing_total: int


def compare_conclusions(
    samples: SampleTriple,
    human: dict[str, str],
    system: dict[str, str],
    positive_label: str = "subjective",
) -> AgreementReport:
    """Per-sample agreement plus per-source over/under-classification.

    A one-sided disagreement pattern on a single source is the systematic
    bias condition; it is surfaced as a direction flag like "A+".
    """
    reports = []
    missing_total = 0
    by_source: dict[str, list[str]] = {}
    for name, sample in (
        ("confirm", samples.confirm),
        ("oppose", samples.oppose),
        ("neutral", samples.neutral),
    ):
        docs = sorted(sample)
        missing = []
        agreed = 0
        considered = 0
        for doc_id, source, _score in docs:
            if doc_id not in human or doc_id not in system:
                missing.append(doc_id)
                continue
            considered += 1
            by_source.setdefault(source, []).append(doc_id)
            if human[doc_id] == system[doc_id]:
                agreed += 1
        missing_total += len(missing)
        reports.append(
            SampleAgreement(
                sample=name,
                agreement=Fraction(agreed, considered) if considered else Fraction(0),
                considered=considered,
                agreed=agreed,
                missing=tuple(missing),
            )
        )
    biases = []
    flags = []
    for source in sorted(by_source):
        over = under = 0
        for doc_id in by_source[source]:
            sys_pos = system[doc_id] == positive_label
            hum_pos = human[doc_id] == positive_label
            if sys_pos and not hum_pos:
                over += 1
            elif hum_pos and not sys_pos:
                under += 1
        direction = None
        if over > under:
            direction = "+"
        elif under > over:
            direction = "-"
        biases.append(SourceBias(source, over, under, direction))
        if direction is not None:
            flags.append(f"{source}{direction}")
    return AgreementReport(
        samples=tuple(reports),
        biases=tuple(biases),
        flags=tuple(flags),
        missing_total=missing_total,
    )
