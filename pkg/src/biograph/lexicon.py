"""Tab-separated lexicon files backing the rule-based analyzers.

All files are UTF-8, one entry per line, columns separated by tabs, `#`
starting a comment line. Column layouts per kind:

  lemma.tsv        surface  lemma  pos  [morpho k=v;k=v]
  concepts.tsv     lemma  pos  concept_id  rank
  frames.tsv       concept_id  frame_id  role,role,...
  gazetteer.tsv    class  name phrase
  professions.tsv  lemma  canonical label
  family.tsv       lemma  canonical label
  polarity.tsv     lemma  pos|neg
  pronouns.tsv     form  gender  person  possessive(0|1)
  abbrev.tsv       abbreviation (with trailing dot)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import BiographError


class LexiconError(BiographError):
    pass


def _read_rows(path: Path) -> list[list[str]]:
    if not path.is_file():
        raise LexiconError(f"lexicon file not found: {path}")
    rows = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        rows.append(line.split("\t"))
    return rows


def _parse_morpho(cell: str) -> dict[str, str]:
    out = {}
    for part in cell.split(";"):
        if "=" in part:
            k, v = part.split("=", 1)
            out[k.strip()] = v.strip()
    return out


@dataclass(frozen=True)
class LemmaEntry:
    lemma: str
    pos: str
    morpho: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class ConceptSense:
    concept_id: str
    rank: int


@dataclass(frozen=True)
class FrameEntry:
    frame_id: str
    roles: tuple[str, ...]


@dataclass(frozen=True)
class PronounEntry:
    gender: str
    person: str
    possessive: bool


@dataclass
class LexiconSet:
    """All lexicons one pipeline run needs, immutable after load."""

    lemmas: dict[str, LemmaEntry] = field(default_factory=dict)
    concepts: dict[tuple[str, str], list[ConceptSense]] = field(default_factory=dict)
    frames: dict[str, FrameEntry] = field(default_factory=dict)
    gazetteer: dict[str, str] = field(default_factory=dict)  # name phrase -> class
    professions: dict[str, str] = field(default_factory=dict)
    family: dict[str, str] = field(default_factory=dict)
    polarity: dict[str, str] = field(default_factory=dict)
    pronouns: dict[str, PronounEntry] = field(default_factory=dict)
    abbreviations: frozenset[str] = frozenset()

    def best_sense(self, lemma: str, pos: str) -> str | None:
        senses = self.concepts.get((lemma, pos))
        if not senses:
            return None
        return min(senses, key=lambda s: s.rank).concept_id


def load_lexicons(directory: str | Path) -> LexiconSet:
    d = Path(directory)
    lex = LexiconSet()
    for row in _read_rows(d / "lemma.tsv"):
        surface, lemma, pos = row[0], row[1], row[2]
        morpho = tuple(sorted(_parse_morpho(row[3]).items())) if len(row) > 3 else ()
        lex.lemmas[surface.lower()] = LemmaEntry(lemma, pos, morpho)
    for row in _read_rows(d / "concepts.tsv"):
        lemma, pos, concept_id, rank = row[0], row[1], row[2], int(row[3])
        lex.concepts.setdefault((lemma, pos), []).append(ConceptSense(concept_id, rank))
    for row in _read_rows(d / "frames.tsv"):
        roles = tuple(row[2].split(",")) if len(row) > 2 and row[2] else ()
        lex.frames[row[0]] = FrameEntry(row[1], roles)
    for row in _read_rows(d / "gazetteer.tsv"):
        lex.gazetteer[row[1]] = row[0]
    for row in _read_rows(d / "professions.tsv"):
        lex.professions[row[0]] = row[1]
    for row in _read_rows(d / "family.tsv"):
        lex.family[row[0]] = row[1]
    for row in _read_rows(d / "polarity.tsv"):
        if row[1] not in ("pos", "neg"):
            raise LexiconError(f"bad polarity value {row[1]!r} for {row[0]!r}")
        lex.polarity[row[0]] = row[1]
    for row in _read_rows(d / "pronouns.tsv"):
        lex.pronouns[row[0].lower()] = PronounEntry(
            gender=row[1], person=row[2], possessive=len(row) > 3 and row[3] == "1"
        )
    lex.abbreviations = frozenset(
        row[0] for row in _read_rows(d / "abbrev.tsv")
    )
    return lex


def default_lexicon_dir() -> Path:
    return Path(__file__).resolve().parent / "data" / "lexicons"


def load_default_lexicons() -> LexiconSet:
    return load_lexicons(default_lexicon_dir())
