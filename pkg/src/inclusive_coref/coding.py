"""Literature-coding records and their Table-1-style tabulation.

Each paper is coded Y/N on eight questions; a question that does not apply is
coded NA (``-`` is accepted too). Some questions only apply when earlier ones are
answered Y, and their percentages use only the papers where they apply.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, TextIO

from .errors import CodingError
from .stats import ChiSquareResult, Proportion, chisq_n_minus_1

QUESTIONS = ("Coref", "Eng", "LG", "SG", "LGneqSG", "SGBinary", "SGImmutable", "TheyNeo")
TABLE_QUESTIONS = ("LG", "SG", "LGneqSG", "SGBinary", "SGImmutable", "TheyNeo")
LABELS = {
    "Coref": "Coref?",
    "Eng": "English?",
    "LG": "L.G?",
    "SG": "S.G?",
    "LGneqSG": "L.G≠S.G?",
    "SGBinary": "S.G Binary?",
    "SGImmutable": "S.G Immutable?",
    "TheyNeo": "They/Neo?",
}
ANSWERS = ("Y", "N", "NA")


def applicable(question: str, answers: Mapping[str, str]) -> bool:
    """Whether ``question`` applies given the answers to the questions it depends on."""
    if question == "LGneqSG":
        return answers.get("LG") == "Y" and answers.get("SG") == "Y"
    if question in ("SGBinary", "SGImmutable"):
        return answers.get("SG") == "Y"
    if question == "TheyNeo":
        return answers.get("SG") == "Y" and answers.get("Eng") == "Y"
    return True


@dataclass(frozen=True)
class PaperCodingRecord:
    paper_id: str
    answers: dict[str, str]

    def answer(self, question: str) -> str:
        return self.answers[question]

    @property
    def uncoded(self) -> list[str]:
        """Questions that apply but were left NA."""
        return [q for q in QUESTIONS if self.answers[q] == "NA" and applicable(q, self.answers)]


def _norm(cell: str) -> str:
    v = cell.strip().upper()
    if v in ("-", "", "N/A"):
        return "NA"
    return v


def load_codings(stream: TextIO | str, strict: bool = True, source: str | None = None) -> list[PaperCodingRecord]:
    """Read a codings CSV (``paper_id`` plus one column per question).

    An answer where the question cannot apply is always an error. NA where the
    question does apply is an error when ``strict``; otherwise it is a warning and
    the cell simply drops out of that question's denominator.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    where = source or "codings"
    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    unknown = [c for c in header if c != "paper_id" and c not in QUESTIONS]
    missing = [c for c in ("paper_id", *QUESTIONS) if c not in header]
    if unknown:
        raise CodingError(f"{where}: unknown question column(s): {', '.join(unknown)}")
    if missing:
        raise CodingError(f"{where}: missing column(s): {', '.join(missing)}")
    records = []
    seen = set()
    uncoded = []
    for line, row in enumerate(reader, start=2):
        pid = (row["paper_id"] or "").strip()
        if not pid:
            raise CodingError(f"{where}: line {line}: empty paper_id")
        if pid in seen:
            raise CodingError(f"{where}: line {line}: duplicate paper_id {pid!r}")
        seen.add(pid)
        answers = {}
        for q in QUESTIONS:
            v = _norm(row[q] or "")
            if v not in ANSWERS:
                raise CodingError(f"{where}: paper {pid}: {q} answer {row[q]!r} is not Y, N or NA")
            answers[q] = v
        for q in QUESTIONS:
            ok = applicable(q, answers)
            if not ok and answers[q] != "NA":
                raise CodingError(f"{where}: paper {pid}: {q}={answers[q]} but the question does not apply")
            if ok and answers[q] == "NA":
                if strict:
                    raise CodingError(f"{where}: paper {pid}: {q} applies but is NA")
                uncoded.append(f"{pid}:{q}")
        records.append(PaperCodingRecord(pid, answers))
    if uncoded:
        warnings.warn(f"{len(uncoded)} applicable answers left uncoded: {', '.join(uncoded)}", UserWarning,
                      stacklevel=2)
    return records


def emit_codings(records: Iterable[PaperCodingRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["paper_id", *QUESTIONS])
    for r in records:
        w.writerow([r.paper_id, *(r.answers[q] for q in QUESTIONS)])
    return buf.getvalue()


def one_decimal(yes: int, denominator: int) -> float:
    """Percentage cut to one decimal place: 79 of 150 is 52.6, not 52.7."""
    return (1000 * yes // denominator) / 10


@dataclass(frozen=True)
class TableRow:
    question: str
    yes: int
    denominator: int

    @property
    def label(self) -> str:
        return LABELS[self.question]

    @property
    def fraction(self) -> float | None:
        return self.yes / self.denominator if self.denominator else None

    @property
    def percent(self) -> float | None:
        return one_decimal(self.yes, self.denominator) if self.denominator else None


@dataclass
class CodingTable:
    columns: dict[str, list[TableRow]] = field(default_factory=dict)  # subset name -> rows

    def row(self, subset: str, question: str) -> TableRow:
        for r in self.columns[subset]:
            if r.question == question:
                return r
        raise KeyError(question)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["subset", "question", "label", "yes", "denominator", "percent", "fraction"])
        for name, rows in self.columns.items():
            for r in rows:
                pct = "" if r.percent is None else f"{r.percent:.1f}"
                frac = "" if r.fraction is None else f"{r.fraction:.6f}"
                w.writerow([name, r.question, r.label, r.yes, r.denominator, pct, frac])
        return buf.getvalue()

    def to_json(self) -> str:
        data = {
            name: [
                {"question": r.question, "label": r.label, "yes": r.yes, "denominator": r.denominator,
                 "percent": r.percent, "fraction": r.fraction}
                for r in rows
            ]
            for name, rows in self.columns.items()
        }
        return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


Filter = Callable[[PaperCodingRecord], bool]

SUBSETS: dict[str, Filter] = {
    "all": lambda r: True,
    "coref": lambda r: r.answers["Coref"] == "Y",
    "non-coref": lambda r: r.answers["Coref"] != "Y",
}


def _subset(records: Sequence[PaperCodingRecord], subset: str | Filter | None) -> list[PaperCodingRecord]:
    if subset is None:
        return list(records)
    pred = SUBSETS[subset] if isinstance(subset, str) else subset
    return [r for r in records if pred(r)]


def count(records: Iterable[PaperCodingRecord], question: str) -> Proportion:
    yes = total = 0
    for r in records:
        a = r.answers[question]
        if a == "NA":
            continue
        total += 1
        yes += a == "Y"
    return Proportion(yes, total)


def tabulate(
    records: Sequence[PaperCodingRecord],
    subset: str | Filter | None = None,
    questions: Sequence[str] = TABLE_QUESTIONS,
) -> list[TableRow]:
    """Share of Y among the non-NA answers, per question."""
    chosen = _subset(records, subset)
    if not chosen:
        raise CodingError("no records in the requested subset")
    rows = []
    for q in questions:
        p = count(chosen, q)
        rows.append(TableRow(q, p.successes, p.trials))
    return rows


def table(records: Sequence[PaperCodingRecord], subsets: Sequence[str] = ("all", "coref")) -> CodingTable:
    return CodingTable({s: tabulate(records, s) for s in subsets})


def compare_groups(
    records: Sequence[PaperCodingRecord],
    question: str,
    group_a: str | Filter = "all",
    group_b: str | Filter = "coref",
) -> ChiSquareResult:
    """n-1 chi-squared test between two subsets on one question."""
    pa = count(_subset(records, group_a), question)
    pb = count(_subset(records, group_b), question)
    if pa.trials == 0 or pb.trials == 0:
        raise CodingError(f"{question}: a group has no applicable answers")
    return chisq_n_minus_1(pa, pb)
