"""Reading and writing set collections (GMT) and part lists.

GMT grammar, one set per line, tab-separated:

    set_id <TAB> description <TAB> member <TAB> member ...

Blank lines are skipped.  Identifier comparison here and everywhere
else is exact and case-sensitive.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .model import Observation
from .system import IncidenceSystem


class GmtParseError(ValueError):
    """Malformed GMT content; the message names the offending line."""


@dataclass
class GmtRecord:
    """One parsed GMT line; members keep first-appearance order."""

    set_id: str
    description: str
    members: tuple[str, ...]
    # dropped repeats; bookkeeping, not part of the record's identity
    n_duplicates: int = field(default=0, compare=False)


@dataclass
class GeneListResult:
    """Part report parsed against a system, with match bookkeeping."""

    observation: Observation
    matched_ids: list[str]  # in file order, first occurrence
    unmapped_ids: list[str]  # not parts of the system, file order
    n_duplicates: int


def parse_gmt(path) -> list[GmtRecord]:
    """Parse a GMT file into records.

    Duplicate member entries within a line are dropped and counted on
    the record.  A line with fewer than two tab-separated fields or a
    set identifier seen on an earlier line is an error naming the
    1-based line number.
    """
    records: list[GmtRecord] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) < 2:
                raise GmtParseError(
                    f"{path}: line {lineno}: expected at least "
                    "'set_id<TAB>description', got a single field")
            set_id, description = fields[0], fields[1]
            if not set_id:
                raise GmtParseError(
                    f"{path}: line {lineno}: empty set identifier")
            if set_id in seen:
                raise GmtParseError(
                    f"{path}: line {lineno}: duplicate set identifier "
                    f"{set_id!r} (first seen on line {seen[set_id]})")
            seen[set_id] = lineno
            members: list[str] = []
            member_set = set()
            dups = 0
            for tok in fields[2:]:
                if not tok:
                    continue
                if tok in member_set:
                    dups += 1
                    continue
                member_set.add(tok)
                members.append(tok)
            records.append(GmtRecord(set_id, description,
                                     tuple(members), dups))
    return records


def write_gmt(records, path) -> None:
    """Serialize records (GmtRecord or (id, description, members))."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            if isinstance(rec, GmtRecord):
                set_id, desc, members = rec.set_id, rec.description, \
                    rec.members
            else:
                set_id, desc, members = rec
            fh.write("\t".join([set_id, desc, *members]) + "\n")


def parse_gene_list(path, system: IncidenceSystem) -> GeneListResult:
    """Read a newline-delimited part list and mark listed parts.

    Identifiers absent from the system are collected, not errors: a
    report list commonly carries entries outside the annotation's
    vocabulary.  Repeated identifiers set the bit once and are counted.
    An empty file yields an all-zero observation with a warning.
    """
    matched: list[str] = []
    unmapped: list[str] = []
    seen = set()
    dups = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            ident = line.strip()
            if not ident:
                continue
            if ident in seen:
                dups += 1
                continue
            seen.add(ident)
            if ident in system.part_index:
                matched.append(ident)
            else:
                unmapped.append(ident)
    if not seen:
        warnings.warn(f"{path}: empty part list, observation is all-zero")
    return GeneListResult(
        observation=Observation.from_ids(system, matched),
        matched_ids=matched,
        unmapped_ids=unmapped,
        n_duplicates=dups,
    )
