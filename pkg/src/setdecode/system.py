"""Overlapping set systems as part/whole incidence structures.

A system is a bipartite incidence between named wholes (sets) and named
parts (elements).  Both directions are stored in CSR form so that
part -> containing wholes and whole -> member parts are O(degree)
lookups backed by contiguous arrays.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np


class EmptySystemError(ValueError):
    """Raised when filtering leaves no wholes or no parts."""


@dataclass
class ConstructionReport:
    """What was dropped or merged while building a system."""

    dropped_wholes: list[tuple[str, int]] = field(default_factory=list)
    duplicate_members: dict[str, int] = field(default_factory=dict)

    @property
    def n_dropped(self) -> int:
        return len(self.dropped_wholes)


class IncidenceSystem:
    """Immutable part/whole incidence with CSR storage in both directions.

    Attributes
    ----------
    wholes, parts : list of str
        Identifiers in deterministic order of first appearance.
    wp_indptr, wp_indices : ndarray
        CSR rows per whole; ``wp_indices[wp_indptr[w]:wp_indptr[w+1]]``
        are the part indices of whole ``w`` in ascending order.
    pw_indptr, pw_indices : ndarray
        CSR rows per part, whole indices ascending.
    """

    def __init__(self, wholes, parts, memberships, report=None):
        self.wholes = list(wholes)
        self.parts = list(parts)
        self.whole_index = {name: i for i, name in enumerate(self.wholes)}
        self.part_index = {name: i for i, name in enumerate(self.parts)}
        if len(self.whole_index) != len(self.wholes):
            raise ValueError("duplicate whole identifier")
        if len(self.part_index) != len(self.parts):
            raise ValueError("duplicate part identifier")
        self.report = report if report is not None else ConstructionReport()

        n_w = len(self.wholes)
        n_p = len(self.parts)
        counts = np.zeros(n_w, dtype=np.int64)
        for w, members in enumerate(memberships):
            counts[w] = len(members)
        self.wp_indptr = np.zeros(n_w + 1, dtype=np.int64)
        np.cumsum(counts, out=self.wp_indptr[1:])
        self.wp_indices = np.empty(int(self.wp_indptr[-1]), dtype=np.int64)
        for w, members in enumerate(memberships):
            row = np.sort(np.asarray(members, dtype=np.int64))
            if row.size and (row[0] < 0 or row[-1] >= n_p):
                raise ValueError("part index out of range")
            if row.size != np.unique(row).size:
                raise ValueError("repeated part index within a whole")
            self.wp_indices[self.wp_indptr[w]:self.wp_indptr[w + 1]] = row

        # Transposed CSR built by counting sort over the same pairs.
        pcounts = np.bincount(self.wp_indices, minlength=n_p)
        if n_p and pcounts.min() == 0:
            raise ValueError("part without any containing whole")
        self.pw_indptr = np.zeros(n_p + 1, dtype=np.int64)
        np.cumsum(pcounts, out=self.pw_indptr[1:])
        self.pw_indices = np.empty(int(self.pw_indptr[-1]), dtype=np.int64)
        cursor = self.pw_indptr[:-1].copy()
        for w in range(n_w):
            for p in self.wp_indices[self.wp_indptr[w]:self.wp_indptr[w + 1]]:
                self.pw_indices[cursor[p]] = w
                cursor[p] += 1
        # Whole indices per part come out ascending because wholes are
        # visited in ascending order.

        self.deg_wholes = np.diff(self.wp_indptr)
        self.deg_parts = np.diff(self.pw_indptr)

    @property
    def n_wholes(self) -> int:
        return len(self.wholes)

    @property
    def n_parts(self) -> int:
        return len(self.parts)

    @property
    def n_incidences(self) -> int:
        return int(self.wp_indices.size)

    def members(self, w: int) -> np.ndarray:
        """Part indices of whole ``w`` (ascending)."""
        return self.wp_indices[self.wp_indptr[w]:self.wp_indptr[w + 1]]

    def containers(self, p: int) -> np.ndarray:
        """Whole indices containing part ``p`` (ascending)."""
        return self.pw_indices[self.pw_indptr[p]:self.pw_indptr[p + 1]]

    def neighbors_of_whole(self, w: int) -> np.ndarray:
        """Wholes sharing at least one part with ``w``, excluding ``w``."""
        mem = self.members(w)
        if mem.size == 0:
            return np.empty(0, dtype=np.int64)
        segs = [self.containers(p) for p in mem]
        out = np.unique(np.concatenate(segs))
        return out[out != w]

    def member_names(self, w: int) -> list[str]:
        return [self.parts[p] for p in self.members(w)]

    def subsystem(self, whole_idx: np.ndarray) -> tuple["IncidenceSystem", np.ndarray]:
        """Restriction to the given wholes and the parts they cover.

        Returns the reduced system plus the array of retained part
        indices (in the original system) in original order.
        """
        whole_idx = np.asarray(whole_idx, dtype=np.int64)
        keep_parts = np.zeros(self.n_parts, dtype=bool)
        for w in whole_idx:
            keep_parts[self.members(w)] = True
        part_idx = np.flatnonzero(keep_parts)
        remap = -np.ones(self.n_parts, dtype=np.int64)
        remap[part_idx] = np.arange(part_idx.size)
        memberships = [remap[self.members(w)] for w in whole_idx]
        sub = IncidenceSystem(
            [self.wholes[w] for w in whole_idx],
            [self.parts[p] for p in part_idx],
            memberships,
        )
        return sub, part_idx


def build_system(raw_sets, min_size: int = 1, max_size: int | None = None):
    """Build an :class:`IncidenceSystem` from ``(whole_id, members)`` pairs.

    Duplicate member entries within one set are deduplicated silently
    (counted in the report).  The size filter applies to the deduplicated
    member count, before any other pruning.  Dropped wholes are listed in
    the report; parts that end up in no surviving whole are dropped too.
    Identifier matching is case-sensitive and exact.

    Parameters
    ----------
    raw_sets : iterable of (str, sequence of str)
    min_size, max_size : int
        Inclusive bounds on deduplicated set size.

    Raises
    ------
    ValueError
        On duplicate whole identifiers.
    EmptySystemError
        When no whole survives the size filter.
    """
    if min_size < 1:
        raise ValueError("min_size must be >= 1")
    if max_size is not None and max_size < min_size:
        raise ValueError("max_size must be >= min_size")

    report = ConstructionReport()
    seen_ids = set()
    kept: list[tuple[str, list[str]]] = []
    if isinstance(raw_sets, Mapping):
        raw_sets = raw_sets.items()
    for whole_id, members in raw_sets:
        if whole_id in seen_ids:
            raise ValueError(f"duplicate whole identifier: {whole_id!r}")
        seen_ids.add(whole_id)
        deduped: list[str] = []
        seen_members = set()
        dups = 0
        for m in members:
            if m in seen_members:
                dups += 1
                continue
            seen_members.add(m)
            deduped.append(m)
        if dups:
            report.duplicate_members[whole_id] = dups
        size = len(deduped)
        if size < min_size or (max_size is not None and size > max_size):
            report.dropped_wholes.append((whole_id, size))
            continue
        kept.append((whole_id, deduped))

    if not kept:
        raise EmptySystemError("no whole survives the size filter")

    part_order: dict[str, int] = {}
    for _, members in kept:
        for m in members:
            if m not in part_order:
                part_order[m] = len(part_order)
    parts = list(part_order)
    memberships = [[part_order[m] for m in members] for _, members in kept]
    return IncidenceSystem([w for w, _ in kept], parts, memberships, report)
