"""Exact parent-pointer lineage records, kept compact by pruning.

The tracker assigns every individual a monotonically increasing id and
stores (parent, birth rank, pe) per id in flat arrays, appended one
cohort per generation.  Periodic pruning drops everything not ancestral
to a caller-supplied live set, which keeps memory proportional to the
surviving genealogy instead of total births.

Birth rank is lineage-local time: the deposit counter the newborn
carried at its first deposit.  For lineages that never sat in a
migration buffer it equals the wall-clock generation.
"""

from __future__ import annotations

import numpy as np

from ..phylo.tree import PhyloNode, PhyloTree, collapse_unifurcations

NO_PARENT = -1


class LineageTracker:
    def __init__(self) -> None:
        self._ids: list[np.ndarray] = []
        self._parents: list[np.ndarray] = []
        self._ranks: list[np.ndarray] = []
        self._pes: list[np.ndarray] = []
        self._next_id = 0

    def __len__(self) -> int:
        return sum(len(block) for block in self._ids)

    def record_cohort(
        self, parents: np.ndarray, ranks: np.ndarray, pes: np.ndarray
    ) -> np.ndarray:
        """Register a batch of births; returns their new ids."""
        n = len(parents)
        ids = np.arange(self._next_id, self._next_id + n, dtype=np.int64)
        self._next_id += n
        self._ids.append(ids)
        self._parents.append(np.array(parents, dtype=np.int64, copy=True))
        self._ranks.append(np.array(ranks, dtype=np.int64, copy=True))
        self._pes.append(np.array(pes, dtype=np.int64, copy=True))
        # Callers scribble on their id arrays (migrant injection overwrites
        # lanes in place), so hand back a copy rather than the stored block.
        return ids.copy()

    def record_birth(self, parent_id: int, rank: int, pe: int) -> int:
        """Scalar convenience wrapper around :meth:`record_cohort`."""
        return int(
            self.record_cohort(
                np.array([parent_id]), np.array([rank]), np.array([pe])
            )[0]
        )

    def _consolidate(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        if len(self._ids) != 1:
            self._ids = [np.concatenate(self._ids) if self._ids else np.empty(0, np.int64)]
            self._parents = [
                np.concatenate(self._parents) if self._parents else np.empty(0, np.int64)
            ]
            self._ranks = [
                np.concatenate(self._ranks) if self._ranks else np.empty(0, np.int64)
            ]
            self._pes = [
                np.concatenate(self._pes) if self._pes else np.empty(0, np.int64)
            ]
        return self._ids[0], self._parents[0], self._ranks[0], self._pes[0]

    def _lookup(self, ids: np.ndarray, query: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(ids, query)
        if pos.size and (pos >= len(ids)).any():
            raise KeyError("unknown lineage id")
        if pos.size and (ids[pos] != query).any():
            raise KeyError("unknown lineage id")
        return pos

    def _ancestor_closure(self, live: np.ndarray) -> np.ndarray:
        """Boolean mask over the consolidated arrays: ancestral-or-live."""
        ids, parents, _, _ = self._consolidate()
        keep = np.zeros(len(ids), dtype=bool)
        frontier = np.unique(np.asarray(live, dtype=np.int64))
        frontier = frontier[frontier != NO_PARENT]
        while frontier.size:
            pos = self._lookup(ids, frontier)
            fresh = pos[~keep[pos]]
            if not fresh.size:
                break
            keep[fresh] = True
            nxt = parents[fresh]
            frontier = np.unique(nxt[nxt != NO_PARENT])
        return keep

    def prune(self, live: np.ndarray) -> int:
        """Drop records not ancestral to ``live``; returns rows removed."""
        ids, parents, ranks, pes = self._consolidate()
        keep = self._ancestor_closure(live)
        removed = int(len(ids) - keep.sum())
        self._ids = [ids[keep]]
        self._parents = [parents[keep]]
        self._ranks = [ranks[keep]]
        self._pes = [pes[keep]]
        return removed

    def to_tree(
        self,
        sample_ids: np.ndarray,
        labels: list[str],
        tags: list[int | None] | None = None,
    ) -> PhyloTree:
        """Genealogy of the sampled individuals, unifurcations collapsed.

        Each sample becomes one labeled leaf (duplicates allowed: the
        same individual sampled twice yields two sibling leaves).  Leaf
        origin is the sample's birth rank; internal nodes carry their
        individual's birth rank.
        """
        sample_ids = np.asarray(sample_ids, dtype=np.int64)
        if len(sample_ids) != len(labels):
            raise ValueError("one label per sampled id")
        if tags is not None and len(tags) != len(labels):
            raise ValueError("one tag per sampled id")
        ids, parents, ranks, _ = self._consolidate()
        keep = self._ancestor_closure(sample_ids)
        sub_ids = ids[keep]
        sub_parents = parents[keep]
        sub_ranks = ranks[keep]

        nodes: dict[int, PhyloNode] = {
            int(i): PhyloNode(float(r)) for i, r in zip(sub_ids, sub_ranks)
        }
        roots = []
        for i, p in zip(sub_ids.tolist(), sub_parents.tolist()):
            if p == NO_PARENT:
                roots.append(nodes[i])
            else:
                nodes[p].add(nodes[i])
        for k, (sid, label) in enumerate(zip(sample_ids.tolist(), labels)):
            leaf = PhyloNode(
                float(sub_ranks[np.searchsorted(sub_ids, sid)]),
                label=label,
                founder_tag=None if tags is None else tags[k],
            )
            nodes[sid].add(leaf)
        return collapse_unifurcations(PhyloTree(roots))
