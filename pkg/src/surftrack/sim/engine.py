"""Lockstep grid engine, batch-vectorized across processing elements.

The simulated machine is a rectangle of PEs, each owning a fixed-size
population of genomes and four point-to-point links to its neighbors.
Per cycle: a transport tick moves emigrants one hop, then every PE runs
one generation step.  Within a cycle PE steps touch only their own
population and buffers, so evaluating all PEs as numpy array slabs is
exactly equivalent to stepping them one by one.

A generation step, in pinned order:

1. For each inbound link (N, E, S, W) whose receive stage has filled to
   4 migrants: overwrite 4 uniformly drawn population slots, in arrival
   order, then reset the stage.
2. For each outbound link whose previous emigrant has departed: stash a
   uniformly drawn copy as the next emigrant.
3. Evaluate fitness (a plain field read; tagged genomes score 0).
4. Tournament selection with replacement per population slot: draw
   ``tournament_size`` candidate indices, take the best fitness,
   breaking ties uniformly among tied samples.
5. Treatment-specific fitness mutation (float32 arithmetic).
6. Deposit one fresh differentia per genome and bump its counter.

Random draws come from one counter-based stream per PE, consumed in the
order above, plus a dedicated transport stream for loss, so identical
configurations replay identically and a per-PE threaded execution of
the same protocol sees the same values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..surface.genome import GenomeFields, GenomeLayout
from ..surface.sites import site_array
from . import streams
from .config import GridConfig
from .tracker import NO_PARENT, LineageTracker

# Directions, clockwise from north; OPPOSITE[d] is the inbound index on
# the receiving side of a d-ward hop.
DIRECTIONS = ((0, -1), (1, 0), (0, 1), (-1, 0))
OPPOSITE = (2, 3, 0, 1)

PRUNE_INTERVAL = 128


@dataclass(frozen=True)
class SampledGenome:
    """One end-state genome pulled for export."""

    pe_x: int
    pe_y: int
    label: str
    fields: GenomeFields
    tracker_id: int | None = None


def neighbor_table(width: int, height: int, torus: bool) -> np.ndarray:
    """(4, P) PE index of each neighbor, -1 where the edge is open."""
    p = np.arange(width * height)
    xs, ys = p % width, p // width
    table = np.full((4, width * height), -1, dtype=np.int64)
    for d, (dx, dy) in enumerate(DIRECTIONS):
        nx, ny = xs + dx, ys + dy
        if torus:
            nx, ny = nx % width, ny % height
            table[d] = ny * width + nx
        else:
            ok = (nx >= 0) & (nx < width) & (ny >= 0) & (ny < height)
            table[d, ok] = (ny * width + nx)[ok]
    return table


class DeterministicGrid:
    """Single-process, bit-reproducible execution of the grid protocol."""

    def __init__(self, config: GridConfig) -> None:
        config.validate()
        self.config = config
        self.layout: GenomeLayout = config.genome_layout()
        P, K = config.n_pes, config.population
        R = GridConfig.RECEIVE_CAPACITY
        self.cycle = 0

        self.nbr = neighbor_table(config.width, config.height, config.torus)
        self.valid = self.nbr >= 0
        self.bank = streams.StreamBank(config.seed, P + 1)
        self._transport_stream = P
        self._all = np.arange(P)
        self._rows = self._all[:, None]

        w = config.differentia_bits
        if w == 1 and config.slot_count <= 64:
            surf_shape, surf_dtype = (), np.uint64
        else:
            surf_shape, surf_dtype = (config.slot_count,), np.uint8
        self.pop: dict[str, np.ndarray] = {
            "surf": np.zeros((P, K) + surf_shape, dtype=surf_dtype),
            "counter": np.zeros((P, K), dtype=np.int64),
        }
        if config.layout == "tagged":
            self.pop["tag"] = (self.bank.draw(self._all, K) & np.uint64(0xFFFF)).astype(
                np.uint16
            )
        else:
            self.pop["fit"] = np.zeros((P, K), dtype=np.float32)

        self.tracker: LineageTracker | None = None
        if config.track_perfect:
            self.tracker = LineageTracker()
            pes = np.repeat(self._all, K)
            founders = self.tracker.record_cohort(
                np.full(P * K, NO_PARENT), np.zeros(P * K, np.int64), pes
            )
            self.pop["gid"] = founders.reshape(P, K)

        self.emig = {
            name: np.zeros((4, P) + arr.shape[2:], dtype=arr.dtype)
            for name, arr in self.pop.items()
        }
        self.stage = {
            name: np.zeros((4, P, R) + arr.shape[2:], dtype=arr.dtype)
            for name, arr in self.pop.items()
        }
        self.emig_full = np.zeros((4, P), dtype=bool)
        self.send_done = self.valid.copy()  # arm the first refill
        self.stage_n = np.zeros((4, P), dtype=np.int64)
        self.imported = np.zeros(P, dtype=np.int64)
        self.exported = np.zeros(P, dtype=np.int64)

    # -- cycle pieces ----------------------------------------------------

    def _transport_tick(self) -> None:
        """Move departed emigrants one hop; apply in-transit loss."""
        cfg = self.config
        for d in range(4):
            src = np.nonzero(self.emig_full[d] & self.valid[d])[0]
            if not src.size:
                continue
            dst = self.nbr[d, src]
            dd = OPPOSITE[d]
            room = self.stage_n[dd, dst] < GridConfig.RECEIVE_CAPACITY
            src, dst = src[room], dst[room]
            if not src.size:
                continue
            if cfg.loss_rate > 0.0:
                u = streams.to_unit(
                    self.bank.draw(np.array([self._transport_stream]), len(src))[0]
                )
                kept = u >= cfg.loss_rate
            else:
                kept = np.ones(len(src), dtype=bool)
            ksrc, kdst = src[kept], dst[kept]
            if ksrc.size:
                j = self.stage_n[dd, kdst]
                for name, arr in self.stage.items():
                    arr[dd, kdst, j] = self.emig[name][d, ksrc]
                self.stage_n[dd, kdst] += 1
                self.exported[ksrc] += 1
            # Departed either way: delivered or lost in transit.
            self.emig_full[d, src] = False
            self.send_done[d, src] = True

    def _inject_migrants(self) -> None:
        K = self.config.population
        R = GridConfig.RECEIVE_CAPACITY
        for d in range(4):
            sel = np.nonzero(self.stage_n[d] >= R)[0]
            if not sel.size:
                continue
            idx = streams.to_index(self.bank.draw(sel, R), K)
            for j in range(R):
                for name, arr in self.pop.items():
                    arr[sel, idx[:, j]] = self.stage[name][d, sel, j]
            self.stage_n[d, sel] = 0
            self.imported[sel] += R

    def _refill_emigrants(self) -> None:
        K = self.config.population
        for d in range(4):
            sel = np.nonzero(self.send_done[d] & self.valid[d])[0]
            if not sel.size:
                continue
            idx = streams.to_index(self.bank.draw(sel, 1)[:, 0], K)
            for name, arr in self.emig.items():
                arr[d, sel] = self.pop[name][sel, idx]
            self.emig_full[d, sel] = True
            self.send_done[d, sel] = False

    def _tournament(self) -> None:
        cfg = self.config
        P, K, n = cfg.n_pes, cfg.population, cfg.tournament_size
        cand = streams.to_index(self.bank.draw(self._all, K * n), K).reshape(P, K, n)
        ties = streams.to_unit(self.bank.draw(self._all, K * n)).reshape(P, K, n)
        if "fit" in self.pop:
            f = self.pop["fit"][self._all[:, None, None], cand]
        else:
            f = np.zeros((P, K, n), dtype=np.float32)
        best = f.max(axis=2, keepdims=True)
        score = np.where(f == best, ties, -1.0)
        col = score.argmax(axis=2)
        winner = np.take_along_axis(cand, col[:, :, None], axis=2)[:, :, 0]
        self.pop = {name: arr[self._rows, winner] for name, arr in self.pop.items()}
        if self.tracker is not None:
            parents = self.pop["gid"].ravel()
            ranks = self.pop["counter"].ravel()
            pes = np.repeat(self._all, K)
            self.pop["gid"] = self.tracker.record_cohort(parents, ranks, pes).reshape(
                P, K
            )

    def _mutate(self) -> None:
        t = self.config.treatment
        if "fit" not in self.pop or t.mode == "neutral":
            return
        K = self.config.population
        fit = self.pop["fit"]
        gate = streams.to_unit(self.bank.draw(self._all, K))
        u1 = streams.to_unit(self.bank.draw(self._all, K))
        u2 = streams.to_unit(self.bank.draw(self._all, K))
        mag = streams.normal_magnitudes(u1, u2) * t.deleterious_sigma
        fit -= np.where(gate < t.deleterious_p, mag, 0.0).astype(np.float32)
        if t.mode == "adaptive":
            gate = streams.to_unit(self.bank.draw(self._all, K))
            u1 = streams.to_unit(self.bank.draw(self._all, K))
            u2 = streams.to_unit(self.bank.draw(self._all, K))
            mag = streams.normal_magnitudes(u1, u2) * t.beneficial_sigma
            fit += np.where(gate < t.beneficial_p, mag, 0.0).astype(np.float32)

    def _deposit(self) -> None:
        cfg = self.config
        P, K, S = cfg.n_pes, cfg.population, cfg.slot_count
        counters = self.pop["counter"]
        if (counters >= self.layout.counter_capacity - 1).any():
            raise OverflowError(
                "deposit counter would overflow the genome layout; "
                "shorten the run or widen the counter field"
            )
        slots, stored = site_array(cfg.policy, counters.ravel(), S)
        slots = slots.reshape(P, K)
        stored = stored.reshape(P, K)
        draws = self.bank.draw(self._all, K)
        if self.pop["surf"].ndim == 2:
            bits = draws & np.uint64(1)
            shift = slots.astype(np.uint64)
            mask = np.uint64(1) << shift
            surf = self.pop["surf"]
            updated = (surf & ~mask) | (bits << shift)
            self.pop["surf"] = np.where(stored, updated, surf)
        else:
            vals = (draws & np.uint64((1 << cfg.differentia_bits) - 1)).astype(np.uint8)
            pe_i, lane_i = np.nonzero(stored)
            self.pop["surf"][pe_i, lane_i, slots[stored]] = vals[stored]
        self.pop["counter"] = counters + 1

    def step_cycle(self) -> None:
        self._transport_tick()
        self._inject_migrants()
        self._refill_emigrants()
        self._tournament()
        self._mutate()
        self._deposit()
        self.cycle += 1
        if self.tracker is not None and self.cycle % PRUNE_INTERVAL == 0:
            self.tracker.prune(self._live_ids())

    def run(self, generations: int | None = None) -> None:
        todo = self.config.generations if generations is None else generations
        for _ in range(todo):
            self.step_cycle()
        if self.tracker is not None:
            self.tracker.prune(self._live_ids())

    # -- end-state access --------------------------------------------------

    def _live_ids(self) -> np.ndarray:
        parts = [self.pop["gid"].ravel()]
        parts.append(self.emig["gid"][self.emig_full])
        occupied = np.arange(GridConfig.RECEIVE_CAPACITY)[None, None, :] < self.stage_n[
            :, :, None
        ]
        parts.append(self.stage["gid"][occupied])
        return np.concatenate(parts)

    def _lane_fields(self, p: int, i: int) -> GenomeFields:
        cfg = self.config
        if self.pop["surf"].ndim == 2:
            word = int(self.pop["surf"][p, i])
            surface = tuple((word >> k) & 1 for k in range(cfg.slot_count))
        else:
            surface = tuple(int(v) for v in self.pop["surf"][p, i])
        return GenomeFields(
            counter=int(self.pop["counter"][p, i]),
            surface=surface,
            founder_tag=int(self.pop["tag"][p, i]) if "tag" in self.pop else None,
            fitness=float(self.pop["fit"][p, i]) if "fit" in self.pop else None,
        )

    def sample_end_state(self, per_pe: int | None = None) -> list[SampledGenome]:
        """Uniform seeded sample of ``per_pe`` genomes from every PE."""
        cfg = self.config
        k = cfg.sample_per_pe if per_pe is None else per_pe
        out = []
        for p in range(cfg.n_pes):
            idx = streams.to_index(self.bank.draw(np.array([p]), k)[0], cfg.population)
            x, y = p % cfg.width, p // cfg.width
            for j, i in enumerate(idx.tolist()):
                out.append(
                    SampledGenome(
                        pe_x=x,
                        pe_y=y,
                        label=f"pe{x}_{y}_{j}",
                        fields=self._lane_fields(p, i),
                        tracker_id=(
                            int(self.pop["gid"][p, i]) if self.tracker is not None else None
                        ),
                    )
                )
        return out

    def founder_tag_count(self) -> int:
        """Distinct founder tags still alive anywhere (population only)."""
        if "tag" not in self.pop:
            raise ValueError("fitness layout genomes carry no founder tag")
        return len(np.unique(self.pop["tag"]))
