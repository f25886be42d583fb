"""Per-lineage surface state: deposit, inversion, record extraction."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import sites


@dataclass(frozen=True)
class RecordSet:
    """Immutable snapshot of one annotation's recoverable history.

    ``entries`` pairs each resident rank with its differentia value,
    sorted by rank.  ``counter`` is the total number of deposits the
    annotation had seen, which doubles as the lineage's age.
    """

    entries: tuple[tuple[int, int], ...]
    counter: int

    def ranks(self) -> tuple[int, ...]:
        return tuple(r for r, _ in self.entries)

    def mapping(self) -> dict[int, int]:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class SurfaceAnnotation:
    """A fixed-width differentia buffer plus its deposit counter.

    The buffer starts zeroed.  Which slots actually hold data is never
    tracked explicitly; it is recomputed from the counter on demand,
    which is the point of the closed-form inversions.

    Instances are not thread safe; the simulation engine only ever
    mutates an annotation from the PE that owns it.
    """

    policy: str
    slot_count: int
    differentia_bits: int = 1
    counter: int = 0
    counter_capacity: int | None = None
    slots: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        sites.validate_slot_count(self.policy, self.slot_count)
        if not 1 <= self.differentia_bits <= 8:
            raise ValueError(f"differentia_bits must be 1..8, got {self.differentia_bits}")
        if not self.slots:
            self.slots = [0] * self.slot_count
        elif len(self.slots) != self.slot_count:
            raise ValueError(
                f"expected {self.slot_count} slot values, got {len(self.slots)}"
            )

    def deposit(self, value: int) -> None:
        """Record ``value`` for the current rank and advance the counter.

        The counter advances even when the policy discards the rank;
        discarded generations are simply never recoverable.  Raises
        OverflowError instead of wrapping when the counter would exceed
        its capacity.
        """
        if self.counter_capacity is not None and self.counter >= self.counter_capacity - 1:
            raise OverflowError(
                f"deposit would push the counter past {self.counter_capacity - 1}; "
                "widen the layout rather than wrapping"
            )
        if not 0 <= value < (1 << self.differentia_bits):
            raise ValueError(
                f"differentia {value} out of range for {self.differentia_bits} bit(s)"
            )
        slot = sites.site(self.policy, self.counter, self.slot_count)
        if slot is not None:
            self.slots[slot] = value
        self.counter += 1

    def resident_rank(self, slot: int) -> int | None:
        """Rank whose differentia ``slot`` currently holds, or None."""
        return sites.resident_rank(self.policy, slot, self.counter, self.slot_count)

    def to_records(self) -> RecordSet:
        """Extract all recoverable (rank, differentia) pairs."""
        pairs = []
        for slot in range(self.slot_count):
            rank = self.resident_rank(slot)
            if rank is not None:
                pairs.append((rank, self.slots[slot]))
        pairs.sort()
        return RecordSet(tuple(pairs), self.counter)
