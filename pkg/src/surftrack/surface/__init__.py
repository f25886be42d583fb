"""Fixed-width lineage fingerprint surfaces."""

from .annotation import RecordSet, SurfaceAnnotation
from .genome import FITNESS, TAGGED, GenomeFields, GenomeLayout, pack_genome, unpack_genome
from .sites import (
    POLICIES,
    hanoi_value,
    hybrid_site,
    resident_rank,
    site,
    site_array,
    steady_site,
    tilted_site,
    validate_slot_count,
)

__all__ = [
    "FITNESS",
    "GenomeFields",
    "GenomeLayout",
    "POLICIES",
    "RecordSet",
    "SurfaceAnnotation",
    "TAGGED",
    "hanoi_value",
    "hybrid_site",
    "pack_genome",
    "resident_rank",
    "site",
    "site_array",
    "steady_site",
    "tilted_site",
    "unpack_genome",
    "validate_slot_count",
]
