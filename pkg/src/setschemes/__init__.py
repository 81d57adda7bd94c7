"""Set association schemes, their sandwiches, and vector association schemes."""

from .coherence import (is_coherent, is_fully_coherent, structure_constants, wl_stabilize,
                        wl_step)
from .constructions import catalog, direct_sum, split_scheme, table_row, wreath_product
from .core import (SetPartition, canonical_form, parse_partition, read_partition,
                   serialize_partition, write_partition)
from .enumeration import enumerate_all
from .groups import (Permutation, PermGroup, automorphism_group, is_schurian, named_group,
                     orbital_scheme)
from .polynomial import RationalPolynomial
from .sandwich import hamming_sandwich, sandwich_report
from .vector import VectorPartition, johnson_p, vas_check, vas_enumerate, vas_orbital

__all__ = [
    "PermGroup", "Permutation", "RationalPolynomial", "SetPartition", "VectorPartition",
    "automorphism_group", "canonical_form", "catalog", "direct_sum", "enumerate_all",
    "hamming_sandwich", "is_coherent", "is_fully_coherent", "is_schurian", "johnson_p",
    "named_group", "orbital_scheme", "parse_partition", "read_partition", "sandwich_report",
    "serialize_partition", "split_scheme", "structure_constants", "table_row", "vas_check",
    "vas_enumerate", "vas_orbital", "wl_stabilize", "wl_step", "wreath_product",
    "write_partition",
]
