"""Direct limits of upper-triangular matrix algebras under compression embeddings."""

from .embeddings import (
    CompressionEmbedding,
    EmbeddingError,
    SchurCocycle,
    apply_embedding,
    compose,
    compose_single,
    is_regular,
    left_inverse_check,
    schur_validate,
    validate_embedding,
)
from .envelope import (
    bratteli,
    boundary_witness,
    diagonal_masa_defect,
    envelope_report,
    lemma_check,
    level_structure,
    reaches_identity,
    to_dot,
)
from .gallery import ExampleId, build_example, characterize_image, invariant_projection_count
from .matrix_core import generated_star_algebra_dim, matrix_unit, operator_norm, span_contains
from .nest import DigraphAlgebra, Interval, compress, compression_is_homomorphism, digraph_intervals, intervals_of
from .system import (
    SystemSpec,
    anchor_offsets,
    classify_index_set,
    compact_classification,
    compose_range,
    density_preimage,
    identity_multiplicity,
    load_spec,
    representation_window,
    spec_from_dict,
)

__version__ = "0.1.0"
