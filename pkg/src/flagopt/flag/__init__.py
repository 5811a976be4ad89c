"""Flag manifolds under the classical and modified involution embeddings."""

from .geodesic import (
    classical_velocity,
    classical_velocity_path,
    geodesic,
    geodesic_classical,
    geodesic_modified,
    pi_offdiag,
)
from .point import (
    CLASSICAL,
    EMBEDDINGS,
    MODIFIED,
    AmbientTuple,
    Diagnosis,
    FlagPoint,
    FlagSignature,
    J_diag,
    embed,
    embed_classical,
    embed_modified,
    flag_from_basis,
    flag_signature,
    flag_validate,
    random_flag,
    same_flag,
)
from .tangent import (
    CoordinateMetric,
    TangentCoords,
    ambient_to_tangent,
    classical_from_modified,
    classical_metric,
    coords_dimension,
    coords_from_vector,
    coords_vector,
    metric,
    metric_for,
    modified_metric,
    norm,
    orthogonal_group_part,
    project_normal,
    project_tangent,
    random_tangent,
    raw_pairing,
    riemannian_gradient,
    tangent_coords,
    tangent_from_blocks,
    tangent_to_ambient,
    zero_tangent,
)
from .transport import (
    transport_classical,
    transport_classical_geodesic,
    transport_generator,
    transport_modified,
    transport_rhs,
)
