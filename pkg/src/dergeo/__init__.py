"""dergeo: the computable core of derived differential geometry.

Atlas and site combinatorics on finite spaces, the atlas ↔ hypercover
exchange, set-valued descent and sheafification, and a quasi-smooth
derived-intersection calculator (tangent complex, virtual dimension,
transversality, Hochschild/jet mapping-space homotopy) over exact
rational arithmetic.
"""

from .atlas import (
    AtlasDiagram,
    ContinuousMap,
    atlas_completion,
    compose_atlases,
    inclusion_atlas,
    is_atlas,
    is_atlas_cover_condition,
    is_atlas_meet_condition,
    is_site,
    pullback_atlas,
    restrict_to_sieve,
    subordinate,
    tautological_atlas,
    trivial_atlas,
)
from .errors import BoundExceeded, InvariantViolation
from .lattice import (
    FinitePoset,
    FiniteSpace,
    Sieve,
    downset,
    frame_of,
    is_filtered,
    is_sieve,
    sieve_lattice,
)
from .qsmooth import (
    CospanPresentation,
    JetAlgebra,
    PolynomialMap,
    RationalPoint,
    SimplicialVectorSpace,
    diagonal_representation,
    hochschild_differential,
    hochschild_face,
    hochschild_level,
    is_transverse,
    jacobian,
    jet_mapping_complex,
    koszul_betti,
    mapping_space_betti,
    nerve_cosimplicial_betti,
    pl_retraction_check,
    tangent_complex,
    virtual_dimension,
)
from .sheaf import (
    Presheaf,
    PresheafMap,
    descent_check,
    hypercover_descent_check,
    is_local_isomorphism,
    sheafify,
)
from .simplicial import (
    BoundarySphere,
    IndexedHypercover,
    TruncatedSimplicialSet,
    atlas_to_hypercover,
    delta_refinement_limit_check,
    enumerate_fillings,
    hypercover_to_atlas,
    iota_test,
    is_hypercover,
    semisimplicial_filling_surjectivity,
)

__version__ = "0.1.0"
