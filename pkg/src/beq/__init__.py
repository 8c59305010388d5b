"""Stage-wise equivalence structures: constructions, embeddings, reductions.

The package builds finite-horizon presentations of equivalence structures,
synthesizes embeddings between them at three effectiveness levels, runs the
adversarial constructions that separate those levels, and implements the
reduction gadgets whose horizon character witnesses classification facts.
Everything is deterministic and file formats are bit-exact.
"""

from .core import (
    INFINITE,
    UNBOUNDED,
    CharacterProfile,
    Event,
    FixtureError,
    InvariantError,
    ParseError,
    Presentation,
    PresentationBuilder,
    Snapshot,
    assert_monotone,
    canonical_transversal,
    census,
    direct_sum,
    inf_guess,
    restrict_above,
    size_at_least,
)
from .approx import (
    ApproximationFamily,
    ClockedProgram,
    Schedule,
    Semantics,
    dominant_f,
    eval_clocked,
    limit_value,
    pi2_member_at,
    sigma2_member_at,
)
from .embedding import (
    PartialMap,
    StagedMap,
    brute_force_embeds,
    embed_bounded,
    embed_delta2,
    embed_delta3,
    finite_embeds,
    verify_partial_embedding,
)
from .adversary import (
    ConstructionLog,
    build_af,
    build_doublejump_coder,
    build_simple_fin,
    canonical_triangular,
    decode_transversal,
    diagonalize_unbounded,
)
from .indexsets import (
    Degree,
    biemb_test_cbec,
    classify_becat,
    reduce_d01,
    reduce_d03,
    reduce_pi02,
    reduce_pi02_inf,
    reduce_pi04,
    reduce_sigma02,
    reduce_sigma04,
)

__version__ = "0.1.0"
