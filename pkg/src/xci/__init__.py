"""Exact outer, inner and exceedance conditional-independence checks for
finite discrete laws on non-product supports."""

__version__ = "0.1.0"

from .checks import (  # noqa: E402
    CIVerdict,
    check_eh_ci,
    check_inner_ci,
    check_inner_ci_bruteforce,
    check_outer_ci,
    check_plain_ci,
    recheck_certificate,
)
from .dist import (  # noqa: E402
    BlockPartition,
    FiniteDistribution,
    condition,
    marginal,
    product,
)
from .generators import (  # noqa: E402
    GridSpec,
    gen_cross,
    gen_pareto_axes,
    gen_perturbed,
    gen_product_ci,
)
from .geometry import CrossRegion, EHRegion, ExplicitSet, Rectangle, Slab  # noqa: E402
from .witness import (  # noqa: E402
    Witness,
    build_outer_witness_generic,
    build_prop1_witness,
    build_prop2_witness,
    verify_witness,
)

__all__ = [
    "BlockPartition", "CIVerdict", "CrossRegion", "EHRegion", "ExplicitSet",
    "FiniteDistribution", "GridSpec", "Rectangle", "Slab", "Witness",
    "build_outer_witness_generic", "build_prop1_witness", "build_prop2_witness",
    "check_eh_ci", "check_inner_ci", "check_inner_ci_bruteforce", "check_outer_ci",
    "check_plain_ci", "condition", "gen_cross", "gen_pareto_axes", "gen_perturbed",
    "gen_product_ci", "marginal", "product", "recheck_certificate", "verify_witness",
]
