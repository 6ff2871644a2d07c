"""Numerical Gleason decompositions ``f(z) = sum_i z_i T_i(f)(z)`` on C-convex domains."""

from .cconvexity import check_cconvex, check_transversality, slice_domain, slice_topology
from .collar import (
    collar_cover,
    collar_membership,
    interior_cover,
    sample_collar,
    verify_lemma1,
)
from .core import (
    DecompositionReport,
    HolomorphicOracle,
    cauchy_directional_derivative,
    decompose_at_point,
    decompose_polynomial,
    integrate_I,
    named_oracle,
    oracle_from_spec,
    polynomial_oracle,
    solve_SY,
    straight_plan,
)
from .domains import Domain, load_domain, make_domain
from .errors import GleasonError
from .experiments import continuity_experiment, estimate_K, grange_approach
from .geometry import inner_normal, tangent_frame
from .paths import mu, plan_path, validate_path
from .polynomials import Polynomial, fit_approximant, leibenzon_all, leibenzon_at, leibenzon_closed_form

__version__ = "0.1.0"
