"""Numerical convexity analysis of stored-energy potentials on matrix Lie groups."""

from gqc._gqc import (  # noqa: F401
    Potential,
    builtin,
    check_classical_ellipticity,
    check_rank_one_affine,
    check_rank_one_convex,
    check_sl_rank_one_condition,
    check_convex_gauge_hypotheses,
    check_iso_family_hypotheses,
    conjugate,
    det,
    group_d1,
    group_d2,
    in_algebra,
    in_group,
    inverse,
    involution,
    iso_family,
    lsc_experiment,
    mat_exp,
    negate,
    polar_svd,
    quasiconvexity_probe,
    rank_one,
    run_config,
    sample_group_element,
    sample_rank_one_cone,
    sl2_affine_family,
    sl2_system_residual,
    __version__,
)
