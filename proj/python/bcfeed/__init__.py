"""Achievable symmetric rates for broadcast channels with delayed state feedback."""

try:
    from ._bcfeed import (  # noqa: F401
        GbcConfig,
        dof_sym,
        jsc_sym_rate,
        lemma2_check,
        mat2_rate,
        mu_solve,
        optimize_beta,
        qmat_equivalent_betas,
        qmat_rate,
        region_check,
        sym_rate_ebc,
        tdma_rate,
        two_user_jsc_rate,
        upper_bound,
    )
except ImportError:  # running against a CMake build tree
    from _bcfeed import (  # noqa: F401
        GbcConfig,
        dof_sym,
        jsc_sym_rate,
        lemma2_check,
        mat2_rate,
        mu_solve,
        optimize_beta,
        qmat_equivalent_betas,
        qmat_rate,
        region_check,
        sym_rate_ebc,
        tdma_rate,
        two_user_jsc_rate,
        upper_bound,
    )

__all__ = [
    "GbcConfig",
    "dof_sym",
    "jsc_sym_rate",
    "lemma2_check",
    "mat2_rate",
    "mu_solve",
    "optimize_beta",
    "qmat_equivalent_betas",
    "qmat_rate",
    "region_check",
    "sym_rate_ebc",
    "tdma_rate",
    "two_user_jsc_rate",
    "upper_bound",
]
