"""Spectra of overlapped arithmetic codes.

Two views of the same rate-r many-to-one map B^n -> [0 : 2^nr): the coset
cardinality spectrum (how unevenly source space splits into cosets) and the
Hamming distance spectrum (how close coset-mates sit), plus the shift-
function geometry and exact algebra connecting them.
"""

from .algebraic import (
    AlgebraicRate,
    Psi2Closed,
    Psi3Analytic,
    Species,
    ZeroPairSet,
    classify_species,
    find_zero_pairs,
    parse_poly,
    poly_to_str,
    psi1_closed,
    psi2_closed,
    psi3_analytic,
    reduce_mod_alpha,
    scan_genus,
    species_audit,
)
from .ccs import (
    SpectrumGrid,
    backward_ccs,
    ccs_square_integral,
    coset_size_estimate,
    empirical_ccs,
    final_ccs_histogram,
    fixed_point_residual,
    half_rate_closed_form,
    half_rate_square_integral,
    solve_asymptotic_ccs,
)
from .encoder import (
    BitBlock,
    CodeParams,
    CosetPartition,
    EncodingResult,
    ProjectionTrace,
    encode,
    partition_cosets,
    projection_trace,
)
from .errors import (
    IdentityViolation,
    IndexOutOfRange,
    LengthMismatch,
    NoConvergence,
    NonIntegralRate,
    NoRootIsolation,
    NotInPartition,
    OacError,
    TooLarge,
    UnsupportedProfile,
)
from .hds import (
    HdsTable,
    IdentityReport,
    codeword_hds,
    hds_binomial,
    hds_exhaustive,
    hds_fast,
    hds_hard,
    hds_identities_check,
    hds_mixed,
    hds_soft,
    hds_soft_and_hard,
    psi_exact_by_masks,
)
from .shifts import (
    CoexInterval,
    IndexSet,
    ShiftHistogram,
    active_set_size,
    coexisting_interval,
    coexists,
    shift_census,
    tau,
    theoretical_w_pdf,
)

__version__ = "0.1.0"
