"""Decoherence of macroscopic photonic superpositions in truncated Fock space."""

from .errors import (
    DegenerateStateError,
    FilterAnnihilationError,
    InvalidStateError,
    OracleMismatchError,
    TruncationError,
)
from .fock import (
    ModeBasis,
    PhotonDistribution,
    SingleModeDensity,
    SingleModePureState,
    TruncationPolicy,
    TwoModeDensity,
    TwoModePureState,
    basis_change_matrix,
    change_basis,
    from_json,
    mean_photon_number,
    normalize,
    number_distribution,
    polarization_rotation,
    tensor_product,
    to_json,
)
from .generators import (
    CatParams,
    GainSetting,
    cat_state,
    coherent_state,
    macro_superposition,
    qiopa_equatorial_state,
    qiopa_macrostate_pm,
    qiopa_numeric_evolution,
    qiopa_pole_state,
    squeezed_state,
)
from .loss import (
    LossSetting,
    apply_loss_single_mode,
    apply_loss_two_mode,
    binomial_thinning,
    kraus_branches,
    kraus_operators,
    lossy_cat_analytic,
)
from .metrics import (
    VisibilityResult,
    bures_distance,
    cat_visibility_closed_form,
    coherent_distinguishability_closed_form,
    fidelity,
    fidelity_from_factors,
    matrix_sqrt_psd,
    product_fidelity_fast_path,
    universal_visibility,
)
from .ofilter import apply_ofilter, ofilter_mask

__version__ = "0.1.0"
