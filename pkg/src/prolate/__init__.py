"""Random sampling of bandlimited functions.

Spectra of time-frequency limiting operators, the concentrated function
class and its random members, sampling point processes, empirical frame
bounds with explicit probability constants, and the counterexample
constructions that rule out unrestricted random sampling.
"""

from ._accel import active_backend
from .errors import CapacityError, NumericError, SamplingError
from .functions import (
    BandlimitedFunction,
    BumpParams,
    ClosedFormFunction,
    ConcentrationClass,
    adversarial_bump_function,
    basis_values,
    full_spectrum_1d,
    membership,
    sample_random_member,
)
from .points import (
    DensityReport,
    PointSet,
    classify_prop_hole,
    density_diagnostics,
    iid_uniform_cube,
    poisson_homogeneous,
    poisson_inhomogeneous,
    uniform_per_cube,
)
from .spectrum import (
    QuadratureRule,
    Spectrum1D,
    SpectrumD,
    build_quadrature,
    calibrate_kappa,
    compute_spectrum_1d,
    counting_function,
    fuchs_top_eigenvalue,
    landau_widom_reference,
    sinc_kernel,
    tensor_spectrum,
    widom_asymptotic,
    widom_tail_bound,
)
from .theory import (
    TheoryParams,
    bernstein_bound,
    chain_constants,
    covering_number_l2,
    covering_number_sup,
    delta_feasibility,
    deviation_bound,
    geometric_tail_bound,
    min_samples,
    norm_comparison_constant,
    sampling_probability_bound,
    theory_params,
    truncation_dimension,
)

__version__ = "0.1.0"
