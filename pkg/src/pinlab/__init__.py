"""Heavy-tailed pinning: disorder coupling, energy-entropy maximization,
exact Gibbs sampling, renewal asymptotics, subordinator functionals, and the
companion directed-polymer ground state, plus a batch experiment harness."""

__version__ = "0.1.0"

from .disorder import (
    CoupledDisorder,
    DisorderLaw,
    compute_b_N,
    continuum_residual,
    couple,
    draw_base,
    pareto_quantile,
    sample_coupled,
    truncation_residual,
)
from .geometry import PinnedSet, hausdorff, set_entropy
from .gibbs import (
    ConcentrationEstimate,
    GibbsSample,
    PinningModel,
    concentration_probability,
    enumerate_distribution,
    exact_sample,
    forward_table,
    log_partition,
    set_log_weight,
)
from .polymer import (
    PolymerEnvironment,
    PolymerPath,
    binary_entropy_rate,
    env_energy,
    path_entropy,
    polymer_beta_critical,
    solve_polymer,
    solve_polymer_bruteforce,
    tent_entropy,
    tent_path,
)
from .renewal import RenewalLaw, build_law, renewal_function, subexp_diagnostics, tilt
from .subordinator import (
    MarkedPointSet,
    band_area_phi,
    band_process,
    band_u,
    edge_jump_times,
    edge_process,
    growth_check,
)
from .varmax import (
    EnergyLandscape,
    VarSolution,
    beta_critical,
    constrained_max,
    energy,
    objective,
    solve_bruteforce,
    solve_dp,
)
