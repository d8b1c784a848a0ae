"""entswap: entanglement swapping between time-separated photon pairs.

A numpy/scipy library covering the full chain from the labeled four-photon
state through the post-selected joint projection to nonlocal quantum state
tomography with Poissonian counting statistics and bootstrap errors.
"""

from .states import (
    BellKind,
    DensityMatrix,
    Ket,
    apply_single,
    bell_state,
    born_probability,
    concurrence,
    fidelity,
    hwp,
    ket,
    partial_trace,
    phase_plate,
    state_fidelity,
    tensor,
)
from .swap import (
    BellDecomposition,
    BellProjectionResult,
    DistinguishabilityModel,
    LabeledFourPhotonState,
    ModeLabel,
    apply_delay,
    bell_basis_coefficients,
    bell_decompose,
    build_two_pair_state,
    project_middle,
)
from .tomography import (
    CountTable,
    EffectiveProjector,
    ReconstructionResult,
    WaveplateSetting,
    bootstrap_error,
    early_photon_operator,
    effective_projectors,
    late_photon_operator,
    linear_inversion,
    log_likelihood,
    max_likelihood,
    predicted_probabilities,
    projection_catalog,
    reconstruct,
    sample_counts,
    tomography_settings,
)
from .runner import (
    RunConfig,
    RunResult,
    TimelineEvent,
    calibrate_overlap,
    decompose_check,
    run_experiment,
    timeline,
    write_artifacts,
)
from .io import (
    export_count_table,
    export_density_matrix,
    export_real_part_grid,
    import_count_table,
    import_density_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "BellDecomposition",
    "BellKind",
    "BellProjectionResult",
    "CountTable",
    "DensityMatrix",
    "DistinguishabilityModel",
    "EffectiveProjector",
    "Ket",
    "LabeledFourPhotonState",
    "ModeLabel",
    "ReconstructionResult",
    "RunConfig",
    "RunResult",
    "TimelineEvent",
    "WaveplateSetting",
    "apply_delay",
    "apply_single",
    "bell_basis_coefficients",
    "bell_decompose",
    "bell_state",
    "bootstrap_error",
    "born_probability",
    "build_two_pair_state",
    "calibrate_overlap",
    "concurrence",
    "decompose_check",
    "early_photon_operator",
    "effective_projectors",
    "export_count_table",
    "export_density_matrix",
    "export_real_part_grid",
    "fidelity",
    "hwp",
    "import_count_table",
    "import_density_matrix",
    "ket",
    "late_photon_operator",
    "linear_inversion",
    "log_likelihood",
    "max_likelihood",
    "partial_trace",
    "phase_plate",
    "predicted_probabilities",
    "project_middle",
    "projection_catalog",
    "reconstruct",
    "run_experiment",
    "sample_counts",
    "state_fidelity",
    "tensor",
    "timeline",
    "tomography_settings",
    "write_artifacts",
]
