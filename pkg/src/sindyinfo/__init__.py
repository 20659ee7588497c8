"""Information-theoretic diagnostics for sparse identification of ODE models."""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    SystemSpec,
    Trajectory,
    add_noise,
    integrate,
    integrate_many,
    lorenz,
    rossler,
    van_der_pol,
)
from .entropy import EntropyConfig, apen, sampen  # noqa: E402
from .exceptions import (  # noqa: E402
    EmptySupportWarning,
    IntegrationDivergedError,
    OscillationNotFoundError,
    SingularSystemError,
    UnboundedAxisError,
    UndefinedEntropyWarning,
)
from .features import LibraryConfig, PolynomialLibrary, build_library, central_diff  # noqa: E402
from .fim import (  # noqa: E402
    BlockScanner,
    FisherInformation,
    aggregate,
    bagging_spectrum_study,
    block_scan,
    compute_fim,
    information_score,
    metrics,
    spectrum,
)
from .regression import (  # noqa: E402
    SINDy,
    STRidge,
    EnsembleSINDy,
    FitConfig,
    coefficient_loss,
    ensemble_fit,
    fit_system,
    ground_truth,
)
from .sampling import (  # noqa: E402
    AcquisitionConfig,
    SamplingConfig,
    SearchConfig,
    adaptive_sample,
    entropy_search_sindy,
)

__all__ = [
    "SystemSpec", "Trajectory", "add_noise", "integrate", "integrate_many", "lorenz", "rossler", "van_der_pol",
    "EntropyConfig", "apen", "sampen",
    "EmptySupportWarning", "IntegrationDivergedError", "OscillationNotFoundError", "SingularSystemError",
    "UnboundedAxisError", "UndefinedEntropyWarning",
    "LibraryConfig", "PolynomialLibrary", "build_library", "central_diff",
    "BlockScanner", "FisherInformation", "aggregate", "bagging_spectrum_study", "block_scan", "compute_fim",
    "information_score", "metrics", "spectrum",
    "SINDy", "STRidge", "EnsembleSINDy", "FitConfig", "coefficient_loss", "ensemble_fit", "fit_system",
    "ground_truth",
    "AcquisitionConfig", "SamplingConfig", "SearchConfig", "adaptive_sample", "entropy_search_sindy",
]
