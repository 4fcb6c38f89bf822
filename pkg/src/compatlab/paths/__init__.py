"""Monte Carlo drivers and the example solvers on shared time grids."""

from .brownian import BrownianOracle, brownian
from .bsde import (BSDEResult, TreeDriver, backward_induction, bsde_solve,
                   conditional_variation, integrated_bound)
from .ensemble import ModelError, PathEnsemble, SolverError, stack
from .euler import (ItoModel, constant_path, euler_ito, euler_semimartingale, ito_integrand,
                    time_and_driver)
from .grid import TimeGrid
from .levy import SemimartingaleDecomp, levy_driver, localizing_times
from .mckean import (McKeanVlasovModel, linear_mean_dt_bound, linear_mean_euler_bias,
                     linear_mean_ode, mckean_vlasov)
from .metric import dm_metric, sup_distance
from .streams import Stream
from .timechange import TimeChangeModel, TimeChangeResult, time_change_euler

__all__ = [
    "BSDEResult", "BrownianOracle", "ItoModel", "McKeanVlasovModel", "ModelError",
    "PathEnsemble", "SemimartingaleDecomp", "SolverError", "Stream", "TimeChangeModel",
    "TimeChangeResult", "TimeGrid", "TreeDriver", "backward_induction", "brownian",
    "bsde_solve", "conditional_variation", "constant_path", "dm_metric", "euler_ito",
    "euler_semimartingale", "integrated_bound", "ito_integrand", "levy_driver",
    "linear_mean_dt_bound", "linear_mean_euler_bias", "linear_mean_ode", "localizing_times", "mckean_vlasov",
    "stack", "sup_distance", "time_and_driver", "time_change_euler",
]
