"""Statistical checks on simulated ensembles: L2 gaps, martingale, strong-copy and ladder probes."""

from .compat import (Alpha, HFunc, ProvenanceError, check_provenance, compat_test, default_h_set,
                     rc_structure, temporal_structure)
from .controls import LIPSCHITZ, adapted_control, anticipating_control, reversed_control
from .features import features_rc, features_temporal, poly_expand, temporal_indices, window_integrals
from .gap import GapEntry, RidgeFit, TestConfig, bonferroni, bootstrap_se, l2_gap
from .martingale import MartingaleReport, martingale_test, ols, stopped
from .report import CSV_COLUMNS, GapReport, write_csv, write_json
from .strong import (CopyReport, LadderTable, copy_distances, fit_log_slope, reflected,
                     strong_copy_test, sup_abs_oracle, tanaka_driver, tanaka_solver,
                     uniqueness_probe)

__all__ = [
    "Alpha", "CSV_COLUMNS", "CopyReport", "GapEntry", "GapReport", "HFunc", "LIPSCHITZ",
    "LadderTable", "MartingaleReport", "ProvenanceError", "RidgeFit", "TestConfig",
    "adapted_control", "anticipating_control", "bonferroni", "bootstrap_se", "check_provenance",
    "compat_test", "copy_distances", "default_h_set", "features_rc", "features_temporal",
    "fit_log_slope", "l2_gap", "martingale_test", "ols", "poly_expand", "rc_structure",
    "reflected", "reversed_control", "stopped", "strong_copy_test", "sup_abs_oracle",
    "tanaka_driver", "tanaka_solver", "temporal_indices", "temporal_structure",
    "uniqueness_probe", "window_integrals", "write_csv", "write_json",
]
