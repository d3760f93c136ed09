"""Mixture likelihood ratio scan statistic for outbreak detection in daily counts."""
from .baseline import (CONTEST_SPEC, BaselineModel, CalendarDay, DesignSpec, build_design_row, fit_baseline,
                       predict_lambda)
from .comparators import EwmaState, ewma_scores, ewma_step
from .detector import (DetectorConfig, MLRSSDetector, ScanResult, algorithm_score, log_lr, log_mlr, remediate,
                       slope_weights)
from .evaluation import EvaluationReport, amoc, evaluate
from .profiles import Family, OutbreakSignature, ProfileBank, ProfileShape, build_bank, delta, fit_theta
from .series import CountSeries, read_counts, write_counts
from .simulator import LabeledSeries, SimConfig, extract_signature, simulate

__version__ = "0.1.0"
