from evaluation.harness import OrderingCheck, check_ordering, evaluate_estimators, split_training_targets
from evaluation.metrics import ErrorRecord, ErrorSummary, error_cdf, summarize, task_error
from evaluation.operator import EstimatorType, get_available_estimators, get_estimator
from evaluation.report import emit_report
from evaluation.studies import CombinationResult, FactorComparison, combination_study, factor_accuracy
