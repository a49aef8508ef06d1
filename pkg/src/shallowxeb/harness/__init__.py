from .config import PRESETS, ExperimentConfig, preset
from .experiment import ExperimentFailed, ResultSet, attach_fits, load_samples, plan_jobs, run_experiment
from .report import emit, evaluate_checks, read_summary, write_results_csv
from .seeding import job_generator
from .stats import RegressionFit, SampleStats, estimate_stats, fit_linear
