"""Metrics, the experiment matrix and report rendering."""

from .experiment import RAW_SITES, Cell, CellFailure, ExperimentOptions, default_cells, fit_cell, run_experiment_matrix, split_silos
from .metrics import CONDITIONS, ConfusionMatrix, MetricsReport, confusion, evaluate, metrics
from .report import HEADER, PUBLISHED_ROWS, published_reports, parse_json, percent, render_json, render_table
