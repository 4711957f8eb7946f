"""Test families, inequality evaluators, sweeps and reports."""
from .families import FunctionFamily, Sample, generate
from .domain import DomainFamily, DomainSample, eval_theorem14, generate_domain, omega_grid
from .inequalities import (IDS, InequalityReport, LabOptions, case_split_theorem17, c_gamma,
                           check_split_inequality, eval_inequality, fit_constant,
                           optimize_dyadic_cut, split_inequality_scan)
from .sweeps import dilation_sweep, evaluate_family, held_out_check, resolution_sweep
