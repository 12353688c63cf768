# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
from .config import ExperimentConfig, dump_config, load_config, parse_config
from .experiment import ExperimentReport, run_experiment, run_trial
from .report import report_digest, report_read, report_write
from .suites import (SUITES, ks_normality, run_ks_suite, run_leverage_suite,
    run_norm_suite, run_suite, suite_configs)
