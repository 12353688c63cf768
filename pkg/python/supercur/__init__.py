# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
__version__ = '0.3.1'
from supercur_utils import LOG, flags, simple_timer

# verbosity lives on the logger, the rest on flags
_log_flags = ("log_v", "log_silent")

def _owner(k):
    return LOG if k in _log_flags else flags

class _call_no_record_scope:
    def __enter__(self): pass
    def __exit__(self, *exc): pass
    def __call__(self, func):
        def inner(*args, **kw):
            with self:
                ret = func(*args, **kw)
            return ret
        return inner

class flag_scope(_call_no_record_scope):
    def __init__(self, **sc_flags):
        self.sc_flags = sc_flags

    def __enter__(self):
        flags_bk = self.flags_bk = {}
        try:
            for k,v in self.sc_flags.items():
                flags_bk[k] = getattr(_owner(k), k)
                setattr(_owner(k), k, v)
        except:
            self.__exit__()
            raise

    def __exit__(self, *exc):
        for k,v in self.flags_bk.items():
            setattr(_owner(k), k, v)

single_log_capture = None

class log_capture_scope(_call_no_record_scope):
    """log capture scope

    example::

        with supercur.log_capture_scope(log_v=1) as logs:
            LOG.v("...")
        print(logs)
    """
    def __init__(self, **sc_flags):
        self.fs = flag_scope(**sc_flags)

    def __enter__(self):
        global single_log_capture
        assert not single_log_capture
        single_log_capture = True
        self.logs = []
        LOG.log_capture_start()
        try:
            self.fs.__enter__()
            return self.logs
        except:
            LOG.log_capture_stop()
            single_log_capture = None
            raise

    def __exit__(self, *exc):
        global single_log_capture
        self.fs.__exit__(*exc)
        LOG.log_capture_stop()
        self.logs.extend(LOG.log_capture_read())
        single_log_capture = None


from .errors import *
from .matcore import (CountingMatrix, TopSvd, as_counting, as_mat, index_set,
    log_projective_volume, log_volume, norm, numerical_rank, pinv,
    projective_volume, sigma_tail, svd, svdvals, truncate, volume)
from .matio import load_matrix, read_matrix_market, save_matrix, write_matrix_market
from .generators import GeneratorSpec, RngState, generate, make_rng
from .skeleton import (AprioriBound, CurLra, ErrorReport, SampledErrorReport,
    apriori_error_bound, apriori_error_bound_for, audit_error, canonical_nucleus,
    nucleus_md09, posterior_error_sampled, volume_error_bound)
from .maxvol import (GreedyState, MaxvolResult, dominant_submatrix, lup_ca,
    projective_maxvol, rrqr_select, select_cols, select_rows, t_factor)
from .pipelines import *
from .preprocess import (MultiplierSpec, SketchedCur, StructuredOp,
    build_arft, build_arht, build_gaussian, build_multiplier,
    build_quasi_gaussian, build_srft, build_srht, cur_with_gaussian_sampling,
    cur_with_multiplier_and_pinv, progressive_cur)
