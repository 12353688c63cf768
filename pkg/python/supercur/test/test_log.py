# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
import unittest
import re
import numpy as np
import supercur as sc
from supercur import LOG
from .test_errors import expect_error

def find_log_with_re(logs, pattern=None, **args):
    if pattern:
        pattern = re.compile(pattern)
    flogs = []
    for log in logs:
        for arg in args:
            if log[arg] != args[arg]:
                break
        else:
            if pattern:
                res = re.findall(pattern, log["msg"])
                if len(res):
                    flogs.append(res[0])
            else:
                flogs.append(log["msg"])
    return flogs

class TestLog(unittest.TestCase):
    def test_log_capture(self):
        LOG.log_capture_start()
        with sc.flag_scope(log_v=1000, log_silent=1):
            LOG.v("1")
            LOG.vv("2")
            LOG.i("3")
            LOG.w("4")
            LOG.e("5")
        LOG.log_capture_stop()
        logs = LOG.log_capture_read()
        logs2 = LOG.log_capture_read()
        assert len(logs2)==0

        for i in range(5):
            assert logs[i]['msg'] == str(i+1)
            assert logs[i]['level'] == 'iiiwe'[i]
            assert logs[i]['name'] == 'test_log.py'
        assert [l['verbose'] for l in logs] == [1, 10, 0, 0, 0]

    def test_verbose_gate(self):
        with sc.log_capture_scope(log_v=0, log_silent=1) as logs:
            LOG.v("hidden")
            LOG.i("shown")
        assert [l["msg"] for l in logs] == ["shown"]

    def test_fatal_raises(self):
        with sc.log_capture_scope(log_silent=1) as logs:
            expect_error(lambda: LOG.f("boom"), RuntimeError)
        assert find_log_with_re(logs, "boom", level="f") == ["boom"]

    def test_retry_is_logged(self):
        # the first draw of a primitive CUR on a rank-1 matrix with
        # k = l = 1 misses the single nonzero row most of the time
        W = np.zeros((64, 64))
        W[5, :] = 1
        with sc.log_capture_scope(log_v=1, log_silent=1) as logs:
            try:
                sc.primitive_cur(W, 1, 1, 1, rng=0, attempts=3)
            except sc.UnluckySamplingError:
                pass
        assert len(find_log_with_re(logs, r"attempt (\d+) drew a degenerate", level="i")) >= 1

if __name__ == "__main__":
    unittest.main()
