# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
from multiprocessing import Pool
import os
import inspect
import datetime
import contextlib
import threading
import time
from tqdm import tqdm

class LogWarper:
    def __init__(self):
        self.log_silent = int(os.environ.get("log_silent", "0"))
        self.log_v = int(os.environ.get("log_v", "0"))
        self.capture = None

    def log_capture_start(self):
        self.capture = []

    def log_capture_stop(self):
        self.captured, self.capture = self.capture or [], None

    def log_capture_read(self):
        logs, self.captured = getattr(self, "captured", []), []
        return logs

    def _log(self, level, verbose, *msg):
        if len(msg):
            msg = " ".join([ str(m) for m in msg ])
        else:
            msg = str(msg)
        f = inspect.currentframe()
        fileline = inspect.getframeinfo(f.f_back.f_back)
        name = os.path.basename(fileline.filename)
        lineno = fileline.lineno
        if verbose > self.log_v:
            return
        if self.capture is not None:
            self.capture.append({"level": level, "verbose": verbose,
                "name": name, "lineno": lineno, "msg": msg})
        if not self.log_silent:
            now = datetime.datetime.now().strftime("%m%d %H:%M:%S.%f")
            tid = threading.get_ident()%100
            v = f" v{verbose}" if verbose else ""
            print(f"[{level} {now} {tid:02}{v} {name}:{lineno}] {msg}")
        if level == 'f':
            raise RuntimeError(msg)

    def V(self, verbose, *msg): self._log('i', verbose, *msg)
    def v(self, *msg): self._log('i', 1, *msg)
    def vv(self, *msg): self._log('i', 10, *msg)
    def vvv(self, *msg): self._log('i', 100, *msg)
    def vvvv(self, *msg): self._log('i', 1000, *msg)
    def i(self, *msg): self._log('i', 0, *msg)
    def w(self, *msg): self._log('w', 0, *msg)
    def e(self, *msg): self._log('e', 0, *msg)
    def f(self, *msg): self._log('f', 0, *msg)


class Flags:
    """Process-wide numerical flags, each overridable by an environment
    variable of the same name. Values read from the environment are parsed
    with the type of the default.

    example::

        log_v=10 rank_tol=1e-8 python3 -m supercur cur ...
    """
    _defaults = dict(
        pinv_rtol=1e-12,
        rank_tol=1e-6,
        swap_tol=1e-12,
        tie_rtol=1e-12,
        generator_rtol=1e-10,
        select_rank_rtol=1e-8,
        max_retries=10,
        subalg="lu",
        select_h=1.1,
        pad_policy="pad",
        bench_procs=0,
        ca_loops=5,
        quad_tol=1e-10,
    )

    def __init__(self):
        for k, v in self._defaults.items():
            if k in os.environ:
                v = type(v)(os.environ[k])
            object.__setattr__(self, k, v)

    def __setattr__(self, k, v):
        if k not in self._defaults:
            raise AttributeError(f"Unknown flag: {k}")
        object.__setattr__(self, k, v)

    def __repr__(self):
        return "Flags(" + ", ".join(f"{k}={getattr(self, k)!r}" for k in self._defaults) + ")"


@contextlib.contextmanager
def simple_timer(name):
    LOG.i("Timer start", name)
    now = time.time()
    yield
    LOG.i("Time stop", name, time.time()-now)

pool_size = 0

def get_pool_size():
    global pool_size
    if flags.bench_procs > 0:
        return flags.bench_procs
    if pool_size == 0:
        mem_bytes = os.sysconf('SC_PAGE_SIZE') * os.sysconf('SC_PHYS_PAGES')
        mem_gib = mem_bytes/(1024.**3)
        pool_size = min(8, os.cpu_count() or 1, max(int(mem_gib // 2), 1))
        LOG.i(f"Total mem: {mem_gib:.2f}GB, using {pool_size} procs for trials.")
    return pool_size

def run_pool(func, args_list, procs=None, desc=None):
    """Map ``func`` over ``args_list`` in a worker pool, results in input order.
    ``procs=1`` runs in-process. With ``desc`` a tqdm bar shows progress."""
    procs = get_pool_size() if procs is None else procs
    bar = lambda it: tqdm(it, total=len(args_list), desc=desc,
        disable=desc is None or bool(LOG.log_silent))
    if procs <= 1 or len(args_list) <= 1:
        return [ func(a) for a in bar(args_list) ]
    with Pool(procs) as p:
        return list(bar(p.imap(func, args_list)))

LOG = LogWarper()
flags = Flags()
