# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************

class CurError(Exception):
    pass

class ArgumentError(CurError, ValueError):
    pass

class NumericalFailure(CurError, RuntimeError):
    pass

class SingularGeneratorError(NumericalFailure):
    """k = l = r generator without an inverse (exact-inverse mode)."""

class RankMismatchError(CurError, ValueError):
    def __init__(self, msg, expected=None, found=None):
        super().__init__(msg)
        self.expected = expected
        self.found = found

class UnluckySamplingError(CurError, RuntimeError):
    """Every attempt of a randomized pipeline drew a degenerate generator.
    ``diagnostics`` holds the per-attempt observations."""
    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}

class BoundUnavailable(CurError, ArithmeticError):
    def __init__(self, msg, theta=None):
        super().__init__(msg)
        self.theta = theta

class ParseError(CurError, ValueError):
    def __init__(self, msg, path=None, lineno=None):
        if lineno is not None:
            msg = f"{path}:{lineno}: {msg}"
        elif path is not None:
            msg = f"{path}: {msg}"
        super().__init__(msg)
        self.path = path
        self.lineno = lineno

class ConfigError(CurError, ValueError):
    def __init__(self, msg, field=None):
        if field is not None:
            msg = f"{field}: {msg}"
        super().__init__(msg)
        self.field = field
