# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
import dataclasses
from dataclasses import dataclass, field
from typing import Optional
from ..errors import ArgumentError, ConfigError
from ..generators import GeneratorSpec
from ..pipelines import PipelineSpec
from ..preprocess import KINDS, MultiplierSpec

# pipelines the harness runs on top of the ones in pipelines.VARIANTS
BENCH_VARIANTS = ("multiplier_pinv", "gaussian_sampling", "progressive")
PREPROCESS_MODES = ("none", "premultiply")

@dataclass
class ExperimentConfig:
    """One experiment: a matrix family, a pipeline and a trial count.

    The flat text form mirrors the fields, one ``key = value`` per line,
    with dotted keys for the nested specs::

        name = cross_approx
        trials = 100
        seed = 7
        generator.variant = factor_gaussian
        generator.n = 256
        pipeline.variant = cross_approx
        pipeline.loops = 5
    """
    name: str = "experiment"
    trials: int = 100
    seed: int = 0
    max_entries: int = 1 << 24
    out: str = ""
    preprocess: str = "none"
    generator: GeneratorSpec = field(default_factory=GeneratorSpec)
    pipeline: PipelineSpec = field(default_factory=PipelineSpec)
    multiplier: Optional[MultiplierSpec] = None

    def validate(self):
        if self.trials < 1:
            raise ConfigError(f"must be >= 1, got {self.trials}", "trials")
        g = self.generator
        if g.variant != "from_file" and g.m * g.n > self.max_entries:
            raise ConfigError(f"{g.m}x{g.n} exceeds max_entries={self.max_entries}", "generator.m")
        if self.preprocess not in PREPROCESS_MODES:
            raise ConfigError(f"unknown mode {self.preprocess!r}", "preprocess")
        if self.multiplier is not None and self.multiplier.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.multiplier.kind!r}", "multiplier.kind")
        if self.preprocess != "none" and self.multiplier is None:
            raise ConfigError("preprocessing needs multiplier.kind", "multiplier.kind")
        try:
            g.validate()
        except ArgumentError as e:
            raise ConfigError(str(e), "generator") from e
        if self.pipeline.variant not in BENCH_VARIANTS and g.variant != "from_file":
            try:
                self.pipeline.validate(g.m, g.n)
            except ArgumentError as e:
                raise ConfigError(str(e), "pipeline") from e
        return self


_SECTIONS = {"generator": GeneratorSpec, "pipeline": PipelineSpec, "multiplier": MultiplierSpec}

def _convert(text, default, key):
    if isinstance(default, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {text!r}", key)
    try:
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"expected {type(default).__name__}, got {text!r}", key) from None
    if default is None:
        # optional ints of MultiplierSpec
        if text.lower() == "none":
            return None
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"expected an integer or none, got {text!r}", key) from None
    return text

def _defaults(obj):
    return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}

def parse_config(text, path="<config>"):
    """ExperimentConfig from the flat ``key = value`` form. ``#`` starts a comment."""
    config = ExperimentConfig()
    top = {k: v for k, v in _defaults(config).items() if k not in _SECTIONS}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (t.strip() for t in line.split("=", 1))
        if "." in key:
            section, name = key.split(".", 1)
            if section not in _SECTIONS:
                raise ConfigError(f"{path}:{lineno}: unknown section", key)
            spec = getattr(config, section)
            if spec is None:
                spec = _SECTIONS[section]()
                setattr(config, section, spec)
            fields = _defaults(spec)
            if name not in fields:
                raise ConfigError(f"{path}:{lineno}: unknown field", key)
            setattr(spec, name, _convert(value, fields[name], key))
        else:
            if key not in top:
                raise ConfigError(f"{path}:{lineno}: unknown field", key)
            setattr(config, key, _convert(value, top[key], key))
    return config.validate()

def load_config(path):
    with open(path, "r", encoding="utf8") as f:
        return parse_config(f.read(), path)

def dump_config(config):
    """Flat text form; ``parse_config(dump_config(c))`` gives back ``c``."""
    lines = []
    for k, v in _defaults(config).items():
        if k in _SECTIONS:
            if v is None:
                continue
            for name, value in _defaults(v).items():
                lines.append(f"{k}.{name} = {'none' if value is None else value}")
        else:
            lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"
