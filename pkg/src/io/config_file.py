"""Flat key=value configuration files with one [section] per command."""
import configparser
import math
from pathlib import Path

from src.core.exceptions import ConfigError


def read_section(path, section):
    """Raw string values of `section` (plus any keys outside sections) from a config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(default_section="all", interpolation=None)
    parser.optionxform = str
    text = path.read_text(encoding="utf-8")
    try:
        # keys before the first header land in [all]
        parser.read_string("[all]\n" + text)
    except configparser.Error as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    values = dict(parser.defaults())
    if parser.has_section(section):
        values.update({k: v for k, v in parser.items(section)})
    return values


def parse_value(text):
    """'1,2' -> (1.0, 2.0); 'inf' -> inf; 'true' -> True; integers stay integers."""
    text = text.strip()
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    if lowered in ("none", "null", ""):
        return None
    if "," in text:
        return tuple(parse_value(t) for t in text.split(",") if t.strip())
    try:
        return int(text, 0)
    except ValueError:
        pass
    try:
        return float(text) if lowered not in ("inf", "infinity") else math.inf
    except ValueError:
        return text
