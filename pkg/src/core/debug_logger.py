import inspect
import logging
import os

from dotenv import load_dotenv

load_dotenv()

LOGGER_ROOT = "bipolaron"


def _flag(name, default="1"):
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


print_statements = _flag("BIPOLARON_DEBUG")
print_statements2 = _flag("BIPOLARON_DEBUG2", "0")
print_statements3 = _flag("BIPOLARON_DEBUG3", "0")

logging.basicConfig(
    level=os.getenv("BIPOLARON_LOG_LEVEL", "WARNING").upper(),
    format="%(asctime)s %(name)s %(levelname)s %(message)s",
)


def _caller_logger(frame):
    module = inspect.getmodule(frame)
    name = module.__name__ if module is not None else "__main__"
    return logging.getLogger(f"{LOGGER_ROOT}.{name}")


def _emit(level, args, kwargs):
    caller_frame = inspect.currentframe().f_back.f_back
    sep = kwargs.get("sep", " ")
    _caller_logger(caller_frame).log(level, sep.join(str(a) for a in args))


def set_verbosity(verbose):
    """Turn every debug level on (or off) and lower the root log level to match."""
    global print_statements, print_statements2, print_statements3
    print_statements = print_statements2 = print_statements3 = bool(verbose)
    logging.getLogger(LOGGER_ROOT).setLevel(logging.DEBUG if verbose else logging.WARNING)


def print_debug(*args, **kwargs):
    """Progress messages (INFO) if enabled."""
    if print_statements:
        _emit(logging.INFO, args, kwargs)


def print_debug2(*args, **kwargs):
    """Per-iteration detail (DEBUG) if enabled."""
    if print_statements2:
        _emit(logging.DEBUG, args, kwargs)


def print_debug3(*args, **kwargs):
    """I/O and table detail (DEBUG) if enabled."""
    if print_statements3:
        _emit(logging.DEBUG, args, kwargs)


def warn(*args, **kwargs):
    """Warnings are always emitted."""
    _emit(logging.WARNING, args, kwargs)
