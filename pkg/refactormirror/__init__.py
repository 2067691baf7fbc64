from .detector import detect
from .engine import apply, check, invert
from .mirror import mirror
from .source_model import parse, print_unit

__all__ = ["apply", "check", "detect", "invert", "mirror", "parse", "print_unit"]
