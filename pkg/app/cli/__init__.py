"""
Command-line front-end
"""
from pydantic import ValidationError


def validation_message(exc: ValidationError) -> str:
    """One `field.path: message` entry per pydantic error, joined by "; "."""
    parts = []
    for err in exc.errors():
        where = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{where}: {err['msg']}")
    return "; ".join(parts)
