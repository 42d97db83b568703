"""Shared floating-point pass rule for inequality checks."""

REL = 1e-9
ABS = 1e-12


def tol_for(*magnitudes: float, rel: float = REL, abs_floor: float = ABS) -> float:
    """Tolerance scaled by the largest magnitude involved, never below ``abs_floor``."""
    big = max((abs(float(m)) for m in magnitudes), default=0.0)
    if big == float("inf"):
        return 0.0
    return max(abs_floor, rel * big)


def leq(a: float, b: float, rel: float = REL, abs_floor: float = ABS) -> bool:
    """``a <= b`` up to the relative/absolute slack rule."""
    if b == float("inf"):
        return True
    if a == float("inf"):
        return False
    return a <= b + tol_for(a, b, rel=rel, abs_floor=abs_floor)
