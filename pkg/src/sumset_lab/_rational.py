from fractions import Fraction
from numbers import Rational


def as_fraction(value) -> Fraction:
    """Convert user input to an exact Fraction.

    Floats go through their shortest repr so that ``0.1`` becomes ``1/10``
    rather than the binary expansion of the double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def format_fraction(value) -> str:
    """Render a rational as ``num/den`` (``0/1`` and ``1/1`` included)."""
    q = Fraction(value)
    return f"{q.numerator}/{q.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)
