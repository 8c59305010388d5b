"""Cantor pairing on naturals, fixed bit-exact across the whole package."""

from math import isqrt


def pair(x: int, y: int) -> int:
    """⟨x,y⟩ = (x+y)(x+y+1)/2 + y."""
    return (x + y) * (x + y + 1) // 2 + y


def unpair(z: int) -> tuple[int, int]:
    w = (isqrt(8 * z + 1) - 1) // 2
    y = z - w * (w + 1) // 2
    return w - y, y


def triple(x: int, y: int, z: int) -> int:
    """⟨x,y,z⟩ = ⟨x,⟨y,z⟩⟩."""
    return pair(x, pair(y, z))


def untriple(c: int) -> tuple[int, int, int]:
    x, yz = unpair(c)
    y, z = unpair(yz)
    return x, y, z


def quad(x: int, y: int, u: int, v: int) -> int:
    return pair(x, triple(y, u, v))


def unquad(c: int) -> tuple[int, int, int, int]:
    x, rest = unpair(c)
    y, u, v = untriple(rest)
    return x, y, u, v
