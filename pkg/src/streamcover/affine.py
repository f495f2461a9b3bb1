"""Finite fields and the affine point-line incidence structure over them.

Supported orders: primes (modular arithmetic) and 2^k for k <= 8
(polynomial arithmetic modulo a fixed irreducible polynomial).  The
incidence structure on q^2 points has q(q+1) lines falling into q+1
parallel classes ("angles") of q lines each.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

# Irreducible polynomials over GF(2), bitmask includes the x^k term.
_IRREDUCIBLE = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011011,
}


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class GaloisField:
    """Arithmetic over GF(q) with elements encoded as ints in [0, q)."""

    def __init__(self, q: int):
        if _is_prime(q):
            self.q = q
            self.char2 = False
        elif q >= 2 and q & (q - 1) == 0:
            k = q.bit_length() - 1
            if k not in _IRREDUCIBLE:
                raise ValueError(f"GF(2^{k}) not tabled (k must be <= 8)")
            self.q = q
            self.char2 = True
            self._poly = _IRREDUCIBLE[k]
            self._k = k
        else:
            raise ValueError(f"unsupported field order {q} (prime or 2^k with k <= 8)")

    def elements(self) -> range:
        return range(self.q)

    def add(self, a: int, b: int) -> int:
        if self.char2:
            return a ^ b
        return (a + b) % self.q

    def mul(self, a: int, b: int) -> int:
        if not self.char2:
            return (a * b) % self.q
        # carry-less multiply, then reduce modulo the tabled polynomial
        acc = 0
        x = a
        while b:
            if b & 1:
                acc ^= x
            x <<= 1
            b >>= 1
        for shift in range(acc.bit_length() - 1, self._k - 1, -1):
            if acc >> shift & 1:
                acc ^= self._poly << (shift - self._k)
        return acc


@dataclass(frozen=True)
class AffinePlane:
    """Points, lines, and the parallel-class partition of the plane.

    Point (x, y) over GF(q) gets id x*q + y.  Lines are ordered
    angle-major: angle a in [0, q) holds the slope-a lines (indexed by
    intercept), angle q holds the vertical lines (indexed by abscissa),
    so line j of angle i has index i*q + j.
    """

    q: int
    lines: tuple[frozenset[int], ...]

    @property
    def n_points(self) -> int:
        return self.q * self.q

    @property
    def n_angles(self) -> int:
        return self.q + 1

    def points(self) -> range:
        return range(self.q * self.q)

    def angle_lines(self, i: int) -> tuple[int, ...]:
        if not 0 <= i <= self.q:
            raise ValueError(f"angle index {i} out of range")
        return tuple(range(i * self.q, (i + 1) * self.q))

    def line_index(self, angle: int, j: int) -> int:
        if not 0 <= j < self.q:
            raise ValueError(f"line index {j} out of range")
        return angle * self.q + j

    def with_lines(self, lines: tuple[frozenset[int], ...]) -> "AffinePlane":
        return replace(self, lines=lines)


def build_affine_plane(q: int) -> AffinePlane:
    """Construct the plane over GF(q): q^2 points, q(q+1) lines, q+1 angles."""
    gf = GaloisField(q)
    lines: list[frozenset[int]] = []
    for a in gf.elements():  # slope classes
        for b in gf.elements():
            lines.append(frozenset(x * q + gf.add(gf.mul(a, x), b) for x in gf.elements()))
    for c in gf.elements():  # the vertical class
        lines.append(frozenset(c * q + y for y in gf.elements()))
    return AffinePlane(q=q, lines=tuple(lines))


def verify_plane(plane: AffinePlane) -> str | None:
    """Exhaustive check of the four incidence properties.

    Returns None when the plane is sound, otherwise a description of the
    first violated property: line sizes, point degrees, unique line
    through two points, and pairwise intersections (parallel iff same
    angle, otherwise exactly one common point).
    """
    q = plane.q
    if len(plane.lines) != q * (q + 1):
        return f"expected {q * (q + 1)} lines, found {len(plane.lines)}"
    for idx, line in enumerate(plane.lines):
        if len(line) != q:
            return f"line {idx} has {len(line)} points, expected {q}"
        for p in line:
            if not 0 <= p < q * q:
                return f"line {idx} contains out-of-range point {p}"
    degree: dict[int, int] = {p: 0 for p in plane.points()}
    for line in plane.lines:
        for p in line:
            degree[p] += 1
    for p, deg in degree.items():
        if deg != q + 1:
            return f"point {p} lies on {deg} lines, expected {q + 1}"
    lines_of: dict[int, list[int]] = {p: [] for p in plane.points()}
    for idx, line in enumerate(plane.lines):
        for p in line:
            lines_of[p].append(idx)
    points = list(plane.points())
    for i, p in enumerate(points):
        set_p = set(lines_of[p])
        for p2 in points[i + 1 :]:
            common = set_p.intersection(lines_of[p2])
            if len(common) != 1:
                return f"points {p},{p2} share {len(common)} lines, expected 1"
    n_lines = len(plane.lines)
    for i in range(n_lines):
        for j in range(i + 1, n_lines):
            inter = len(plane.lines[i] & plane.lines[j])
            same_angle = i // q == j // q
            if same_angle and inter != 0:
                return f"parallel lines {i},{j} intersect in {inter} points"
            if not same_angle and inter != 1:
                return f"lines {i},{j} from different angles intersect in {inter} points"
    return None
