"""The compact genus-2 surface as a quotient of the disc.

The fundamental domain is the regular octagon centered at 0 with interior
angle pi/4 at every vertex; opposite sides are identified by hyperbolic
translations.  Side k (1-based, outward direction (k-1)*pi/4) is mapped onto
side k+4 by generator g_k, and g_{k+4} = g_k^{-1}.  Reduction into the
domain and homotopy-class tracking both work off the Dirichlet inequalities
dist(z, 0) <= dist(z, g(0)) for the eight neighbor translates g(0).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .hypgeo import (
    DiscPoint,
    GeometryError,
    MobiusMap,
    dist_P,
    mobius_identity,
    mobius_point_chart,
    mobius_translation,
)

__all__ = [
    "DeckWord",
    "FuchsianGroup",
    "SurfaceError",
    "SegmentTooLongError",
    "build_genus2",
    "locate",
    "track",
]

# each tracked segment must stay below half the injectivity radius so that
# the crossing sequence is unambiguous
TRACK_GUARD = 0.1

# membership slack: points within this of a side count as inside, ties
# resolved by the smallest side index
_SIDE_TOL = 1e-12

_MAX_REDUCTION_STEPS = 10**6


class SurfaceError(RuntimeError):
    """Geometry bug guard: reduction failed to terminate."""


class SegmentTooLongError(ValueError):
    """A tracked path segment exceeds the injectivity-radius guard."""

    def __init__(self, index: int, length: float):
        self.index = index
        self.length = length
        super().__init__(
            f"path segment {index} has hyperbolic length {length:.6g} "
            f">= {TRACK_GUARD}; sample finer or allow subdivision"
        )


def reduce_letters(letters) -> tuple:
    """Freely reduce a letter sequence, cancelling adjacent (k, -k) pairs."""
    out = []
    for l in letters:
        if out and out[-1] == -l:
            out.pop()
        else:
            out.append(int(l))
    return tuple(out)


@dataclass(frozen=True)
class DeckWord:
    """Reduced sequence of signed generator indices; leftmost letter is the
    outermost map, so evaluate([2, 1]) = g2 o g1."""

    letters: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", reduce_letters(self.letters))
        for l in self.letters:
            if not (1 <= abs(l) <= 4):
                raise ValueError(f"letter {l} outside the canonical range 1..4")

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: "DeckWord") -> "DeckWord":
        """Concatenation: (self * other) evaluates to self o other."""
        return DeckWord(self.letters + other.letters)

    def inverse(self) -> "DeckWord":
        return DeckWord(tuple(-l for l in reversed(self.letters)))

    def evaluate(self, group: "FuchsianGroup") -> MobiusMap:
        m = mobius_identity()
        for l in self.letters:
            m = m * group.generator(l)
        return m


@dataclass(frozen=True)
class FuchsianGroup:
    """Side-pairing data of the genus-2 octagon group."""

    generators: list          # 8 MobiusMap, g1..g8 with g_{k+4} = g_k^-1
    octagon: list             # 8 sides as (DiscPoint, DiscPoint) endpoint pairs
    circumradius: float
    inradius: float = field(repr=False, default=0.0)
    neighbors: tuple = field(repr=False, default=())   # q_j = hat_g_j(0), complex
    relator: DeckWord = field(repr=False, default_factory=DeckWord)

    def generator(self, letter: int) -> MobiusMap:
        """Generator for a signed letter: +k -> g_k, -k -> g_k^{-1}."""
        if letter > 0:
            return self.generators[letter - 1]
        return self.generators[-letter + 3]

    def neighbor_letter(self, side: int) -> int:
        """Signed letter of the map hat_g_side with hat_g_side(F) the
        neighbor tile across `side` (1-based)."""
        j = side + 4 if side <= 4 else side - 4
        return j if j <= 4 else -(j - 4)

    def side_violations(self, z: complex):
        """S_j(z) = |z - q_j|^2 - |z|^2 (1 - |q_j|^2) for the 8 sides;
        z is inside the closed domain iff all S_j >= 0 (up to the tie slack)."""
        zz = abs(z) ** 2
        return [abs(z - q) ** 2 - zz * (1.0 - abs(q) ** 2) for q in self.neighbors]

    def contains(self, z: complex) -> bool:
        return min(self.side_violations(z)) >= -_SIDE_TOL

    def relator_residual(self) -> float:
        """Distance of the relator image from +-identity in coefficients."""
        m = self.relator.evaluate(self)
        return min(abs(m.a - 1.0) + abs(m.b), abs(m.a + 1.0) + abs(m.b))

    def export_text(self) -> str:
        """Coefficient dump of the 8 generators, 17 significant digits."""
        lines = ["# generator a_re a_im b_re b_im"]
        for k, g in enumerate(self.generators, start=1):
            lines.append(
                f"g{k} {g.a.real:.17g} {g.a.imag:.17g} {g.b.real:.17g} {g.b.imag:.17g}"
            )
        return "\n".join(lines) + "\n"


def _first_violated_side(group: FuchsianGroup, z: complex):
    """Smallest side index whose Dirichlet inequality z violates, or None."""
    for j, s in enumerate(group.side_violations(z), start=1):
        if s < -_SIDE_TOL:
            return j
    return None


def locate(z, group: FuchsianGroup):
    """Reduce a disc point into the fundamental octagon.

    Returns (representative, word) with z = word.evaluate(group)(rep) and the
    representative inside the closed domain.  Deterministic: violated sides
    are processed in increasing index order.
    """
    w = z.z if isinstance(z, DiscPoint) else complex(z)
    letters = []
    for _ in range(_MAX_REDUCTION_STEPS):
        j = _first_violated_side(group, w)
        if j is None:
            rep = DiscPoint(w.real, w.imag)
            return rep, DeckWord(tuple(letters))
        letter = group.neighbor_letter(j)
        w = group.generator(-letter)(w)
        letters.append(letter)
    raise SurfaceError("fundamental-domain reduction did not terminate")


def _geodesic_subdivide(z0: complex, z1: complex, pieces: int):
    """Points subdividing the geodesic segment [z0, z1] (excluding z0)."""
    chart = mobius_point_chart(z0)
    inv = chart.inverse()
    xi = inv(z1)
    length = 2.0 * math.atanh(abs(xi))
    if length == 0.0:
        return [z1]
    direction = xi / abs(xi)
    out = []
    for i in range(1, pieces):
        out.append(chart(direction * math.tanh(0.5 * length * i / pieces)))
    out.append(z1)
    return out


def track(path, group: FuchsianGroup, subdivide_long_segments: bool = True) -> DeckWord:
    """Deck word of a lifted path's homotopy class rel endpoints.

    Built incrementally by side-crossing detection.  Segments longer than the
    injectivity guard are subdivided along their connecting geodesic (exact
    for sampler output, whose displacements are geodesic jumps); pass
    subdivide_long_segments=False to get a SegmentTooLongError instead.

    Satisfies track(head + tail) = (track(tail) * track(head)).reduced.
    """
    points = [p.z if isinstance(p, DiscPoint) else complex(p) for p in path.points]
    if not points:
        return DeckWord()
    _, start_word = locate(points[0], group)
    letters = list(start_word.letters)
    inv_transform = start_word.evaluate(group).inverse()
    for i in range(1, len(points)):
        z_prev, z_next = points[i - 1], points[i]
        seg = dist_P(z_prev, z_next)
        if seg >= TRACK_GUARD:
            if not subdivide_long_segments:
                raise SegmentTooLongError(i - 1, seg)
            pieces = int(math.ceil(seg / (0.5 * TRACK_GUARD)))
            substeps = _geodesic_subdivide(z_prev, z_next, pieces)
        else:
            substeps = [z_next]
        for w in substeps:
            rep = inv_transform(w)
            for _ in range(_MAX_REDUCTION_STEPS):
                j = _first_violated_side(group, rep)
                if j is None:
                    break
                letter = group.neighbor_letter(j)
                rep = group.generator(-letter)(rep)
                if letters and letters[-1] == -letter:
                    letters.pop()
                else:
                    letters.append(letter)
                inv_transform = group.generator(-letter) * inv_transform
            else:
                raise SurfaceError("tracking reduction did not terminate")
    end_word = DeckWord(tuple(letters))
    return end_word * start_word.inverse()


def _derive_relator(group: FuchsianGroup) -> DeckWord:
    """Vertex-cycle relator, read off numerically by probing the eight tiles
    around the vertex at angle pi/8."""
    c = group.circumradius
    vertex = math.tanh(0.5 * c) * cmath.exp(1j * math.pi / 8.0)
    chart = mobius_point_chart(DiscPoint(vertex.real, vertex.imag))
    inward = cmath.phase(-vertex)
    eps = math.tanh(0.5 * 0.05)
    tiles = []
    for i in range(9):
        # clockwise probes, one per tile in the vertex star
        alpha = inward - (i + 0.0) * math.pi / 4.0
        probe = chart(DiscPoint.from_complex(eps * cmath.exp(1j * alpha)))
        _, word = locate(probe, group)
        tiles.append(word.evaluate(group))
    relator_letters = []
    for i in range(8):
        # gamma_{i+1} = gamma_i o n_i; adjacent tiles share a side, so the
        # step element n_i must be one of the eight generators
        step = tiles[i].inverse() * tiles[i + 1]
        letter = None
        for cand in (1, 2, 3, 4, -1, -2, -3, -4):
            gc = group.generator(cand)
            err = min(
                abs(step.a - gc.a) + abs(step.b - gc.b),
                abs(step.a + gc.a) + abs(step.b + gc.b),
            )
            if err < 1e-9:
                letter = cand
                break
        if letter is None:
            raise SurfaceError(f"vertex walk step {i} is not a single generator")
        relator_letters.append(letter)
    word = DeckWord(tuple(relator_letters))
    if len(word.letters) != 8:
        raise SurfaceError(f"vertex cycle reduced unexpectedly: {word.letters}")
    return word


def build_genus2() -> FuchsianGroup:
    """Construct the octagon group.

    The circumradius is the unique root of the vertex-angle condition
    (interior angle pi/4), c = acosh(cot^2(pi/8)); the inradius follows as
    acosh(cot(pi/8)) and every side pairing is a translation of length twice
    the inradius.
    """
    cot = 1.0 / math.tan(math.pi / 8.0)
    circumradius = math.acosh(cot * cot)
    inradius = math.acosh(cot)

    generators = []
    for k in range(1, 5):
        # g_k maps side k onto side k+4: translate along the inward axis
        direction = (k - 1) / 8.0 + 0.5
        generators.append(mobius_translation(direction, 2.0 * inradius))
    for k in range(4):
        generators.append(generators[k].inverse())

    rv = math.tanh(0.5 * circumradius)
    vertices = [rv * cmath.exp(1j * (2 * j + 1) * math.pi / 8.0) for j in range(8)]
    octagon = []
    for k in range(1, 9):
        a = vertices[(k - 2) % 8]
        b = vertices[(k - 1) % 8]
        octagon.append((DiscPoint(a.real, a.imag), DiscPoint(b.real, b.imag)))

    neighbors = tuple(
        math.tanh(inradius) * cmath.exp(1j * (j - 1) * math.pi / 4.0) for j in range(1, 9)
    )
    group = FuchsianGroup(
        generators=generators,
        octagon=octagon,
        circumradius=circumradius,
        inradius=inradius,
        neighbors=neighbors,
    )
    relator = _derive_relator(group)
    return FuchsianGroup(
        generators=generators,
        octagon=octagon,
        circumradius=circumradius,
        inradius=inradius,
        neighbors=neighbors,
        relator=relator,
    )
