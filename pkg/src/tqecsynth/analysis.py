"""Code-distance and volume metrics, layer slicing, and the hardware loop.

Distances count unit cells: a ring around a defect of diameter d_f has
length 4*d_f, a chain between defects separated by s cells has length s+1,
and the code distance is the minimum of the two. Volumes are measured in
code-distance-independent volume units of 5^3 cubes, where a cube holds
d^3 primal cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .geometry import CapShape, Coord, Defect, Geometry, Segment


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class DistanceReport:
    min_defect_diameter: int            # d_f, cells
    min_separation: int | None          # cells between closest same-kind defects
    ring_length: int
    chain_length: int | None
    code_distance: int

    @staticmethod
    def from_params(d_f: int, separation: int | None) -> "DistanceReport":
        ring = 4 * d_f
        chain = separation + 1 if separation is not None else None
        dist = ring if chain is None else min(ring, chain)
        return DistanceReport(d_f, separation, ring, chain, dist)


def code_distance(d_f: int, separation: int) -> int:
    """min(ring 4*d_f, chain separation+1)."""
    return DistanceReport.from_params(d_f, separation).code_distance


def _segment_gap(a: Segment, b: Segment) -> int:
    gap = 0
    for axis in ("i", "j", "t"):
        (alo, ahi), (blo, bhi) = a.interval(axis), b.interval(axis)
        gap += max(0, blo - ahi, alo - bhi)
    return gap


def _defect_gap_cells(a: Defect, b: Defect) -> int:
    best = min(_segment_gap(sa, sb) for sa in a.segments for sb in b.segments)
    return best // 2


def min_code_distance(geometry: Geometry) -> DistanceReport:
    """Measure d_f and the closest same-kind defect gap of a geometry.

    Touching same-kind defects (connections joined onto qubit strands) act
    as one logical defect; separation is measured between distinct
    connected components only.
    """
    defects = list(geometry.defects) + list(geometry.connections)
    if not defects:
        raise AnalysisError("geometry has no defects")
    d_f = min(d.diameter for d in defects)

    parent = list(range(len(defects)))

    def find(k: int) -> int:
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    gaps: dict[tuple[int, int], int] = {}
    for idx, a in enumerate(defects):
        for jdx in range(idx + 1, len(defects)):
            b = defects[jdx]
            if a.kind is not b.kind:
                continue
            gap = _defect_gap_cells(a, b)
            gaps[(idx, jdx)] = gap
            if gap == 0:
                parent[find(idx)] = find(jdx)

    separation: int | None = None
    for (idx, jdx), gap in gaps.items():
        if find(idx) == find(jdx):
            continue
        if separation is None or gap < separation:
            separation = gap
    return DistanceReport.from_params(d_f, separation)


@dataclass(frozen=True)
class BBox:
    lo: Coord
    hi: Coord

    def cells(self) -> tuple[int, int, int]:
        return (
            (self.hi.i - self.lo.i) // 2 + 1,
            (self.hi.j - self.lo.j) // 2 + 1,
            (self.hi.t - self.lo.t) // 2 + 1,
        )


def bounding_box(geometry: Geometry) -> BBox:
    """Extents over segments, injection vertices, pins, and box regions."""
    points: list[tuple[int, int, int]] = []
    for seg in geometry.segments:
        points.append((seg.a.i, seg.a.j, seg.a.t))
        points.append((seg.b.i, seg.b.j, seg.b.t))
    for inj in geometry.injections:
        points.append((inj.vertex.i, inj.vertex.j, inj.vertex.t))
    for pin in geometry.pins:
        points.append((pin.coord.i, pin.coord.j, pin.coord.t))
    for box in geometry.boxes:
        for axis_pt in (tuple(box.extent(ax)[0] for ax in "ijt"),
                        tuple(box.extent(ax)[1] for ax in "ijt")):
            points.append(axis_pt)
    if not points:
        raise AnalysisError("geometry is empty")
    los = tuple(min(p[k] for p in points) for k in range(3))
    his = tuple(max(p[k] for p in points) for k in range(3))
    return BBox(Coord(*los), Coord(*his))


@dataclass(frozen=True)
class VolumeReport:
    cube_side: int                      # d, cells per cube edge
    bbox_in_cubes: tuple[int, int, int]
    units_per_axis: tuple[int, int, int]
    volume_units: int


def lattice_cells_for(geometry: Geometry) -> tuple[int, int, int]:
    """Smallest origin-anchored lattice extent (in cells) covering a geometry."""
    hi = bounding_box(geometry).hi
    return (max(1, math.ceil(hi.i / 2)), max(1, math.ceil(hi.j / 2)),
            max(1, math.ceil(hi.t / 2)))


def volume_units(geometry: Geometry, d: int = 1) -> VolumeReport:
    """Tile the bounding box with cubes of side d, then 5^3-cube volume units."""
    if d < 1:
        raise AnalysisError("cube side must be at least 1")
    cells = bounding_box(geometry).cells()
    cubes = tuple(math.ceil(c / d) for c in cells)
    units = tuple(math.ceil(c / 5) for c in cubes)
    return VolumeReport(d, cubes, units, units[0] * units[1] * units[2])


class SiteBasis(Enum):
    X = "x"
    Z = "z"
    INJECTED = "injected"
    IO = "io"          # configurable boundary, left unmeasured


class LayerKind(Enum):
    PRIMAL = "primal"
    DUAL = "dual"


@dataclass(frozen=True)
class Layer:
    """One constant-t slice: every lattice site measures X unless marked."""

    t: int
    kind: LayerKind
    extent: tuple[int, int]                 # inclusive max (i, j) coordinates
    marked: tuple[tuple[tuple[int, int], SiteBasis], ...]

    def basis_at(self, i: int, j: int) -> SiteBasis:
        for (si, sj), basis in self.marked:
            if (si, sj) == (i, j):
                return basis
        return SiteBasis.X

    def sites(self) -> Iterable[tuple[int, int, SiteBasis]]:
        lookup = dict(self.marked)
        for i in range(self.extent[0] + 1):
            for j in range(self.extent[1] + 1):
                yield i, j, lookup.get((i, j), SiteBasis.X)


def _mark_box(marks: dict[tuple[int, int], SiteBasis], i_lo: int, i_hi: int,
              j_lo: int, j_hi: int, basis: SiteBasis, extent: tuple[int, int]) -> None:
    for i in range(max(i_lo, 0), min(i_hi, extent[0]) + 1):
        for j in range(max(j_lo, 0), min(j_hi, extent[1]) + 1):
            marks[(i, j)] = basis


def _segment_cross_section(seg: Segment, t: int) -> tuple[int, int, int, int] | None:
    t_lo, t_hi = seg.interval("t")
    if not t_lo - 1 <= t <= t_hi + 1:
        return None
    i_lo, i_hi = seg.interval("i")
    j_lo, j_hi = seg.interval("j")
    return i_lo - 1, i_hi + 1, j_lo - 1, j_hi + 1


def slice_layers(geometry: Geometry, lattice_cells: tuple[int, int, int]) -> list[Layer]:
    """Slice a geometry into alternating primal (odd t) and dual (even t) layers.

    ``lattice_cells`` is the hosting lattice extent in unit cells and must
    cover the geometry. Sites inside a defect cross-section measure Z,
    injection vertices are marked injected, and configurable IO boundary
    cells stay unmeasured.
    """
    ci, cj, ct = lattice_cells
    if min(ci, cj, ct) < 1:
        raise AnalysisError("lattice extent must be positive")
    extent = (2 * ci, 2 * cj)
    t_max = 2 * ct
    try:
        bbox = bounding_box(geometry)
        if bbox.hi.i > extent[0] or bbox.hi.j > extent[1] or bbox.hi.t > t_max \
                or min(bbox.lo.as_list()) < 0:
            raise AnalysisError("lattice extent smaller than the geometry bounding box")
    except AnalysisError as exc:
        if "empty" not in str(exc):
            raise

    layers: list[Layer] = []
    for t in range(1, t_max):
        kind = LayerKind.PRIMAL if t % 2 else LayerKind.DUAL
        marks: dict[tuple[int, int], SiteBasis] = {}
        for seg in geometry.segments:
            box = _segment_cross_section(seg, t)
            if box is not None:
                _mark_box(marks, *box, SiteBasis.Z, extent)
        for port in geometry.ioports:
            pin_a, pin_b = port.pins
            face_t = pin_a.coord.t
            if not face_t - 1 <= t <= face_t + 1:
                continue
            j = pin_a.coord.j
            i_lo = min(pin_a.coord.i, pin_b.coord.i)
            i_hi = max(pin_a.coord.i, pin_b.coord.i)
            shape = port.template.shape
            if shape is CapShape.CONFIG:
                for pin in (pin_a, pin_b):
                    _mark_box(marks, pin.coord.i - 1, pin.coord.i + 1,
                              j - 1, j + 1, SiteBasis.IO, extent)
            elif shape is CapShape.SOLID:
                _mark_box(marks, i_lo - 1, i_hi + 1, j - 1, j + 1, SiteBasis.Z, extent)
            else:  # SPLIT: bridging segment split at a shared mid vertex
                mid = (i_lo + i_hi) // 2
                mid -= mid % 2
                _mark_box(marks, i_lo - 1, mid - 1, j - 1, j + 1, SiteBasis.Z, extent)
                _mark_box(marks, mid + 1, i_hi + 1, j - 1, j + 1, SiteBasis.Z, extent)
        for inj in geometry.injections:
            pin_a, pin_b = inj.pins
            if abs(t - pin_a.coord.t) <= 1:
                for pin in inj.pins:
                    _mark_box(marks, pin.coord.i - 1, pin.coord.i + 1,
                              pin.coord.j - 1, pin.coord.j + 1, SiteBasis.Z, extent)
            if t == inj.vertex.t:
                marks[(inj.vertex.i, inj.vertex.j)] = SiteBasis.INJECTED
        layers.append(Layer(t, kind, extent, tuple(sorted(marks.items()))))
    return layers


class Op(Enum):
    INIT = "init"
    ENTANGLE = "entangle"
    MEASURE = "measure"


@dataclass(frozen=True)
class Instruction:
    op: Op
    layers: tuple[int, ...]   # indices into the layer list


def execution_schedule(layers: list[Layer]) -> list[Instruction]:
    """Unrolled hardware loop: init/entangle/measure over alternating layers.

    The stream follows the gradual-construction loop: bring up the first
    primal/dual pair, then repeatedly measure the primal layer, bring up
    the next one against the previous dual layer, measure that dual layer,
    and bring up the next dual layer, until the final primal measurement.
    """
    if not layers:
        raise AnalysisError("no layers to schedule")
    for idx, layer in enumerate(layers):
        want = LayerKind.PRIMAL if idx % 2 == 0 else LayerKind.DUAL
        if layer.kind is not want:
            raise AnalysisError(f"layer {idx} must be {want.value}")
    if len(layers) % 2 == 0:
        raise AnalysisError("layer sequence must start and end with primal layers")

    if len(layers) == 1:
        return [Instruction(Op.INIT, (0,)), Instruction(Op.MEASURE, (0,))]

    n = len(layers) // 2  # dual layer count
    p = lambda k: 2 * k
    d = lambda k: 2 * k + 1
    stream = [
        Instruction(Op.INIT, (p(0),)),
        Instruction(Op.INIT, (d(0),)),
        Instruction(Op.ENTANGLE, (p(0), d(0))),
    ]
    for i in range(n):
        stream.append(Instruction(Op.MEASURE, (p(i),)))
        stream.append(Instruction(Op.INIT, (p(i + 1),)))
        stream.append(Instruction(Op.ENTANGLE, (p(i + 1), d(i))))
        stream.append(Instruction(Op.MEASURE, (d(i),)))
        if i + 1 < n:
            stream.append(Instruction(Op.INIT, (d(i + 1),)))
            stream.append(Instruction(Op.ENTANGLE, (d(i + 1), p(i + 1))))
    stream.append(Instruction(Op.MEASURE, (p(n),)))
    return stream
