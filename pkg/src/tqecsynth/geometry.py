"""Three-dimensional defect geometry generated from the matrix representation.

Coordinates are lattice units: primal unit-cell centres have all-odd
coordinates, dual centres all-even, and adjacent cells are two units apart.
Each matrix row becomes a primal defect pair running along the t axis; each
CNOT column becomes a closed dual loop in a constant-t plane that encircles
the inner strands of its control and target rows and detours around any row
between them.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Sequence

from . import matrix as mx
from .circuit import InitBasis
from .matrix import MatrixRep

if TYPE_CHECKING:
    from .scheduling import BoxInstance


class GeometryError(ValueError):
    pass


class SegmentKind(Enum):
    PRIMAL = "primal"
    DUAL = "dual"


@dataclass(frozen=True, order=True)
class Coord:
    i: int
    j: int
    t: int

    def shifted(self, di: int = 0, dj: int = 0, dt: int = 0) -> "Coord":
        return Coord(self.i + di, self.j + dj, self.t + dt)

    def as_list(self) -> list[int]:
        return [self.i, self.j, self.t]

    @property
    def odd_count(self) -> int:
        return (self.i & 1) + (self.j & 1) + (self.t & 1)


@dataclass(frozen=True)
class Segment:
    kind: SegmentKind
    a: Coord
    b: Coord

    def __post_init__(self) -> None:
        diffs = sum(1 for u, v in zip(self.a.as_list(), self.b.as_list()) if u != v)
        if diffs != 1:
            raise GeometryError(f"segment must be axis-aligned and non-degenerate: {self.a}->{self.b}")

    @property
    def axis(self) -> str:
        if self.a.i != self.b.i:
            return "i"
        return "j" if self.a.j != self.b.j else "t"

    def interval(self, axis: str) -> tuple[int, int]:
        lo, hi = getattr(self.a, axis), getattr(self.b, axis)
        return (lo, hi) if lo <= hi else (hi, lo)

    def length_cells(self) -> int:
        lo, hi = self.interval(self.axis)
        return (hi - lo) // 2 + 1

    def shifted(self, di: int = 0, dj: int = 0, dt: int = 0) -> "Segment":
        return Segment(self.kind, self.a.shifted(di, dj, dt), self.b.shifted(di, dj, dt))


@dataclass(frozen=True)
class Defect:
    """A connected chain of same-kind segments; ``closed`` chains form loops."""

    kind: SegmentKind
    segments: tuple[Segment, ...]
    closed: bool
    diameter: int = 1  # cells

    def __post_init__(self) -> None:
        if not self.segments:
            raise GeometryError("defect needs at least one segment")
        if any(s.kind is not self.kind for s in self.segments):
            raise GeometryError("a defect cannot mix segment kinds")
        for prev, cur in zip(self.segments, self.segments[1:]):
            if prev.b != cur.a:
                raise GeometryError("defect segments must chain end to end")
        if self.closed and self.segments[-1].b != self.segments[0].a:
            raise GeometryError("closed defect must return to its start")

    def vertices(self) -> list[Coord]:
        pts = [self.segments[0].a]
        pts.extend(s.b for s in self.segments)
        return pts

    def shifted(self, di: int = 0, dj: int = 0, dt: int = 0) -> "Defect":
        return replace(self, segments=tuple(s.shifted(di, dj, dt) for s in self.segments))


class PinRole(Enum):
    INJECTION = "injection"
    IO = "io"
    BOX_OUTPUT = "box_output"
    GHOST = "ghost"


@dataclass(frozen=True)
class Pin:
    coord: Coord
    kind: SegmentKind
    role: PinRole
    state: InitBasis | None = None  # A or Y for injection/box pins

    def shifted(self, di: int = 0, dj: int = 0, dt: int = 0) -> "Pin":
        return replace(self, coord=self.coord.shifted(di, dj, dt))


@dataclass(frozen=True)
class Injection:
    """An injected ancilla state: two pyramid defects meeting at ``vertex``.

    ``vertex`` uses lattice-vertex coordinates (one odd, two even); the pins
    mark where the qubit's defect pair attaches.
    """

    vertex: Coord
    state: InitBasis
    pins: tuple[Pin, Pin]
    qubit_row: int

    def shifted(self, di: int = 0, dj: int = 0, dt: int = 0) -> "Injection":
        return Injection(self.vertex.shifted(di, dj, dt), self.state,
                         (self.pins[0].shifted(di, dj, dt), self.pins[1].shifted(di, dj, dt)),
                         self.qubit_row)


class PortRole(Enum):
    INPUT = "input"
    OUTPUT = "output"


class PortBasis(Enum):
    Z = "z"
    X = "x"
    OPEN = "open"
    INJECT_A = "inject_a"
    INJECT_Y = "inject_y"


class CapShape(Enum):
    """Boundary geometry families from the init/measure template set."""

    SOLID = "solid"      # single bridging defect segment
    SPLIT = "split"      # bridging segment split at a shared lattice vertex
    CONFIG = "config"    # configurable input/output structure
    INJECT = "inject"    # pyramid pair meeting at the injection vertex


@dataclass(frozen=True)
class PortTemplate:
    shape: CapShape
    mirrored: bool  # measurement-side templates mirror the init geometry


def io_geometry(role: PortRole, basis: PortBasis,
                qubit_kind: SegmentKind = SegmentKind.PRIMAL) -> PortTemplate:
    """Boundary template for one port; dual qubits swap the Z and X shapes."""
    mirrored = role is PortRole.OUTPUT
    if basis in (PortBasis.INJECT_A, PortBasis.INJECT_Y):
        if role is PortRole.OUTPUT:
            raise GeometryError("state injection is an input-side structure")
        if qubit_kind is not SegmentKind.PRIMAL:
            raise GeometryError("injections are supported on primal qubits only")
        return PortTemplate(CapShape.INJECT, mirrored=False)
    if basis is PortBasis.OPEN:
        return PortTemplate(CapShape.CONFIG, mirrored)
    solid_for_z = qubit_kind is SegmentKind.PRIMAL
    if basis is PortBasis.Z:
        shape = CapShape.SOLID if solid_for_z else CapShape.SPLIT
    else:
        shape = CapShape.SPLIT if solid_for_z else CapShape.SOLID
    return PortTemplate(shape, mirrored)


@dataclass(frozen=True)
class IOPort:
    role: PortRole
    basis: PortBasis
    pins: tuple[Pin, Pin]
    qubit_row: int
    template: PortTemplate

    def shifted(self, di: int = 0, dj: int = 0, dt: int = 0) -> "IOPort":
        return replace(self, pins=(self.pins[0].shifted(di, dj, dt),
                                   self.pins[1].shifted(di, dj, dt)))


@dataclass(frozen=True)
class LayoutParams:
    """Placement constants for the single-layer geometry.

    The defaults give every defect a one-cell diameter with a four-cell gap
    between pair members (the 4*d_f spacing for distance-4 correction) and
    keep even-coordinate corridors free for the dual CNOT loops.
    """

    i_inner: int = 1
    i_outer: int = 9
    j_pitch: int = 6
    t_pitch: int = 6
    t_in: int = 1
    j_base: int = 1

    def __post_init__(self) -> None:
        if self.i_inner % 2 == 0 or self.i_outer % 2 == 0:
            raise GeometryError("strand i coordinates must be odd")
        if self.i_outer < self.i_inner + 4:
            raise GeometryError("outer strand must sit at least 4 units beyond inner")
        if self.j_pitch % 2 or self.t_pitch % 2:
            raise GeometryError("pitches must be even")
        if self.t_in % 2 == 0 or self.j_base % 2 == 0:
            raise GeometryError("t_in and j_base must be odd")
        if self.t_in < 1:
            raise GeometryError("t_in must leave room for the injection vertex plane")

    def row_j(self, row: int) -> int:
        return self.j_base + self.j_pitch * row

    def braid_t(self, column: int) -> int:
        return self.t_in + 1 + (column + 1) * self.t_pitch

    def t_out(self, cnot_count: int) -> int:
        return self.t_in + (cnot_count + 1) * self.t_pitch

    @property
    def vertex_i(self) -> int:
        mid = (self.i_inner + self.i_outer) // 2
        return mid - (mid % 2)


@dataclass(frozen=True)
class Geometry:
    defects: tuple[Defect, ...]
    pins: tuple[Pin, ...]
    injections: tuple[Injection, ...]
    ioports: tuple[IOPort, ...]
    layout: LayoutParams
    boxes: tuple["BoxInstance", ...] = ()
    connections: tuple[Defect, ...] = ()

    @property
    def segments(self) -> tuple[Segment, ...]:
        out: list[Segment] = []
        for d in self.defects:
            out.extend(d.segments)
        for c in self.connections:
            out.extend(c.segments)
        return tuple(out)

    def primal_defects(self) -> list[Defect]:
        return [d for d in self.defects if d.kind is SegmentKind.PRIMAL]

    def dual_defects(self) -> list[Defect]:
        return [d for d in self.defects if d.kind is SegmentKind.DUAL]

    def shifted(self, di: int = 0, dj: int = 0, dt: int = 0) -> "Geometry":
        if di % 2 or dj % 2 or dt % 2:
            raise GeometryError("geometry translation must preserve parity")
        return Geometry(
            defects=tuple(d.shifted(di, dj, dt) for d in self.defects),
            pins=tuple(p.shifted(di, dj, dt) for p in self.pins),
            injections=tuple(s.shifted(di, dj, dt) for s in self.injections),
            ioports=tuple(p.shifted(di, dj, dt) for p in self.ioports),
            layout=self.layout,
            boxes=tuple(b.shifted(di, dj, dt) for b in self.boxes),
            connections=tuple(c.shifted(di, dj, dt) for c in self.connections),
        )


_INPUT_BASIS = {
    mx.INPUT_OPEN: PortBasis.OPEN,
    mx.INIT_ZERO: PortBasis.Z,
    mx.INIT_PLUS: PortBasis.X,
}

_OUTPUT_BASIS = {
    mx.OUTPUT_OPEN: PortBasis.OPEN,
    mx.MEAS_Z: PortBasis.Z,
    mx.MEAS_X: PortBasis.X,
    mx.MEAS_A: PortBasis.Z,   # protocol measurement of an |A> row
    mx.MEAS_Y: PortBasis.X,   # protocol measurement of a |Y> row
}

_INJECT_STATE = {mx.INIT_A: InitBasis.A, mx.INIT_Y: InitBasis.Y}


def cnot_braid_template(control_row: int, target_row: int, column: int,
                        params: LayoutParams) -> list[Segment]:
    """Closed dual loop for one CNOT column.

    The loop lives in the even t-plane of its column and encircles exactly
    the inner strands of the control and target rows; for non-adjacent rows
    it bridges over the strands in between.
    """
    if control_row == target_row:
        raise GeometryError("CNOT rows must be distinct")
    t = params.braid_t(column)
    lo_row, hi_row = sorted((control_row, target_row))
    j_lo = params.row_j(lo_row)
    j_hi = params.row_j(hi_row)
    base = params.i_inner - 1
    mid = params.i_inner + 1
    top = params.i_inner + 3

    if hi_row - lo_row == 1:
        corners = [
            (base, j_lo - 1), (mid, j_lo - 1), (mid, j_hi + 1), (base, j_hi + 1),
        ]
    else:
        corners = [
            (base, j_lo - 1), (top, j_lo - 1), (top, j_hi + 1), (base, j_hi + 1),
            (base, j_hi - 1), (mid, j_hi - 1), (mid, j_lo + 1), (base, j_lo + 1),
        ]
    pts = [Coord(i, j, t) for i, j in corners]
    return [Segment(SegmentKind.DUAL, a, b) for a, b in zip(pts, pts[1:] + pts[:1])]


def generate_geometry(matrix: MatrixRep, params: LayoutParams | None = None) -> Geometry:
    """Build the single-layer geometry for an ICM matrix."""
    params = params or LayoutParams()
    n = matrix.qubit_count
    k = matrix.cnot_count
    t_in = params.t_in
    t_out = params.t_out(k)

    defects: list[Defect] = []
    pins: list[Pin] = []
    injections: list[Injection] = []
    ports: list[IOPort] = []

    for row in range(n):
        j = params.row_j(row)
        in_code = int(matrix.cells[row, 0])
        out_code = int(matrix.cells[row, -1])
        if in_code not in mx.INPUT_CODES:
            raise GeometryError(f"row {row} has no input code (found {in_code})")
        if out_code not in mx.OUTPUT_CODES:
            raise GeometryError(f"row {row} has no output code (found {out_code})")

        for i in (params.i_inner, params.i_outer):
            strand = Segment(SegmentKind.PRIMAL, Coord(i, j, t_in), Coord(i, j, t_out))
            defects.append(Defect(SegmentKind.PRIMAL, (strand,), closed=False))

        in_pins = (
            Pin(Coord(params.i_inner, j, t_in), SegmentKind.PRIMAL, PinRole.IO),
            Pin(Coord(params.i_outer, j, t_in), SegmentKind.PRIMAL, PinRole.IO),
        )
        out_pins = (
            Pin(Coord(params.i_inner, j, t_out), SegmentKind.PRIMAL, PinRole.IO),
            Pin(Coord(params.i_outer, j, t_out), SegmentKind.PRIMAL, PinRole.IO),
        )

        if in_code in _INJECT_STATE:
            state = _INJECT_STATE[in_code]
            inj_pins = tuple(
                replace(p, role=PinRole.INJECTION, state=state) for p in in_pins)
            # the pyramid tips meet on the first dual plane beside the pins
            vertex = Coord(params.vertex_i, j, t_in + 1)
            injections.append(Injection(vertex, state, inj_pins, row))
            pins.extend(inj_pins)
        else:
            basis = _INPUT_BASIS[in_code]
            ports.append(IOPort(PortRole.INPUT, basis, in_pins, row,
                                io_geometry(PortRole.INPUT, basis)))
            pins.extend(in_pins)

        out_basis = _OUTPUT_BASIS[out_code]
        ports.append(IOPort(PortRole.OUTPUT, out_basis, out_pins, row,
                            io_geometry(PortRole.OUTPUT, out_basis)))
        pins.extend(out_pins)

    for col in range(k):
        ctrl, tgt = matrix.column_cnot(col)
        loop = cnot_braid_template(ctrl, tgt, col, params)
        defects.append(Defect(SegmentKind.DUAL, tuple(loop), closed=True))

    return Geometry(
        defects=tuple(defects),
        pins=tuple(pins),
        injections=tuple(injections),
        ioports=tuple(ports),
        layout=params,
    )


@dataclass(frozen=True)
class GeometryDiagnostic:
    rule: str
    message: str


def validate_parity(geometry: Geometry) -> list[GeometryDiagnostic]:
    """Parity conformance of every segment endpoint and injection vertex."""
    out: list[GeometryDiagnostic] = []
    for seg in geometry.segments:
        want = 3 if seg.kind is SegmentKind.PRIMAL else 0
        for pt in (seg.a, seg.b):
            if pt.odd_count != want:
                out.append(GeometryDiagnostic(
                    "segment-parity",
                    f"{seg.kind.value} endpoint {pt} must have "
                    f"{'all-odd' if want else 'all-even'} coordinates"))
            if min(pt.as_list()) < 0:
                out.append(GeometryDiagnostic(
                    "negative-coordinate", f"endpoint {pt} has a negative coordinate"))
    for inj in geometry.injections:
        if inj.vertex.odd_count != 1:
            out.append(GeometryDiagnostic(
                "vertex-parity",
                f"injection vertex {inj.vertex} must have exactly one odd coordinate"))
    return out


def _strand_puncture(strand: Sequence[Segment], t: int) -> tuple[int, int] | None:
    for seg in strand:
        if seg.axis != "t":
            continue
        lo, hi = seg.interval("t")
        if lo <= t <= hi:
            return seg.a.i, seg.a.j
    return None


def linking_number(loop: Sequence[Segment], strand: Sequence[Segment]) -> int:
    """Winding number of a planar constant-t loop around a t-running strand."""
    ts = {seg.a.t for seg in loop} | {seg.b.t for seg in loop}
    if len(ts) != 1:
        raise GeometryError("linking_number requires a planar constant-t loop")
    t = ts.pop()
    for prev, cur in zip(loop, tuple(loop[1:]) + (loop[0],)):
        if prev.b != cur.a:
            raise GeometryError("loop must be a closed chain")
    point = _strand_puncture(strand, t)
    if point is None:
        return 0
    px, py = point

    wn = 0
    for seg in loop:
        x1, y1 = seg.a.i, seg.a.j
        x2, y2 = seg.b.i, seg.b.j
        if (px, py) == (x1, y1) or (px, py) == (x2, y2):
            raise GeometryError("strand punctures the loop boundary")
        if y1 == y2 == py and min(x1, x2) < px < max(x1, x2):
            raise GeometryError("strand punctures the loop boundary")
        if x1 == x2 == px and min(y1, y2) < py < max(y1, y2):
            raise GeometryError("strand punctures the loop boundary")
        cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
        if y1 <= py < y2 and cross > 0:
            wn += 1
        elif y2 <= py < y1 and cross < 0:
            wn -= 1
    return wn


def _boxes_of(seg: Segment) -> tuple[tuple[int, int], ...]:
    return tuple(seg.interval(ax) for ax in ("i", "j", "t"))


def _intervals_overlap(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


def segment_overlaps(geometry: Geometry) -> list[tuple[Segment, Segment]]:
    """Same-kind segment pairs that touch anywhere except at legal shared joints."""
    conflicts: list[tuple[Segment, Segment]] = []
    indexed: list[tuple[int, Segment, set[Coord]]] = []
    for di, defect in enumerate(geometry.defects + geometry.connections):
        verts = defect.vertices()
        joints = set(verts[1:-1])
        if defect.closed:
            joints.add(verts[0])
        for seg in defect.segments:
            indexed.append((di, seg, joints))
    for idx, (da, sa, ja) in enumerate(indexed):
        for db, sb, jb in indexed[idx + 1:]:
            if sa.kind is not sb.kind:
                continue
            boxes_a, boxes_b = _boxes_of(sa), _boxes_of(sb)
            if not all(_intervals_overlap(a, b) for a, b in zip(boxes_a, boxes_b)):
                continue
            if da == db:
                meet = [
                    Coord(i, j, t)
                    for i in range(max(boxes_a[0][0], boxes_b[0][0]), min(boxes_a[0][1], boxes_b[0][1]) + 1)
                    for j in range(max(boxes_a[1][0], boxes_b[1][0]), min(boxes_a[1][1], boxes_b[1][1]) + 1)
                    for t in range(max(boxes_a[2][0], boxes_b[2][0]), min(boxes_a[2][1], boxes_b[2][1]) + 1)
                ]
                if all(p in ja for p in meet):
                    continue
            conflicts.append((sa, sb))
    return conflicts
