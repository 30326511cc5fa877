"""Tetrahedral meshes: structured box generation, face topology, ASCII IO.

Boxes are meshed with the Kuhn (Freudenthal) subdivision: each of the n^3
cubes is cut into 6 tetrahedra sharing the same main diagonal, which is
conforming across cube boundaries and uniformly shape-regular under
refinement.  Faces are keyed by their sorted vertex triple; since the
normal-normal trace n.tau n is invariant under n -> -n, sorted keys are all
that face-DOF sharing needs.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTet, NonConformingMesh, ParseError

_PERMS = tuple(itertools.permutations(range(3)))


def _perm_sign(p):
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


@dataclass
class TetMesh:
    """Vertices, tets (positively oriented), and global face topology."""

    vertices: np.ndarray  # (nv, 3)
    tets: np.ndarray  # (nt, 4)
    faces: np.ndarray = field(init=False)  # (nf, 3) sorted vertex ids
    face_tets: np.ndarray = field(init=False)  # (nf, 2), -1 when absent
    face_local: np.ndarray = field(init=False)  # (nf, 2) local face index
    tet_faces: np.ndarray = field(init=False)  # (nt, 4) global face ids
    boundary_face: np.ndarray = field(init=False)  # (nf,) bool
    boundary_vertex: np.ndarray = field(init=False)  # (nv,) bool
    h_t: np.ndarray = field(init=False)  # (nt,)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(np.asarray(self.vertices, dtype=float))
        self.tets = np.ascontiguousarray(np.asarray(self.tets, dtype=np.int64))
        self._orient()
        self._extract_faces()
        v = self.vertices[self.tets]  # (nt, 4, 3)
        d = np.linalg.norm(v[:, :, None, :] - v[:, None, :, :], axis=-1)
        self.h_t = d.reshape(len(self.tets), -1).max(axis=1)

    def _orient(self):
        v = self.vertices[self.tets]
        vol6 = np.linalg.det(v[:, 1:] - v[:, :1])
        h = np.linalg.norm(v[:, :, None, :] - v[:, None, :, :], axis=-1).reshape(len(v), -1).max(axis=1)
        bad = np.abs(vol6) / 6.0 < 1e-14 * h**3
        if bad.any():
            raise DegenerateTet(f"{int(bad.sum())} degenerate tetrahedra (first at index {int(np.argmin(~bad))})")
        flipped = vol6 < 0
        if flipped.any():
            warnings.warn(f"repaired vertex order of {int(flipped.sum())} inverted tetrahedra", stacklevel=3)
            t = self.tets[flipped]
            t[:, [2, 3]] = t[:, [3, 2]]
            self.tets[flipped] = t

    def _extract_faces(self):
        nt = len(self.tets)
        # local face i consists of the three vertices opposite local vertex i
        opp = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])
        all_faces = np.sort(self.tets[:, opp], axis=2).reshape(nt * 4, 3)
        keys, inverse, counts = np.unique(all_faces, axis=0, return_inverse=True, return_counts=True)
        if counts.max() > 2:
            raise NonConformingMesh(f"a face is shared by {int(counts.max())} tetrahedra")
        nf = len(keys)
        self.faces = keys
        self.tet_faces = inverse.reshape(nt, 4)
        self.face_tets = np.full((nf, 2), -1, dtype=np.int64)
        self.face_local = np.full((nf, 2), -1, dtype=np.int8)
        slot = np.zeros(nf, dtype=np.int8)
        for e in range(nt):
            for i in range(4):
                f = self.tet_faces[e, i]
                s = slot[f]
                self.face_tets[f, s] = e
                self.face_local[f, s] = i
                slot[f] = s + 1
        self.boundary_face = counts == 1
        self.boundary_vertex = np.zeros(len(self.vertices), dtype=bool)
        self.boundary_vertex[self.faces[self.boundary_face].ravel()] = True

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_tets(self):
        return len(self.tets)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def h(self):
        return float(self.h_t.max())

    def tet_verts(self):
        """(nt, 4, 3) vertex coordinates per tetrahedron."""
        return self.vertices[self.tets]


@dataclass(frozen=True)
class MeshQualityReport:
    n_vertices: int
    n_tets: int
    n_faces: int
    n_boundary_faces: int
    n_interior_faces: int
    h_min: float
    h_max: float
    max_shape_ratio: float

    def __str__(self):
        return (
            f"vertices {self.n_vertices}, tets {self.n_tets}, faces {self.n_faces} "
            f"({self.n_interior_faces} interior / {self.n_boundary_faces} boundary), "
            f"h in [{self.h_min:.6g}, {self.h_max:.6g}], "
            f"max shape ratio {self.max_shape_ratio:.6g}"
        )


def generate_box(n, bounds=((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))) -> TetMesh:
    """Kuhn mesh of an axis-aligned box with n subdivisions per axis.

    Every cube is split into the 6 tetrahedra spanned by monotone vertex
    paths from its low to its high corner (all cubes use the same diagonal),
    giving (n+1)^3 vertices and 6 n^3 tets.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lo = np.asarray(bounds[0], dtype=float)
    hi = np.asarray(bounds[1], dtype=float)
    if not (hi > lo).all():
        raise ValueError("box bounds must have positive extent")
    axis = [np.linspace(lo[d], hi[d], n + 1) for d in range(3)]
    grid = np.stack(np.meshgrid(*axis, indexing="ij"), axis=-1)
    vertices = grid.reshape(-1, 3)

    def vid(i, j, k):
        return (i * (n + 1) + j) * (n + 1) + k

    tets = []
    steps = np.eye(3, dtype=np.int64)
    for i, j, k in itertools.product(range(n), repeat=3):
        base = np.array([i, j, k])
        for perm in _PERMS:
            path = [base]
            for axis_id in perm:
                path.append(path[-1] + steps[axis_id])
            tet = [vid(*p) for p in path]
            if _perm_sign(perm) < 0:
                tet[2], tet[3] = tet[3], tet[2]
            tets.append(tet)
    return TetMesh(vertices=vertices, tets=np.array(tets, dtype=np.int64))


def quality(mesh: TetMesh) -> MeshQualityReport:
    """Size and shape-regularity summary of a mesh."""
    v = mesh.tet_verts()
    vol = np.abs(np.linalg.det(v[:, 1:] - v[:, :1])) / 6.0
    # |F_i| = 3 |T| |grad l_i|; grads are rows of the inverse edge matrix
    areas = np.empty((mesh.n_tets, 4))
    inv = np.linalg.inv(v[:, 1:] - v[:, :1])
    grads = np.empty((mesh.n_tets, 4, 3))
    grads[:, 1:] = np.swapaxes(inv, 1, 2)
    grads[:, 0] = -grads[:, 1:].sum(axis=1)
    areas = 3.0 * vol[:, None] * np.linalg.norm(grads, axis=2)
    inradius = 3.0 * vol / areas.sum(axis=1)
    ratio = mesh.h_t / (2.0 * inradius)
    nb = int(mesh.boundary_face.sum())
    return MeshQualityReport(
        n_vertices=mesh.n_vertices,
        n_tets=mesh.n_tets,
        n_faces=mesh.n_faces,
        n_boundary_faces=nb,
        n_interior_faces=mesh.n_faces - nb,
        h_min=float(mesh.h_t.min()),
        h_max=float(mesh.h_t.max()),
        max_shape_ratio=float(ratio.max()),
    )


def export_ascii(mesh: TetMesh, path):
    """Write the documented whitespace-separated ASCII format."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("tetmesh 1\n")
        fh.write(f"vertices {mesh.n_vertices}\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        fh.write(f"tets {mesh.n_tets}\n")
        for t in mesh.tets:
            fh.write(f"{t[0]} {t[1]} {t[2]} {t[3]}\n")


def import_ascii(path) -> TetMesh:
    """Read a mesh in the ASCII format written by export_ascii.

    Format: header line "tetmesh 1"; "vertices N" followed by N coordinate
    lines; "tets M" followed by M lines of four 0-based vertex ids.
    '#' starts a comment.  Inverted tets are repaired with a warning.
    """
    tokens = []  # (line_number, token)
    with open(path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0]
            tokens.extend((lineno, tok) for tok in text.split())
    pos = 0

    def take(expect=None, convert=None):
        nonlocal pos
        if pos >= len(tokens):
            last = tokens[-1][0] if tokens else 1
            raise ParseError("unexpected end of file", line=last)
        lineno, tok = tokens[pos]
        pos += 1
        if expect is not None and tok != expect:
            raise ParseError(f"expected {expect!r}, got {tok!r}", line=lineno)
        if convert is not None:
            try:
                return convert(tok)
            except ValueError:
                raise ParseError(f"cannot parse {tok!r}", line=lineno) from None
        return tok

    take(expect="tetmesh")
    version = take(convert=int)
    if version != 1:
        raise ParseError(f"unsupported tetmesh version {version}")
    take(expect="vertices")
    nv = take(convert=int)
    verts = np.empty((nv, 3))
    for i in range(nv):
        for d in range(3):
            verts[i, d] = take(convert=float)
    take(expect="tets")
    nt = take(convert=int)
    tets = np.empty((nt, 4), dtype=np.int64)
    for i in range(nt):
        for d in range(4):
            tets[i, d] = take(convert=int)
    if pos != len(tokens):
        raise ParseError("trailing data after tet list", line=tokens[pos][0])
    if nt and (tets.min() < 0 or tets.max() >= nv):
        raise ParseError("tet vertex id out of range")
    return TetMesh(vertices=verts, tets=tets)


def topology_hash(mesh: TetMesh):
    """Stable fingerprint of the connectivity, for round-trip checks."""
    import hashlib

    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(mesh.tets).tobytes())
    digest.update(np.ascontiguousarray(mesh.faces).tobytes())
    return digest.hexdigest()
