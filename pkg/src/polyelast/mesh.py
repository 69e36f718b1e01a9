"""Polygonal (2D) and polyhedral (3D) meshes with a full geometry cache.

A mesh stores vertices, planar faces, and cells together with everything the
discretisation needs: measures, centroids, diameters, unit normals, second
moments of faces, per-(cell, face) orientation signs, and face/cell
connectivity.  The orientation convention is: every face stores the unit
normal of its first incident cell (the one with the lower index), and the
per-incidence sign is +1 for that cell and -1 for the other.

Meshes are immutable after construction; geometry and quadrature tables are
cached on the instance and safe for concurrent reads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quadrature import map_to_simplices

PLANARITY_RTOL = 1e-9


class MeshError(Exception):
    """Invalid mesh topology or geometry."""


class MeshFileError(MeshError):
    """Malformed mesh file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


FAMILIES = (
    "cartesian",
    "structured-triangular",
    "distorted-quadrangular",
    "cube-to-tet",
    "lshape",
    "file",
)


@dataclass
class MeshFamilySpec:
    """Recipe for a generated (or file-loaded) mesh."""

    family: str
    n: int = 1
    dim: int = 2
    box: tuple | None = None
    path: str | None = None

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise MeshError(f"unknown mesh family '{self.family}'")
        if self.family == "file":
            if not self.path:
                raise MeshError("family 'file' requires a path")
        elif self.path is not None:
            raise MeshError("path is only valid for family 'file'")
        if self.n < 1:
            raise MeshError("resolution n must be >= 1")
        if self.family in ("cartesian",) and self.dim not in (2, 3):
            raise MeshError("cartesian meshes exist for dim 2 or 3")
        if self.family in ("structured-triangular", "distorted-quadrangular", "lshape") and self.dim != 2:
            raise MeshError(f"family '{self.family}' is two-dimensional")
        if self.family == "cube-to-tet" and self.dim != 3:
            raise MeshError("family 'cube-to-tet' is three-dimensional")


class Mesh:
    """Polytopal mesh with geometry cache.

    Faces and cells are stored in CSR-style flat arrays.  ``cell_faces`` and
    ``cell_face_sign`` are aligned: the outward unit normal of face ``f`` seen
    from cell ``c`` is ``sign * face_normal[f]``.
    """

    def __init__(self, dim, vertices, face_offsets, face_vertices,
                 cell_face_offsets, cell_faces, cell_vertex_offsets, cell_vertices):
        self.dim = int(dim)
        self.vertices = np.asarray(vertices, dtype=float)
        self.face_offsets = np.asarray(face_offsets, dtype=np.int64)
        self.face_vertices = np.asarray(face_vertices, dtype=np.int64)
        self.cell_face_offsets = np.asarray(cell_face_offsets, dtype=np.int64)
        self.cell_faces = np.asarray(cell_faces, dtype=np.int64)
        self.cell_vertex_offsets = np.asarray(cell_vertex_offsets, dtype=np.int64)
        self.cell_vertices = np.asarray(cell_vertices, dtype=np.int64)

        # connectivity (filled by _build_connectivity)
        self.face_cells: np.ndarray | None = None
        self.cell_face_sign: np.ndarray | None = None

        # geometry cache (filled by compute_geometry)
        self.face_measure = None
        self.face_centroid = None
        self.face_diameter = None
        self.face_size = None  # |F|^(1/(d-1)): the size used in penalty weights
        self.face_normal = None
        self.face_moment = None
        self.cell_measure = None
        self.cell_centroid = None
        self.cell_diameter = None

        self._cell_quad: dict[int, tuple] = {}
        self._face_quad: dict[int, tuple] = {}

        self._build_connectivity()

    # -- basic counts ---------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_faces(self) -> int:
        return self.face_offsets.shape[0] - 1

    @property
    def n_cells(self) -> int:
        return self.cell_face_offsets.shape[0] - 1

    @property
    def boundary_faces(self) -> np.ndarray:
        return np.nonzero(self.face_cells[:, 1] < 0)[0]

    @property
    def interior_faces(self) -> np.ndarray:
        return np.nonzero(self.face_cells[:, 1] >= 0)[0]

    @property
    def h(self) -> float:
        return float(self.cell_diameter.max())

    # -- per-entity views -----------------------------------------------------
    def face_vertex_ids(self, f: int) -> np.ndarray:
        return self.face_vertices[self.face_offsets[f]:self.face_offsets[f + 1]]

    def cell_face_ids(self, c: int) -> np.ndarray:
        return self.cell_faces[self.cell_face_offsets[c]:self.cell_face_offsets[c + 1]]

    def cell_face_signs(self, c: int) -> np.ndarray:
        return self.cell_face_sign[self.cell_face_offsets[c]:self.cell_face_offsets[c + 1]]

    def cell_vertex_ids(self, c: int) -> np.ndarray:
        return self.cell_vertices[self.cell_vertex_offsets[c]:self.cell_vertex_offsets[c + 1]]

    def outward_normals(self, c: int) -> np.ndarray:
        """Unit normals of the faces of cell c, pointing out of c; shape (m, d)."""
        return self.face_normal[self.cell_face_ids(c)] * self.cell_face_signs(c)[:, None]

    # -- connectivity ---------------------------------------------------------
    def _build_connectivity(self) -> None:
        nf = self.n_faces
        face_cells = np.full((nf, 2), -1, dtype=np.int64)
        for c in range(self.n_cells):
            for f in self.cell_face_ids(c):
                if face_cells[f, 0] < 0:
                    face_cells[f, 0] = c
                elif face_cells[f, 1] < 0:
                    face_cells[f, 1] = c
                else:
                    raise MeshError(f"interior face with 3 cells: face {f} "
                                    f"(cells {face_cells[f, 0]}, {face_cells[f, 1]}, {c})")
        if np.any(face_cells[:, 0] < 0):
            orphan = int(np.nonzero(face_cells[:, 0] < 0)[0][0])
            raise MeshError(f"face {orphan} belongs to no cell")
        self.face_cells = face_cells

    # -- geometry -------------------------------------------------------------
    def cell_simplices(self) -> tuple[np.ndarray, np.ndarray]:
        """Fan decomposition of all cells into simplices from their centroids.

        Returns (verts (ns, d+1, d), owner_cell (ns,)).  Requires the
        geometry cache (centroids) to be filled.
        """
        d = self.dim
        tris, owner = [], []
        for c in range(self.n_cells):
            xc = self.cell_centroid[c]
            if d == 2:
                loop = self.cell_vertex_ids(c)
                pts = self.vertices[loop]
                nxt = np.roll(pts, -1, axis=0)
                for a, b in zip(pts, nxt):
                    tris.append((xc, a, b))
                    owner.append(c)
            else:
                # orientation is irrelevant: quadrature uses unsigned volumes
                for f in self.cell_face_ids(c):
                    loop = self.vertices[self.face_vertex_ids(f)]
                    xf = self.face_centroid[f]
                    nxt = np.roll(loop, -1, axis=0)
                    for a, b in zip(loop, nxt):
                        tris.append((xc, xf, a, b))
                        owner.append(c)
        return np.asarray(tris, dtype=float), np.asarray(owner, dtype=np.int64)

    def face_simplices(self) -> tuple[np.ndarray, np.ndarray]:
        """Fan decomposition of all faces into simplices from their centroids."""
        d = self.dim
        simps, owner = [], []
        for f in range(self.n_faces):
            loop = self.vertices[self.face_vertex_ids(f)]
            if d == 2:
                simps.append(loop)
                owner.append(f)
            else:
                xf = self.face_centroid[f]
                nxt = np.roll(loop, -1, axis=0)
                for a, b in zip(loop, nxt):
                    simps.append((xf, a, b))
                    owner.append(f)
        return np.asarray(simps, dtype=float), np.asarray(owner, dtype=np.int64)

    def cell_quadrature(self, degree: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(points, weights, owner_cell) integrating over every cell at once."""
        if degree not in self._cell_quad:
            simps, owner = self.cell_simplices()
            npts_per = None
            pts, wts = map_to_simplices(simps, degree)
            npts_per = pts.shape[0] // simps.shape[0]
            owners = np.repeat(owner, npts_per)
            self._cell_quad[degree] = (pts, wts, owners)
        return self._cell_quad[degree]

    def face_quadrature(self, degree: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(points, weights, owner_face) integrating over every face at once."""
        if degree not in self._face_quad:
            simps, owner = self.face_simplices()
            pts, wts = map_to_simplices(simps, degree)
            npts_per = pts.shape[0] // simps.shape[0]
            owners = np.repeat(owner, npts_per)
            self._face_quad[degree] = (pts, wts, owners)
        return self._face_quad[degree]


# -- geometry computation ------------------------------------------------------

def _polygon_area_centroid(pts: np.ndarray) -> tuple[float, np.ndarray]:
    """Signed shoelace area and centroid of a 2D polygon given as a loop."""
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()
    if area == 0.0:
        return 0.0, pts.mean(axis=0)
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cy = ((y + yn) * cross).sum() / (6.0 * area)
    return float(area), np.array([cx, cy])


def _diameter(pts: np.ndarray) -> float:
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=-1)).max())


def compute_geometry(mesh: Mesh) -> Mesh:
    """Fill the geometry cache of a mesh (idempotent).

    Measures and centroids of polygons come from the shoelace formula, those
    of polyhedra from a fan of tetrahedra over the face triangles; face second
    moments are integrated exactly with a degree-2 rule on the face fans.
    Raises MeshError on degenerate or non-planar entities.
    """
    d = mesh.dim
    nf, nc = mesh.n_faces, mesh.n_cells
    V = mesh.vertices

    face_measure = np.zeros(nf)
    face_centroid = np.zeros((nf, d))
    face_diameter = np.zeros(nf)
    face_loop_normal = np.zeros((nf, d))  # normal as oriented by the stored loop

    for f in range(nf):
        pts = V[mesh.face_vertex_ids(f)]
        face_diameter[f] = _diameter(pts)
        if d == 2:
            if pts.shape[0] != 2:
                raise MeshError(f"face {f}: a 2D face is an edge with 2 vertices")
            t = pts[1] - pts[0]
            L = float(np.linalg.norm(t))
            if L <= 0.0:
                raise MeshError(f"degenerate face {f}: zero length")
            face_measure[f] = L
            face_centroid[f] = 0.5 * (pts[0] + pts[1])
            face_loop_normal[f] = np.array([t[1], -t[0]]) / L
        else:
            if pts.shape[0] < 3:
                raise MeshError(f"face {f}: a 3D face needs at least 3 vertices")
            nxt = np.roll(pts, -1, axis=0)
            area_vec = 0.5 * np.cross(pts, nxt).sum(axis=0)
            area = float(np.linalg.norm(area_vec))
            if area <= 0.0:
                raise MeshError(f"degenerate face {f}: zero area")
            normal = area_vec / area
            pmean = pts.mean(axis=0)
            dev = np.abs((pts - pmean) @ normal).max()
            if dev > PLANARITY_RTOL * face_diameter[f]:
                raise MeshError(f"non-planar face {f}: deviation {dev:.3e} "
                                f"exceeds {PLANARITY_RTOL:g} * h_F")
            # centroid from the triangle fan around the vertex mean
            tri_a = pts - pmean
            tri_b = nxt - pmean
            tri_areas = 0.5 * (np.cross(tri_a, tri_b) @ normal)
            tri_cent = (pmean + pts + nxt) / 3.0
            face_measure[f] = tri_areas.sum()
            face_centroid[f] = (tri_areas[:, None] * tri_cent).sum(axis=0) / tri_areas.sum()
            face_loop_normal[f] = normal

    mesh.face_measure = face_measure
    mesh.face_centroid = face_centroid
    mesh.face_diameter = face_diameter
    mesh.face_size = face_measure ** (1.0 / (d - 1))

    # orientation: decide the outward sign of each (cell, face) incidence, fix
    # the face normal to that of the first (lower-index) incident cell.
    # In 2D the CCW cell loop orients edges exactly; in 3D cells must be
    # star-shaped with respect to their vertex mean.
    sign = np.zeros_like(mesh.cell_faces, dtype=float)
    face_normal = face_loop_normal.copy()
    out1 = np.zeros(nf)
    for c in range(nc):
        if d == 2:
            loop = mesh.cell_vertex_ids(c)
            succ = {int(a): int(b) for a, b in zip(loop, np.roll(loop, -1))}
        else:
            seed = V[mesh.cell_vertex_ids(c)].mean(axis=0)
        lo, hi = mesh.cell_face_offsets[c], mesh.cell_face_offsets[c + 1]
        for k in range(lo, hi):
            f = mesh.cell_faces[k]
            if d == 2:
                a, b = mesh.face_vertex_ids(f)
                out = 1.0 if succ.get(int(a)) == int(b) else -1.0
            else:
                out = float(np.sign((face_centroid[f] - seed) @ face_loop_normal[f]))
                if out == 0.0:
                    raise MeshError(f"cannot orient face {f} of cell {c}")
            if mesh.face_cells[f, 0] == c:
                face_normal[f] = out * face_loop_normal[f]
                out1[f] = out
                sign[k] = 1.0
            else:
                sign[k] = out * out1[f]
    mesh.face_normal = face_normal
    mesh.cell_face_sign = sign

    # cell measures / centroids / diameters
    cell_measure = np.zeros(nc)
    cell_centroid = np.zeros((nc, d))
    cell_diameter = np.zeros(nc)
    for c in range(nc):
        pts = V[mesh.cell_vertex_ids(c)]
        cell_diameter[c] = _diameter(pts)
        if d == 2:
            area, cent = _polygon_area_centroid(pts)
            if area <= 0.0:
                raise MeshError(f"degenerate cell {c}: area {area:.3e}")
            cell_measure[c] = area
            cell_centroid[c] = cent
        else:
            seed = pts.mean(axis=0)
            vol = 0.0
            mom = np.zeros(3)
            lo = mesh.cell_face_offsets[c]
            for k, f in enumerate(mesh.cell_face_ids(c)):
                # sign of the stored loop orientation relative to outward
                s_loop = mesh.cell_face_sign[lo + k] * out1[f]
                loop = V[mesh.face_vertex_ids(f)]
                xf = face_centroid[f]
                nxt = np.roll(loop, -1, axis=0)
                # tetrahedra (seed, xf, a, b), oriented outward by s_loop
                va, vb, vf = loop - seed, nxt - seed, xf - seed
                vols = s_loop * np.einsum("ij,ij->i", np.cross(vf, va), vb) / 6.0
                cents = (seed + xf + loop + nxt) / 4.0
                vol += vols.sum()
                mom += (vols[:, None] * cents).sum(axis=0)
            if vol <= 0.0:
                raise MeshError(f"degenerate cell {c}: volume {vol:.3e}")
            cell_measure[c] = vol
            cell_centroid[c] = mom / vol
    mesh.cell_measure = cell_measure
    mesh.cell_centroid = cell_centroid
    mesh.cell_diameter = cell_diameter

    # exact second moments of faces about their centroids (degree-2 fan rule)
    simps, owner = mesh.face_simplices()
    pts, wts = map_to_simplices(simps, 2)
    per = pts.shape[0] // simps.shape[0]
    owners = np.repeat(owner, per)
    rel = pts - face_centroid[owners]
    contrib = wts[:, None, None] * rel[:, :, None] * rel[:, None, :]
    face_moment = np.zeros((nf, d, d))
    np.add.at(face_moment, owners, contrib)
    mesh.face_moment = face_moment
    return mesh


# -- validation ----------------------------------------------------------------

@dataclass
class MeshReport:
    """Outcome of validate_mesh: invariant checks plus regularity indicators."""

    ok: bool
    failures: list[str] = field(default_factory=list)
    max_normal_deviation: float = 0.0
    max_closure_residual: float = 0.0
    max_diameter_ratio: float = 0.0
    max_faces_per_cell: int = 0
    n_cells: int = 0
    n_faces: int = 0
    n_interior_faces: int = 0

    def __str__(self) -> str:
        head = "mesh OK" if self.ok else "mesh INVALID"
        lines = [f"{head}: {self.n_cells} cells, {self.n_faces} faces "
                 f"({self.n_interior_faces} interior)",
                 f"  max |1 - ||n_TF|||          = {self.max_normal_deviation:.3e}",
                 f"  max closed-surface residual = {self.max_closure_residual:.3e}",
                 f"  max h_T / min_F h_F         = {self.max_diameter_ratio:.3g}",
                 f"  max faces per cell          = {self.max_faces_per_cell}"]
        lines += [f"  FAIL: {m}" for m in self.failures]
        return "\n".join(lines)


def validate_mesh(mesh: Mesh) -> MeshReport:
    """Check every mesh invariant; returns a report (does not raise)."""
    rep = MeshReport(ok=True, n_cells=mesh.n_cells, n_faces=mesh.n_faces,
                     n_interior_faces=mesh.interior_faces.shape[0])

    def fail(msg: str) -> None:
        rep.ok = False
        rep.failures.append(msg)

    # incidence counts are enforced structurally at build; re-check signs
    for f in mesh.interior_faces:
        c1 = mesh.face_cells[f, 0]
        k = mesh.cell_face_offsets[c1] + int(np.nonzero(mesh.cell_face_ids(c1) == f)[0][0])
        if mesh.cell_face_sign[k] != 1.0:
            fail(f"face {f}: sign of first incident cell is not +1")

    norms = np.linalg.norm(mesh.face_normal, axis=1)
    rep.max_normal_deviation = float(np.abs(norms - 1.0).max())
    if rep.max_normal_deviation > 1e-12:
        bad = int(np.abs(norms - 1.0).argmax())
        fail(f"face {bad}: normal is not unit (|n| = {norms[bad]:.15f})")

    if np.any(mesh.cell_measure <= 0.0):
        fail(f"cell {int(np.argmin(mesh.cell_measure))}: non-positive measure")
    if np.any(mesh.face_measure <= 0.0):
        fail(f"face {int(np.argmin(mesh.face_measure))}: non-positive measure")

    ratios = []
    for c in range(mesh.n_cells):
        fids = mesh.cell_face_ids(c)
        n_out = mesh.outward_normals(c)
        meas = mesh.face_measure[fids]
        resid = np.linalg.norm((meas[:, None] * n_out).sum(axis=0))
        scale = meas.sum()
        rep.max_closure_residual = max(rep.max_closure_residual, resid / scale)
        if resid > 1e-12 * scale:
            fail(f"cell {c}: closed-surface identity violated (residual {resid:.3e})")
        hT = mesh.cell_diameter[c]
        hFmin = mesh.face_diameter[fids].min()
        if mesh.face_diameter[fids].max() > hT * (1 + 1e-12):
            fail(f"cell {c}: a face diameter exceeds the cell diameter")
        ratios.append(hT / hFmin)
        rep.max_faces_per_cell = max(rep.max_faces_per_cell, len(fids))
    rep.max_diameter_ratio = float(max(ratios)) if ratios else 0.0
    return rep


# -- generic constructors --------------------------------------------------------

def _csr(lists: list) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.zeros(len(lists) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(x) for x in lists])
    data = np.concatenate([np.asarray(x, dtype=np.int64) for x in lists]) if lists else np.zeros(0, np.int64)
    return offsets, data


def from_polygons(vertices, cell_loops) -> Mesh:
    """Build a 2D mesh from polygons given as vertex loops.

    Loops are re-oriented counter-clockwise; edges are derived and numbered in
    first-encounter order (cells scanned in order, loop edges in order), which
    makes construction deterministic.
    """
    vertices = np.asarray(vertices, dtype=float)
    loops = []
    for loop in cell_loops:
        loop = list(int(v) for v in loop)
        area, _ = _polygon_area_centroid(vertices[loop])
        if area < 0.0:
            loop = loop[::-1]
        loops.append(loop)

    edge_ids: dict[tuple[int, int], int] = {}
    edge_verts: list[tuple[int, int]] = []
    cell_faces = []
    for loop in loops:
        fids = []
        for a, b in zip(loop, loop[1:] + loop[:1]):
            key = (a, b) if a < b else (b, a)
            if key not in edge_ids:
                edge_ids[key] = len(edge_verts)
                edge_verts.append((a, b))
            fids.append(edge_ids[key])
        cell_faces.append(fids)

    fo, fv = _csr([list(e) for e in edge_verts])
    cfo, cf = _csr(cell_faces)
    cvo, cv = _csr(loops)
    mesh = Mesh(2, vertices, fo, fv, cfo, cf, cvo, cv)
    return compute_geometry(mesh)


def from_polyhedra(vertices, face_loops, cell_face_lists) -> Mesh:
    """Build a 3D mesh from planar faces (vertex loops) and cells (face lists)."""
    vertices = np.asarray(vertices, dtype=float)
    fo, fv = _csr([list(f) for f in face_loops])
    cfo, cf = _csr([list(c) for c in cell_face_lists])
    cell_verts = []
    for fl in cell_face_lists:
        seen: list[int] = []
        for f in fl:
            for v in face_loops[f]:
                if v not in seen:
                    seen.append(int(v))
        cell_verts.append(seen)
    cvo, cv = _csr(cell_verts)
    mesh = Mesh(3, vertices, fo, fv, cfo, cf, cvo, cv)
    return compute_geometry(mesh)


def _dedup_faces_3d(cell_local_faces: list[list[tuple[int, ...]]]):
    """Number faces by first encounter; returns (face_loops, cell_face_lists)."""
    ids: dict[tuple[int, ...], int] = {}
    loops: list[tuple[int, ...]] = []
    cell_faces = []
    for local in cell_local_faces:
        fids = []
        for loop in local:
            key = tuple(sorted(loop))
            if key not in ids:
                ids[key] = len(loops)
                loops.append(loop)
            fids.append(ids[key])
        cell_faces.append(fids)
    return loops, cell_faces


# -- generated families ----------------------------------------------------------

def _unit_box(dim: int) -> tuple[tuple, tuple]:
    return (0.0,) * dim, (1.0,) * dim


def _grid_vertices_2d(n: int, box) -> np.ndarray:
    (x0, y0), (x1, y1) = box
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


def _cartesian_2d(n: int, box) -> Mesh:
    verts = _grid_vertices_2d(n, box)
    vid = lambda i, j: i * (n + 1) + j
    loops = [[vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]
             for i in range(n) for j in range(n)]
    return from_polygons(verts, loops)


def _structured_triangular(n: int, box) -> Mesh:
    verts = _grid_vertices_2d(n, box)
    vid = lambda i, j: i * (n + 1) + j
    loops = []
    for i in range(n):
        for j in range(n):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v11, v01 = vid(i + 1, j + 1), vid(i, j + 1)
            loops.append([v00, v10, v11])  # split along the SW-NE diagonal
            loops.append([v00, v11, v01])
    return from_polygons(verts, loops)


def _distorted_quadrangular(n: int, box) -> Mesh:
    verts = _grid_vertices_2d(n, box)
    bump = 0.1 * np.sin(2 * np.pi * verts[:, 0]) * np.sin(2 * np.pi * verts[:, 1])
    verts = verts + bump[:, None]
    vid = lambda i, j: i * (n + 1) + j
    loops = [[vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]
             for i in range(n) for j in range(n)]
    return from_polygons(verts, loops)


def _lshape(n: int) -> Mesh:
    """Structured quadrangular mesh of the slit-like domain with a 270-degree
    corner at the origin and outer corners at (+-sqrt(2), 0), (0, +-sqrt(2)).

    The domain is an L-shape in coordinates rotated by 45 degrees; each of its
    three unit blocks carries an n-by-n grid.
    """
    m = 2 * n
    us = np.linspace(-1.0, 1.0, m + 1)
    keep_v = {}
    verts_uv = []
    for i in range(m + 1):
        for j in range(m + 1):
            u, v = us[i], us[j]
            if u < -1e-14 and v > 1e-14:
                continue  # removed quadrant
            keep_v[(i, j)] = len(verts_uv)
            verts_uv.append((u, v))
    loops = []
    for i in range(m):
        for j in range(m):
            uc = 0.5 * (us[i] + us[i + 1])
            vc = 0.5 * (us[j] + us[j + 1])
            if uc < 0.0 and vc > 0.0:
                continue
            loops.append([keep_v[(i, j)], keep_v[(i + 1, j)],
                          keep_v[(i + 1, j + 1)], keep_v[(i, j + 1)]])
    uv = np.asarray(verts_uv)
    s = 1.0 / np.sqrt(2.0)
    xy = np.column_stack([s * (uv[:, 0] - uv[:, 1]), s * (uv[:, 0] + uv[:, 1])])
    return from_polygons(xy, loops)


def _cartesian_3d(n: int, box) -> Mesh:
    (x0, y0, z0), (x1, y1, z1) = box
    xs, ys, zs = (np.linspace(a, b, n + 1) for a, b in ((x0, x1), (y0, y1), (z0, z1)))
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    verts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    vid = lambda i, j, k: (i * (n + 1) + j) * (n + 1) + k
    cell_local = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                c = lambda di, dj, dk: vid(i + di, j + dj, k + dk)
                cell_local.append([
                    (c(0, 0, 0), c(0, 1, 0), c(0, 1, 1), c(0, 0, 1)),  # -x
                    (c(1, 0, 0), c(1, 1, 0), c(1, 1, 1), c(1, 0, 1)),  # +x
                    (c(0, 0, 0), c(1, 0, 0), c(1, 0, 1), c(0, 0, 1)),  # -y
                    (c(0, 1, 0), c(1, 1, 0), c(1, 1, 1), c(0, 1, 1)),  # +y
                    (c(0, 0, 0), c(1, 0, 0), c(1, 1, 0), c(0, 1, 0)),  # -z
                    (c(0, 0, 1), c(1, 0, 1), c(1, 1, 1), c(0, 1, 1)),  # +z
                ])
    loops, cell_faces = _dedup_faces_3d(cell_local)
    return from_polyhedra(verts, loops, cell_faces)


_KUHN_PERMS = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))


def _cube_to_tet(n: int, box) -> Mesh:
    (x0, y0, z0), (x1, y1, z1) = box
    xs, ys, zs = (np.linspace(a, b, n + 1) for a, b in ((x0, x1), (y0, y1), (z0, z1)))
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    verts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    vid = lambda i, j, k: (i * (n + 1) + j) * (n + 1) + k
    cell_local = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                base = np.array([i, j, k])
                for perm in _KUHN_PERMS:
                    # path from the cube's low corner to its high corner
                    p = [base.copy()]
                    for ax in perm:
                        q = p[-1].copy()
                        q[ax] += 1
                        p.append(q)
                    t = [vid(*q) for q in p]
                    cell_local.append([
                        (t[0], t[1], t[2]), (t[0], t[1], t[3]),
                        (t[0], t[2], t[3]), (t[1], t[2], t[3]),
                    ])
    loops, cell_faces = _dedup_faces_3d(cell_local)
    return from_polyhedra(verts, loops, cell_faces)


def build_mesh(spec: MeshFamilySpec) -> Mesh:
    """Build (or load) and validate a mesh; raises MeshError on failure."""
    spec.validate()
    box = spec.box if spec.box is not None else _unit_box(spec.dim)
    if spec.family == "cartesian":
        mesh = _cartesian_2d(spec.n, box) if spec.dim == 2 else _cartesian_3d(spec.n, box)
    elif spec.family == "structured-triangular":
        mesh = _structured_triangular(spec.n, box)
    elif spec.family == "distorted-quadrangular":
        mesh = _distorted_quadrangular(spec.n, box)
    elif spec.family == "cube-to-tet":
        mesh = _cube_to_tet(spec.n, box)
    elif spec.family == "lshape":
        mesh = _lshape(spec.n)
    else:
        mesh = read_mesh_file(spec.path)
    report = validate_mesh(mesh)
    if not report.ok:
        raise MeshError("mesh validation failed:\n" + str(report))
    return mesh


# -- plain-text mesh files --------------------------------------------------------

def read_mesh_file(path: str) -> Mesh:
    """Read the sectioned ASCII mesh format.

    Sections: DIM, VERTICES (id x y [z]), FACES (id v0 v1 [...]),
    CELLS (2D: vertex loop; 3D: face-id list). '#' starts a comment,
    ids are 0-based.
    """
    dim = None
    verts: list[tuple[int, list[float]]] = []
    faces: list[tuple[int, list[int]]] = []
    cells: list[list[int]] = []
    section = None
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.upper() in ("DIM", "VERTICES", "FACES", "CELLS"):
                section = line.upper()
                continue
            toks = line.split()
            try:
                if section == "DIM":
                    dim = int(toks[0])
                    if dim not in (2, 3):
                        raise ValueError(f"dimension must be 2 or 3, got {dim}")
                elif section == "VERTICES":
                    verts.append((int(toks[0]), [float(t) for t in toks[1:]]))
                elif section == "FACES":
                    faces.append((int(toks[0]), [int(t) for t in toks[1:]]))
                elif section == "CELLS":
                    cells.append([int(t) for t in toks])
                else:
                    raise ValueError("data before any section header")
            except (ValueError, IndexError) as exc:
                raise MeshFileError(str(exc), line=ln) from exc
    if dim is None:
        raise MeshFileError("missing DIM section")
    if not verts or not cells:
        raise MeshFileError("missing VERTICES or CELLS section")

    verts.sort(key=lambda t: t[0])
    if [i for i, _ in verts] != list(range(len(verts))):
        raise MeshFileError("vertex ids must be 0..n-1")
    coords = np.asarray([c for _, c in verts], dtype=float)
    if coords.shape[1] != dim:
        raise MeshFileError(f"vertices have {coords.shape[1]} coordinates, expected {dim}")

    faces.sort(key=lambda t: t[0])
    if faces and [i for i, _ in faces] != list(range(len(faces))):
        raise MeshFileError("face ids must be 0..n-1")
    face_lists = [f for _, f in faces]

    if dim == 2:
        mesh = from_polygons(coords, cells)
        if face_lists:
            # the FACES section fixes nothing in 2D beyond a consistency check
            declared = {tuple(sorted(f)) for f in face_lists}
            derived = {tuple(sorted(mesh.face_vertex_ids(f))) for f in range(mesh.n_faces)}
            if declared != derived:
                raise MeshFileError("FACES section does not match the edges of CELLS")
        return mesh
    if not face_lists:
        raise MeshFileError("3D meshes require a FACES section")
    return from_polyhedra(coords, face_lists, cells)


def write_mesh_file(mesh: Mesh, path: str) -> None:
    """Write the sectioned ASCII mesh format (inverse of read_mesh_file)."""
    with open(path, "w") as fh:
        fh.write("# polyelast mesh\nDIM\n%d\nVERTICES\n" % mesh.dim)
        for i, p in enumerate(mesh.vertices):
            fh.write(f"{i} " + " ".join(repr(float(x)) for x in p) + "\n")
        fh.write("FACES\n")
        for f in range(mesh.n_faces):
            fh.write(f"{f} " + " ".join(str(v) for v in mesh.face_vertex_ids(f)) + "\n")
        fh.write("CELLS\n")
        for c in range(mesh.n_cells):
            if mesh.dim == 2:
                fh.write(" ".join(str(v) for v in mesh.cell_vertex_ids(c)) + "\n")
            else:
                fh.write(" ".join(str(f) for f in mesh.cell_face_ids(c)) + "\n")
