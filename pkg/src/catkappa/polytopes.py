"""Regular polytopes, their rotation groups and chord orbits, equivariant
configurations in the space zoo, and the edge-angle / Gram-sum certificates."""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import block_diag
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .analysis import alexandrov_angle, chord_diameter_bound_check, circumcenter, gram_sum, parallelogram_check
from .errors import ConfigError, DomainError, GroupError, RadiusGuardError
from .spaces import Euclidean, Hyperbolic, Product, Space, Sphere, Tree

PHI = (1.0 + math.sqrt(5.0)) / 2.0
C5 = math.cos(math.pi / 5.0)
FAMILIES = ("tetrahedron", "cube", "octahedron", "icosahedron", "dodecahedron", "hypercube", "orthoplex")
TAGS = ("isometric-embed", "hyperbolic-orbit", "spherical-cap", "tree-star", "product-with-tree")
DEDUP_TOL = 1e-9
ENUMERATION_LIMIT = 2000

MISPRINTS = {
    "radius-guard": "radius guard printed as pi/(2 kappa); pi/(2 sqrt(kappa)) is enforced",
    "icosahedron-constant": "4/(1+4cos^2(pi/5)) is printed as 1/sqrt(5); it equals 2 - 2/sqrt(5)",
    "dodecahedron-a5": "'a_2^5' is read as a_5^2",
    "dodecahedron-16cos": "'16 cos(pi/5) a_1^2' is read as 16 cos^2(pi/5) a_1^2",
    "dodecahedron-heading": "the dodecahedron argument opens by naming the icosahedron",
}


# ---------------------------------------------------------------- vertices

@dataclass(frozen=True)
class PolytopeSpec:
    family: str
    k: int = 3

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError("unknown polytope family %r" % self.family)
        if self.family in ("hypercube", "orthoplex"):
            if int(self.k) < 2:
                raise DomainError("%s needs k >= 2" % self.family)
        else:
            object.__setattr__(self, "k", 3)
        object.__setattr__(self, "k", int(self.k))

    @property
    def name(self) -> str:
        return "%s(%d)" % (self.family, self.k) if self.family in ("hypercube", "orthoplex") else self.family

    @cached_property
    def vertices(self) -> np.ndarray:
        return vertices(self)

    @cached_property
    def edges(self) -> list:
        V = self.vertices
        G = V @ V.T
        np.fill_diagonal(G, -np.inf)
        top = G.max()
        n = len(V)
        return [(i, j) for i in range(n) for j in range(i + 1, n) if G[i, j] > top - 1e-9]

    def __hash__(self):
        return hash((self.family, self.k))


def _cyclic(v):
    return [v, v[1:] + v[:1], v[2:] + v[:2]]


def vertices(spec: PolytopeSpec) -> np.ndarray:
    """Unit-circumradius vertex coordinates in a fixed order."""
    f, k = spec.family, spec.k
    if f == "tetrahedron":
        V = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    elif f in ("cube", "hypercube"):
        k = 3 if f == "cube" else k
        V = list(itertools.product((1.0, -1.0), repeat=k))
    elif f in ("octahedron", "orthoplex"):
        k = 3 if f == "octahedron" else k
        E = np.eye(k)
        V = list(E) + list(-E)
    elif f == "icosahedron":
        V = []
        for s1, s2 in itertools.product((1, -1), repeat=2):
            V.extend(_cyclic([0.0, s1 * 1.0, s2 * PHI]))
    else:  # dodecahedron
        V = list(itertools.product((1.0, -1.0), repeat=3))
        for s1, s2 in itertools.product((1, -1), repeat=2):
            V.extend(_cyclic([0.0, s1 / PHI, s2 * PHI]))
    V = np.array(V, dtype=float)
    return V / np.linalg.norm(V, axis=1)[:, None]


def expected_edge_angle(spec: PolytopeSpec) -> float:
    """Euclidean central angle of an edge."""
    f, k = spec.family, spec.k
    if f in ("orthoplex", "octahedron"):
        return math.pi / 2
    if f in ("hypercube", "cube"):
        return math.acos(1.0 - 2.0 / k)
    if f == "icosahedron":
        return math.acos(1.0 / math.sqrt(5.0))
    if f == "dodecahedron":
        return math.acos(math.sqrt(5.0) / 3.0)
    return math.acos(-1.0 / 3.0)


def bound_label(spec: PolytopeSpec) -> str:
    return "LS Theorem A" if spec.family == "tetrahedron" else "edge-angle bound"


# ---------------------------------------------------------------- groups

def _axis_rotation(axis, theta):
    a = np.asarray(axis, float) / np.linalg.norm(axis)
    K = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) + math.sin(theta) * K + (1 - math.cos(theta)) * (K @ K)


def _vertex_perm(M, V, tol=DEDUP_TOL):
    img = V @ M.T
    G = img @ V.T
    perm = np.argmax(G, axis=1)
    if np.max(np.abs(V[perm] - img)) > 1e-7:
        raise GroupError("matrix does not permute the vertex set")
    if len(set(perm.tolist())) != len(V):
        raise GroupError("matrix does not permute the vertex set bijectively")
    return perm


def _signed_perm_matrix(perm, signs):
    k = len(perm)
    M = np.zeros((k, k))
    for i, (p, s) in enumerate(zip(perm, signs)):
        M[p, i] = s
    return M


def expected_order(spec: PolytopeSpec) -> int:
    f, k = spec.family, spec.k
    if f == "tetrahedron":
        return 12
    if f in ("cube", "octahedron"):
        return 24
    if f in ("icosahedron", "dodecahedron"):
        return 60
    return 2 ** (k - 1) * math.factorial(k)


@dataclass
class SymmetryGroup:
    spec: PolytopeSpec
    generators: list
    generator_perms: list
    order: int

    @cached_property
    def elements(self) -> list:
        """Every rotation matrix (breadth-first closure); only for small groups."""
        if self.order > ENUMERATION_LIMIT:
            raise GroupError("group of order %d is too large to enumerate" % self.order)
        return _closure(self.generators, self.order)[0]

    @cached_property
    def perms(self) -> list:
        V = self.spec.vertices
        return [_vertex_perm(M, V) for M in self.elements]

    def is_vertex_transitive(self) -> bool:
        n = len(self.spec.vertices)
        seen, frontier = {0}, [0]
        while frontier:
            nxt = []
            for v in frontier:
                for p in self.generator_perms:
                    w = int(p[v])
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
        return len(seen) == n


def _closure(gens, expected):
    dim = len(gens[0])
    ident = np.eye(dim)
    seen = {tuple(np.round(ident, 6).ravel()): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for A in frontier:
            for g in gens:
                B = g @ A
                key = tuple(np.round(B, 6).ravel())
                prev = seen.get(key)
                if prev is not None:
                    if np.max(np.abs(B - prev)) > DEDUP_TOL:
                        raise GroupError("rounding collision in group closure")
                    continue
                seen[key] = B
                nxt.append(B)
                if len(seen) > expected:
                    raise GroupError("closure exceeds the expected order %d" % expected)
        frontier = nxt
    return list(seen.values()), len(seen)


def symmetry_group(spec: PolytopeSpec) -> SymmetryGroup:
    """Rotation (orientation-preserving) symmetry group with its vertex action."""
    V = spec.vertices
    expected = expected_order(spec)
    if spec.family in ("tetrahedron", "cube", "octahedron", "icosahedron", "dodecahedron") and V.shape[1] == 3:
        nbrs = [j for i, j in spec.edges if i == 0]
        q = len(nbrs)
        r1 = _axis_rotation(V[0], 2 * math.pi / q)
        m = V[0] + V[nbrs[0]]
        r2 = 2.0 * np.outer(m, m) / float(m @ m) - np.eye(3)
        gens = [r1, r2]
    else:
        k = spec.k
        odd = []
        for i in range(k - 1):
            perm = list(range(k))
            perm[i], perm[i + 1] = perm[i + 1], perm[i]
            odd.append(_signed_perm_matrix(perm, [1.0] * k))
        flip = [1.0] * k
        flip[0] = -1.0
        odd.append(_signed_perm_matrix(list(range(k)), flip))
        s0 = odd[0]
        gens = []
        for s in odd:
            for g in (s @ s0.T, s0 @ s):
                if np.max(np.abs(g - np.eye(k))) > DEDUP_TOL and not any(np.max(np.abs(g - h)) < DEDUP_TOL for h in gens):
                    gens.append(g)
    for g in gens:
        if abs(np.linalg.det(g) - 1.0) > 1e-9:
            raise GroupError("generator is not a rotation")
    perms = [_vertex_perm(g, V) for g in gens]
    if expected <= ENUMERATION_LIMIT:
        _, order = _closure(gens, expected)
    else:
        order = _schreier_sims_order(perms)
    if order != expected:
        raise GroupError("group order %d differs from the expected %d" % (order, expected))
    return SymmetryGroup(spec, gens, perms, order)


def _schreier_sims_order(perms) -> int:
    from sympy.combinatorics import Permutation, PermutationGroup

    return int(PermutationGroup([Permutation([int(v) for v in p]) for p in perms]).order())


# ---------------------------------------------------------------- chord orbits

@dataclass
class ChordOrbit:
    orbit_id: int
    representative: tuple
    multiplicity: int
    euclid_cos: float
    euclid_angle: float
    members: list = field(repr=False, default_factory=list)

    @property
    def label(self) -> str:
        return "a%d" % self.orbit_id


@dataclass
class ChordOrbitTable:
    spec: PolytopeSpec
    orbits: list

    @cached_property
    def labels(self) -> np.ndarray:
        """labels[i, j] = orbit id of the chord {i, j} (0 on the diagonal)."""
        n = len(self.spec.vertices)
        L = np.zeros((n, n), dtype=int)
        for o in self.orbits:
            for i, j in o.members:
                L[i, j] = L[j, i] = o.orbit_id
        return L

    @property
    def per_vertex(self) -> list:
        n = len(self.spec.vertices)
        return [o.multiplicity // n for o in self.orbits]

    def by_id(self, oid: int) -> ChordOrbit:
        return self.orbits[oid - 1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["family", "orbit_id", "representative", "multiplicity", "euclid_cos", "euclid_angle"])
        for o in self.orbits:
            w.writerow([self.spec.name, o.orbit_id, "%d-%d" % o.representative, o.multiplicity,
                        "%.17g" % o.euclid_cos, "%.17g" % o.euclid_angle])
        return buf.getvalue()


def chord_orbits(spec: PolytopeSpec, group: SymmetryGroup | None = None) -> ChordOrbitTable:
    """Rotation-group orbits of chords {i, j}; multiplicities count ordered pairs."""
    group = group or symmetry_group(spec)
    V = spec.vertices
    n = len(V)
    iu, ju = np.triu_indices(n, 1)
    index = np.full((n, n), -1, dtype=np.int64)
    index[iu, ju] = np.arange(len(iu))
    index[ju, iu] = np.arange(len(iu))
    rows, cols = [], []
    for p in group.generator_perms:
        rows.append(np.arange(len(iu)))
        cols.append(index[p[iu], p[ju]])
    m = len(iu)
    graph = csr_matrix((np.ones(m * len(rows)), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m))
    ncomp, comp = connected_components(graph, directed=False)
    G = V @ V.T
    orbits = []
    for c in range(ncomp):
        members = np.flatnonzero(comp == c)
        cosv = G[iu[members], ju[members]]
        if np.max(cosv) - np.min(cosv) > 1e-9:
            raise GroupError("chord orbit mixes different lengths")
        rep = (int(iu[members[0]]), int(ju[members[0]]))
        cs = float(np.clip(np.mean(cosv), -1.0, 1.0))
        orbits.append((-round(cs, 9), rep, cs, [(int(iu[t]), int(ju[t])) for t in members]))
    orbits.sort(key=lambda o: (o[0], o[1]))
    table = [ChordOrbit(i + 1, rep, 2 * len(mem), cs, math.acos(cs), mem)
             for i, (_, rep, cs, mem) in enumerate(orbits)]
    if sum(o.multiplicity for o in table) != n * n - n:
        raise GroupError("chord multiplicities do not cover all ordered pairs")
    return ChordOrbitTable(spec, table)


# ---------------------------------------------------------------- sub-orbits

def _cycle(perm, start):
    out = [start]
    v = int(perm[start])
    while v != start:
        out.append(v)
        v = int(perm[v])
    return out


def pentagon_suborbits(spec: PolytopeSpec, group: SymmetryGroup, table: ChordOrbitTable, side: int):
    """Order-5 cycles of group elements whose consecutive chords lie in orbit ``side``.

    Returns (cycle, skip orbit id) pairs; the skip orbit holds the chords
    joining every second vertex of the pentagon.
    """
    L = table.labels
    found = {}
    for p in group.perms:
        for v in range(len(p)):
            if p[v] == v:
                continue
            cyc = _cycle(p, v)
            if len(cyc) != 5:
                continue
            if all(L[cyc[i], cyc[(i + 1) % 5]] == side for i in range(5)):
                skips = {int(L[cyc[i], cyc[(i + 2) % 5]]) for i in range(5)}
                if len(skips) != 1:
                    raise GroupError("pentagon skip chords fall into several orbits")
                found.setdefault(frozenset(cyc), (cyc, skips.pop()))
    if not found:
        raise GroupError("no pentagon sub-orbit with consecutive chords in orbit a%d" % side)
    return list(found.values())


def vertex_stabilizer_pentagon(spec, group, table):
    """Neighbours of vertex 0 cycled by the order-5 rotation fixing it."""
    nbrs = [j for i, j in spec.edges if i == 0]
    for p in group.perms:
        if p[0] != 0:
            continue
        cyc = _cycle(p, nbrs[0])
        if len(cyc) == 5:
            return cyc
    raise GroupError("vertex stabilizer has no 5-cycle on the neighbours")


def rhombus_quadrilaterals(table: ChordOrbitTable, side: int, diag1: int, diag2: int, limit: int = 1):
    """Vertex 4-cycles x0..x3 with sides in orbit ``side`` and diagonals in ``diag1`` / ``diag2``."""
    L = table.labels
    n = len(L)
    out = []
    for x0 in range(n):
        for x2 in np.flatnonzero(L[x0] == diag1):
            common = [v for v in np.flatnonzero(L[x0] == side) if L[x2, v] == side]
            for x1, x3 in itertools.permutations(common, 2):
                if L[x1, x3] == diag2:
                    out.append((x0, int(x1), int(x2), int(x3)))
                    if len(out) >= limit:
                        return out
    if not out:
        raise GroupError("no quadrilateral with the requested chord orbits")
    return out


# ---------------------------------------------------------------- configurations

@dataclass
class EquivariantConfiguration:
    spec: PolytopeSpec
    space: Space
    points: list
    tag: str
    params: dict
    group: SymmetryGroup
    act: object = field(repr=False, default=None)

    def apply(self, g_index: int, p):
        """Realized action of generator ``g_index`` on a point of the target space."""
        return self.act(g_index, p)

    def equivariance_error(self) -> float:
        worst = 0.0
        for gi, perm in enumerate(self.group.generator_perms):
            for i, x in enumerate(self.points):
                worst = max(worst, self.space.distance(self.apply(gi, x), self.points[int(perm[i])]))
        return worst


def build_equivariant_configuration(spec: PolytopeSpec, tag: str, params: dict | None = None,
                                    group: SymmetryGroup | None = None) -> EquivariantConfiguration:
    """A single group orbit in a zoo space realizing the polytope's rotation action.

    Tags and parameters: isometric-embed (r), hyperbolic-orbit (r),
    spherical-cap (r, radius), tree-star (offset, leg), product-with-tree (s, t, leg).
    """
    params = dict(params or {})
    group = group or symmetry_group(spec)
    V = spec.vertices
    n, k = V.shape
    gens = group.generators
    perms = group.generator_perms
    if tag == "isometric-embed":
        r = float(params.get("r", 1.0))
        space = Euclidean(k)
        pts = [r * v for v in V]
        act = lambda gi, p: gens[gi] @ p
    elif tag == "hyperbolic-orbit":
        r = float(params.get("r", 1.0))
        space = Hyperbolic(k)
        pts = [np.concatenate([[math.cosh(r)], math.sinh(r) * v]) for v in V]
        lor = [block_diag(1.0, g) for g in gens]
        act = lambda gi, p: lor[gi] @ p
    elif tag == "spherical-cap":
        R = float(params.get("radius", 1.0))
        r = float(params.get("r", 0.5))
        space = Sphere(k, R)
        if not r < space.curvature.radius_guard:
            raise RadiusGuardError("cap radius %.17g is not below pi/(2 sqrt(kappa)) = %.17g"
                                   % (r, space.curvature.radius_guard))
        rho = r / R
        pts = [R * np.concatenate([math.sin(rho) * v, [math.cos(rho)]]) for v in V]
        rot = [block_diag(g, 1.0) for g in gens]
        act = lambda gi, p: rot[gi] @ p
    elif tag == "tree-star":
        leg = float(params.get("leg", 1.0))
        off = float(params.get("offset", 0.7))
        if not 0.0 < off <= leg:
            raise DomainError("offset must lie in (0, leg]")
        space = Tree.star(n, leg)
        pts = [space.edge_point(i, off) for i in range(n)]
        autos = [_star_map(space, p) for p in perms]
        act = lambda gi, p: autos[gi](p)
    elif tag == "product-with-tree":
        s = float(params.get("s", 1.0))
        t = float(params.get("t", 1.0))
        leg = float(params.get("leg", 1.0))
        if s <= 0 or not 0.0 < t <= leg:
            raise DomainError("product weights need s > 0 and 0 < t <= leg")
        tree = Tree.star(n, leg)
        space = Product([Euclidean(k), tree])
        pts = [(s * V[i], tree.edge_point(i, t)) for i in range(n)]
        autos = [_star_map(tree, p) for p in perms]
        act = lambda gi, p: (gens[gi] @ p[0], autos[gi](p[1]))
    else:
        raise ConfigError("unknown construction tag %r" % tag)
    cfg = EquivariantConfiguration(spec, space, pts, tag, params, group, act)
    err = cfg.equivariance_error()
    if err > 1e-10 * max(1.0, max(space.magnitude(p) for p in pts)):
        raise GroupError("realized action is not equivariant (error %.3g)" % err)
    return cfg


def _star_map(tree: Tree, perm):
    """Automorphism of a star tree permuting legs like ``perm`` permutes vertices."""
    from .isometries import TreeAutomorphism

    full = [0] + [int(perm[i]) + 1 for i in range(len(perm))]
    return TreeAutomorphism(tree, full, 1)._map


# ---------------------------------------------------------------- certificates

@dataclass
class AngleReport:
    spec: PolytopeSpec
    tag: str
    center: object
    radius: float
    edge: tuple
    measured: float
    bound: float
    slack: float
    verdict: str
    label: str
    bias: float = 0.0
    notes: list = field(default_factory=list)


def _center(cfg):
    return circumcenter(cfg.space, cfg.points, symmetric=True)


def verify_polytope_angles(cfg: EquivariantConfiguration, tol: float = 1e-6, schedule=None) -> AngleReport:
    """Edge angle at the circumcenter against the Euclidean central angle."""
    res = _center(cfg)
    i, j = cfg.spec.edges[0]
    est = alexandrov_angle(cfg.space, res.center, cfg.points[i], cfg.points[j], schedule)
    bound = expected_edge_angle(cfg.spec)
    slack = est.value - bound
    verdict = "pass" if slack >= -tol else ("inconclusive" if slack >= -tol - est.upper_bias_bound else "fail")
    notes = []
    if cfg.space.curvature.kappa > 0:
        notes.append(MISPRINTS["radius-guard"])
    return AngleReport(cfg.spec, cfg.tag, res.center, res.radius, (i, j), est.value, bound, slack,
                       verdict, bound_label(cfg.spec), est.upper_bias_bound, notes)


@dataclass
class ChainLink:
    name: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass
class GramCertificate:
    spec: PolytopeSpec
    tag: str
    total: float
    method: str
    orbit_angles: dict
    chords: dict
    links: list
    a1_sq_bound: float
    a1_sq_measured: float
    angle_bound: float
    verdict: str
    notes: list = field(default_factory=list)

    @property
    def worst_link_slack(self) -> float:
        return min((lk.slack for lk in self.links), default=math.inf)


def _row_angles(cfg, c, schedule):
    pts = cfg.points
    return np.array([0.0] + [alexandrov_angle(cfg.space, c, pts[0], pts[j], schedule).value
                             for j in range(1, len(pts))])


def gram_sum_certificate(cfg: EquivariantConfiguration, tol: float = 1e-6, full_limit: int = 64,
                         schedule=None) -> GramCertificate:
    """Gram total at the circumcenter plus the family's chord-inequality chain.

    Chords are replayed in the tangent cone: a_j^2 = 2 - 2 cos(alpha_j) with
    alpha_j the measured angle of orbit j.  Links that concern the space
    itself (chord inequality on pentagons, chord-diameter bound on faces,
    parallelogram inequality) are also checked on the configuration's points.
    """
    spec = cfg.spec
    table = chord_orbits(spec, cfg.group)
    L = table.labels
    n = len(cfg.points)
    c = _center(cfg).center
    if n <= full_limit:
        summ = gram_sum(cfg.space, c, cfg.points, orbit_labels=L, schedule=schedule)
        total = summ.total
        method = "all pairs"
        ang = {o.orbit_id: float(np.mean([summ.angles[i, j] for i, j in o.members])) for o in table.orbits}
    else:
        row = _row_angles(cfg, c, schedule)
        total = float(n * np.sum(np.cos(row)))
        method = "row 0 with vertex transitivity"
        ang = {}
        for o in table.orbits:
            js = [j for j in range(1, n) if L[0, j] == o.orbit_id]
            ang[o.orbit_id] = float(np.mean(row[js]))
    a = {oid: math.sqrt(max(0.0, 2.0 - 2.0 * math.cos(v))) for oid, v in ang.items()}
    links, notes = [], []
    f = spec.family
    X = cfg.space
    P = cfg.points
    if f in ("orthoplex", "octahedron"):
        kk = spec.k
        links.append(ChainLink("cos(antipodal) >= -1", -math.cos(ang[2]), 1.0))
        links.append(ChainLink("cos(alpha_1) <= -(1 + cos(antipodal)) / (2k - 2)",
                               math.cos(ang[1]), -(1.0 + math.cos(ang[2])) / (2 * kk - 2)))
        a1_bound = 2.0
    elif f in ("hypercube", "cube"):
        kk = spec.k
        for m in range(2, kk + 1):
            links.append(ChainLink("a_%d^2 <= %d a_1^2 (tangent cone)" % (m, m), a[m] ** 2, m * a[1] ** 2))
        for m in range(2, kk + 1):
            face = [i for i, v in enumerate(spec.vertices) if np.all(v[m:] > 0)]
            fpts = [P[i] for i in face]
            fc = circumcenter(X, fpts, symmetric=True).center
            vf = spec.vertices[face]
            j = int(np.argmin(np.linalg.norm(vf[1:] - vf[0], axis=1))) + 1
            alpha = math.acos(1.0 - 2.0 / m)
            measured = alexandrov_angle(X, fc, fpts[0], fpts[j], schedule).value
            links.append(ChainLink("edge angle on a %d-face >= arccos(1 - 2/%d)" % (m, m), alpha, measured))
            try:
                slack = chord_diameter_bound_check(X, fpts, fc, 0, j, alpha, angle=measured, tol=tol)
            except DomainError:
                slack = -math.inf
            links.append(ChainLink("chord-diameter bound on a %d-face (space)" % m, -slack, 0.0))
        a1_bound = 4.0 / kk
    elif f == "icosahedron":
        cyc = vertex_stabilizer_pentagon(spec, cfg.group, table)
        if {int(L[cyc[i], cyc[(i + 1) % 5]]) for i in range(5)} != {1} or \
                {int(L[cyc[i], cyc[(i + 2) % 5]]) for i in range(5)} != {2}:
            raise GroupError("vertex-stabilizer pentagon has the wrong chord orbits")
        links.append(ChainLink("a_2 <= 2cos(pi/5) a_1 (tangent cone)", a[2], 2 * C5 * a[1]))
        links.append(ChainLink("d(h1,h3) <= 2cos(pi/5) d(h1,h2) (space)",
                               X.distance(P[cyc[0]], P[cyc[2]]), 2 * C5 * X.distance(P[cyc[0]], P[cyc[1]])))
        links.append(ChainLink("a_3 <= 2", a[3], 2.0))
        a1_bound = 4.0 / (1.0 + 4.0 * C5 ** 2)
        notes.append(MISPRINTS["icosahedron-constant"])
    elif f == "dodecahedron":
        faces = pentagon_suborbits(spec, cfg.group, table, side=1)
        cyc_f, skip_f = faces[0]
        ipent = pentagon_suborbits(spec, cfg.group, table, side=2)
        cyc_i, skip_i = ipent[0]
        if skip_f != 2 or skip_i != 5:
            raise GroupError("dodecahedron pentagons have unexpected skip orbits (a%d, a%d)" % (skip_f, skip_i))
        quad = rhombus_quadrilaterals(table, 2, 3, 4)[0]
        links.append(ChainLink("a_2 <= 2cos(pi/5) a_1 (tangent cone)", a[2], 2 * C5 * a[1]))
        links.append(ChainLink("a_5 <= 2cos(pi/5) a_2 (tangent cone)", a[5], 2 * C5 * a[2]))
        links.append(ChainLink("a_3^2 + a_4^2 <= 4 a_2^2 (tangent cone)", a[3] ** 2 + a[4] ** 2, 4 * a[2] ** 2))
        links.append(ChainLink("a_6 <= 2", a[6], 2.0))
        for name, cyc in (("face", cyc_f), ("i", cyc_i)):
            links.append(ChainLink("%s-pentagon chord inequality (space)" % name,
                                   X.distance(P[cyc[0]], P[cyc[2]]), 2 * C5 * X.distance(P[cyc[0]], P[cyc[1]])))
        links.append(ChainLink("parallelogram inequality (space)",
                               -parallelogram_check(X, *[P[q] for q in quad]), 0.0))
        a1_bound = 18.0 / (1.5 + 36.0 * C5 ** 2 + 24.0 * C5 ** 4)
        notes.extend([MISPRINTS["dodecahedron-a5"], MISPRINTS["dodecahedron-16cos"],
                      MISPRINTS["dodecahedron-heading"]])
    else:  # tetrahedron
        links.append(ChainLink("cos(alpha_1) <= -1/3", math.cos(ang[1]), -1.0 / 3.0))
        a1_bound = 8.0 / 3.0
        notes.append("tetrahedron bound reported under LS Theorem A")
    if X.curvature.kappa > 0:
        links = [lk for lk in links if not lk.name.endswith("(space)")]
        notes.append("links inside the space need CAT(0) and were skipped; tangent-cone links kept")
        notes.append(MISPRINTS["radius-guard"])
    a1_sq = a[1] ** 2
    ok = total <= tol and all(lk.slack >= -tol for lk in links) and a1_sq >= a1_bound - tol
    return GramCertificate(spec, cfg.tag, total, method, ang, a, links, a1_bound, a1_sq,
                           math.acos(max(-1.0, 1.0 - a1_bound / 2.0)), "pass" if ok else "fail", notes)


def chain_constant(spec: PolytopeSpec) -> float:
    """Lower bound on a_1^2 produced by the family's chain."""
    f = spec.family
    if f in ("orthoplex", "octahedron"):
        return 2.0
    if f in ("hypercube", "cube"):
        return 4.0 / spec.k
    if f == "icosahedron":
        return 4.0 / (1.0 + 4.0 * C5 ** 2)
    if f == "dodecahedron":
        return 18.0 / (1.5 + 36.0 * C5 ** 2 + 24.0 * C5 ** 4)
    return 8.0 / 3.0


def iterated_average(space: Space, maps, p):
    """p_1 = g_1 p, p_{k+1} = point at 1/(k+1) on [p_k, g_{k+1} p]."""
    maps = list(maps)
    if not maps:
        raise DomainError("iterated average over an empty group")
    q = maps[0](p)
    for k, g in enumerate(maps[1:], start=1):
        q = space.geodesic(q, g(p), 1.0 / (k + 1))
    return q


def group_isometries(cfg: EquivariantConfiguration):
    """Callables realizing every group element on the target space (small groups)."""
    from .isometries import TreeAutomorphism

    group = cfg.group
    out = []
    for M, perm in zip(group.elements, group.perms):
        if cfg.tag == "isometric-embed":
            out.append(lambda p, M=M: M @ p)
        elif cfg.tag == "hyperbolic-orbit":
            Lm = block_diag(1.0, M)
            out.append(lambda p, Lm=Lm: Lm @ p)
        elif cfg.tag == "spherical-cap":
            Rm = block_diag(M, 1.0)
            out.append(lambda p, Rm=Rm: Rm @ p)
        elif cfg.tag == "tree-star":
            out.append(TreeAutomorphism(cfg.space, [0] + [int(v) + 1 for v in perm], 1)._map)
        else:
            tm = TreeAutomorphism(cfg.space.factors[1], [0] + [int(v) + 1 for v in perm], 1)._map
            out.append(lambda p, M=M, tm=tm: (M @ p[0], tm(p[1])))
    return out


__all__ = [
    "PolytopeSpec", "vertices", "expected_edge_angle", "bound_label", "SymmetryGroup", "symmetry_group",
    "expected_order", "ChordOrbit", "ChordOrbitTable", "chord_orbits", "pentagon_suborbits",
    "vertex_stabilizer_pentagon", "rhombus_quadrilaterals", "EquivariantConfiguration",
    "build_equivariant_configuration", "AngleReport", "verify_polytope_angles", "ChainLink",
    "GramCertificate", "gram_sum_certificate", "chain_constant", "iterated_average",
    "group_isometries", "MISPRINTS", "FAMILIES", "TAGS",
]
