"""Quadrature rules and orthonormal modal bases on arbitrary polygonal cells."""

import numpy as np


class BasisError(Exception):
    pass


class Quadrature:
    """A set of 2D nodes and positive weights."""

    def __init__(self, nodes, weights):
        self.nodes = np.asarray(nodes, dtype=float)
        self.weights = np.asarray(weights, dtype=float)

    def integrate(self, f):
        vals = f(self.nodes[:, 0], self.nodes[:, 1])
        return np.dot(self.weights, vals)


def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def triangle_quadrature(v0, v1, v2, degree):
    """Quadrature on the triangle (v0, v1, v2), exact for total degree <= degree.

    Uses a collapsed (Duffy) tensor Gauss rule on the reference triangle; the
    Jacobian factor raises the polynomial degree by one in the collapsed
    direction, hence the n = ceil((degree + 2) / 2) point count per direction.
    """
    n = max(1, (degree + 3) // 2)
    xg, wg = _gauss_legendre(n)
    a = 0.5 * (xg + 1.0)  # map to [0, 1]
    wa = 0.5 * wg
    A, B = np.meshgrid(a, a, indexing="ij")
    WA, WB = np.meshgrid(wa, wa, indexing="ij")
    # reference triangle (0,0), (1,0), (0,1): x = a (1 - b), y = b
    xr = (A * (1.0 - B)).ravel()
    yr = B.ravel()
    w = (WA * WB * (1.0 - B)).ravel()

    v0 = np.asarray(v0, float)
    e1 = np.asarray(v1, float) - v0
    e2 = np.asarray(v2, float) - v0
    jac = e1[0] * e2[1] - e1[1] * e2[0]
    nodes = v0[None, :] + np.outer(xr, e1) + np.outer(yr, e2)
    return Quadrature(nodes, w * jac)


def polygon_quadrature(vertices, degree):
    """Quadrature exact for bivariate polynomials of total degree <= degree
    on a polygon star-shaped from its centroid (fan triangulation)."""
    verts = np.asarray(vertices, dtype=float)
    if len(verts) < 3:
        raise BasisError("polygon needs at least 3 vertices")
    area, centroid = polygon_area_centroid(verts)
    if area < 1e-14:
        raise BasisError(f"degenerate polygon (area {area:g})")
    nodes = []
    weights = []
    nv = len(verts)
    for i in range(nv):
        q = triangle_quadrature(centroid, verts[i], verts[(i + 1) % nv], degree)
        nodes.append(q.nodes)
        weights.append(q.weights)
    return Quadrature(np.vstack(nodes), np.concatenate(weights))


def edge_quadrature(p0, p1, degree):
    """Gauss-Legendre rule on the segment [p0, p1], exact for degree-q
    polynomials along the edge; weights sum to the edge length."""
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    length = np.linalg.norm(p1 - p0)
    if length == 0.0:
        raise BasisError("zero-length edge")
    n = max(1, (degree + 2) // 2)
    xg, wg = _gauss_legendre(n)
    t = 0.5 * (xg + 1.0)
    nodes = p0[None, :] + np.outer(t, p1 - p0)
    return Quadrature(nodes, 0.5 * length * wg)


def polygon_area_centroid(verts):
    verts = np.asarray(verts, float)
    x = verts[:, 0]
    y = verts[:, 1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * np.sum(cross)
    cx = np.sum((x + xn) * cross) / (6.0 * area)
    cy = np.sum((y + yn) * cross) / (6.0 * area)
    return area, np.array([cx, cy])


def monomial_exponents(p):
    """Graded lexicographic exponent pairs: 1, x, y, x^2, xy, y^2, ..."""
    return [(d - j, j) for d in range(p + 1) for j in range(d + 1)]


def n_local(p):
    return (p + 1) * (p + 2) // 2


def _monomial_values(exps, s):
    # s: (npts, 2) centered-scaled coordinates
    out = np.empty((len(s), len(exps)))
    for k, (i, j) in enumerate(exps):
        out[:, k] = s[:, 0] ** i * s[:, 1] ** j
    return out


def _monomial_grads(exps, s, scale):
    out = np.zeros((len(s), len(exps), 2))
    for k, (i, j) in enumerate(exps):
        if i > 0:
            out[:, k, 0] = i * s[:, 0] ** (i - 1) * s[:, 1] ** j / scale
        if j > 0:
            out[:, k, 1] = j * s[:, 0] ** i * s[:, 1] ** (j - 1) / scale
    return out


class ElementBasis:
    """Orthonormal modal basis on one polygonal cell.

    Basis functions are linear combinations of centered-scaled monomials
    ((x - cx)/d)^i ((y - cy)/d)^j with c the centroid and d the cell diameter.
    The combination coefficients come from modified Gram-Schmidt under the
    L2 inner product of the cell quadrature, so the Gram matrix is the
    identity and the first function is 1/sqrt(area).
    """

    def __init__(self, vertices, p, quad_degree=None):
        if not (0 <= p <= 3):
            raise BasisError(f"degree p={p} unsupported (0..3)")
        self.vertices = np.asarray(vertices, dtype=float)
        self.p = p
        self.exps = monomial_exponents(p)
        self.n_loc = len(self.exps)
        self.area, self.centroid = polygon_area_centroid(self.vertices)
        d = self.vertices - self.centroid
        self.diameter = 2.0 * np.max(np.hypot(d[:, 0], d[:, 1]))
        if quad_degree is None:
            quad_degree = max(2 * p, 2 * p + 2 if p > 0 else 2)
        self.quadrature = polygon_quadrature(self.vertices, quad_degree)
        self.coeffs = self._orthonormalize()

    def _orthonormalize(self):
        q = self.quadrature
        s = (q.nodes - self.centroid) / self.diameter
        V = _monomial_values(self.exps, s)
        w = q.weights
        n = self.n_loc
        C = np.eye(n)
        # modified Gram-Schmidt, twice for stability
        for _ in range(2):
            B = V @ C.T  # basis values at quad nodes, (nq, n)
            for i in range(n):
                for j in range(i):
                    proj = np.dot(w, B[:, i] * B[:, j])
                    B[:, i] -= proj * B[:, j]
                    C[i] -= proj * C[j]
                nrm2 = np.dot(w, B[:, i] ** 2)
                if nrm2 <= 0.0 or not np.isfinite(nrm2):
                    raise BasisError(
                        f"numerically dependent monomials on cell at {self.centroid}"
                    )
                nrm = np.sqrt(nrm2)
                B[:, i] /= nrm
                C[i] /= nrm
        return C

    def eval(self, points):
        """Basis values, shape (npts, n_loc)."""
        pts = np.atleast_2d(np.asarray(points, float))
        s = (pts - self.centroid) / self.diameter
        return _monomial_values(self.exps, s) @ self.coeffs.T

    def eval_grad(self, points):
        """Basis gradients, shape (npts, n_loc, 2)."""
        pts = np.atleast_2d(np.asarray(points, float))
        s = (pts - self.centroid) / self.diameter
        G = _monomial_grads(self.exps, s, self.diameter)
        return np.einsum("qmd,nm->qnd", G, self.coeffs)

    def gram(self):
        B = self.eval(self.quadrature.nodes)
        return np.einsum("q,qi,qj->ij", self.quadrature.weights, B, B)


class DgSpace:
    """Per-element orthonormal bases and quadratures for a PolyMesh."""

    def __init__(self, mesh, p):
        self.mesh = mesh
        self.p = p
        self.n_loc = n_local(p)
        vol_degree = max(2 * p, 2 * p + 2 if p > 0 else 2)
        self.bases = [
            ElementBasis(mesh.cell_vertices(c), p, quad_degree=vol_degree)
            for c in range(mesh.n_cells)
        ]
        edge_degree = 2 * p + 1
        self.edge_quads = [
            edge_quadrature(mesh.vertices[e.v0], mesh.vertices[e.v1], edge_degree)
            for e in mesh.edges
        ]

    def project(self, fn):
        """Per-cell L2 projection of fn(x, y); returns (n_cells, n_loc)."""
        out = np.empty((self.mesh.n_cells, self.n_loc))
        for c, basis in enumerate(self.bases):
            q = basis.quadrature
            vals = fn(q.nodes[:, 0], q.nodes[:, 1])
            B = basis.eval(q.nodes)
            out[c] = np.einsum("q,q,qi->i", q.weights, vals, B)
        return out

    def evaluate(self, coeffs, cell, points):
        """Evaluate the DG function with modal coefficients at points in a cell."""
        return self.bases[cell].eval(points) @ np.asarray(coeffs)[cell]
