"""Obstacle geometry, exterior grids, initial data, compatibility recursion.

Two grid flavors are supported.  The radial grid covers [r0, r_max] for
problems with an exact angular reduction; its native field representation
is w = r * u, which turns the radial wave operator into d_tt - d_rr plus a
centrifugal term l(l+1)/r^2.  The masked Cartesian grid embeds a convex
obstacle into a cube with a staircase Dirichlet boundary and an absorbing
sponge band at the outer faces.
"""

import numpy as np

from . import fd
from .errors import OrderError, ParamError
from .nullforms import NullFormSpec

# mask codes for Cartesian grids
FLUID = 0
BOUNDARY = 1
OBSTACLE = 2
SPONGE = 3


class Obstacle:
    """Strictly convex obstacle centered at the origin."""

    def __init__(self, kind, params):
        if kind == "sphere":
            (r0,) = params
            if r0 <= 0:
                raise ParamError("sphere radius must be positive")
        elif kind == "ellipsoid":
            a, b, c = params
            if min(a, b, c) <= 0:
                raise ParamError("ellipsoid semi-axes must be positive")
        else:
            raise ParamError("unknown obstacle kind %r" % (kind,))
        self.kind = kind
        self.params = tuple(float(p) for p in params)

    @classmethod
    def sphere(cls, r0):
        return cls("sphere", (r0,))

    @classmethod
    def ellipsoid(cls, a, b, c):
        return cls("ellipsoid", (a, b, c))

    @property
    def semi_axes(self):
        if self.kind == "sphere":
            r0 = self.params[0]
            return np.array([r0, r0, r0])
        return np.array(self.params)

    @property
    def max_radius(self):
        return float(np.max(self.semi_axes))

    def contains(self, x):
        """True strictly inside the obstacle; x has shape (..., 3)."""
        x = np.asarray(x, dtype=float)
        s = np.sum((x / self.semi_axes) ** 2, axis=-1)
        return s < 1.0

    def support_radius(self, omega):
        """Boundary radius along unit direction(s) omega."""
        w = np.asarray(omega, dtype=float)
        q = np.sum((w / self.semi_axes) ** 2, axis=-1)
        return 1.0 / np.sqrt(q)

    def __repr__(self):
        return "Obstacle(%r, %r)" % (self.kind, self.params)


def _sponge_ramp(s, strength):
    # cubic ramp keeps the damping smooth at the band entrance
    return strength * np.clip(s, 0.0, 1.0) ** 3


class RadialGrid:
    """Uniform grid on [r0, r_max]; native fields hold w = r * u.

    angular_mode is the spherical-harmonic degree l of the reduction; the
    wave operator on w is d_tt - d_rr + l(l+1)/r^2.  Both end nodes carry
    Dirichlet conditions; an optional sponge band of sponge_cells cells
    damps outgoing waves before the outer end.
    """

    kind = "radial"

    def __init__(self, r0, r_max, n, angular_mode=0, sponge_cells=0,
                 sponge_strength=4.0):
        if not (0 < r0 < r_max):
            raise ParamError("need 0 < r0 < r_max")
        if n < 16:
            raise ParamError("need n >= 16 cells")
        if angular_mode < 0:
            raise ParamError("angular_mode must be >= 0")
        if sponge_cells < 0 or sponge_cells > n // 2:
            raise ParamError("sponge_cells out of range")
        self.r0 = float(r0)
        self.r_max = float(r_max)
        self.n = int(n)
        self.angular_mode = int(angular_mode)
        self.sponge_cells = int(sponge_cells)
        self.sponge_strength = float(sponge_strength)
        self.h = (self.r_max - self.r0) / self.n
        self.r = self.r0 + self.h * np.arange(self.n + 1)

    @property
    def n_nodes(self):
        return self.n + 1

    def zeros(self):
        return np.zeros(self.n_nodes)

    def sponge_sigma(self):
        """Damping coefficient per node (zero outside the band)."""
        sig = np.zeros(self.n_nodes)
        if self.sponge_cells > 0:
            start = self.n - self.sponge_cells
            s = (np.arange(self.n + 1) - start) / self.sponge_cells
            sig = _sponge_ramp(s, self.sponge_strength)
        return sig

    def to_physical(self, field):
        """w -> u = w / r."""
        return np.asarray(field, dtype=float) / self.r

    def from_physical(self, u):
        """u -> w = r * u."""
        return np.asarray(u, dtype=float) * self.r

    def physical_radial_derivative(self, field):
        """d u / d r from a native w field: (w' - w/r) / r."""
        w = np.asarray(field, dtype=float)
        return (fd.d1(w, self.h) - w / self.r) / self.r

    def __repr__(self):
        return ("RadialGrid(r0=%g, r_max=%g, n=%d, l=%d, sponge=%d)"
                % (self.r0, self.r_max, self.n, self.angular_mode,
                   self.sponge_cells))


class CartesianGrid:
    """Cube [-L/2, L/2]^3 with (n+1)^3 nodes and a mask classifying them."""

    kind = "cartesian"

    def __init__(self, obstacle, L, n, mask, sponge_cells, sponge_strength):
        self.obstacle = obstacle
        self.L = float(L)
        self.n = int(n)
        self.h = self.L / self.n
        self.mask = mask
        self.sponge_cells = int(sponge_cells)
        self.sponge_strength = float(sponge_strength)
        self.axis = -self.L / 2.0 + self.h * np.arange(self.n + 1)

    @property
    def n_nodes(self):
        return (self.n + 1) ** 3

    def zeros(self):
        m = self.n + 1
        return np.zeros((m, m, m))

    def coords(self):
        """Node coordinates, shape (m, m, m, 3)."""
        X, Y, Z = np.meshgrid(self.axis, self.axis, self.axis, indexing="ij")
        return np.stack([X, Y, Z], axis=-1)

    def radii(self):
        c = self.coords()
        return np.sqrt(np.sum(c * c, axis=-1))

    def updated(self):
        """Nodes the stepper evolves (fluid plus sponge)."""
        return (self.mask == FLUID) | (self.mask == SPONGE)

    def to_physical(self, field):
        return np.asarray(field, dtype=float)

    def from_physical(self, u):
        return np.asarray(u, dtype=float)

    def sponge_sigma(self):
        m = self.n + 1
        sig = np.zeros((m, m, m))
        if self.sponge_cells > 0:
            idx = np.arange(m)
            dist = np.minimum(idx, m - 1 - idx)
            d3 = np.minimum.reduce(np.meshgrid(dist, dist, dist,
                                               indexing="ij"))
            s = (self.sponge_cells - d3) / self.sponge_cells
            sig = _sponge_ramp(s, self.sponge_strength)
            sig[self.mask == OBSTACLE] = 0.0
            sig[self.mask == BOUNDARY] = 0.0
        return sig

    def __repr__(self):
        return ("CartesianGrid(L=%g, n=%d, sponge=%d, obstacle=%r)"
                % (self.L, self.n, self.sponge_cells, self.obstacle))


def build_radial_grid(r0, r_max, n, angular_mode=0, sponge_cells=0,
                      sponge_strength=4.0):
    return RadialGrid(r0, r_max, n, angular_mode, sponge_cells,
                      sponge_strength)


def build_masked_grid(obstacle, L, n, sponge_cells=8, sponge_strength=4.0):
    """Mask a cube around the obstacle.

    Nodes strictly inside the obstacle are solid; fluid nodes with a solid
    6-neighbor form the Dirichlet staircase; the outer faces are Dirichlet
    as well, with the sponge band just inside them.
    """
    if obstacle.max_radius >= L / 4.0:
        raise ParamError("obstacle must fit inside |x| < L/4")
    if n < 16:
        raise ParamError("need n >= 16 cells")
    if sponge_cells < 8 and sponge_cells != 0:
        raise ParamError("sponge band must be at least 8 cells (or 0)")
    m = n + 1
    axis = -L / 2.0 + (L / n) * np.arange(m)
    X, Y, Z = np.meshgrid(axis, axis, axis, indexing="ij")
    pts = np.stack([X, Y, Z], axis=-1)
    mask = np.full((m, m, m), FLUID, dtype=np.uint8)
    solid = obstacle.contains(pts)
    mask[solid] = OBSTACLE

    near = np.zeros_like(solid)
    for ax in range(3):
        near |= np.roll(solid, 1, axis=ax)
        near |= np.roll(solid, -1, axis=ax)
    mask[near & ~solid] = BOUNDARY

    if sponge_cells > 0:
        idx = np.arange(m)
        dist = np.minimum(idx, m - 1 - idx)
        d3 = np.minimum.reduce(np.meshgrid(dist, dist, dist, indexing="ij"))
        band = (d3 < sponge_cells) & (mask == FLUID)
        mask[band] = SPONGE

    # outer faces are pinned
    for ax in range(3):
        sl = [slice(None)] * 3
        for end in (0, -1):
            sl[ax] = end
            face = mask[tuple(sl)]
            face[face != OBSTACLE] = BOUNDARY
    return CartesianGrid(obstacle, L, n, mask, sponge_cells, sponge_strength)


class InitialData:
    """Cauchy data (f, g) as native grid fields.

    On radial grids the stored arrays are w-representation (r * u); use
    from_physical to sample ordinary functions of r.  Boundary vanishing is
    not enforced here; solvers check it where their contracts require it.
    """

    def __init__(self, grid, f, g):
        f = np.asarray(f, dtype=float)
        g = np.asarray(g, dtype=float)
        gshape = grid.zeros().shape
        # leading axes carry system components
        if f.shape[len(f.shape) - len(gshape):] != gshape or g.shape != f.shape:
            raise ParamError("data shape does not match grid")
        self.grid = grid
        self.f = f
        self.g = g

    @classmethod
    def from_physical(cls, grid, f_func, g_func):
        """Sample physical callables (of r, or of (x, y, z) points)."""
        if grid.kind == "radial":
            f = grid.from_physical(f_func(grid.r))
            g = grid.from_physical(g_func(grid.r))
        else:
            pts = grid.coords()
            f = np.asarray(f_func(pts), dtype=float)
            g = np.asarray(g_func(pts), dtype=float)
            f = np.where(grid.mask == OBSTACLE, 0.0, f)
            g = np.where(grid.mask == OBSTACLE, 0.0, g)
        return cls(grid, f, g)

    def scaled(self, factor):
        return InitialData(self.grid, self.f * factor, self.g * factor)

    def boundary_residuals(self):
        """(max |f|, max |g|) over Dirichlet boundary nodes."""
        if self.grid.kind == "radial":
            return (float(np.max(np.abs(self.f[..., 0]))),
                    float(np.max(np.abs(self.g[..., 0]))))
        b = self.grid.mask == BOUNDARY
        return (float(np.max(np.abs(self.f[..., b]), initial=0.0)),
                float(np.max(np.abs(self.g[..., b]), initial=0.0)))


# ---------------------------------------------------------------------------
# compatibility recursion

MAX_COMPAT_ORDER = 4


def _laplacian_physical(grid, u):
    """Laplacian of a physical field (radial: includes the mode term)."""
    if grid.kind == "radial":
        l = grid.angular_mode
        lap = fd.d2(u, grid.h) + 2.0 * fd.d1(u, grid.h) / grid.r
        if l:
            lap = lap - l * (l + 1) * u / grid.r**2
        return lap
    lap = np.zeros_like(u)
    for ax in range(3):
        lap += fd.d2(u, grid.h, axis=ax)
    return lap


def _gradient_physical(grid, u):
    if grid.kind == "radial":
        return fd.d1(u, grid.h)
    return [fd.d1(u, grid.h, axis=ax) for ax in range(3)]


def compatibility_functions(data: InitialData, spec: NullFormSpec, k):
    """Formal time-derivative traces psi_0..psi_k of the solution at t = 0.

    psi_0 = f, psi_1 = g, and each following order comes from substituting
    the Taylor expansion in t into d_tt u = Lap u + Q(du, du) and matching
    powers of t.  Returned fields are physical (u-space), as a list of
    arrays of shape (n_components,) + grid shape.

    Spatial derivatives are centered differences, so each extra order
    costs accuracy; orders above 4 are refused.
    """
    if k < 0:
        raise ParamError("order k must be >= 0")
    if k > MAX_COMPAT_ORDER:
        raise OrderError("compatibility order capped at %d" % MAX_COMPAT_ORDER)
    grid = data.grid
    N = spec.n_components
    shape = grid.zeros().shape
    fshape = (N,) + shape

    f = grid.to_physical(data.f) if grid.kind == "radial" else data.f
    g = grid.to_physical(data.g) if grid.kind == "radial" else data.g
    f = np.broadcast_to(f, fshape).copy()
    g = np.broadcast_to(g, fshape).copy()

    if not spec.is_linear():
        if grid.kind == "radial" and not spec.radial_compatible():
            raise ParamError("only q0 terms are radially reducible")
        if grid.kind == "radial" and grid.angular_mode != 0:
            raise ParamError("nonlinear recursion needs angular_mode = 0")

    # Taylor coefficients a_j = psi_j / j!
    a = [f, g]
    for p in range(k - 1):
        nxt = np.empty(fshape)
        for i in range(N):
            nxt[i] = _laplacian_physical(grid, a[p][i])
        if not spec.is_linear():
            nxt += _q_taylor_coefficient(grid, spec, a, p)
        a.append(nxt / ((p + 1) * (p + 2)))

    fact = 1.0
    psis = []
    for j, aj in enumerate(a[:k + 1]):
        if j >= 2:
            fact *= j
        psis.append(aj * (fact if j >= 2 else 1.0))
    return psis


def _q_taylor_coefficient(grid, spec, a, p):
    """Coefficient of t^p in Q(du, du) given Taylor coefficients a_0..a_{p+1}."""
    N = spec.n_components
    shape = a[0].shape[1:]
    if grid.kind == "radial":
        # gradient of component i at Taylor order m: (time, radial) pair
        gt = [[(m + 1) * a[m + 1][i] for m in range(p + 1)] for i in range(N)]
        gr = [[_gradient_physical(grid, a[m][i]) for m in range(p + 1)]
              for i in range(N)]
        out = np.zeros((N,) + shape)
        for (i, j, kk, coeff, form) in spec.terms:
            acc = np.zeros(shape)
            for m in range(p + 1):
                acc += gt[j][m] * gt[kk][p - m] - gr[j][m] * gr[kk][p - m]
            out[i] += coeff * acc
        return out

    grads = []
    for i in range(N):
        per_order = []
        for m in range(p + 1):
            G = np.empty(shape + (4,))
            G[..., 0] = (m + 1) * a[m + 1][i]
            gx = _gradient_physical(grid, a[m][i])
            for ax in range(3):
                G[..., 1 + ax] = gx[ax]
            per_order.append(G)
        grads.append(per_order)

    from .nullforms import eval_form
    out = np.zeros((N,) + shape)
    for (i, j, kk, coeff, form) in spec.terms:
        for m in range(p + 1):
            out[i] += coeff * eval_form(form, grads[j][m], grads[kk][p - m])
    return out


def check_compatibility(data: InitialData, spec: NullFormSpec, k):
    """Max-norm of each psi_j on the obstacle boundary nodes."""
    psis = compatibility_functions(data, spec, k)
    grid = data.grid
    out = []
    for psi in psis:
        if grid.kind == "radial":
            out.append(float(np.max(np.abs(psi[..., 0]))))
        else:
            b = grid.mask == BOUNDARY
            out.append(float(np.max(np.abs(psi[..., b]), initial=0.0)))
    return out
