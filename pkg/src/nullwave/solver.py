"""Explicit stepping for the exterior Dirichlet wave equation.

The scheme is velocity Verlet (kick-drift-kick), algebraically the same
u-sequence as the classic leapfrog u^{n+1} = 2u^n - u^{n-1} + dt^2 (Lap u + F)
when the forcing is sampled at the step midpoint, but it carries the
velocity explicitly, which makes energy evaluation and sponge damping
plain pointwise operations.

Fields are stored in each grid's native representation: w = r * u on
radial grids, u itself on Cartesian grids.  Leading axes are allowed, so
a stack of components evolves in one call.
"""

import numpy as np

from . import fd
from .errors import CFLError, FitError, NaNError, ParamError
from .exterior import InitialData

CFL_SAFETY = 0.9
NAN_CHECK_INTERVAL = 100


def cfl_limit(grid):
    """Largest admissible dt for the explicit scheme on this grid."""
    if grid.kind == "radial":
        return CFL_SAFETY * grid.h
    return CFL_SAFETY * grid.h / np.sqrt(3.0)


class WaveState:
    """Displacement and velocity at one instant, native representation."""

    __slots__ = ("grid", "u", "v", "t")

    def __init__(self, grid, u, v, t=0.0):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if u.shape != v.shape:
            raise ParamError("u and v shapes differ")
        gshape = grid.zeros().shape
        if u.shape[len(u.shape) - len(gshape):] != gshape:
            raise ParamError("field shape does not end with grid shape")
        self.grid = grid
        self.u = u
        self.v = v
        self.t = float(t)

    def copy(self):
        return WaveState(self.grid, self.u.copy(), self.v.copy(), self.t)


def state_from_data(data: InitialData):
    return WaveState(data.grid, data.f.copy(), data.g.copy(), 0.0)


def _laplace(grid, u):
    # native spatial operator: d_rr - l(l+1)/r^2 on w, or the 7-point
    # Laplacian on u; pinned nodes are overwritten after each update
    if grid.kind == "radial":
        acc = fd.d2(u, grid.h, axis=-1)
        l = grid.angular_mode
        if l:
            acc -= (l * (l + 1)) * u / grid.r**2
        return acc
    acc = fd.d2(u, grid.h, axis=-3)
    acc += fd.d2(u, grid.h, axis=-2)
    acc += fd.d2(u, grid.h, axis=-1)
    return acc


def _pin_u(grid, u, t, boundary_values):
    if grid.kind == "radial":
        if boundary_values is None:
            u[..., 0] = 0.0
            u[..., -1] = 0.0
        else:
            (uL, uR), _ = boundary_values(t)
            u[..., 0] = uL
            u[..., -1] = uR
    else:
        if boundary_values is not None:
            raise ParamError("boundary_values supported on radial grids only")
        u[..., ~grid.updated()] = 0.0


def _pin_v(grid, v, t, boundary_values):
    if grid.kind == "radial":
        if boundary_values is None:
            v[..., 0] = 0.0
            v[..., -1] = 0.0
        else:
            _, (vL, vR) = boundary_values(t)
            v[..., 0] = vL
            v[..., -1] = vR
    else:
        v[..., ~grid.updated()] = 0.0


def _pin(grid, u, v, t, boundary_values):
    _pin_u(grid, u, t, boundary_values)
    _pin_v(grid, v, t, boundary_values)


def _step_core(grid, u, v, t, dt, f_mid, damp, boundary_values):
    a = _laplace(grid, u)
    if f_mid is not None:
        a = a + f_mid
    vh = v + (0.5 * dt) * a
    un = u + dt * vh
    # pin before the second kick so near-boundary stencils read the
    # imposed values, not the drifted ones
    _pin_u(grid, un, t + dt, boundary_values)
    a = _laplace(grid, un)
    if f_mid is not None:
        a = a + f_mid
    vn = vh + (0.5 * dt) * a
    if damp is not None:
        vn = vn * damp
    _pin_v(grid, vn, t + dt, boundary_values)
    return un, vn


def step(state: WaveState, forcing, dt, boundary_values=None):
    """One explicit step.

    forcing is a native grid field (or None); for time-dependent forcing
    sample it at the step midpoint t + dt/2 to keep second order.
    """
    grid = state.grid
    if dt > cfl_limit(grid) * (1.0 + 1e-12):
        raise CFLError("dt=%g exceeds CFL limit %g" % (dt, cfl_limit(grid)))
    damp = None
    if grid.sponge_cells > 0:
        damp = np.exp(-grid.sponge_sigma() * dt)
    un, vn = _step_core(grid, state.u, state.v, state.t, dt, forcing, damp,
                        boundary_values)
    if not np.all(np.isfinite(un)):
        raise NaNError("non-finite field after step at t=%g" % (state.t + dt))
    return WaveState(grid, un, vn, state.t + dt)


class Trajectory:
    """Snapshots of a run at a uniform stride of the step size."""

    def __init__(self, grid, times, u, v=None, forcing=None, dt=None,
                 stride=1):
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or len(times) < 1:
            raise ParamError("times must be a nonempty 1d array")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise ParamError("times must be strictly increasing")
        self.grid = grid
        self.times = times
        self.u = u
        self.v = v
        self.forcing = forcing
        self.dt = dt
        self.stride = stride

    @property
    def n_snapshots(self):
        return len(self.times)

    @property
    def snap_dt(self):
        if len(self.times) < 2:
            return 0.0
        return float(self.times[1] - self.times[0])

    def state(self, i):
        if self.v is None:
            raise ParamError("trajectory stored without velocities")
        return WaveState(self.grid, self.u[i], self.v[i], self.times[i])

    @property
    def final_state(self):
        return self.state(self.n_snapshots - 1)

    def physical(self):
        """All snapshots converted to physical u values."""
        if self.grid.kind == "radial":
            return self.u / self.grid.r
        return self.u

    def sup_series(self):
        """(times, sup_x |u|) over evolved nodes, physical values."""
        up = self.physical()
        if self.grid.kind == "radial":
            sup = np.max(np.abs(up), axis=tuple(range(1, up.ndim)))
        else:
            live = self.grid.updated()
            sup = np.array([np.max(np.abs(up[i][..., live]), initial=0.0)
                            for i in range(self.n_snapshots)])
        return self.times, sup

    def local_energy_series(self, A):
        if self.v is None:
            raise ParamError("trajectory stored without velocities")
        vals = np.array([local_energy(self.state(i), A)
                         for i in range(self.n_snapshots)])
        return self.times, vals


def solve_linear(data: InitialData, forcing, t_end, dt=None, stride=1,
                 boundary_values=None, store_v=True, record_forcing=False):
    """March the linear wave equation to at least t_end.

    forcing may be None, a callable t -> native field (evaluated at step
    midpoints), or an array of per-step fields of shape
    (n_steps + 1,) + field shape, in which case midpoint values are taken
    as adjacent averages.
    """
    grid = data.grid
    limit = cfl_limit(grid)
    if dt is None:
        dt = limit
    if dt <= 0:
        raise ParamError("dt must be positive")
    if dt > limit * (1.0 + 1e-12):
        raise CFLError("dt=%g exceeds CFL limit %g" % (dt, limit))
    if stride < 1:
        raise ParamError("stride must be >= 1")
    n_steps = int(np.ceil(t_end / dt - 1e-12))
    n_steps = max(n_steps, 1)
    if n_steps % stride:
        n_steps += stride - n_steps % stride

    recorded = None
    if isinstance(forcing, np.ndarray):
        recorded = forcing
        if recorded.shape[0] < n_steps + 1:
            raise ParamError("recorded forcing shorter than the run")

    u = data.f.copy()
    v = data.g.copy()
    _pin(grid, u, v, 0.0, boundary_values)

    damp = None
    if grid.sponge_cells > 0:
        damp = np.exp(-grid.sponge_sigma() * dt)

    n_snap = n_steps // stride + 1
    us = np.empty((n_snap,) + u.shape)
    vs = np.empty_like(us) if store_v else None
    fs = np.empty_like(us) if record_forcing else None
    us[0] = u
    if store_v:
        vs[0] = v
    if record_forcing:
        fs[0] = _forcing_at(forcing, recorded, 0, 0.0, u.shape)

    t = 0.0
    for k in range(n_steps):
        if recorded is not None:
            f_mid = 0.5 * (recorded[k] + recorded[k + 1])
        elif callable(forcing):
            f_mid = forcing(t + 0.5 * dt)
        else:
            f_mid = None
        u, v = _step_core(grid, u, v, t, dt, f_mid, damp, boundary_values)
        t = (k + 1) * dt
        if (k + 1) % NAN_CHECK_INTERVAL == 0 and not np.all(np.isfinite(u)):
            raise NaNError("non-finite field at t=%g" % t)
        if (k + 1) % stride == 0:
            i = (k + 1) // stride
            us[i] = u
            if store_v:
                vs[i] = v
            if record_forcing:
                fs[i] = _forcing_at(forcing, recorded, k + 1, t, u.shape)
    if not np.all(np.isfinite(u)):
        raise NaNError("non-finite field at final time %g" % t)

    times = dt * stride * np.arange(n_snap)
    return Trajectory(grid, times, us, vs, fs, dt=dt, stride=stride)


def _forcing_at(forcing, recorded, k, t, shape):
    if recorded is not None:
        return recorded[k]
    if callable(forcing):
        return np.broadcast_to(np.asarray(forcing(t), dtype=float),
                               shape).copy()
    return np.zeros(shape)


# ---------------------------------------------------------------------------
# energy functionals

def energy(state: WaveState):
    return local_energy(state, None)


def local_energy(state: WaveState, A):
    """Sum of |du|^2 + |u|^2 over evolved nodes, restricted to |x| < A.

    A = None means no restriction.  All terms are nonnegative, so the
    value is nondecreasing in A.
    """
    if A is not None and A <= 0:
        raise ParamError("A must be positive")
    grid = state.grid
    if grid.kind == "radial":
        w, vw = state.u, state.v
        r = grid.r
        wr = fd.d1(w, grid.h, axis=-1)
        uphys = w / r
        dens = vw**2 + (wr - uphys)**2 + w**2
        l = grid.angular_mode
        if l:
            dens = dens + (l * (l + 1)) * uphys**2
        wts = np.full(grid.n_nodes, grid.h)
        wts[0] = wts[-1] = 0.5 * grid.h
        if A is not None:
            wts = np.where(r < A, wts, 0.0)
        return float(4.0 * np.pi * np.sum(dens * wts))
    u, v = state.u, state.v
    dens = v**2 + u**2
    for ax in (-3, -2, -1):
        dens = dens + fd.d1(u, grid.h, axis=ax) ** 2
    live = grid.updated()
    if A is not None:
        live = live & (grid.radii() < A)
    return float(np.sum(dens[..., live]) * grid.h**3)


# ---------------------------------------------------------------------------
# decay fitting

class DecayFit:
    """Least-squares decay model for a positive time series.

    model "exponential": value ~ amplitude * exp(-rate * t).
    model "power": value ~ amplitude * (1 + t)^rate (rate is the signed
    exponent).  residual is the RMS misfit of log(value).
    """

    def __init__(self, model, rate, amplitude, window, residual):
        self.model = model
        self.rate = float(rate)
        self.amplitude = float(amplitude)
        self.window = (float(window[0]), float(window[1]))
        self.residual = float(residual)

    @property
    def exponent(self):
        return self.rate

    def __repr__(self):
        return ("DecayFit(%s, rate=%.6g, amplitude=%.6g, window=%s, "
                "residual=%.3g)" % (self.model, self.rate, self.amplitude,
                                    self.window, self.residual))


def fit_decay(series, model, window=None):
    """Fit log(value) against t or log(1+t) over an optional window."""
    if model not in ("exponential", "power"):
        raise ParamError("model must be 'exponential' or 'power'")
    if isinstance(series, tuple) and len(series) == 2:
        t = np.asarray(series[0], dtype=float)
        val = np.asarray(series[1], dtype=float)
    else:
        arr = np.asarray(series, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ParamError("series must be (t, value) arrays or Nx2")
        t, val = arr[:, 0], arr[:, 1]
    if window is not None:
        keep = (t >= window[0]) & (t <= window[1])
        t, val = t[keep], val[keep]
    if len(t) < 10:
        raise FitError("need at least 10 samples in the fit window")
    if np.any(val <= 0):
        raise FitError("decay fit requires positive values")
    x = t if model == "exponential" else np.log1p(t)
    y = np.log(val)
    slope, intercept = np.polyfit(x, y, 1)
    resid = np.sqrt(np.mean((y - (intercept + slope * x)) ** 2))
    rate = -slope if model == "exponential" else slope
    return DecayFit(model, rate, np.exp(intercept), (t[0], t[-1]), resid)
