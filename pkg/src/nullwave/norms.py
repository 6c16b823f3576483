"""Discrete norms used by the decay and existence estimates.

Weighted Sobolev data norms, space-time null-form norms, and the
tip-weighted cylinder norms, all by quadrature on the solver grids.
Cylinder quantities are never computed on a sphere mesh: Minkowski
quadrature is pushed forward through the compactification, with the
volume element picking up a factor of the fourth power of the conformal
factor.
"""

import numpy as np

from . import fd, penrose
from .errors import DomainError, OrderError, ParamError
from .nullforms import NullFormSpec, eval_form


def _trapezoid(h, n):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _radial_volume(grid):
    return 4.0 * np.pi * grid.r**2 * _trapezoid(grid.h, grid.n_nodes)


# ---------------------------------------------------------------------------
# data-space norms

def weighted_sobolev_norm(field, m, j, grid):
    """Weighted Sobolev norm with weight (1 + |x|^2)^(|alpha| + j).

    field holds physical values (components may be stacked in leading
    axes).  The second-order block is the Hessian Frobenius norm, which
    for radial fields is f''^2 + 2 (f'/r)^2.
    """
    if m < 0 or m > 2:
        raise OrderError("only orders m <= 2 are supported")
    f = np.asarray(field, dtype=float)
    gshape = grid.zeros().shape
    f = f.reshape((-1,) + gshape)

    if grid.kind == "radial":
        r = grid.r
        W = 1.0 + r * r
        vol = _radial_volume(grid)
        acc = np.sum(f * f, axis=0) * W**j
        if m >= 1:
            fr = fd.d1(f, grid.h, axis=-1)
            acc += np.sum(fr * fr, axis=0) * W**(1 + j)
        if m >= 2:
            frr = fd.d2(f, grid.h, axis=-1)
            hess = frr**2 + 2.0 * (fr / r) ** 2
            acc += np.sum(hess, axis=0) * W**(2 + j)
        return float(np.sqrt(np.sum(acc * vol)))

    live = grid.updated()
    W = 1.0 + np.sum(grid.coords() ** 2, axis=-1)
    acc = np.sum(f * f, axis=0) * W**j
    grads = None
    if m >= 1:
        grads = [fd.d1(f, grid.h, axis=ax) for ax in (-3, -2, -1)]
        gsq = sum(g * g for g in grads)
        acc += np.sum(gsq, axis=0) * W**(1 + j)
    if m >= 2:
        hess = np.zeros_like(acc)
        for a in range(3):
            daa = fd.d2(f, grid.h, axis=a - 3)
            hess += np.sum(daa * daa, axis=0)
            for b in range(a + 1, 3):
                dab = fd.d1(grads[a], grid.h, axis=b - 3)
                hess += 2.0 * np.sum(dab * dab, axis=0)
        acc += hess * W**(2 + j)
    return float(np.sqrt(np.sum(acc[live]) * grid.h**3))


def data_smallness_norm(data):
    """The combined data size the small-data theory is phrased in."""
    grid = data.grid
    f = grid.to_physical(data.f)
    g = grid.to_physical(data.g)
    return weighted_sobolev_norm(f, 2, 1, grid) \
        + weighted_sobolev_norm(g, 1, 2, grid)


def scale_to_data_norm(data, target):
    """Rescale data so its smallness norm equals target; returns (data, old)."""
    n = data_smallness_norm(data)
    if n == 0:
        raise ParamError("cannot rescale zero data")
    return data.scaled(target / n), n


def sphere_sobolev_norm(grid, field, order):
    """Sobolev surrogate on the compactified t = 0 slice (radial grids).

    The slice maps to the 3-sphere with polar angle R = 2 arctan r; a
    radial field becomes zonal, and the norm is built from d/dR and the
    zonal Laplacian F_RR + 2 cot(R) F_R with measure 4 pi sin^2 R dR.
    """
    if grid.kind != "radial":
        raise ParamError("sphere surrogate needs a radial grid")
    if order < 0 or order > 2:
        raise OrderError("only orders <= 2 are supported")
    F = np.asarray(field, dtype=float)
    r = grid.r
    # exact slice values: sin R = 2r/(1+r^2), cos R = (1-r^2)/(1+r^2)
    sinR = 2.0 * r / (1.0 + r * r)
    cosR = (1.0 - r * r) / (1.0 + r * r)
    dR_dr = 2.0 / (1.0 + r * r)

    Fr = fd.d1(F, grid.h, axis=-1)
    FR = Fr / dR_dr
    acc = F * F
    if order >= 1:
        acc = acc + FR * FR
    if order >= 2:
        FRR = fd.d1(FR, grid.h, axis=-1) / dR_dr
        lap = FRR + 2.0 * (cosR / sinR) * FR
        acc = acc + lap * lap
    wq = _trapezoid(grid.h, grid.n_nodes) * dR_dr
    return float(np.sqrt(np.sum(acc * sinR**2 * wq) * 4.0 * np.pi))


# ---------------------------------------------------------------------------
# null-form evaluation along trajectories

def _physical_gradients(grid, u_native, snap_dt):
    """(u, u_t, spatial grads) of the physical field from native snapshots."""
    if grid.kind == "radial":
        up = u_native / grid.r
        ut = fd.dt_series(up, snap_dt, axis=0)
        ur = (fd.d1(u_native, grid.h, axis=-1) - up) / grid.r
        return up, ut, (ur,)
    ut = fd.dt_series(u_native, snap_dt, axis=0)
    gx = tuple(fd.d1(u_native, grid.h, axis=ax) for ax in (-3, -2, -1))
    return u_native, ut, gx


def evaluate_nullform_series(traj, spec: NullFormSpec, other=None):
    """Physical null-form values Q(du, dv) at every snapshot.

    other=None evaluates the trajectory against itself.  Returns shape
    (M, n_components) + grid shape.  On radial grids only the q0 form
    survives; rotational forms of spherically symmetric fields vanish
    identically.
    """
    grid = traj.grid
    dt_snap = traj.snap_dt
    if dt_snap <= 0:
        raise ParamError("need at least two snapshots")
    if other is None:
        other = traj
    elif other.grid is not grid or len(other.times) != len(traj.times) \
            or not np.allclose(other.times, traj.times):
        raise ParamError("trajectories must share grid and snapshot times")

    N = spec.n_components
    gshape = grid.zeros().shape
    u = traj.u.reshape((traj.u.shape[0], -1) + gshape)
    v = other.u.reshape((other.u.shape[0], -1) + gshape)
    if u.shape[1] != N or v.shape[1] != N:
        raise ParamError("trajectory component count does not match spec")

    if grid.kind == "radial":
        _, ut, (ur,) = _physical_gradients(grid, u, dt_snap)
        if other is traj:
            vt, vr = ut, ur
        else:
            _, vt, (vr,) = _physical_gradients(grid, v, dt_snap)
        out = np.zeros((u.shape[0], N) + gshape)
        for (i, jj, kk, a, form) in spec.terms:
            if form == "q0":
                out[:, i] += a * (ut[:, jj] * vt[:, kk]
                                  - ur[:, jj] * vr[:, kk])
        return out

    _, ut, gx = _physical_gradients(grid, u, dt_snap)
    du = np.stack([ut] + list(gx), axis=-1)
    if other is traj:
        dv = du
    else:
        _, vt, gy = _physical_gradients(grid, v, dt_snap)
        dv = np.stack([vt] + list(gy), axis=-1)
    out = np.zeros((u.shape[0], N) + gshape)
    for (i, jj, kk, a, form) in spec.terms:
        out[:, i] += a * eval_form(form, du[:, jj], dv[:, kk])
    return out


def slab_norm(grid, series, dt_snap):
    """Sum over |alpha| <= 1 of space-time L2 norms of a snapshot series.

    series holds physical values, shape (M, ...) ending with the grid
    shape; the measure is 4 pi r^2 dr dt (radial) or dx dt.
    """
    arr = np.asarray(series, dtype=float)
    M = arr.shape[0]
    if M < 3:
        raise ParamError("need at least 3 snapshots for the slab norm")
    tw = _trapezoid(dt_snap, M)

    if grid.kind == "radial":
        vol = _radial_volume(grid)
        derivs = [arr, fd.dt_series(arr, dt_snap, axis=0),
                  fd.d1(arr, grid.h, axis=-1)]
        total = 0.0
        for d in derivs:
            sq = np.sum(d * d * vol, axis=-1)
            while sq.ndim > 1:
                sq = np.sum(sq, axis=-1)
            total += np.sqrt(np.sum(sq * tw))
        return float(total)

    live = grid.updated()
    derivs = [arr, fd.dt_series(arr, dt_snap, axis=0)]
    derivs += [fd.d1(arr, grid.h, axis=ax) for ax in (-3, -2, -1)]
    total = 0.0
    for d in derivs:
        sq = np.sum((d * d)[..., live] * grid.h**3, axis=-1)
        while sq.ndim > 1:
            sq = np.sum(sq, axis=-1)
        total += np.sqrt(np.sum(sq * tw))
    return float(total)


def nullform_spacetime_norm(traj_u, traj_v, spec: NullFormSpec, window):
    """Slab norm of Q(du, dv) restricted to a time window."""
    t0, t1 = float(window[0]), float(window[1])
    times = traj_u.times
    if t0 >= t1:
        raise ParamError("window must be increasing")
    if t0 < times[0] - 1e-12 or t1 > times[-1] + 1e-12:
        raise ParamError("window outside trajectory times")
    i0 = int(np.searchsorted(times, t0 - 1e-12))
    i1 = int(np.searchsorted(times, t1 + 1e-12, side="right"))
    lo = max(0, i0 - 2)
    hi = min(len(times), i1 + 2)

    def sub(traj):
        from .solver import Trajectory
        return Trajectory(traj.grid, traj.times[lo:hi], traj.u[lo:hi],
                          dt=traj.dt, stride=traj.stride)

    q = evaluate_nullform_series(sub(traj_u), spec,
                                 None if traj_v is traj_u else sub(traj_v))
    keep = slice(i0 - lo, i1 - lo)
    return slab_norm(traj_u.grid, q[keep], traj_u.snap_dt)


# ---------------------------------------------------------------------------
# cylinder samples and tip-weighted norms

class CylinderSamples:
    """Quadrature samples of a scalar on the compactified diamond.

    value holds the cylinder-side field; gamma0 its time-rotation
    derivative; gboost the common magnitude of the three boost-rotation
    derivatives of a zonal (radial-symmetric) field.  weight already
    contains the pulled-back volume element.
    """

    __slots__ = ("T", "R", "dist", "conf", "weight", "value", "gamma0",
                 "gboost")

    def __init__(self, T, R, dist, conf, weight, value, gamma0, gboost):
        arrays = [np.asarray(a, dtype=float).ravel()
                  for a in (T, R, dist, conf, weight, value, gamma0, gboost)]
        n = len(arrays[0])
        if any(len(a) != n for a in arrays):
            raise ParamError("sample arrays must share length")
        T, R, dist, conf, weight, value, gamma0, gboost = arrays
        if np.any(R + np.abs(T) >= np.pi):
            raise DomainError("samples outside the compactified diamond")
        if np.any(weight < 0):
            raise ParamError("negative quadrature weight")
        self.T, self.R, self.dist, self.conf = T, R, dist, conf
        self.weight, self.value = weight, value
        self.gamma0, self.gboost = gamma0, gboost

    def __len__(self):
        return len(self.T)


def _radial_gamma_pull(t, r, q_t, q_r):
    """Time-rotation and boost derivatives of a radial scalar.

    The three boost derivatives point along the radial direction with a
    shared magnitude; rotational derivatives vanish.
    """
    half = 0.5 * (1.0 + t * t - r * r)
    g0 = 0.5 * (1.0 + t * t + r * r) * q_t + t * r * q_r
    gb = half * q_r + t * r * q_t + r * r * q_r
    return g0, gb


def _sample_grid(traj, time_range, time_stride):
    times = traj.times
    if time_range is not None:
        keep = (times >= time_range[0]) & (times <= time_range[1])
        idx = np.nonzero(keep)[0]
    else:
        idx = np.arange(len(times))
    idx = idx[::time_stride]
    if len(idx) < 3:
        raise ParamError("need at least 3 sampled snapshots")
    return idx


def _assemble_samples(grid, t_sel, q, q_t, q_r, scale, dscale_dt, dscale_dr):
    """Samples of scale * q with product-rule derivatives, radial grid."""
    r = grid.r
    t2 = t_sel[:, None]
    T, R = penrose.forward_tr(t2, r)
    conf = penrose.conformal_factor_tr(t2, r)
    dist = np.sqrt((np.pi - T) ** 2 + R * R)

    val = scale * q
    val_t = dscale_dt * q + scale * q_t
    val_r = dscale_dr * q + scale * q_r
    g0, gb = _radial_gamma_pull(t2, r, val_t, val_r)

    dt_snap = t_sel[1] - t_sel[0]
    wt = _trapezoid(dt_snap, len(t_sel))[:, None]
    vol = _radial_volume(grid)[None, :]
    weight = conf**4 * vol * wt
    return CylinderSamples(np.broadcast_to(T, val.shape),
                           np.broadcast_to(R, val.shape), dist, conf,
                           weight, val, g0, gb)


def solution_cylinder_samples(traj, time_range=None, time_stride=1):
    """Push the solution forward: cylinder field = conf * u."""
    grid = traj.grid
    if grid.kind != "radial":
        raise ParamError("cylinder sampling supports radial grids")
    idx = _sample_grid(traj, time_range, time_stride)
    t_sel = traj.times[idx]
    w = traj.u[idx]
    up = w / grid.r
    dt_snap = t_sel[1] - t_sel[0]
    ut = fd.dt_series(up, dt_snap, axis=0)
    ur = (fd.d1(w, grid.h, axis=-1) - up) / grid.r

    t2 = t_sel[:, None]
    conf = penrose.conformal_factor_tr(t2, grid.r)
    dconf_dt, dconf_dr = penrose.conformal_gradient_tr(t2, grid.r)
    return _assemble_samples(grid, t_sel, up, ut, ur, conf, dconf_dt,
                             dconf_dr)


def forcing_cylinder_samples(traj, spec: NullFormSpec, time_range=None,
                             time_stride=1):
    """Push the null-form forcing forward: cylinder field = conf^-3 * Q."""
    grid = traj.grid
    if grid.kind != "radial":
        raise ParamError("cylinder sampling supports radial grids")
    if spec.n_components != 1:
        raise ParamError("forcing samples support scalar systems only")
    idx = _sample_grid(traj, time_range, time_stride)
    t_sel = traj.times[idx]

    from .solver import Trajectory
    sub = Trajectory(grid, t_sel, traj.u[idx], dt=traj.dt,
                     stride=traj.stride)
    Q = evaluate_nullform_series(sub, spec)[:, 0]
    dt_snap = t_sel[1] - t_sel[0]
    Qt = fd.dt_series(Q, dt_snap, axis=0)
    Qr = fd.d1(Q, grid.h, axis=-1)

    t2 = t_sel[:, None]
    conf = penrose.conformal_factor_tr(t2, grid.r)
    dconf_dt, dconf_dr = penrose.conformal_gradient_tr(t2, grid.r)
    s = conf**-3
    return _assemble_samples(grid, t_sel, Q, Qt, Qr, s,
                             -3.0 * conf**-4 * dconf_dt,
                             -3.0 * conf**-4 * dconf_dr)


def tip_weighted_norm(samples: CylinderSamples, scheme="l2", delta=0.0):
    """Tip-weighted norm over the diamond samples.

    scheme "l2": quadratic sum of the field and its first derivatives
    along the canonical cylinder fields, the derivative block carrying
    the weight dist^4 (squared dist^2).  scheme "l8": the plain eighth
    power norm of the field.  delta > 0 drops samples with
    dist <= delta.
    """
    if delta < 0:
        raise ParamError("delta must be nonnegative")
    keep = samples.dist > delta
    w = samples.weight[keep]
    val = samples.value[keep]
    if scheme == "l2":
        d4 = samples.dist[keep] ** 4
        dens = val * val + d4 * (samples.gamma0[keep] ** 2
                                 + samples.gboost[keep] ** 2)
        return float(np.sqrt(np.sum(dens * w)))
    if scheme == "l8":
        m = np.max(np.abs(val), initial=0.0)
        if m == 0.0:
            return 0.0
        # normalize before the eighth power to keep the sum in range
        return float(m * np.sum((np.abs(val) / m) ** 8 * w) ** 0.125)
    raise ParamError("scheme must be 'l2' or 'l8'")


def delta_sweep(samples: CylinderSamples, deltas, scheme="l2"):
    """Norm values under truncation at each delta (descending sweep)."""
    return [tip_weighted_norm(samples, scheme, d) for d in deltas]


# ---------------------------------------------------------------------------
# estimate diagnostics

class NormReport:
    """Named nonnegative norm values plus run metadata."""

    def __init__(self, values, metadata=None):
        for k, v in values.items():
            if not np.isfinite(v) or v < 0:
                raise ParamError("norm %r must be finite and >= 0" % (k,))
        self.values = dict(values)
        self.metadata = dict(metadata or {})

    def __getitem__(self, key):
        return self.values[key]

    def __repr__(self):
        body = ", ".join("%s=%.3e" % kv for kv in sorted(self.values.items()))
        return "NormReport(%s)" % body


RATIO_NAMES = ("ratio_local_linear", "ratio_null_cylinder",
               "ratio_weighted_energy", "ratio_sup_decay")


def weighted_energy_sup(traj, time_stride=20):
    """Sup over sampled times of the tip-weighted slice norm of conf*u."""
    grid = traj.grid
    if grid.kind != "radial":
        raise ParamError("cylinder sampling supports radial grids")
    idx = _sample_grid(traj, None, time_stride)
    t_sel = traj.times[idx]
    w = traj.u[idx]
    up = w / grid.r
    dt_snap = t_sel[1] - t_sel[0]
    ut = fd.dt_series(up, dt_snap, axis=0)
    ur = (fd.d1(w, grid.h, axis=-1) - up) / grid.r

    t2 = t_sel[:, None]
    conf = penrose.conformal_factor_tr(t2, grid.r)
    dct, dcr = penrose.conformal_gradient_tr(t2, grid.r)
    val = conf * up
    vt = dct * up + conf * ut
    vr = dcr * up + conf * ur
    g0, gb = _radial_gamma_pull(t2, grid.r, vt, vr)
    T, R = penrose.forward_tr(t2, grid.r)
    dist4 = ((np.pi - T) ** 2 + R * R) ** 2
    dens = val * val + dist4 * (g0 * g0 + gb * gb)
    # slice measure: conf^3 dx on each sampled instant
    slice_sq = np.sum(dens * conf**3 * _radial_volume(grid)[None, :], axis=1)
    return float(np.sqrt(np.max(slice_sq)))


def estimate_ratio_report(entries, sup_window=(5.0, 40.0), time_stride=20):
    """LHS/RHS surrogate ratios for the four estimates, one report per run.

    entries: smallness_scan rows (dicts carrying "solution" and "eps") or
    bare solutions.  Rows without a converged solution, and zero-data
    rows, are skipped.
    """
    reports = []
    for entry in entries:
        if isinstance(entry, dict):
            sol = entry.get("solution")
            eps = entry.get("eps")
        else:
            sol, eps = entry, None
        if sol is None:
            continue
        traj, spec, data = sol.trajectory, sol.spec, sol.data
        grid = traj.grid
        f = grid.to_physical(data.f)
        g = grid.to_physical(data.g)
        if np.max(np.abs(f)) == 0 and np.max(np.abs(g)) == 0:
            continue

        nf01 = nullform_spacetime_norm(traj, traj, spec, (0.0, 1.0))
        h2 = weighted_sobolev_norm(f, 2, 0, grid)
        h1 = weighted_sobolev_norm(g, 1, 0, grid)
        h21 = weighted_sobolev_norm(f, 2, 1, grid)
        h12 = weighted_sobolev_norm(g, 1, 2, grid)

        fsamp = forcing_cylinder_samples(traj, spec, time_stride=time_stride)
        tip_f = tip_weighted_norm(fsamp, "l2")
        usamp = solution_cylinder_samples(traj, time_stride=time_stride)
        pecher = tip_weighted_norm(usamp, "l8")

        conf0 = 2.0 / (1.0 + grid.r**2)
        sph2 = sphere_sobolev_norm(grid, conf0 * f, 2)
        sph1 = sphere_sobolev_norm(grid, conf0**2 * g, 1)

        wsup = weighted_energy_sup(traj, time_stride=time_stride)

        tt, ss = sol.sup_times, sol.sup_values
        keep = (tt >= sup_window[0]) & (tt <= sup_window[1])
        if not keep.any():
            raise ParamError("sup window outside the trajectory")
        sup_t = float(np.max(tt[keep] * ss[keep]))

        values = {
            "lhs_local_linear": nf01,
            "rhs_local_linear": (h2 + h1 + nf01) ** 2,
            "lhs_null_cylinder": tip_f,
            "rhs_null_cylinder": (sph2 + sph1 + tip_f) ** 2,
            "lhs_weighted_energy": wsup,
            "rhs_weighted_energy": sph2 + sph1 + tip_f,
            "lhs_sup_decay": sup_t,
            "rhs_sup_decay": h21 + h12 + tip_f,
            "pecher_l8": pecher,
        }
        for name in RATIO_NAMES:
            tag = name[len("ratio_"):]
            values[name] = values["lhs_" + tag] / values["rhs_" + tag]
        meta = {"eps": eps, "sup_window": tuple(sup_window),
                "t_end": float(traj.times[-1])}
        reports.append(NormReport(values, meta))
    return reports


def ratio_spreads(reports):
    """max/min per ratio across a report table."""
    out = {}
    for name in RATIO_NAMES:
        vals = [rep[name] for rep in reports]
        if not vals:
            continue
        lo, hi = min(vals), max(vals)
        out[name] = np.inf if lo == 0 else hi / lo
    return out
