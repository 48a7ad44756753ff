"""Reference (numpy) implementation of the networked-arm closed loop.

Composed from the public module functions so it doubles as the oracle the
compiled kernel is tested against.
"""

from __future__ import annotations

import numpy as np

from .estimator import EstimatorGains, gain_table, task_estimator_derivative
from .graph import DirectedLeaderGraph
from .manipulator import (
    _mcg,
    dynamic_regressor,
    forward_kinematics_hat,
    jacobian_hat,
    kinematic_regressor,
)
from .numerics import SignumPolicy, nussbaum
from .task_controller import (
    TaskControllerState,
    TaskGains,
    reference_trajectories,
    task_adaptation,
    task_control_law,
)


class TaskNetwork:
    def __init__(self, params):
        from .kernels import TASK_STATE, aux_offsets, block_offsets

        self.p = params
        n = params.n
        self.n = n
        self.graph = DirectedLeaderGraph(n, params.A, params.a0)
        gains = [
            EstimatorGains(
                kappa=(params.est[i, 0],),
                kappa_m=params.est[i, 1],
                kappa_eta=params.est[i, 2],
                kappa_xi=params.est[i, 3],
                kappa_rho=params.est[i, 4],
                alpha=params.expo[i, 0],
                beta=params.expo[i, 1],
                gamma=params.expo[i, 2],
            )
            for i in range(n)
        ]
        self.est_gains = gain_table(gains, n, 2)
        self.policy = SignumPolicy("boundary_layer", params.sgn_eps) if params.sgn_mode else SignumPolicy()
        self.ctrl_gains = [
            TaskGains(
                alpha_x=params.alpha_x[i],
                alpha_r=params.alpha_r[i],
                K_s=params.Ks[i],
                k_kappa=params.k_kappa[i],
                Gamma_theta=params.Gth[i],
                Gamma_eps=params.Geps[i],
                Lambda=params.Lam[i],
                grav=params.grav_ctrl[i],
            )
            for i in range(n)
        ]
        self.blocks = block_offsets(TASK_STATE, n)
        self.aux_at = aux_offsets()

    def _view(self, y, name):
        off, w = self.blocks[name]
        v = y[off : off + self.n * w].reshape(self.n, w)
        return v

    def rhs(self, y, c, dy, aux=None):
        p = self.p
        n = self.n
        y = np.asarray(y, dtype=float)
        c = np.asarray(c, dtype=float)
        V = {name: self._view(y, name) for name in self.blocks}
        D = {name: self._view(dy, name) for name in self.blocks}
        xd, xd_dot = c[0:2], c[2:4]

        ed = task_estimator_derivative(
            V["chi"], V["vartheta"], V["eta"], V["xi"], V["rho"],
            np.stack([xd, xd_dot]), self.graph, self.est_gains, self.policy,
        )
        D["chi"][:] = ed.xhat[:, 0]
        D["vartheta"][:] = ed.xhat[:, 1]
        D["eta"][:] = ed.eta
        D["xi"][:] = ed.xi
        D["rho"][:] = ed.rho

        for i in range(n):
            base = 4 + 8 * i
            g_i = c[base]
            d_i = c[base + 1 : base + 3]
            phi = c[base + 3]
            psi = c[base + 4 : base + 6]
            delta = c[base + 6 : base + 8]
            q = V["q"][i]
            qd = V["qdot"][i]
            # measurements (plant side)
            x = forward_kinematics_hat(q, p.a[i])
            xdot = jacobian_hat(q, p.a[i]) @ qd

            ctrl = TaskControllerState(V["theta_hat"][i], V["a_hat"][i], V["eps_hat"][i], float(V["kappa"][i, 0]), V["sx_int"][i])
            gains = self.ctrl_gains[i]
            refs = reference_trajectories(
                q, qd, x, xdot, V["chi"][i], V["vartheta"][i], ed.xhat[i, 0], ed.xhat[i, 1],
                ctrl, gains, bool(p.exdot_estimated),
            )
            Y = dynamic_regressor(q, qd, refs.qr_dot, refs.qr_ddot, gains.grav)
            Z = kinematic_regressor(q, qd)
            tau, u = task_control_law(refs.s, Y, refs.J_hat, ctrl, gains, 0.0, delta=delta)
            dth, da, deps, dk = task_adaptation(refs.s, refs.s_x, ctrl.sx_integral, Y, Z, refs.J_hat, u, ctrl, gains, 0.0, delta=delta)

            # plant
            M, C, G = _mcg(q, qd, p.theta[i], p.grav[i])
            F = p.Fv[i] @ np.tanh(qd) + p.Fc[i] @ np.sign(qd)
            tau_a = phi * tau + psi
            qdd = np.linalg.solve(M, g_i * tau_a + d_i - C @ qd - G - F)

            D["q"][i] = qd
            D["qdot"][i] = qdd
            D["theta_hat"][i] = dth
            D["a_hat"][i] = da
            D["eps_hat"][i] = deps
            D["kappa"][i, 0] = dk
            D["sx_int"][i] = refs.s_x

            if aux is not None:
                nu = nussbaum(ctrl.kappa)
                eq37 = refs.J_hat @ refs.s - (refs.s_x + gains.alpha_r * ctrl.sx_integral + Z @ (ctrl.a_hat - p.a[i]))
                sdot = qdd - refs.qr_ddot
                sd = refs.s / np.sqrt(refs.s**2 + delta**2)
                Ytrue = dynamic_regressor(q, qd, refs.qr_dot, refs.qr_ddot, p.grav[i])
                b = g_i * phi
                Dist = g_i * psi - F + d_i
                terms = [
                    -C @ refs.s,
                    (b * nu - 1.0) * u,
                    -refs.J_hat.T @ gains.K_s @ refs.J_hat @ refs.s,
                    Y @ ctrl.theta_hat - Ytrue @ p.theta[i],
                    Dist,
                    -sd * ctrl.eps_hat,
                ]
                lhs = M @ sdot
                rhs38 = sum(terms)
                scale = max(np.abs(lhs).max(), max(np.abs(tm).max() for tm in terms), 1.0)
                row = aux[i]
                vals = {
                    "x": x, "xdot": xdot, "e_x": refs.e_x, "e_v": refs.e_v, "s_x": refs.s_x,
                    "s": refs.s, "qr_dot": refs.qr_dot, "qr_ddot": refs.qr_ddot, "u": u, "tau": tau,
                    "nu": nu, "eq37": eq37, "eq38": lhs - rhs38, "eq38_scale": scale,
                    "regularized": float(refs.regularized),
                }
                for name, val in vals.items():
                    off, w = self.aux_at[name]
                    row[off : off + w] = val
        return dy

    def advance(self, y, C, h, rk4=False, state_limit=1e8, kappa_limit=25.0):
        """Same contract as the compiled ``advance``."""
        C = np.asarray(C, dtype=float)
        nsteps = (C.shape[0] - 1) // 2 if rk4 else C.shape[0]
        kap_off, _ = self.blocks["kappa"]
        f = lambda x, c: self.rhs(x, c, np.zeros_like(x))  # noqa: E731
        for s in range(nsteps):
            if rk4:
                r = 2 * s
                k1 = f(y, C[r])
                k2 = f(y + 0.5 * h * k1, C[r + 1])
                k3 = f(y + 0.5 * h * k2, C[r + 1])
                k4 = f(y + h * k3, C[r + 2])
                y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            else:
                y += h * f(y, C[s])
            out = ~(np.abs(y) <= state_limit)
            out[kap_off : kap_off + self.n] |= ~(np.abs(y[kap_off : kap_off + self.n]) <= kappa_limit)
            if out.any():
                return s + 1, int(np.argmax(out))
        return nsteps, -1
