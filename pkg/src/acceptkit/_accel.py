"""Hot numeric kernels: GRU sequence forward/backward and embedding scatter.

Kernels are compiled with numba when available. Set ACCEPTKIT_NUMBA=0 to
force the pure-numpy fallback (same functions, uncompiled). Both paths run
identical floating-point operations per element, but reduction order may
differ, so cross-backend bitwise equality is not guaranteed; within one
backend results are deterministic.
"""

import os

import numpy as np

try:
    from numba import njit

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover
    _HAS_NUMBA = False

USE_NUMBA = _HAS_NUMBA and os.environ.get("ACCEPTKIT_NUMBA", "1") != "0"


def _sigmoid(a):
    return 1.0 / (1.0 + np.exp(-a))


def build_kernels(use_numba):
    """Build (gru_forward, gru_backward) kernels, jitted or plain."""

    def gru_forward(X, mask, Wxz, Wxr, Wxc, Whz, Whr, Whc, bz, br, bc):
        # X: (L, B, E), mask: (L, B). Returns hidden states Hs with
        # Hs[0] = 0 and Hs[t+1] the state after consuming X[t], plus the
        # gate activations needed for backprop.
        L, B, E = X.shape
        H = bz.shape[0]
        Hs = np.zeros((L + 1, B, H))
        Z = np.zeros((L, B, H))
        R = np.zeros((L, B, H))
        Hc = np.zeros((L, B, H))
        for t in range(L):
            h = Hs[t]
            Xt = X[t]
            z = 1.0 / (1.0 + np.exp(-(np.dot(Xt, Wxz) + np.dot(h, Whz) + bz)))
            r = 1.0 / (1.0 + np.exp(-(np.dot(Xt, Wxr) + np.dot(h, Whr) + br)))
            hc = np.tanh(np.dot(Xt, Wxc) + np.dot(r * h, Whc) + bc)
            h_new = (1.0 - z) * h + z * hc
            m = mask[t]
            for b_i in range(B):
                if m[b_i] > 0.0:
                    Hs[t + 1, b_i] = h_new[b_i]
                else:
                    Hs[t + 1, b_i] = h[b_i]
            Z[t] = z
            R[t] = r
            Hc[t] = hc
        return Hs, Z, R, Hc

    def gru_backward(dH, X, mask, Hs, Z, R, Hc, Wxz, Wxr, Wxc, Whz, Whr, Whc):
        # dH: (L, B, H) gradient w.r.t. the per-step outputs Hs[1:].
        L, B, E = X.shape
        H = dH.shape[2]
        dX = np.zeros((L, B, E))
        dWxz = np.zeros((E, H))
        dWxr = np.zeros((E, H))
        dWxc = np.zeros((E, H))
        dWhz = np.zeros((H, H))
        dWhr = np.zeros((H, H))
        dWhc = np.zeros((H, H))
        dbz = np.zeros(H)
        dbr = np.zeros(H)
        dbc = np.zeros(H)
        dh_next = np.zeros((B, H))
        WxzT = np.ascontiguousarray(Wxz.T)
        WxrT = np.ascontiguousarray(Wxr.T)
        WxcT = np.ascontiguousarray(Wxc.T)
        WhzT = np.ascontiguousarray(Whz.T)
        WhrT = np.ascontiguousarray(Whr.T)
        WhcT = np.ascontiguousarray(Whc.T)
        for t in range(L - 1, -1, -1):
            h_prev = Hs[t]
            z = Z[t]
            r = R[t]
            hc = Hc[t]
            m = mask[t].copy().reshape(B, 1)
            dh_total = dH[t] + dh_next
            dh_new = m * dh_total
            dh_prev = (1.0 - m) * dh_total + dh_new * (1.0 - z)
            dz = dh_new * (hc - h_prev)
            dhc = dh_new * z
            dac = dhc * (1.0 - hc * hc)
            drh = np.dot(dac, WhcT)
            dr = drh * h_prev
            dh_prev = dh_prev + drh * r
            daz = dz * z * (1.0 - z)
            dar = dr * r * (1.0 - r)
            XtT = np.ascontiguousarray(X[t].T)
            hpT = np.ascontiguousarray(h_prev.T)
            rhT = np.ascontiguousarray((r * h_prev).T)
            dWxz += np.dot(XtT, daz)
            dWxr += np.dot(XtT, dar)
            dWxc += np.dot(XtT, dac)
            dWhz += np.dot(hpT, daz)
            dWhr += np.dot(hpT, dar)
            dWhc += np.dot(rhT, dac)
            for j in range(H):
                s_z = 0.0
                s_r = 0.0
                s_c = 0.0
                for b_i in range(B):
                    s_z += daz[b_i, j]
                    s_r += dar[b_i, j]
                    s_c += dac[b_i, j]
                dbz[j] += s_z
                dbr[j] += s_r
                dbc[j] += s_c
            dX[t] = np.dot(daz, WxzT) + np.dot(dar, WxrT) + np.dot(dac, WxcT)
            dh_prev = dh_prev + np.dot(daz, WhzT) + np.dot(dar, WhrT)
            dh_next = dh_prev
        return dX, dWxz, dWxr, dWxc, dWhz, dWhr, dWhc, dbz, dbr, dbc

    if use_numba:
        gru_forward = njit(cache=False)(gru_forward)
        gru_backward = njit(cache=False)(gru_backward)
    return gru_forward, gru_backward


gru_forward, gru_backward = build_kernels(USE_NUMBA)
