# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot path: the full rate pipeline in C doubles.

Mirrors the reference modules step for step; the only structural shortcut
is solving the Bloch inversion through the 3x3 single-party system (the
9x9 system is its Kronecker square, so the objective table factorizes as
f = p00 * w0 (x) w0 + p11 * w1 (x) w1 with S1^T w_j = bloch(arm_j)).
Returns 0.0 for operating points where the pipeline is degenerate or no
key can be distilled.
"""
from libc.math cimport exp, expm1, fabs, log, log2, sqrt


cdef inline double _clamp01(double x) noexcept nogil:
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


cdef inline double _g_pm(double y, double d, int sign) noexcept nogil:
    cdef double one_m_d2 = 1.0 - d * d
    cdef double rad = one_m_d2 * y * (1.0 - y)
    if rad < 0.0:
        rad = 0.0
    return _clamp01(y + one_m_d2 * (1.0 - 2.0 * y) + sign * 2.0 * d * sqrt(rad))


cdef inline double _G_plus(double y, double d) noexcept nogil:
    if y < d * d:
        return _g_pm(y, d, 1)
    return 1.0


cdef inline double _G_minus(double y, double d) noexcept nogil:
    if y > 1.0 - d * d:
        return _g_pm(y, d, -1)
    return 0.0


cdef inline double _h2(double x) noexcept nogil:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * log2(x) - (1.0 - x) * log2(1.0 - x)


cdef inline double _yield_c(double nu, double om, double sqrt_eta, double pd) noexcept nogil:
    # Real amplitudes: |nu||om| cos(phi_A - phi_B) is just the signed product.
    cdef double half_sum = (nu * nu + om * om) / 2.0
    cdef double cross = nu * om
    cdef double a = sqrt_eta * (half_sum - cross)
    cdef double b = sqrt_eta * (half_sum + cross)
    return (1.0 - pd) * (1.0 - pd) * exp(-a) * (-expm1(-b)) + pd * (1.0 - pd)


cdef int _solve3(double[3][3] m, double* b, double* w) noexcept nogil:
    """Gaussian elimination with partial pivoting; returns 0 on failure."""
    cdef double a[3][4]
    cdef int i, j, k, piv
    cdef double factor, best, tmp
    for i in range(3):
        for j in range(3):
            a[i][j] = m[i][j]
        a[i][3] = b[i]
    for k in range(3):
        piv = k
        best = fabs(a[k][k])
        for i in range(k + 1, 3):
            if fabs(a[i][k]) > best:
                best = fabs(a[i][k])
                piv = i
        if best < 1e-300:
            return 0
        if piv != k:
            for j in range(4):
                tmp = a[k][j]
                a[k][j] = a[piv][j]
                a[piv][j] = tmp
        for i in range(k + 1, 3):
            factor = a[i][k] / a[k][k]
            for j in range(k, 4):
                a[i][j] -= factor * a[k][j]
    for k in range(2, -1, -1):
        tmp = a[k][3]
        for j in range(k + 1, 3):
            tmp -= a[k][j] * w[j]
        w[k] = tmp / a[k][k]
    return 1


cdef double _gamma_ref_upper(double* y, double* dl, double* f) noexcept nogil:
    cdef double total = 0.0
    cdef int i
    for i in range(9):
        if f[i] > 0.0:
            total += f[i] * _G_plus(y[i], dl[i])
        elif f[i] < 0.0:
            total += f[i] * _G_minus(y[i], dl[i])
    return total


cpdef double rate_scalar(double alpha, double gamma, double[::1] eps9,
                         double eta, double p_d, double f_e, double p_key,
                         bint split):
    """Secret-key rate at one operating point (0.0 when degenerate)."""
    if eps9.shape[0] != 9 or alpha <= 0.0 or gamma < 0.0 or eta <= 0.0:
        return 0.0

    cdef double kappa = exp(-2.0 * alpha * alpha)
    cdef double one_m_k2 = 1.0 - kappa * kappa
    if one_m_k2 < 1e-15:
        return 0.0
    cdef double s = sqrt(one_m_k2)
    # overlaps <a|g>, <-a|g> for real amplitudes
    cdef double g_plus = exp(-(alpha * alpha + gamma * gamma) / 2.0 + alpha * gamma)
    cdef double g_minus = exp(-(alpha * alpha + gamma * gamma) / 2.0 - alpha * gamma)
    cdef double c1 = (g_minus - kappa * g_plus) / s
    cdef double xi = g_plus * g_plus + c1 * c1
    cdef double sqrt_xi = sqrt(xi)

    # single-party Bloch rows: |a>, |-a>, |g'> as (1, 2ab, a^2-b^2)
    cdef double s1[3][3]
    cdef double ga = g_plus / sqrt_xi
    cdef double gb = c1 / sqrt_xi
    s1[0][0] = 1.0; s1[0][1] = 0.0;               s1[0][2] = 1.0
    s1[1][0] = 1.0; s1[1][1] = 2.0 * kappa * s;   s1[1][2] = 2.0 * kappa * kappa - 1.0
    s1[2][0] = 1.0; s1[2][1] = 2.0 * ga * gb;     s1[2][2] = ga * ga - gb * gb

    # normalized cat arms and their Bloch vectors
    cdef double w_even = (1.0 + kappa) / 2.0
    cdef double w_odd = (1.0 - kappa) / 2.0
    cdef double a0 = (1.0 + kappa) / (2.0 * sqrt(w_even))
    cdef double b0 = s / (2.0 * sqrt(w_even))
    cdef double a1 = (1.0 - kappa) / (2.0 * sqrt(w_odd))
    cdef double b1 = -s / (2.0 * sqrt(w_odd))
    cdef double bl0[3]
    cdef double bl1[3]
    bl0[0] = 1.0; bl0[1] = 2.0 * a0 * b0; bl0[2] = a0 * a0 - b0 * b0
    bl1[0] = 1.0; bl1[1] = 2.0 * a1 * b1; bl1[2] = a1 * a1 - b1 * b1

    # transpose of s1 for the row-vector solves w_j S1 = bloch_j
    cdef double s1t[3][3]
    cdef int i, j
    for i in range(3):
        for j in range(3):
            s1t[i][j] = s1[j][i]
    cdef double w0[3]
    cdef double w1[3]
    if not _solve3(s1t, bl0, w0):
        return 0.0
    if not _solve3(s1t, bl1, w1):
        return 0.0

    cdef double p00 = w_even * w_even
    cdef double p11 = w_odd * w_odd
    cdef double f[9]
    for i in range(3):
        for j in range(3):
            f[3 * i + j] = p00 * w0[i] * w0[j] + p11 * w1[i] * w1[j]

    # per-pair yields for both exclusive outcomes
    cdef double amps[3]
    amps[0] = alpha; amps[1] = -alpha; amps[2] = gamma
    cdef double sqrt_eta = sqrt(eta)
    cdef double yc[9]
    cdef double yd[9]
    for i in range(3):
        for j in range(3):
            yc[3 * i + j] = _yield_c(amps[i], amps[j], sqrt_eta, p_d)
            yd[3 * i + j] = _yield_c(amps[i], -amps[j], sqrt_eta, p_d)

    # fidelity floors
    cdef double vs, eps
    cdef double dl[9]
    cdef double rad
    for i in range(3):
        for j in range(3):
            if i == 2 and j == 2:
                vs = xi
            elif i == 2 or j == 2:
                vs = sqrt_xi
            else:
                vs = 1.0
            eps = eps9[3 * i + j]
            if eps < 0.0 or eps > 1.0:
                return 0.0
            rad = 1.0 - vs * vs
            if rad < 0.0:
                rad = 0.0
            dl[3 * i + j] = sqrt(1.0 - eps) * vs - sqrt(eps) * sqrt(rad)
            if dl[3 * i + j] < 0.0:
                dl[3 * i + j] = 0.0

    cdef double d_vir = 0.25 * (sqrt(1.0 - eps9[0]) + sqrt(1.0 - eps9[1])
                                + sqrt(1.0 - eps9[3]) + sqrt(1.0 - eps9[4]))

    cdef double gamma_u
    cdef double ys[9]
    if split:
        gamma_u = (_G_plus(_clamp01(_gamma_ref_upper(yc, dl, f)), d_vir)
                   + _G_plus(_clamp01(_gamma_ref_upper(yd, dl, f)), d_vir))
    else:
        for i in range(9):
            ys[i] = yc[i] + yd[i]
        gamma_u = _G_plus(_clamp01(_gamma_ref_upper(ys, dl, f)), d_vir)
    if gamma_u > 1.0:
        gamma_u = 1.0

    cdef double gamma_obs = 0.25 * (yc[0] + yd[0] + yc[1] + yd[1]
                                    + yc[3] + yd[3] + yc[4] + yd[4])
    if gamma_obs <= 0.0:
        return 0.0
    cdef double e_ph = gamma_u / gamma_obs
    if e_ph > 1.0:
        e_ph = 1.0
    if e_ph > 0.5:
        e_ph = 0.5

    cdef double denom = 2.0 * p_d + expm1(2.0 * sqrt_eta * alpha * alpha)
    cdef double e_bit
    if denom <= 0.0:
        e_bit = 0.5
    else:
        e_bit = p_d / denom
        if e_bit > 0.5:
            e_bit = 0.5

    cdef double rate = p_key * p_key * gamma_obs * (1.0 - _h2(e_ph) - f_e * _h2(e_bit))
    if rate > 0.0 and rate == rate:
        return rate
    return 0.0
