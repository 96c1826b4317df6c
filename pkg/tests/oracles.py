"""Independent reference values computed with mpmath.

s_b comes from its integral representation (valid for |Im z| < Q/2) and the
scheme integrals from mpmath quadrature on a horizontal line, so nothing here
shares code with the package's evaluators.
"""
import mpmath as mp

mp.mp.dps = 30


def mp_log_sb(z, b):
    z = mp.mpc(z)
    b = mp.mpf(b)
    # move into |Im z| <= Q/4 with s_b(z) = 2 cosh(pi b (z - ib/2)) s_b(z - ib)
    step = min(b, 1 / b)
    Q = b + 1 / b
    if z.imag > Q / 4:
        return mp.log(2 * mp.cosh(mp.pi * step * (z - 0.5j * step))) + mp_log_sb(z - 1j * step, b)
    if z.imag < -Q / 4:
        return mp_log_sb(z + 1j * step, b) - mp.log(2 * mp.cosh(mp.pi * step * (z + 0.5j * step)))
    return _strip_log_sb(z, b)


def _strip_log_sb(z, b):

    def f(y):
        return (mp.sin(2 * y * z) / (2 * mp.sinh(y / b) * mp.sinh(b * y)) - z / y) / y

    # beyond y = 40 only -z/y^2 survives (the sine part is below e^{-40(Q-2|Im z|)})
    body = mp.quad(f, [0, 0.25, 1, 3, 8, 16, 40], method="gauss-legendre")
    return 1j * (body - z / 40)


def mp_sb(z, b):
    return mp.exp(mp_log_sb(z, b))


def mp_line_integral(log_integrand, height, lo, hi, step=1.0):
    """Integral of exp(log_integrand(x)) over Re x in [lo, hi] at Im x = height."""
    pts = [mp.mpc(lo + k * step, height) for k in range(int(round((hi - lo) / step)) + 1)]
    return mp.quad(lambda x: mp.exp(log_integrand(x)), pts, method="gauss-legendre")


def mp_H(b, theta0, thetat, thetastar, sigmas, nu, height=None, span=(-14, 14)):
    b = mp.mpf(b)
    Q = b + 1 / b
    h = 1j * Q / 2
    height = -Q / 4 if height is None else height

    def logI(x):
        num = mp_log_sb(x + thetastar / 2 + thetat - nu, b) + mp_log_sb(x + theta0 + thetat + sigmas, b) + mp_log_sb(
            x + theta0 + thetat - sigmas, b
        )
        den = mp_log_sb(x + h, b) + mp_log_sb(x + 2 * thetat + h, b) + mp_log_sb(x + theta0 + thetastar + thetat + h, b)
        return 1j * mp.pi * x * (thetastar / 2 - theta0 + nu - h) + num - den

    logP = (
        mp_log_sb(2 * thetat + h, b)
        + mp_log_sb(theta0 + thetastar + thetat + h, b)
        + mp_log_sb(nu - thetastar / 2 - thetat, b)
        + mp_log_sb(sigmas - theta0 - thetat, b)
        + mp_log_sb(-sigmas - theta0 - thetat, b)
    )
    return mp.exp(logP) * mp_line_integral(logI, height, *span)


def mp_M(b, zeta, omega, height=None, span=(-14, 14)):
    b = mp.mpf(b)
    Q = b + 1 / b
    h = 1j * Q / 2
    height = -Q / 4 if height is None else height

    def logI(x):
        return 1j * mp.pi * x * (zeta - h + 2 * omega) + mp_log_sb(x - zeta, b) - mp_log_sb(x + h, b)

    return mp_sb(zeta, b) * mp_line_integral(logI, height, *span)


if __name__ == "__main__":
    import sys

    print("sb", mp_sb(mp.mpc(0.25, 0.1), 0.8))
    sys.stdout.flush()
    print("M", mp_M(0.84, 0.41, mp.mpc(0.17, 0.35)))
    sys.stdout.flush()
    print("H", mp_H(0.84, 0.2, 0.3, 0.4, 0.41, 0.17))
