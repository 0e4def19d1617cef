"""Regenerate the reference tables in this directory with mpmath.

    python3 generate.py

bessel_j0.txt:        x  J0(x)
kernel_reference.txt: alpha d re_z im_z r re_K im_K abs_err

K is (2pi)^{-d/2} int_0^inf exp(-z s^alpha) s^{d-1} Lambda(s r) ds, with
Lambda = sqrt(2/pi) cos, J0, sqrt(2/pi) sin(x)/x for d = 1, 2, 3.
abs_err is |K(dps=20) - K(dps=28)|. alpha = 0.5 is kept only for |theta| < 1,
and with r > 0 only for d in {1, 3}, r <= 0.5. Cases that take longer than
LIMIT seconds are dropped. Rows already present are kept, so reruns resume.
"""

import os
import signal

import mpmath as mp

LIMIT = 240


class Slow(Exception):
    pass


def _alarm(*_):
    raise Slow()


def profile(d, x):
    if d == 1:
        return mp.sqrt(2 / mp.pi) * mp.cos(x)
    if d == 2:
        return mp.besselj(0, x)
    if x == 0:
        return mp.sqrt(2 / mp.pi)
    return mp.sqrt(2 / mp.pi) * mp.sin(x) / x


def kernel(alpha, d, z, r, dps):
    with mp.workdps(dps):
        alpha = mp.mpf(alpha)
        z = mp.mpc(z)
        r = mp.mpf(r)
        k = d / alpha
        # tail beyond R is below 1e-(dps+5) of the L1 mass
        u = mp.findroot(lambda u: mp.log(mp.gammainc(k, u, mp.inf, regularized=True)) + (dps + 5) * mp.log(10), 60)
        big_r = (u / mp.re(z)) ** (1 / alpha)
        step = min(mp.pi / r if r > 0 else big_r, abs(z) ** (-1 / alpha))
        pts = [mp.mpf(0)]
        s0 = step / 2
        for j in range(30, 0, -1):
            pts.append(s0 / mp.mpf(2) ** j)
        s = s0
        while s < big_r:
            pts.append(s)
            w = step
            if alpha != 1 and mp.im(z) != 0:
                w = min(w, mp.pi / (alpha * abs(z) * s ** (alpha - 1)))
            s += w
        pts.append(big_r)
        f = lambda s: mp.exp(-z * s ** alpha) * s ** (d - 1) * profile(d, s * r)
        val = mp.quad(f, pts)
        return val * (2 * mp.pi) ** (-mp.mpf(d) / 2)


def main():
    with open("bessel_j0.txt", "w") as fh:
        fh.write("# x J0(x)\n")
        xs = [0.0, 0.1, 0.5, 1.0, 2.0, 2.404825557695773, 3.5, 5.0, 7.0, 7.99, 8.0, 8.01, 9.5,
              12.0, 15.0, 18.5, 22.0, 24.99, 25.0, 25.01, 30.0, 47.3, 80.0, 150.0, 400.0, 1234.5]
        for x in xs:
            with mp.workdps(40):
                fh.write("%.17g %.17e\n" % (x, float(mp.besselj(0, mp.mpf(x)))))

    zs = [(1.0, 0.0), (0.7 * mp.cos(mp.pi / 4), 0.7 * mp.sin(mp.pi / 4)), (2 * mp.cos(mp.pi / 3), -2 * mp.sin(mp.pi / 3))]
    done = set()
    if os.path.exists("kernel_reference.txt"):
        for line in open("kernel_reference.txt"):
            if not line.startswith("#"):
                done.add(tuple(line.split()[:5]))
    else:
        open("kernel_reference.txt", "w").write("# alpha d re_z im_z r re_K im_K abs_err\n")
    signal.signal(signal.SIGALRM, _alarm)
    with open("kernel_reference.txt", "a") as fh:
        for alpha in [0.5, 1.0, 1.5, 2.0]:
            for d in [1, 2, 3]:
                for (zr, zi) in zs:
                    for r in [0.0, 0.5, 2.0]:
                        if alpha == 0.5 and (abs(zi) > 1 or (r > 0 and (r > 0.5 or d == 2))):
                            continue
                        z = complex(float(zr), float(zi))
                        key = ("%.17g" % alpha, "%d" % d, "%.17g" % z.real, "%.17g" % z.imag, "%.17g" % r)
                        if key in done:
                            continue
                        signal.alarm(LIMIT)
                        try:
                            a = kernel(alpha, d, z, r, 20)
                            k = complex(kernel(alpha, d, z, r, 28))
                        except Slow:
                            print("dropped", key, flush=True)
                            continue
                        finally:
                            signal.alarm(0)
                        e = float(abs(a - k))
                        fh.write("%s %s %s %s %s %.17e %.17e %.3e\n" % (key + (k.real, k.imag, e)))
                        fh.flush()

if __name__ == "__main__":
    main()
