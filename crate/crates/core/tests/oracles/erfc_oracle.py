"""Freeze reference values of erfc(z) and R(z) = exp(z^2) erfc(z).

The values come from the Maclaurin series of erf summed in 60-digit
arithmetic until the term drops below 1e-40, independently of the
library's region split. Run from this directory:

    python3 erfc_oracle.py > ../data/erfc_oracle.json
"""
import json

import mpmath as mp

mp.mp.dps = 60


def erf_series(z, floor):
    z = mp.mpc(z)
    total = mp.mpc(0)
    power = z
    k = 0
    while True:
        term = power / (2 * k + 1)
        total += term
        if abs(term) < floor:
            break
        k += 1
        power *= -z * z / k
    return 2 / mp.sqrt(mp.pi) * total


def erfc_oracle(z):
    # For large |z| the series needs enough working digits to beat cancellation.
    extra = int(0.9 * abs(z) ** 2) + 30
    with mp.workdps(60 + extra):
        # erfc(z) is at least of size |exp(-z^2)| / (1 + |z|); resolve it to 40 digits.
        zz = mp.mpc(z)
        floor = mp.mpf("1e-40") * min(1, abs(mp.exp(-zz * zz))) / (1 + abs(zz))
        e = 1 - erf_series(z, floor)
        r = mp.exp(mp.mpc(z) ** 2) * e
        # erfc is only recorded where it is a normal double.
        e = complex(e) if mp.mpf("1e-300") < abs(e) < mp.mpf("1e300") else None
        return e, complex(r)


points = []
res = [0.0, 0.05, 0.3, 0.7, 1.0, 1.4, 1.5, 1.6, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 6.9, 7.1, 9.0, 12.0, 16.0, 20.0, 25.0, 29.0]
ims = [0.0, 0.01, 0.5, 1.0, 2.0, 3.0, 4.5, 6.0, 7.5, 10.0, 14.0, 20.0, 26.0]
for x in res:
    for y in ims:
        for s in (1, -1):
            if y == 0.0 and s == -1:
                continue
            z = complex(x, s * y)
            if abs(z) > 30.0:
                continue
            e, r = erfc_oracle(z)
            points.append({"re": x, "im": s * y, "erfc": None if e is None else [e.real, e.imag], "ratio": [r.real, r.imag]})

print(json.dumps({"points": points}, indent=0))
