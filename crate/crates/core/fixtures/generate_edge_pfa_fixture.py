"""Reference values for the edge-PFA disk integral.

Prints int_{-r}^{r} (H + r - sqrt(r^2 - x^2))^-2 dx at 40 digits for the
separations used by the approx tests (r = 1).
"""
import mpmath as mp

mp.mp.dps = 40
for h in (mp.mpf(1), mp.mpf("0.1")):
    value = mp.quad(lambda x: (h + 1 - mp.sqrt(1 - x * x)) ** -2, [-1, -0.5, 0, 0.5, 1])
    print(mp.nstr(h, 3), mp.nstr(value, 25))
