"""
Why deramping focuses an LFM component
======================================

After multiplying by the conjugate chirp ramp a 2-D LFM term turns into a
pure tone, so its spectrum collapses to one bin. The other components stay
spread out, which is what lets a notch remove one at a time.
"""

# %%
import numpy as np

from rfi_scrub import LfmComponent, LfmMixture
from rfi_scrub.simulator import generate_lfm_mixture
from rfi_scrub.suppressor import deramp, spectrum_2d

N = 128
a = LfmComponent(amplitude=1.0, azimuth_fm_rate=2 * 6 / N ** 2, range_fm_rate=2 * 20 / N ** 2,
                 carrier_freq=10 / N, azimuth_duration=N, range_duration=N,
                 azimuth_center=N / 2, range_center=N / 2)
b = LfmComponent(amplitude=0.8, azimuth_fm_rate=a.azimuth_fm_rate, range_fm_rate=-2 * 15 / N ** 2,
                 carrier_freq=40 / N, azimuth_duration=N, range_duration=N,
                 azimuth_center=N / 2, range_center=N / 2)
X = generate_lfm_mixture(LfmMixture((a, b)), N, N)


def concentration(F, k=4):
    # share of spectral energy in the k strongest bins
    p = np.sort(np.abs(F).ravel() ** 2)[::-1]
    return p[:k].sum() / p.sum()


# %%
print("raw spectrum        ", round(concentration(spectrum_2d(X, 1)), 3))
print("deramped for a      ", round(concentration(spectrum_2d(deramp(X, a.azimuth_fm_rate, a.range_fm_rate), 1)), 3))
print("deramped for b      ", round(concentration(spectrum_2d(deramp(X, b.azimuth_fm_rate, b.range_fm_rate), 1)), 3))

# %%
# In the frame of a, component b is a range chirp of rate K_b - K_a spread
# along one spectral row.
F = np.abs(spectrum_2d(deramp(X, a.azimuth_fm_rate, a.range_fm_rate), 1))
row = np.argmax(F.max(axis=1))
print("bins above 10% of the peak in that row:", int(np.sum(F[row] > 0.1 * F.max())))
