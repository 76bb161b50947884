# AWGN simulation with a normalized min-sum decoder.
#
# Noise per frame comes from a counter-based stream, so the same seed gives
# the same numbers whatever the thread count.

import numpy as np
from scipy.stats import norm

from mdsc import DecoderConfig, fixtures, simulate

# %% uncoded BPSK against the Gaussian tail
(p,) = simulate(None, [4.0], max_frames=100, min_frame_errors=10 ** 9, seed=1)
print(p.ber, norm.sf(np.sqrt(2 * 10 ** 0.4)))

# %% a short sweep on the first SC code
sc1 = fixtures.sc_code("SC-Code-1")
points = simulate(sc1.h_sc, [2.0, 2.5, 3.0], DecoderConfig(max_iterations=50),
                  max_frames=300, min_frame_errors=20, seed=7, workers=4)
for p in points:
    lo, hi = p.fer_interval()
    print(f"{p.snr_db} dB  BER {p.ber:.2e}  FER {p.fer:.2e}  [{lo:.2e}, {hi:.2e}]")

# %% coupled vs uncoupled at a moderate SNR
for name, code in (("SC-Code-3", fixtures.sc_code("SC-Code-3").h_sc),
                   ("MD-SC-Code-1", fixtures.md_code("MD-SC-Code-1").h_md)):
    (p,) = simulate(code, [3.0], max_frames=300, min_frame_errors=10 ** 9, seed=1)
    print(name, p.frame_errors, "/", p.frames_run, "frames in error")
