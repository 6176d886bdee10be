# The sinc pulse on a finite grid: how much energy does the window cut off,
# and how well does a fractional shift line two copies up again?
import numpy as np

from dsksim.waveform import (GridSpec, SincPulse, cross_correlate, fractional_shift, kernel,
                             synthesize, truncation_loss)

pulse = SincPulse(100e6)
T = pulse.period
print("E_s =", pulse.energy, " kernel(0) =", kernel(pulse, 0.0), " kernel(T) =", kernel(pulse, T))

for W in (16, 32, 64, 128, 256):
    print(f"W = {W:4d}  lost energy fraction {truncation_loss(W):.3e}  ~ 1/(pi^2 W) = {1 / (np.pi**2 * W):.3e}")

spec = GridSpec(pulse, 16, 64)
a = synthesize(pulse, 1.0, 0.0, 0.0, spec=spec)
# same carrier phase on both copies so only the envelope moves
b = synthesize(pulse, 1.0, 0.37 * T, 0.0, spec=spec)
back = fractional_shift(b, -0.37 * T)
# the residual lives at the window edges, where the shifted tails were cut off
err = np.abs(back - a.samples)
mid = slice(len(err) // 4, 3 * len(err) // 4)
print(f"residual after undoing the delay: max {err.max():.2e}, central half {err[mid].max():.2e}")
print("grid energy / E_s:", a.energy() / pulse.energy)
print("correlation at the true lag / E_s:", abs(cross_correlate(b, a, -0.37 * T)) / pulse.energy)
