# Where does a signal come from? A 7-element ring sees each transmitter as a
# distinct pattern of arrival-time differences.
import math

import numpy as np

from dsksim.geometry import C_LIGHT, Point2D, circular_array, fingerprints, mirror_image

tx = [Point2D.polar(100.0, 2 * math.pi * m / 4) for m in range(4)]
ring = circular_array(Point2D(12.0, -30.0), 7, 0.1)

fps = fingerprints(tx, ring)
for fp in fps:
    ps = np.array(fp.relative_delays) * 1e12
    print(f"tx {fp.transmitter_index}: TDoA vs element 0 (ps)", np.round(ps, 2))

# closest pair of fingerprints, in units of the 100 MHz symbol period
d = np.array([fp.relative_delays for fp in fps])
gap = min(np.max(np.abs(d[a] - d[b])) for a in range(4) for b in range(a + 1, 4))
print(f"closest fingerprints differ by {gap * 1e12:.1f} ps = {gap * 100e6:.4f} periods")

# a reflector along y = 50 turns the NLoS path into a straight line from the image
img = mirror_image(tx[1], (Point2D(0.0, 50.0), (1.0, 0.0)))
print("image of tx 1:", img, "path", round(img.distance(Point2D(12.0, -30.0)), 3), "m")
print("speed of light used:", C_LIGHT)
