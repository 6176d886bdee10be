# How long does a reference stay useful? Channel coefficients decorrelate after a
# fraction of a wavelength of travel, arrival-time differences only after the
# direction to the transmitter has changed.
from dsksim.coherence import (CoherenceQuery, cct_closed_form, coherence_time, dct_closed_form,
                              j_cct, j_dct_exact, j_dct_lower_bound)

q = CoherenceQuery.from_carrier(30e9, v=100 / 3.6, d=50.0, B=1e9, l1=0.3, l2=0.3)
for t in (1e-5, 1e-4, 1e-2, 0.1, 0.5, 1.0):
    qt = q.at(t)
    print(f"t_c = {t:7.0e} s   J_CCT = {j_cct(qt):.4f}   J_DCT = {j_dct_exact(qt):.4f}"
          f"   bound = {j_dct_lower_bound(qt):.4f}")

t_cct = coherence_time(lambda t: j_cct(q.at(t)), t_max=1.0)
t_dct = coherence_time(lambda t: j_dct_lower_bound(q.at(t)), t_max=10.0)
print(f"channel coherence {t_cct:.3e} s (closed form {cct_closed_form(q.v, q.wavelength):.3e})")
print(f"direction coherence >= {t_dct:.3e} s (closed form {dct_closed_form(q.d, q.v, 0.3, q.B):.3e})")
print(f"gain ~ {t_dct / t_cct:.0f}x")
