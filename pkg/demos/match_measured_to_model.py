"""
Pairing measured modes with model modes by shape correlation
============================================================

The measured side comes from output-only identification of a simulated
ambient record; the model side comes straight from the eigensolution of
the same mass and stiffness matrices, the way a calibrated FE model
would supply them. The two sets are paired by MAC and the result is
printed as the usual OMA-vs-FEA comparison table.
"""

import numpy as np
from scipy.linalg import eigh

import bridgeroom as br

# ---------------------------------------------------------------------------
# (1) Measured side: identify the chain from its noisy response.
# ---------------------------------------------------------------------------
masses = [1.0, 1.0, 1.0]
springs = [600.0, 400.0, 250.0]
zetas = [0.05, 0.03, 0.02]
m, k = br.chain_matrices(masses, springs)
c = br.modal_damping_matrix(m, k, zetas)

rng = np.random.default_rng(25)
dt, duration = 0.01, 112.0
excitation = rng.standard_normal((3, round(duration / dt) + 1))
record = br.simulate_mdof(m, k, c, excitation, dt, duration, substeps=5)
_, measured = br.ssi_cov(record, br.SsiConfig(block_rows=30, model_order=6))

# ---------------------------------------------------------------------------
# (2) Model side: undamped eigensolution of the same structure, with
#     the damping ratios the model was assigned. A real workflow reads
#     this set from a file written by the FE post-processor.
# ---------------------------------------------------------------------------
vals, vecs = eigh(k, m)
model = br.ModalSet(source="fea", modes=[
    br.Mode(frequency=float(np.sqrt(w) / (2.0 * np.pi)), damping=z,
            shape=br.normalize_shape(v))
    for w, z, v in zip(vals, zetas, vecs.T)
])

# both sets serialize to JSON for the command-line verb and the viewer
print("measured set: %d modes, model set: %d modes"
      % (len(measured.modes), len(model.modes)))

# ---------------------------------------------------------------------------
# (3) Pair them by MAC. With a mac_min floor, badly correlated pairs
#     are reported as unmatched instead of being forced together.
# ---------------------------------------------------------------------------
report = br.match_modes(measured, model, mac_min=0.90)

print()
print("  %-12s %-12s %-9s %-9s %-7s %s"
      % ("f_oma [Hz]", "f_fea [Hz]", "z_oma", "z_fea", "MAC", "df/f"))
for mo, mf, pair_mac, rel in report.pairs:
    print("  %-12.4f %-12.4f %-9.4f %-9.4f %-7.4f %+.3e"
          % (mo.frequency, mf.frequency, mo.damping, mf.damping,
             pair_mac, rel))

print()
print("unmatched measured modes:", [m_.frequency for m_ in report.unmatched_oma])
print("unmatched model modes:   ", [m_.frequency for m_ in report.unmatched_fea])
