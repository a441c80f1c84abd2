"""Walk through the weak Harnack pipeline on the 64-point cycle.

Measures the structural conditions, certifies the inequality at the default
inner-ball fraction and at a coarser one, then checks the four equivalent
forms with chained constants.

    python3 demos/certify_torus.py
"""

from weakharnack.cli import make_config, run_conditions
from weakharnack.harnack import (certify_weh, check_weh_variant, constants_translate,
                                 default_delta, draw_samples)
from weakharnack.mmspace import scaling_envelope, vd_constant
from weakharnack.spaces import make_torus

space, form = make_torus(64)

rep = run_conditions(make_config({"space": {"generator": {"kind": "torus", "n": 64}}}),
                     space, form)
print("conditions")
for name, c in rep["checks"].items():
    print(f"  {name:5s} {c['verdict']:5s} {c.get('constant')}")

samples = draw_samples(form, 20, seed=0)
for delta in (default_delta(1.0), 0.25, 0.5):
    cert = certify_weh(form, p=0.5, delta=delta, samples=samples)
    print(f"delta = {delta:.5f}: worst ratio {cert.worst_ratio:.4f} over "
          f"{cert.classes_evaluated} ball classes")

# at delta = 1/160 every inner ball is a single point, so the equivalent
# forms are checked at delta = 1/2 where they have something to say
cert = certify_weh(form, p=0.5, delta=0.5, samples=samples)
env, vd = scaling_envelope(space), vd_constant(space)
aux = {"C2": env["C2"], "beta2": env["beta2"], "C_mu": vd["C_mu"]}
for variant in ("wEH1", "wEH2", "wEH3", "wEH4"):
    consts = constants_translate(cert.params, variant, aux)
    res = check_weh_variant(cert, variant, consts, trials=1000, seed=0)
    print(f"{variant}: {res['verdict']}, {res['non_vacuous']} non-vacuous, "
          f"worst slack {res['worst_slack']:.3g}")
