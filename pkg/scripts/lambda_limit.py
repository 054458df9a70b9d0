"""Behaviour of the SoV records as lambda -> 0.

Fixes (x, z, zcheck) and k on H = 0, shifts k along conj(x) onto H = lam d,
and compares sov_lambda with the Higgs data: the deviation should be O(lam).
"""
import numpy as np

from sovlab.instances import default_chart
from sovlab.lambda_conn import moment, random_point
from sovlab.scenario import rng_from_seed
from sovlab.sov import multiset_match, sov_higgs, sov_lambda


def main(seed=5):
    mc0 = default_chart(0.0)
    pt0 = random_point(mc0, rng_from_seed(seed))
    ref = sov_higgs(mc0, pt0)
    xx = np.vdot(pt0.x, pt0.x).real
    prev = None
    print("lambda     deviation  ratio")
    for lam in 10.0 ** -np.arange(1, 7):
        mc = default_chart(lam)
        pt = pt0.replace(k=pt0.k + (mc.lam_d - moment(pt0)) / xx * np.conj(pt0.x))
        _, d = multiset_match(sov_lambda(mc, pt).records, ref.records)
        print(f"{lam:.0e}  {d:.3e}  " + (f"{prev / d:.2f}" if prev else "-"))
        prev = d


if __name__ == "__main__":
    main()
