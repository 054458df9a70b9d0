"""SoV followed by reconstruction of the oper from (u, nu), on random points."""
import argparse

from sovlab.conn2oper import oper_from_forms
from sovlab.instances import default_chart
from sovlab.lambda_conn import build_forms, random_point
from sovlab.oper_from_data import oper_from_uv
from sovlab.scenario import rng_from_seed
from sovlab.schwarzian import oper_diff_norm
from sovlab.sov import sov_lambda


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=10)
    ap.add_argument("--lam", type=complex, default=1.0)
    ap.add_argument("--seed", type=int, default=11)
    a = ap.parse_args()
    mc = default_chart(a.lam)
    rng = rng_from_seed(a.seed)
    worst = 0.0
    for i in range(a.samples):
        pt = random_point(mc, rng)
        out = sov_lambda(mc, pt)
        if not out.valid():
            print(f"{i:3d}  skipped (diagonal or Q-special)")
            continue
        op = oper_from_uv(mc.curve, [(r.position, r.nu) for r in out.records], mc.lam, tol=mc.tol)
        d = oper_diff_norm(oper_from_forms(mc, build_forms(mc, pt)), op)
        worst = max(worst, d)
        print(f"{i:3d}  diff {d:.2e}  certificate {op.meta['certificate']:.2e}")
    print(f"worst {worst:.2e}")


if __name__ == "__main__":
    main()
