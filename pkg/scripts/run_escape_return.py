"""Build the escape-and-return system and certify its milestone behavior.

The orbit of i marches out to the real point n, then walks back to a
bounded region, stage after stage: unbounded excursions with infinitely
many returns, so the system is neither relatively compact nor compactly
divergent at any finite horizon we can reach.
"""

import argparse

from ifslab.gallery import build_escape_return, certify_not_compactly_divergent
from ifslab.geometry import HyperbolicBall


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=5, help="number of escape stages")
    ap.add_argument("--radius", type=float, default=1.0, help="certificate ball radius")
    args = ap.parse_args()

    build = build_escape_return(args.nmax)
    print(f"stages achieved: {build.achieved_n}  maps: {len(build.maps)}")
    print(f"milestones: {build.milestones}")
    print(f"{'n':>3} {'k':>6} {'|out - n|':>12} {'return residual':>16} {'shift rate':>12}")
    for c in build.certs:
        print(f"{c.n:>3} {c.k:>6} {c.target_gap:>12.3e} {c.return_residual:>16.3e} {c.shift_rate:>12.3e}")

    cert = certify_not_compactly_divergent(build, HyperbolicBall(0.0, args.radius))
    print(f"\nball radius {args.radius}: {len(cert.returns)} returns, {len(cert.exits)} exits")
    for m, d in cert.returns:
        print(f"  return at milestone {m}: omega = {d:.4f}")


if __name__ == "__main__":
    main()
