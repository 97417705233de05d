"""Write N seeded synthetic RGB images as binary PPM (for smoke-testing the corpus run)."""

import argparse
from pathlib import Path

from psishift.imaging import save_pnm, synthetic_image

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("out")
p.add_argument("-n", type=int, default=20)
p.add_argument("--size", type=int, default=64)
p.add_argument("--seed", type=int, default=0)
args = p.parse_args()

out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)
for i in range(args.n):
    save_pnm(synthetic_image(args.size, args.size, 3, seed=args.seed + i), out / f"synth_{i:04d}.ppm")
print(f"wrote {args.n} images to {out}")
