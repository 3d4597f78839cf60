"""
How the solution depends on alpha
=================================

For ``y^(alpha) = -y`` the solution is ``A exp(-x^alpha / alpha)``.  The
sweep compares that closed form with the numerical oracle for several
orders and writes the CSV that ``confode sweep`` would write.
"""

import io

import numpy as np

from confode import cli
from confode import problemfile as pfile
from confode.verify import get_fixture

path = get_fixture("ex2").file.path
pf = pfile.load(path)
alphas = np.linspace(0.25, 1.0, 4).tolist()
rows = np.array(list(cli.sweep_rows(pf, alphas)))

# %%
# Largest relative gap per order, and the value at the right end of the
# window: the smaller alpha, the slower the decay there.
for alpha in alphas:
    block = rows[rows[:, 0] == alpha]
    print(f"alpha={alpha:.2f}  rows={len(block)}  max gap={block[:, 4].max():.1e}  y(3)={block[-1, 2]:.6f}")

# %%
# At alpha = 1 the block is the classical e^(1-x).
classical = rows[rows[:, 0] == 1.0]
print(np.max(np.abs(classical[:, 2] - np.exp(1 - classical[:, 1]))))

# %%
# The same data through the command line.
out = io.StringIO()
cli.main(["sweep", path, "--alpha-from", "0.25", "--alpha-to", "1", "--steps", "4"], out=out)
print(out.getvalue().splitlines()[0])
